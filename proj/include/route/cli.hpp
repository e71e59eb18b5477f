#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "route/llm.hpp"
#include "route/mcp.hpp"
#include "route/synth.hpp"

namespace route {

enum class BackendKind { None, Remote, MockScript, EchoGold };

struct BackendConfig {
    BackendKind kind = BackendKind::None;
    RemoteConfig remote;
    std::string script;  // mock-script path
    std::size_t parallelism = 4;
};

/// Effective settings of one CLI run: config file first, then flags.
struct RunConfig {
    std::string corpus;
    std::string out_dir = "out";
    BackendConfig backend;
    GenerationParams params;
    McpOptions mcp;
    std::uint64_t seed = 0;
    MsftCaps caps;
    std::size_t negatives_per_pair = 1;
    bool mine_negatives = true;
    bool filter = true;
    std::map<ErrorKind, double> kind_weights;
    std::size_t example_rows = kDefaultExampleRows;
    std::size_t workers = 4;
    std::int64_t timeout_ms = kDefaultTimeoutMs;

    /// Canonical JSON (no secrets, no output location); its SHA-256 is the provenance hash.
    nlohmann::ordered_json to_json() const;
    std::string sha256() const;
};

/// Applies a JSON config document on top of `config`. Throws std::invalid_argument.
void apply_config_json(RunConfig& config, const nlohmann::json& doc);

/// Builds the configured backend; throws std::invalid_argument when none is set.
std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config, const Corpus* corpus);

/// Set by the SIGINT handler; in-flight pairs finish, no new ones start.
std::atomic<bool>& stop_requested();

/// Entry point of the `route` tool. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace route
