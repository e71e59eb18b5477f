#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include "route/catalog.hpp"
#include "route/prompts.hpp"

namespace route {

struct GenerationParams {
    double temperature = 0.01;
    int max_tokens = 1024;
    std::vector<std::string> stop;

    /// Throws std::invalid_argument on a negative temperature or non-positive max_tokens.
    void validate() const;
};

class BackendError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Chat-completion model. Implementations accept concurrent calls.
class LlmBackend {
  public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const PromptText& prompt, const GenerationParams& params) = 0;
    /// Suggested number of concurrent callers.
    virtual std::size_t parallelism() const { return 1; }
};

struct RemoteConfig {
    std::string endpoint;  // e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    std::size_t parallelism = 8;
    int max_attempts = 3;
    int initial_backoff_ms = 500;
    int max_backoff_ms = 8000;
    int request_timeout_s = 300;
};

/// OpenAI-compatible POST {endpoint}/chat/completions. Transport failures,
/// 429 and 5xx responses are retried with capped exponential backoff.
class RemoteBackend : public LlmBackend {
  public:
    explicit RemoteBackend(RemoteConfig config);

    std::string complete(const PromptText& prompt, const GenerationParams& params) override;
    std::size_t parallelism() const override { return config_.parallelism; }

    /// Request body; a pure function of (model, prompt, params).
    static std::string request_body(const std::string& model, const PromptText& prompt,
                                    const GenerationParams& params);

  private:
    RemoteConfig config_;
    std::string api_key_;
    std::string host_;  // scheme://host[:port]
    std::string path_;  // base path + /chat/completions
    std::counting_semaphore<4096> slots_;
};

struct ScriptEntry {
    std::optional<TaskTag> task;
    std::optional<std::string> pair_id;  // absent: any pair
    std::optional<std::string> prompt_sha256;
    std::optional<std::string> regex;
    std::string response;
    bool consume_once = false;
};

/// Reads line-delimited JSON script entries. Blank lines are ignored.
std::vector<ScriptEntry> load_script(const std::filesystem::path& file);
std::vector<ScriptEntry> parse_script(std::string_view jsonl);
std::string serialize_script(const std::vector<ScriptEntry>& entries);

/// Script under which every task answers from the gold SQL: TS and CW return
/// it fenced, SL returns its linking, NC and FILTER affirm.
std::vector<ScriptEntry> echo_gold_script(const Corpus& corpus);

struct RecordedCall {
    TaskTag task;
    std::string pair_id;
    std::string prompt_sha256;
};

/// Scripted backend: the first matching, not yet consumed entry answers.
class MockBackend : public LlmBackend {
  public:
    explicit MockBackend(std::vector<ScriptEntry> entries, std::size_t parallelism = 4);

    std::string complete(const PromptText& prompt, const GenerationParams& params) override;
    std::size_t parallelism() const override { return parallelism_; }

    std::vector<RecordedCall> calls() const;
    std::size_t call_count() const;

  private:
    struct Compiled {
        ScriptEntry entry;
        std::optional<std::regex> pattern;
        bool consumed = false;
    };
    mutable std::mutex mutex_;
    std::vector<Compiled> entries_;
    std::vector<RecordedCall> calls_;
    std::size_t parallelism_;
};

}  // namespace route
