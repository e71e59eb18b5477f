#pragma once

#include <filesystem>
#include <string>

#include "route/catalog.hpp"
#include "route/llm.hpp"

namespace route::testing {

inline std::filesystem::path fixture_dir() { return ROUTE_FIXTURE_DIR; }
inline std::filesystem::path mini_corpus_dir() { return fixture_dir() / "mini_corpus"; }
inline std::filesystem::path script_path(const std::string& name) { return fixture_dir() / "scripts" / name; }

/// Loaded once per process.
inline const Corpus& mini_corpus() {
    static const Corpus corpus = load_corpus(mini_corpus_dir());
    return corpus;
}

inline const DatabaseCatalog& catalog_of(const std::string& db_id) { return mini_corpus().catalog(db_id); }

/// Fresh directory under the system temp dir, removed first if present.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("route_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline ScriptEntry entry(TaskTag task, std::string response, std::optional<std::string> pair_id = std::nullopt) {
    ScriptEntry e;
    e.task = task;
    e.pair_id = std::move(pair_id);
    e.response = std::move(response);
    return e;
}

inline std::string fenced(const std::string& sql) { return "```sql\n" + sql + "\n```"; }

}  // namespace route::testing
