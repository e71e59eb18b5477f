#include "route/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>

#include "route/eval.hpp"
#include "route/executor.hpp"
#include "route/util.hpp"

namespace route {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIncomplete = 3;

std::string_view backend_kind_name(BackendKind kind) {
    switch (kind) {
        case BackendKind::None:
            return "none";
        case BackendKind::Remote:
            return "remote";
        case BackendKind::MockScript:
            return "mock-script";
        case BackendKind::EchoGold:
            return "echo-gold";
    }
    return "none";
}

BackendKind parse_backend_kind(std::string_view text) {
    for (auto k : {BackendKind::None, BackendKind::Remote, BackendKind::MockScript, BackendKind::EchoGold}) {
        if (text == backend_kind_name(k)) return k;
    }
    throw std::invalid_argument("unknown backend kind: " + std::string(text));
}

}  // namespace

std::atomic<bool>& stop_requested() {
    static std::atomic<bool> flag{false};
    return flag;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["corpus"] = corpus;
    auto& b = j["backend"];
    b["kind"] = std::string(backend_kind_name(backend.kind));
    if (backend.kind == BackendKind::Remote) {
        b["endpoint"] = backend.remote.endpoint;
        b["model"] = backend.remote.model;
        b["api_key_env"] = backend.remote.api_key_env;
        b["max_attempts"] = backend.remote.max_attempts;
    }
    if (backend.kind == BackendKind::MockScript) b["script"] = backend.script;
    b["parallelism"] = backend.parallelism;
    j["generation"] = {{"temperature", params.temperature}, {"max_tokens", params.max_tokens}, {"stop", params.stop}};
    j["mcp"] = {{"enable_sl", mcp.enable_sl},
                {"enable_nc", mcp.enable_nc},
                {"enable_cw", mcp.enable_cw},
                {"strategy", std::string(route::to_string(mcp.strategy))},
                {"oracle_schema", mcp.oracle_schema},
                {"oracle_hint", mcp.oracle_hint},
                {"nc_rounds", mcp.nc_rounds},
                {"cw_rounds", mcp.cw_rounds}};
    auto cap = [](const std::optional<std::size_t>& c) {
        return c ? nlohmann::ordered_json(*c) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json weights = nlohmann::ordered_json::object();
    for (const auto& [k, w] : kind_weights) weights[std::string(route::to_string(k))] = w;
    j["synth"] = {{"seed", seed},
                  {"caps", {{"sl", cap(caps.sl)}, {"nc", cap(caps.nc)}, {"cw", cap(caps.cw)}}},
                  {"nc_positive_share", caps.nc_positive_share},
                  {"negatives_per_pair", negatives_per_pair},
                  {"mine_negatives", mine_negatives},
                  {"filter", filter},
                  {"kind_weights", weights}};
    j["example_rows"] = example_rows;
    j["workers"] = workers;
    j["timeout_ms"] = timeout_ms;
    return j;
}

std::string RunConfig::sha256() const { return sha256_hex(to_json().dump()); }

void apply_config_json(RunConfig& c, const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    try {
        if (doc.contains("corpus")) c.corpus = doc["corpus"].get<std::string>();
        if (doc.contains("out_dir")) c.out_dir = doc["out_dir"].get<std::string>();
        if (doc.contains("backend")) {
            const auto& b = doc["backend"];
            if (b.contains("kind")) c.backend.kind = parse_backend_kind(b["kind"].get<std::string>());
            if (b.contains("endpoint")) c.backend.remote.endpoint = b["endpoint"].get<std::string>();
            if (b.contains("model")) c.backend.remote.model = b["model"].get<std::string>();
            if (b.contains("api_key_env")) c.backend.remote.api_key_env = b["api_key_env"].get<std::string>();
            if (b.contains("max_attempts")) c.backend.remote.max_attempts = b["max_attempts"].get<int>();
            if (b.contains("script")) c.backend.script = b["script"].get<std::string>();
            if (b.contains("parallelism")) c.backend.parallelism = b["parallelism"].get<std::size_t>();
        }
        if (doc.contains("generation")) {
            const auto& g = doc["generation"];
            if (g.contains("temperature")) c.params.temperature = g["temperature"].get<double>();
            if (g.contains("max_tokens")) c.params.max_tokens = g["max_tokens"].get<int>();
            if (g.contains("stop")) c.params.stop = g["stop"].get<std::vector<std::string>>();
        }
        if (doc.contains("mcp")) {
            const auto& m = doc["mcp"];
            c.mcp.enable_sl = m.value("enable_sl", c.mcp.enable_sl);
            c.mcp.enable_nc = m.value("enable_nc", c.mcp.enable_nc);
            c.mcp.enable_cw = m.value("enable_cw", c.mcp.enable_cw);
            if (m.contains("strategy")) c.mcp.strategy = parse_refinement_strategy(m["strategy"].get<std::string>());
            c.mcp.oracle_schema = m.value("oracle_schema", c.mcp.oracle_schema);
            c.mcp.oracle_hint = m.value("oracle_hint", c.mcp.oracle_hint);
            c.mcp.nc_rounds = m.value("nc_rounds", c.mcp.nc_rounds);
            c.mcp.cw_rounds = m.value("cw_rounds", c.mcp.cw_rounds);
        }
        if (doc.contains("synth")) {
            const auto& s = doc["synth"];
            c.seed = s.value("seed", c.seed);
            if (s.contains("caps")) {
                const auto& caps = s["caps"];
                auto read = [&](const char* key, std::optional<std::size_t>& dst) {
                    if (caps.contains(key)) {
                        dst = caps[key].is_null() ? std::nullopt : std::optional(caps[key].get<std::size_t>());
                    }
                };
                read("sl", c.caps.sl);
                read("nc", c.caps.nc);
                read("cw", c.caps.cw);
            }
            c.caps.nc_positive_share = s.value("nc_positive_share", c.caps.nc_positive_share);
            c.negatives_per_pair = s.value("negatives_per_pair", c.negatives_per_pair);
            c.mine_negatives = s.value("mine_negatives", c.mine_negatives);
            c.filter = s.value("filter", c.filter);
            if (s.contains("kind_weights")) {
                c.kind_weights.clear();
                for (const auto& [k, w] : s["kind_weights"].items()) c.kind_weights[parse_error_kind(k)] = w.get<double>();
            }
        }
        c.example_rows = doc.value("example_rows", c.example_rows);
        c.workers = doc.value("workers", c.workers);
        c.timeout_ms = doc.value("timeout_ms", c.timeout_ms);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config, const Corpus* corpus) {
    switch (config.kind) {
        case BackendKind::Remote: {
            RemoteConfig rc = config.remote;
            rc.parallelism = config.parallelism;
            return std::make_unique<RemoteBackend>(rc);
        }
        case BackendKind::MockScript:
            return std::make_unique<MockBackend>(load_script(config.script), config.parallelism);
        case BackendKind::EchoGold:
            if (!corpus) throw std::invalid_argument("echo-gold backend needs a corpus");
            return std::make_unique<MockBackend>(echo_gold_script(*corpus), config.parallelism);
        case BackendKind::None:
            break;
    }
    throw std::invalid_argument("no backend configured (use --endpoint, --mock-script or --echo-gold)");
}

namespace {

nlohmann::ordered_json provenance(const RunConfig& config, std::string_view command) {
    return {{"command", std::string(command)}, {"config_sha256", config.sha256()}, {"seed", config.seed}};
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

/// JSONL output plus a `<file>.meta.json` sidecar carrying provenance.
void write_jsonl(const std::filesystem::path& path, std::string_view content, const RunConfig& config,
                 std::string_view command, std::size_t records) {
    write_file_atomic(path, content);
    auto meta = provenance(config, command);
    meta["records"] = records;
    meta["config"] = config.to_json();
    write_json(std::filesystem::path(path.string() + ".meta.json"), meta);
}

void on_sigint(int) { stop_requested().store(true); }

struct Flags {
    std::string config_file;
    std::optional<std::string> corpus, out_dir, endpoint, model, api_key_env, mock_script;
    bool echo_gold = false;
    std::optional<std::size_t> parallelism, workers, example_rows;
    std::optional<double> temperature;
    std::optional<int> max_tokens;
    std::optional<std::int64_t> timeout_ms;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

void add_common(CLI::App* sub, Flags& f, bool with_backend) {
    sub->add_option("-c,--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--corpus", f.corpus, "Corpus root (schema index, pairs file, database/)");
    sub->add_option("-o,--out", f.out_dir, "Output directory");
    sub->add_option("--workers", f.workers, "Worker threads");
    sub->add_option("--example-rows", f.example_rows, "Sample rows per table in prompts");
    sub->add_option("--timeout-ms", f.timeout_ms, "Per-query execution timeout");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_flag("-v,--verbose", f.verbose, "Debug logging");
    if (!with_backend) return;
    sub->add_option("--endpoint", f.endpoint, "OpenAI-compatible base URL (remote backend)");
    sub->add_option("--model", f.model, "Model id for the remote backend");
    sub->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key");
    sub->add_option("--mock-script", f.mock_script, "Line-delimited JSON mock script");
    sub->add_flag("--echo-gold", f.echo_gold, "Mock backend answering from the gold queries");
    sub->add_option("--parallelism", f.parallelism, "Concurrent backend requests");
    sub->add_option("--temperature", f.temperature, "Sampling temperature");
    sub->add_option("--max-tokens", f.max_tokens, "Completion token limit");
}

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config_file.empty()) apply_config_json(c, nlohmann::json::parse(read_file(f.config_file)));
    int backend_flags = (f.endpoint ? 1 : 0) + (f.mock_script ? 1 : 0) + (f.echo_gold ? 1 : 0);
    if (backend_flags > 1) throw std::invalid_argument("configure exactly one backend");
    if (f.endpoint) {
        c.backend.kind = BackendKind::Remote;
        c.backend.remote.endpoint = *f.endpoint;
    }
    if (f.mock_script) {
        c.backend.kind = BackendKind::MockScript;
        c.backend.script = *f.mock_script;
    }
    if (f.echo_gold) c.backend.kind = BackendKind::EchoGold;
    if (f.model) c.backend.remote.model = *f.model;
    if (f.api_key_env) c.backend.remote.api_key_env = *f.api_key_env;
    if (f.parallelism) c.backend.parallelism = *f.parallelism;
    if (f.corpus) c.corpus = *f.corpus;
    if (f.out_dir) c.out_dir = *f.out_dir;
    if (f.workers) c.workers = *f.workers;
    if (f.example_rows) c.example_rows = *f.example_rows;
    if (f.timeout_ms) c.timeout_ms = *f.timeout_ms;
    if (f.seed) c.seed = *f.seed;
    if (f.temperature) c.params.temperature = *f.temperature;
    if (f.max_tokens) c.params.max_tokens = *f.max_tokens;
    c.params.validate();
    c.mcp.params = c.params;
    c.mcp.timeout_ms = c.timeout_ms;
    c.mcp.example_rows = c.example_rows;
    if (c.corpus.empty()) throw std::invalid_argument("--corpus is required");
    return c;
}

// ---- synth ------------------------------------------------------------------------------

struct SynthFlags {
    std::optional<std::size_t> sl_cap, nc_cap, cw_cap, negatives_per_pair;
    std::optional<double> nc_positive_share;
    bool no_filter = false;
    bool no_mine = false;
};

int cmd_synth(const RunConfig& config, const SynthFlags& sf) {
    RunConfig c = config;
    if (sf.sl_cap) c.caps.sl = *sf.sl_cap;
    if (sf.nc_cap) c.caps.nc = *sf.nc_cap;
    if (sf.cw_cap) c.caps.cw = *sf.cw_cap;
    if (sf.nc_positive_share) c.caps.nc_positive_share = *sf.nc_positive_share;
    if (sf.negatives_per_pair) c.negatives_per_pair = *sf.negatives_per_pair;
    if (sf.no_filter) c.filter = false;
    if (sf.no_mine) c.mine_negatives = false;

    Corpus corpus = load_corpus(c.corpus);
    std::unique_ptr<LlmBackend> backend;
    if (c.filter || c.mine_negatives || c.backend.kind != BackendKind::None) backend = make_backend(c.backend, &corpus);

    std::vector<FilterRemoval> removed;
    Corpus kept = corpus;
    if (c.filter) {
        FilterResult fr = filter_noise(corpus, *backend, FilterOptions{c.example_rows, c.params, c.workers});
        kept = fr.kept;
        removed = fr.removed;
    }

    NegativeOptions no;
    no.per_pair = c.negatives_per_pair;
    no.seed = c.seed;
    no.kind_weights = c.kind_weights;
    no.example_rows = c.example_rows;
    no.params = c.params;
    no.timeout_ms = c.timeout_ms;
    no.workers = c.workers;
    NegativeReport negatives = make_negatives(kept, c.mine_negatives ? backend.get() : nullptr, no);

    SynthOptions so{c.example_rows, c.seed};
    std::vector<Warning> warnings;
    SftDataset ts = synth_ts(kept, so);
    SftDataset sl = synth_sl(kept, so, &warnings);
    SftDataset nc = synth_nc(kept, negatives.negatives, so);
    SftDataset cw = synth_cw(kept, so, &warnings);
    MsftResult msft = assemble_msft(ts, sl, nc, cw, c.caps, c.seed);

    const std::filesystem::path out(c.out_dir);
    write_jsonl(out / "msft.jsonl", to_jsonl(msft.records), c, "synth", msft.records.size());

    nlohmann::ordered_json manifest;
    manifest["input_pairs"] = corpus.pairs().size();
    manifest["kept"] = kept.pairs().size();
    auto& rm = manifest["removed"] = nlohmann::ordered_json::array();
    for (const auto& r : removed) rm.push_back(r.pair_id);
    manifest["TS"] = msft.counts.ts;
    manifest["SL"] = msft.counts.sl;
    manifest["NC"] = msft.counts.nc();
    manifest["NC_POS"] = msft.counts.nc_pos;
    manifest["NC_NEG"] = msft.counts.nc_neg;
    manifest["CW"] = msft.counts.cw;
    manifest["total"] = msft.counts.total();
    manifest["available"] = {{"TS", ts.size()}, {"SL", sl.size()}, {"NC", nc.size()}, {"CW", cw.size()}};
    manifest["negatives"] = {{"count", negatives.negatives.size()},
                             {"mined", negatives.mined},
                             {"injected", negatives.injected},
                             {"candidates", negatives.candidates},
                             {"dropped", negatives.dropped},
                             {"drop_rate", negatives.drop_rate()},
                             {"inapplicable_draws", negatives.inapplicable},
                             {"max_reattempts_used", negatives.max_reattempts_used},
                             {"short_pairs", negatives.short_pairs},
                             {"skipped_pairs", negatives.skipped}};
    auto& warn_json = manifest["warnings"] = nlohmann::ordered_json::array();
    for (const auto& w : msft.warnings) warn_json.push_back(w.identifier + ": " + w.reason);
    manifest["provenance"] = provenance(c, "synth");
    write_json(out / "manifest.json", manifest);

    std::cout << "kept " << kept.pairs().size() << " of " << corpus.pairs().size() << " pairs; wrote "
              << msft.records.size() << " records (TS " << msft.counts.ts << ", SL " << msft.counts.sl << ", NC "
              << msft.counts.nc() << ", CW " << msft.counts.cw << ") to " << (out / "msft.jsonl").string() << "\n";
    return kExitOk;
}

// ---- filter -----------------------------------------------------------------------------

int cmd_filter(const RunConfig& c) {
    Corpus corpus = load_corpus(c.corpus);
    auto backend = make_backend(c.backend, &corpus);
    FilterResult fr = filter_noise(corpus, *backend, FilterOptions{c.example_rows, c.params, c.workers});
    const std::filesystem::path out(c.out_dir);
    std::filesystem::create_directories(out);
    write_pairs(out / "kept_pairs.json", fr.kept.pairs());
    nlohmann::ordered_json j;
    j["input_pairs"] = corpus.pairs().size();
    j["kept"] = fr.kept.pairs().size();
    auto& removed = j["removed"] = nlohmann::ordered_json::array();
    for (const auto& r : fr.removed) removed.push_back({{"pair_id", r.pair_id}, {"verdict", r.verdict}});
    auto& failures = j["backend_failures"] = nlohmann::ordered_json::array();
    for (const auto& f : fr.failures) failures.push_back({{"pair_id", f.pair_id}, {"error", f.reason}});
    j["provenance"] = provenance(c, "filter");
    write_json(out / "filter_report.json", j);
    std::cout << "kept " << fr.kept.pairs().size() << ", removed " << fr.removed.size() << "\n";
    return kExitOk;
}

// ---- infer ------------------------------------------------------------------------------

struct InferFlags {
    bool resume = false;
    std::optional<std::size_t> max_pairs;
    bool oracle_schema = false, oracle_hint = false;
    bool no_sl = false, no_nc = false, no_cw = false;
    std::optional<std::string> strategy;
};

struct JournalEntry {
    Prediction prediction;
    nlohmann::ordered_json trace;
};

/// Reads the completion journal, dropping an unparseable final line.
std::map<std::string, JournalEntry> read_journal(const std::filesystem::path& path, std::string& valid_prefix) {
    std::map<std::string, JournalEntry> out;
    if (!std::filesystem::exists(path)) return out;
    std::string content = read_file(path);
    std::size_t start = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        if (nl == std::string::npos) break;  // incomplete final line
        std::string line = content.substr(start, nl - start);
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            break;
        }
        JournalEntry e;
        e.prediction = Prediction{j.at("pair_id").get<std::string>(), j.at("db_id").get<std::string>(),
                                  SqlQuery{j.at("sql").get<std::string>(), SqlOrigin::Predicted}};
        e.trace = j.at("trace");
        out[e.prediction.pair_id] = std::move(e);
        start = nl + 1;
    }
    valid_prefix = content.substr(0, start);
    return out;
}

int cmd_infer(const RunConfig& config, const InferFlags& inf) {
    RunConfig c = config;
    if (inf.oracle_schema) c.mcp.oracle_schema = true;
    if (inf.oracle_hint) c.mcp.oracle_hint = true;
    if (inf.no_sl) c.mcp.enable_sl = false;
    if (inf.no_nc) c.mcp.enable_nc = false;
    if (inf.no_cw) c.mcp.enable_cw = false;
    if (inf.strategy) c.mcp.strategy = parse_refinement_strategy(*inf.strategy);

    Corpus corpus = load_corpus(c.corpus);
    auto backend = make_backend(c.backend, &corpus);
    const std::filesystem::path out(c.out_dir);
    std::filesystem::create_directories(out);
    const auto journal_path = out / "infer.journal.jsonl";

    std::map<std::string, JournalEntry> done;
    if (inf.resume) {
        std::string valid;
        done = read_journal(journal_path, valid);
        write_file_atomic(journal_path, valid);  // drop a torn final line before appending
        spdlog::info("resuming: {} pair(s) already complete", done.size());
    } else {
        write_file_atomic(journal_path, "");
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < corpus.pairs().size(); ++i) {
        if (!done.count(corpus.pairs()[i].pair_id)) todo.push_back(i);
    }
    if (inf.max_pairs && todo.size() > *inf.max_pairs) todo.resize(*inf.max_pairs);

    std::ofstream journal(journal_path, std::ios::app | std::ios::binary);
    std::mutex journal_mutex;
    std::signal(SIGINT, on_sigint);
    const std::size_t workers = std::max(c.workers, backend->parallelism());
    parallel_for(
        todo.size(), workers,
        [&](std::size_t k) {
            const CorpusPair& pair = corpus.pairs()[todo[k]];
            McpTrace trace = run_mcp(corpus.catalog(pair.db_id), question_of(pair), c.mcp, *backend);
            JournalEntry e{Prediction{pair.pair_id, pair.db_id, trace.final_sql}, trace_to_json(trace)};
            nlohmann::ordered_json line;
            line["pair_id"] = pair.pair_id;
            line["db_id"] = pair.db_id;
            line["sql"] = trace.final_sql.text;
            line["trace"] = e.trace;
            std::lock_guard lock(journal_mutex);
            journal << line.dump() << '\n';
            journal.flush();
            done[pair.pair_id] = std::move(e);
        },
        &stop_requested());
    journal.close();
    std::signal(SIGINT, SIG_DFL);

    std::string predictions, traces;
    std::size_t complete = 0;
    for (const auto& pair : corpus.pairs()) {
        auto it = done.find(pair.pair_id);
        if (it == done.end()) continue;
        ++complete;
        predictions += prediction_line(it->second.prediction) + "\n";
        traces += it->second.trace.dump() + "\n";
    }
    write_jsonl(out / "predictions.jsonl", predictions, c, "infer", complete);
    write_jsonl(out / "traces.jsonl", traces, c, "infer", complete);

    const std::size_t total = corpus.pairs().size();
    std::cout << "processed " << complete << " of " << total << " pairs\n";
    if (complete < total) {
        std::cerr << "incomplete run; rerun with --resume to continue\n";
        return kExitIncomplete;
    }
    return kExitOk;
}

// ---- eval -------------------------------------------------------------------------------

int cmd_eval(const RunConfig& c, const std::string& predictions_file, const std::string& traces_file) {
    Corpus corpus = load_corpus(c.corpus);
    auto predictions = predictions_file.empty() ? std::vector<Prediction>{} : read_predictions(predictions_file);
    EvalReport report = evaluate_ex(corpus, predictions, c.timeout_ms, c.workers);
    const std::filesystem::path out(c.out_dir);
    std::string text = render_report(report);
    auto j = report_to_json(report);
    j["provenance"] = provenance(c, "eval");
    write_file_atomic(out / "ex_report.txt", text);
    write_json(out / "ex_report.json", j);
    std::cout << text;

    if (!traces_file.empty()) {
        std::map<std::string, SchemaSubset> linked;
        std::string content = read_file(traces_file);
        std::size_t start = 0;
        while (start < content.size()) {
            auto nl = content.find('\n', start);
            std::string line = content.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
            start = nl == std::string::npos ? content.size() : nl + 1;
            if (line.empty()) continue;
            auto t = nlohmann::json::parse(line);
            SchemaSubset s(t.at("db_id").get<std::string>());
            for (const auto& [table, cols] : t.at("linked_subset").items()) {
                s.add_table(table);
                for (const auto& col : cols) s.add_column(table, col.get<std::string>());
            }
            linked[t.at("pair_id").get<std::string>()] = std::move(s);
        }
        LinkingReport lr = linking_metrics(corpus, linked);
        std::string ltext = render_report(lr);
        auto lj = report_to_json(lr);
        lj["provenance"] = provenance(c, "eval");
        write_file_atomic(out / "linking_report.txt", ltext);
        write_json(out / "linking_report.json", lj);
        std::cout << "\n" << ltext;
    }
    return kExitOk;
}

// ---- exec -------------------------------------------------------------------------------

int cmd_exec(const std::string& db, const std::string& sql_text, std::int64_t timeout_ms) {
    SqlQuery sql;
    try {
        sql = normalize(sql_text);
    } catch (const SqlError& e) {
        std::cout << "status: error\nexception: " << e.what() << "\n";
        return kExitFailure;
    }
    ExecutionOutcome o = execute(db, sql, timeout_ms);
    std::cout << "status: " << to_string(o.status) << "\n";
    if (!o.ok()) {
        std::cout << "exception: " << o.exception << "\n";
        return kExitFailure;
    }
    std::cout << "rows: " << o.rows.size() << "\n";
    for (const auto& row : o.rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += " | ";
            line += format_value(row[i]);
        }
        std::cout << line << "\n";
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"ROUTE text-to-SQL toolkit: MSFT data synthesis, MCP inference and EX evaluation"};
    app.require_subcommand(1);
    Flags flags;

    auto* synth = app.add_subcommand("synth", "Build the multitask SFT dataset");
    add_common(synth, flags, true);
    SynthFlags sf;
    synth->add_option("--sl-cap", sf.sl_cap, "Maximum SL records");
    synth->add_option("--nc-cap", sf.nc_cap, "Maximum NC records");
    synth->add_option("--cw-cap", sf.cw_cap, "Maximum CW records");
    synth->add_option("--nc-positive-share", sf.nc_positive_share, "Share of positive NC records under the cap");
    synth->add_option("--negatives-per-pair", sf.negatives_per_pair, "Negatives per pair");
    synth->add_flag("--no-filter", sf.no_filter, "Skip noisy-pair filtering");
    synth->add_flag("--no-mine", sf.no_mine, "Do not mine negatives from the backend");

    auto* filter = app.add_subcommand("filter", "Remove noisy question/SQL pairs");
    add_common(filter, flags, true);

    auto* infer = app.add_subcommand("infer", "Run multitask collaboration prompting");
    add_common(infer, flags, true);
    InferFlags inf;
    infer->add_flag("--resume", inf.resume, "Continue from the completion journal");
    infer->add_option("--max-pairs", inf.max_pairs, "Stop after this many new pairs");
    infer->add_flag("--oracle-schema", inf.oracle_schema, "Link with the gold query's schema elements");
    infer->add_flag("--oracle-hint", inf.oracle_hint, "Continue from the first half of the gold query");
    infer->add_flag("--no-sl", inf.no_sl, "Disable schema linking");
    infer->add_flag("--no-nc", inf.no_nc, "Disable noise correction");
    infer->add_flag("--no-cw", inf.no_cw, "Disable continuation writing");
    infer->add_option("--strategy", inf.strategy, "Continuation prefix: select-only or half-prefix");

    auto* eval = app.add_subcommand("eval", "Score predictions by execution accuracy");
    add_common(eval, flags, false);
    std::string predictions_file, traces_file;
    eval->add_option("--predictions", predictions_file, "Predictions JSONL");
    eval->add_option("--traces", traces_file, "Traces JSONL for linking metrics");

    auto* exec = app.add_subcommand("exec", "Execute one query read-only");
    std::string db, sql;
    std::int64_t exec_timeout = kDefaultTimeoutMs;
    exec->add_option("--db", db, "SQLite database file")->required();
    exec->add_option("--sql", sql, "Query text")->required();
    exec->add_option("--timeout-ms", exec_timeout, "Timeout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    if (!spdlog::get("route")) spdlog::set_default_logger(spdlog::stderr_color_mt("route"));
    spdlog::set_level(flags.verbose ? spdlog::level::debug : spdlog::level::info);
    stop_requested().store(false);

    try {
        if (exec->parsed()) return cmd_exec(db, sql, exec_timeout);
        RunConfig config = resolve(flags);
        if (synth->parsed()) return cmd_synth(config, sf);
        if (filter->parsed()) return cmd_filter(config);
        if (infer->parsed()) return cmd_infer(config, inf);
        if (eval->parsed()) return cmd_eval(config, predictions_file, traces_file);
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace route
