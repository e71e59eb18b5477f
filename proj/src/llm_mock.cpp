#include <nlohmann/json.hpp>

#include "route/llm.hpp"
#include "route/sqlkit.hpp"
#include "route/util.hpp"

namespace route {

void GenerationParams::validate() const {
    if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
    if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be > 0");
}

std::vector<ScriptEntry> parse_script(std::string_view jsonl) {
    std::vector<ScriptEntry> out;
    std::size_t start = 0, line_no = 0;
    while (start < jsonl.size()) {
        auto nl = jsonl.find('\n', start);
        auto line = jsonl.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? jsonl.size() : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument("script line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("response") || !j["response"].is_string()) {
            throw std::invalid_argument("script line " + std::to_string(line_no) + ": missing string \"response\"");
        }
        ScriptEntry e;
        if (j.contains("task")) e.task = parse_task_tag(j["task"].get<std::string>());
        if (j.contains("pair_id")) {
            const auto& p = j["pair_id"];
            e.pair_id = p.is_string() ? p.get<std::string>() : p.dump();
        }
        if (j.contains("prompt_sha256")) e.prompt_sha256 = j["prompt_sha256"].get<std::string>();
        if (j.contains("regex")) {
            e.regex = j["regex"].get<std::string>();
            try {
                std::regex test(*e.regex);
            } catch (const std::regex_error& err) {
                throw std::invalid_argument("script line " + std::to_string(line_no) + ": bad regex: " + err.what());
            }
        }
        e.response = j["response"].get<std::string>();
        e.consume_once = j.value("consume_once", false);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ScriptEntry> load_script(const std::filesystem::path& file) { return parse_script(read_file(file)); }

std::string serialize_script(const std::vector<ScriptEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        if (e.task) j["task"] = std::string(to_string(*e.task));
        if (e.pair_id) j["pair_id"] = *e.pair_id;
        if (e.prompt_sha256) j["prompt_sha256"] = *e.prompt_sha256;
        if (e.regex) j["regex"] = *e.regex;
        j["response"] = e.response;
        if (e.consume_once) j["consume_once"] = true;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<ScriptEntry> echo_gold_script(const Corpus& corpus) {
    std::vector<ScriptEntry> out;
    for (const auto& pair : corpus.pairs()) {
        const std::string fenced = "```sql\n" + pair.gold_sql.text + "\n```";
        std::string linking;
        try {
            const auto& catalog = corpus.catalog(pair.db_id);
            linking = render_linking(extract_schema_elements(pair.gold_sql, catalog, pair.pair_id).subset, catalog);
        } catch (const SqlParseError&) {
        }
        auto add = [&](TaskTag task, std::string response) {
            ScriptEntry e;
            e.task = task;
            e.pair_id = pair.pair_id;
            e.response = std::move(response);
            out.push_back(std::move(e));
        };
        add(TaskTag::TS, fenced);
        add(TaskTag::SL, linking);
        add(TaskTag::NC, std::string(kAffirmativeAnswer));
        add(TaskTag::CW, fenced);
        add(TaskTag::FILTER, std::string(kAffirmativeAnswer));
    }
    return out;
}

MockBackend::MockBackend(std::vector<ScriptEntry> entries, std::size_t parallelism)
    : parallelism_(std::max<std::size_t>(1, parallelism)) {
    entries_.reserve(entries.size());
    for (auto& e : entries) {
        Compiled c{std::move(e), std::nullopt, false};
        if (c.entry.regex) c.pattern.emplace(*c.entry.regex);
        entries_.push_back(std::move(c));
    }
}

std::string MockBackend::complete(const PromptText& prompt, const GenerationParams& params) {
    params.validate();
    const std::string digest = sha256_hex(prompt.text);
    std::lock_guard lock(mutex_);
    calls_.push_back(RecordedCall{prompt.task, prompt.meta.pair_id, digest});
    for (auto& c : entries_) {
        if (c.consumed) continue;
        const auto& e = c.entry;
        if (e.task && *e.task != prompt.task) continue;
        if (e.pair_id && *e.pair_id != prompt.meta.pair_id) continue;
        if (e.prompt_sha256 && *e.prompt_sha256 != digest) continue;
        if (c.pattern && !std::regex_search(prompt.text, *c.pattern)) continue;
        if (e.consume_once) c.consumed = true;
        return e.response;
    }
    throw BackendError("mock script has no entry for task " + std::string(to_string(prompt.task)) + ", pair " +
                       (prompt.meta.pair_id.empty() ? std::string("<none>") : prompt.meta.pair_id));
}

std::vector<RecordedCall> MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t MockBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

}  // namespace route
