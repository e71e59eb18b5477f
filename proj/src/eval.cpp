#include "route/eval.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "route/sqlkit.hpp"
#include "route/util.hpp"

namespace route {

const std::string_view kScorerSemantics =
    "EX: a prediction is correct when its result rows equal the gold result rows. Rows compare as a multiset "
    "unless the outermost gold statement has ORDER BY, then as a sequence. Column order is significant and "
    "columns are not permuted. Numbers match within relative tolerance 1e-6 (integers exactly), text "
    "byte-exact, NULL equals NULL. Failed or timed-out executions never match. Missing predictions count as "
    "wrong.";

namespace {

constexpr std::string_view kLinkingNote =
    "Linking metrics are micro-averaged over all pairs: matched / gold for recall, matched / predicted for "
    "precision, counting tables and (table, column) pairs. Gold elements come from parsing each gold query.";

}  // namespace

std::vector<Prediction> parse_predictions(std::string_view jsonl) {
    std::vector<Prediction> out;
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < jsonl.size()) {
        auto nl = jsonl.find('\n', start);
        lines.push_back(jsonl.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        start = nl == std::string_view::npos ? jsonl.size() : nl + 1;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = lines[i];
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            if (i + 1 == lines.size()) break;  // truncated tail
            throw std::runtime_error("predictions line " + std::to_string(i + 1) + ": " + e.what());
        }
        Prediction p;
        const auto& id = j.at("pair_id");
        p.pair_id = id.is_string() ? id.get<std::string>() : id.dump();
        p.db_id = j.value("db_id", "");
        p.sql = SqlQuery{j.value("sql", ""), SqlOrigin::Predicted};
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& file) { return parse_predictions(read_file(file)); }

std::string prediction_line(const Prediction& p) {
    nlohmann::ordered_json j;
    j["pair_id"] = p.pair_id;
    j["db_id"] = p.db_id;
    j["sql"] = p.sql.text;
    return j.dump();
}

EvalReport evaluate_ex(const Corpus& corpus, const std::vector<Prediction>& predictions, std::int64_t timeout_ms,
                       std::size_t workers) {
    std::map<std::string, const Prediction*> by_id;
    EvalReport report;
    for (const auto& p : predictions) {
        if (!corpus.find_pair(p.pair_id)) {
            report.unknown_predictions.push_back(p.pair_id);
            continue;
        }
        by_id.emplace(p.pair_id, &p);  // first prediction wins
    }

    const auto& pairs = corpus.pairs();
    report.pairs.resize(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        const CorpusPair& pair = pairs[i];
        const DatabaseCatalog& catalog = corpus.catalog(pair.db_id);
        PairVerdict& v = report.pairs[i];
        v.pair_id = pair.pair_id;
        v.db_id = pair.db_id;
        v.label = pair.difficulty_label;
        try {
            v.hardness = std::string(to_string(difficulty(pair.gold_sql, catalog)));
        } catch (const SqlParseError&) {
            v.hardness = "unparsed";
        }
        auto it = by_id.find(pair.pair_id);
        if (it == by_id.end()) {
            v.missing = true;
            v.pred_status = "missing";
            return;
        }
        PairScore score = score_pair(catalog, pair.gold_sql, it->second->sql, timeout_ms);
        v.correct = score.correct;
        v.gold_failed = score.gold_failed;
        if (!score.gold_failed) {
            v.pred_status = std::string(to_string(score.pred.status));
            v.pred_exception = score.pred.exception;
        } else {
            v.pred_status = "not run";
        }
    });

    for (const auto& v : report.pairs) {
        ++report.n_pairs;
        report.n_correct += v.correct ? 1 : 0;
        report.missing += v.missing ? 1 : 0;
        report.gold_failures += v.gold_failed ? 1 : 0;
        auto& h = report.by_hardness[v.hardness];
        ++h.n;
        h.correct += v.correct ? 1 : 0;
        if (v.label) {
            auto& l = report.by_label[*v.label];
            ++l.n;
            l.correct += v.correct ? 1 : 0;
        }
    }
    report.ex_overall =
        report.n_pairs == 0 ? 0.0 : static_cast<double>(report.n_correct) / static_cast<double>(report.n_pairs);
    return report;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::set<std::string> table_keys(const SchemaSubset& s) {
    std::set<std::string> out;
    for (const auto& [t, cols] : s.entries()) out.insert(to_lower(strip_quotes(t)));
    return out;
}

std::set<std::string> column_keys(const SchemaSubset& s) {
    std::set<std::string> out;
    for (const auto& [t, cols] : s.entries()) {
        for (const auto& c : cols) out.insert(to_lower(strip_quotes(t)) + "." + to_lower(strip_quotes(c)));
    }
    return out;
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

}  // namespace

void accumulate_linking(LinkingReport& r, const SchemaSubset& gold, const SchemaSubset& predicted) {
    auto gt = table_keys(gold), pt = table_keys(predicted);
    auto gc = column_keys(gold), pc = column_keys(predicted);
    ++r.n_pairs;
    r.gold_tables += gt.size();
    r.predicted_tables += pt.size();
    r.matched_tables += overlap(gt, pt);
    r.gold_columns += gc.size();
    r.predicted_columns += pc.size();
    r.matched_columns += overlap(gc, pc);
    r.table_recall = ratio(r.matched_tables, r.gold_tables);
    r.table_precision = ratio(r.matched_tables, r.predicted_tables);
    r.column_recall = ratio(r.matched_columns, r.gold_columns);
    r.column_precision = ratio(r.matched_columns, r.predicted_columns);
}

LinkingReport linking_metrics(const Corpus& corpus, const std::map<std::string, SchemaSubset>& predicted) {
    LinkingReport report;
    for (const auto& pair : corpus.pairs()) {
        const auto& catalog = corpus.catalog(pair.db_id);
        SchemaSubset gold(catalog.db_id());
        try {
            gold = extract_schema_elements(pair.gold_sql, catalog, pair.pair_id).subset;
        } catch (const SqlParseError&) {
        }
        auto it = predicted.find(pair.pair_id);
        accumulate_linking(report, gold, it == predicted.end() ? SchemaSubset(catalog.db_id()) : it->second);
    }
    return report;
}

namespace {

std::string pct(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x * 100.0);
    return buf;
}

void row(std::ostringstream& out, std::string_view name, std::size_t n, std::string_view value) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-24.*s %8zu %10.*s\n", static_cast<int>(name.size()), name.data(), n,
                  static_cast<int>(value.size()), value.data());
    out << buf;
}

nlohmann::ordered_json buckets_json(const std::map<std::string, BucketScore>& buckets) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, b] : buckets) j[name] = {{"n", b.n}, {"correct", b.correct}, {"ex", b.ex()}};
    return j;
}

}  // namespace

std::string render_report(const EvalReport& r) {
    std::ostringstream out;
    out << "Execution accuracy\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-24s %8s %10s\n", "bucket", "n", "EX %");
    out << buf;
    row(out, "overall", r.n_pairs, pct(r.ex_overall));
    for (const auto& [name, b] : r.by_hardness) row(out, "hardness:" + name, b.n, pct(b.ex()));
    for (const auto& [name, b] : r.by_label) row(out, "label:" + name, b.n, pct(b.ex()));
    out << "missing predictions: " << r.missing << "\n";
    out << "gold failures: " << r.gold_failures << "\n";
    if (!r.unknown_predictions.empty()) out << "unknown prediction ids: " << r.unknown_predictions.size() << "\n";
    out << "\n" << kScorerSemantics << "\n";
    return out.str();
}

std::string render_report(const LinkingReport& r) {
    std::ostringstream out;
    char buf[128];
    out << "Schema linking (" << r.n_pairs << " pairs)\n";
    std::snprintf(buf, sizeof(buf), "%-10s %10s %10s\n", "", "recall %", "precision %");
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %10s %10s\n", "tables", pct(r.table_recall).c_str(),
                  pct(r.table_precision).c_str());
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %10s %10s\n", "columns", pct(r.column_recall).c_str(),
                  pct(r.column_precision).c_str());
    out << buf;
    out << "\n" << kLinkingNote << "\n";
    return out.str();
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["n_pairs"] = r.n_pairs;
    j["n_correct"] = r.n_correct;
    j["ex_overall"] = r.ex_overall;
    j["by_hardness"] = buckets_json(r.by_hardness);
    j["by_label"] = buckets_json(r.by_label);
    j["missing"] = r.missing;
    j["gold_failures"] = r.gold_failures;
    j["unknown_predictions"] = r.unknown_predictions;
    auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
    for (const auto& v : r.pairs) {
        nlohmann::ordered_json p;
        p["pair_id"] = v.pair_id;
        p["db_id"] = v.db_id;
        p["correct"] = v.correct;
        p["missing"] = v.missing;
        p["gold_failed"] = v.gold_failed;
        p["hardness"] = v.hardness;
        p["label"] = v.label ? nlohmann::ordered_json(*v.label) : nlohmann::ordered_json(nullptr);
        p["pred_status"] = v.pred_status;
        if (!v.pred_exception.empty()) p["pred_exception"] = v.pred_exception;
        pairs.push_back(std::move(p));
    }
    j["scorer_semantics"] = std::string(kScorerSemantics);
    return j;
}

nlohmann::ordered_json report_to_json(const LinkingReport& r) {
    nlohmann::ordered_json j;
    j["n_pairs"] = r.n_pairs;
    j["tables"] = {{"gold", r.gold_tables},
                   {"predicted", r.predicted_tables},
                   {"matched", r.matched_tables},
                   {"recall", r.table_recall},
                   {"precision", r.table_precision}};
    j["columns"] = {{"gold", r.gold_columns},
                    {"predicted", r.predicted_columns},
                    {"matched", r.matched_columns},
                    {"recall", r.column_recall},
                    {"precision", r.column_precision}};
    j["averaging"] = "micro";
    j["note"] = std::string(kLinkingNote);
    return j;
}

}  // namespace route
