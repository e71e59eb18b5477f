#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "route/catalog.hpp"
#include "route/executor.hpp"
#include "route/schema_subset.hpp"
#include "route/sql_query.hpp"

namespace route {

struct Prediction {
    std::string pair_id;
    std::string db_id;
    SqlQuery sql;
};

/// Line-delimited {"pair_id","db_id","sql"}. An unparseable last line (an
/// interrupted write) is ignored; other malformed lines throw.
std::vector<Prediction> parse_predictions(std::string_view jsonl);
std::vector<Prediction> read_predictions(const std::filesystem::path& file);
std::string prediction_line(const Prediction& p);

/// How EX is computed; embedded in every report.
extern const std::string_view kScorerSemantics;

struct PairVerdict {
    std::string pair_id;
    std::string db_id;
    bool correct = false;
    bool missing = false;
    bool gold_failed = false;
    std::string hardness;
    std::optional<std::string> label;
    std::string pred_status;
    std::string pred_exception;
};

struct BucketScore {
    std::size_t n = 0;
    std::size_t correct = 0;
    double ex() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
};

struct EvalReport {
    std::size_t n_pairs = 0;
    std::size_t n_correct = 0;
    double ex_overall = 0.0;
    std::map<std::string, BucketScore> by_hardness;
    std::map<std::string, BucketScore> by_label;
    std::vector<PairVerdict> pairs;
    std::size_t missing = 0;
    std::size_t gold_failures = 0;
    std::vector<std::string> unknown_predictions;  // pair ids not in the corpus
};

/// Scores every corpus pair; pairs without a prediction count as wrong.
EvalReport evaluate_ex(const Corpus& corpus, const std::vector<Prediction>& predictions,
                       std::int64_t timeout_ms = kDefaultTimeoutMs, std::size_t workers = 4);

struct LinkingReport {
    std::size_t n_pairs = 0;
    std::size_t gold_tables = 0, predicted_tables = 0, matched_tables = 0;
    std::size_t gold_columns = 0, predicted_columns = 0, matched_columns = 0;
    double table_recall = 0.0, table_precision = 0.0;
    double column_recall = 0.0, column_precision = 0.0;
};

/// Micro-averaged recall and precision of predicted subsets against the
/// elements of each gold query. Pairs absent from `predicted` count as empty
/// predictions. A zero denominator yields 0.
LinkingReport linking_metrics(const Corpus& corpus, const std::map<std::string, SchemaSubset>& predicted);

/// Adds one pair's counts to a running report and refreshes the ratios.
void accumulate_linking(LinkingReport& report, const SchemaSubset& gold, const SchemaSubset& predicted);

std::string render_report(const EvalReport& report);
std::string render_report(const LinkingReport& report);
nlohmann::ordered_json report_to_json(const EvalReport& report);
nlohmann::ordered_json report_to_json(const LinkingReport& report);

}  // namespace route
