#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "route/catalog.hpp"
#include "route/executor.hpp"
#include "route/llm.hpp"
#include "route/sql_query.hpp"
#include "route/warning.hpp"

namespace route {

// ---- error injection -------------------------------------------------------------

enum class ErrorKind { SchemaLinking, Nesting, Join, GroupBy, Symbol };

inline constexpr std::array<ErrorKind, 5> kAllErrorKinds = {ErrorKind::SchemaLinking, ErrorKind::Nesting,
                                                            ErrorKind::Join, ErrorKind::GroupBy, ErrorKind::Symbol};

std::string_view to_string(ErrorKind kind);
ErrorKind parse_error_kind(std::string_view text);

/// Corrupts `gold` with one error of `kind`, deterministically per seed.
/// Returns nullopt when the kind does not apply to this query (for example
/// nesting on a query without set operations). Throws SqlParseError when the
/// gold does not parse.
std::optional<SqlQuery> inject_error(const SqlQuery& gold, const DatabaseCatalog& catalog, ErrorKind kind,
                                     std::uint64_t seed);

/// Kinds for which inject_error produces a query.
std::vector<ErrorKind> applicable_error_kinds(const SqlQuery& gold, const DatabaseCatalog& catalog);

// ---- negatives -----------------------------------------------------------------------

struct NegativeExample {
    std::string pair_id;
    SqlQuery bad_sql;
    std::string origin;  // "mined" or "injected:<kind>"
};

struct NegativeOptions {
    std::size_t per_pair = 1;
    std::uint64_t seed = 0;
    int max_reattempts = 5;
    std::map<ErrorKind, double> kind_weights;  // empty: uniform over applicable kinds
    std::size_t example_rows = kDefaultExampleRows;
    GenerationParams params;
    std::int64_t timeout_ms = kDefaultTimeoutMs;
    std::size_t workers = 4;
};

struct NegativeReport {
    std::vector<NegativeExample> negatives;  // corpus order, mined before injected
    std::size_t mined = 0;
    std::size_t injected = 0;
    std::size_t candidates = 0;        // candidate queries checked against gold
    std::size_t dropped = 0;           // candidates rejected (EX-true or duplicate)
    std::size_t inapplicable = 0;      // injection draws with no applicable edit
    int max_reattempts_used = 0;       // largest re-attempt count of any sample
    std::size_t short_pairs = 0;       // pairs ending with fewer than per_pair negatives
    std::vector<std::string> skipped;  // pairs whose gold failed execution
    std::vector<Warning> warnings;

    double drop_rate() const { return candidates == 0 ? 0.0 : static_cast<double>(dropped) / candidates; }
};

/// Mines zero-shot TS predictions when `backend` is non-null, then tops up
/// with injected errors. Every returned negative fails EX against its gold.
NegativeReport make_negatives(const Corpus& corpus, LlmBackend* backend, const NegativeOptions& options);

// ---- SFT data ------------------------------------------------------------------------

enum class SftTask { TS, SL, NC_POS, NC_NEG, CW };

std::string_view to_string(SftTask task);
SftTask parse_sft_task(std::string_view text);

struct SftRecord {
    SftTask task = SftTask::TS;
    std::string instruction;
    std::string response;
    std::string source_pair_id;

    friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

using SftDataset = std::vector<SftRecord>;

struct SynthOptions {
    std::size_t example_rows = kDefaultExampleRows;
    std::uint64_t seed = 0;
};

SftDataset synth_ts(const Corpus& corpus, const SynthOptions& options);
/// Pairs whose gold yields no schema elements are skipped with a warning.
SftDataset synth_sl(const Corpus& corpus, const SynthOptions& options, std::vector<Warning>* warnings = nullptr);
/// One NC_POS record per pair plus one NC_NEG record per negative.
SftDataset synth_nc(const Corpus& corpus, const std::vector<NegativeExample>& negatives, const SynthOptions& options);
SftDataset synth_cw(const Corpus& corpus, const SynthOptions& options, std::vector<Warning>* warnings = nullptr);

// ---- noisy-correspondence filtering -------------------------------------------------

struct FilterOptions {
    std::size_t example_rows = kDefaultExampleRows;
    GenerationParams params;
    std::size_t workers = 4;
};

struct FilterRemoval {
    std::string pair_id;
    std::string verdict;
};

struct FilterResult {
    Corpus kept;
    std::vector<FilterRemoval> removed;
    std::vector<Warning> failures;  // backend errors; those pairs are kept
};

FilterResult filter_noise(const Corpus& corpus, LlmBackend& backend, const FilterOptions& options);

// ---- assembly ------------------------------------------------------------------------

struct MsftCaps {
    std::optional<std::size_t> sl;
    std::optional<std::size_t> nc;
    std::optional<std::size_t> cw;
    double nc_positive_share = 0.5;
};

struct MsftCounts {
    std::size_t ts = 0;
    std::size_t sl = 0;
    std::size_t nc_pos = 0;
    std::size_t nc_neg = 0;
    std::size_t cw = 0;

    std::size_t nc() const { return nc_pos + nc_neg; }
    std::size_t total() const { return ts + sl + nc() + cw; }
    friend bool operator==(const MsftCounts&, const MsftCounts&) = default;
};

/// How many records of each kind assemble_msft keeps given what is available.
MsftCounts plan_msft_counts(const MsftCounts& available, const MsftCaps& caps);

struct MsftResult {
    SftDataset records;
    MsftCounts counts;
    std::vector<Warning> warnings;
};

/// TS is kept whole; auxiliary sets are sampled without replacement to their
/// caps; the union is shuffled. Deterministic per seed.
MsftResult assemble_msft(const SftDataset& ts, const SftDataset& sl, const SftDataset& nc, const SftDataset& cw,
                         const MsftCaps& caps, std::uint64_t seed);

/// {"instruction","output","task","source_pair_id"} per line.
std::string to_jsonl(const SftDataset& records);
SftDataset parse_sft_jsonl(std::string_view jsonl);

}  // namespace route
