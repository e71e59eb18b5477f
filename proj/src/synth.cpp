#include "route/synth.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>

#include "route/identifier.hpp"
#include "route/prompts.hpp"
#include "route/sqlkit.hpp"
#include "route/util.hpp"

namespace route {

std::string_view to_string(SftTask task) {
    switch (task) {
        case SftTask::TS:
            return "TS";
        case SftTask::SL:
            return "SL";
        case SftTask::NC_POS:
            return "NC_POS";
        case SftTask::NC_NEG:
            return "NC_NEG";
        case SftTask::CW:
            return "CW";
    }
    return "TS";
}

SftTask parse_sft_task(std::string_view text) {
    for (auto t : {SftTask::TS, SftTask::SL, SftTask::NC_POS, SftTask::NC_NEG, SftTask::CW}) {
        if (ident_equal(text, to_string(t))) return t;
    }
    throw std::invalid_argument("unknown SFT task: " + std::string(text));
}

namespace {

/// Full-schema text per database, rendered once.
std::map<std::string, std::string> render_all(const Corpus& corpus, std::size_t example_rows) {
    std::map<std::string, std::string> out;
    for (const auto& [db_id, catalog] : corpus.catalogs()) out[db_id] = render_schema(*catalog, nullptr, example_rows);
    return out;
}

PromptMeta meta_of(const CorpusPair& pair) { return PromptMeta{pair.pair_id, pair.db_id}; }

ErrorKind draw_kind(const std::vector<ErrorKind>& kinds, const std::map<ErrorKind, double>& weights,
                    std::mt19937_64& rng) {
    if (weights.empty()) return kinds[static_cast<std::size_t>(uniform_below(rng, kinds.size()))];
    std::vector<double> cumulative;
    double total = 0.0;
    for (auto k : kinds) {
        auto it = weights.find(k);
        total += it == weights.end() ? 0.0 : std::max(0.0, it->second);
        cumulative.push_back(total);
    }
    if (total <= 0.0) return kinds[static_cast<std::size_t>(uniform_below(rng, kinds.size()))];
    // 53 random bits give a uniform double in [0, 1) independent of the library's distributions.
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (u < cumulative[i]) return kinds[i];
    }
    return kinds.back();
}

struct PairNegatives {
    std::vector<NegativeExample> negatives;
    std::size_t mined = 0, injected = 0, candidates = 0, dropped = 0, inapplicable = 0;
    int max_reattempts_used = 0;
    bool skipped = false;
    bool short_of_target = false;
    std::vector<Warning> warnings;
};

}  // namespace

NegativeReport make_negatives(const Corpus& corpus, LlmBackend* backend, const NegativeOptions& options) {
    if (options.per_pair < 1) throw std::invalid_argument("per_pair must be >= 1");
    const auto& pairs = corpus.pairs();
    std::map<std::string, std::string> schemas;
    if (backend) schemas = render_all(corpus, options.example_rows);

    std::vector<PairNegatives> results(pairs.size());
    std::size_t workers = backend ? std::max(options.workers, backend->parallelism()) : options.workers;

    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        const CorpusPair& pair = pairs[i];
        const DatabaseCatalog& catalog = corpus.catalog(pair.db_id);
        PairNegatives& r = results[i];
        auto warn = [&](std::string identifier, std::string reason) {
            r.warnings.push_back(Warning{pair.pair_id, std::move(identifier), std::move(reason)});
        };

        ExecutionOutcome gold = execute(catalog.db_file(), pair.gold_sql, options.timeout_ms);
        if (!gold.ok()) {
            r.skipped = true;
            warn(pair.gold_sql.text, "gold failed to execute: " + gold.exception);
            return;
        }
        const bool ordered = has_outer_order_by(pair.gold_sql);
        std::set<std::string> seen{pair.gold_sql.text};

        auto accept = [&](const SqlQuery& bad, std::string origin) {
            ++r.candidates;
            if (!seen.insert(bad.text).second) {
                ++r.dropped;
                return false;
            }
            ExecutionOutcome outcome = execute(catalog.db_file(), bad, options.timeout_ms);
            if (results_match(gold, outcome, ordered)) {
                ++r.dropped;
                return false;
            }
            r.negatives.push_back(NegativeExample{pair.pair_id, bad, std::move(origin)});
            return true;
        };

        if (backend) {
            try {
                std::string reply = backend->complete(
                    build_ts_prompt(schemas.at(pair.db_id), pair.question, pair.hint, meta_of(pair)), options.params);
                if (auto mined = try_extract_sql(reply, SqlOrigin::Predicted)) {
                    if (accept(*mined, "mined")) ++r.mined;
                }
            } catch (const BackendError& e) {
                warn("", std::string("mining failed: ") + e.what());
            }
        }

        std::vector<ErrorKind> kinds;
        try {
            kinds = applicable_error_kinds(pair.gold_sql, catalog);
        } catch (const SqlParseError& e) {
            warn(pair.gold_sql.text, std::string("gold does not parse: ") + e.what());
        }

        std::uint64_t stream = 0;
        while (r.negatives.size() < options.per_pair && !kinds.empty()) {
            bool got = false;
            for (int attempt = 0; attempt <= options.max_reattempts; ++attempt) {
                std::mt19937_64 rng(mix_seed(mix_seed(options.seed, i), stream++));
                ErrorKind kind = draw_kind(kinds, options.kind_weights, rng);
                auto bad = inject_error(pair.gold_sql, catalog, kind, rng());
                if (bad && accept(*bad, "injected:" + std::string(to_string(kind)))) {
                    ++r.injected;
                    r.max_reattempts_used = std::max(r.max_reattempts_used, attempt);
                    got = true;
                    break;
                }
                if (!bad) ++r.inapplicable;
            }
            if (!got) {
                r.max_reattempts_used = std::max(r.max_reattempts_used, options.max_reattempts);
                break;
            }
        }
        if (r.negatives.size() < options.per_pair) {
            r.short_of_target = true;
            warn("", "only " + std::to_string(r.negatives.size()) + " negative(s) after re-attempts");
        }
    });

    NegativeReport report;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& r = results[i];
        if (r.skipped) report.skipped.push_back(pairs[i].pair_id);
        for (auto& n : r.negatives) report.negatives.push_back(std::move(n));
        report.mined += r.mined;
        report.injected += r.injected;
        report.candidates += r.candidates;
        report.dropped += r.dropped;
        report.inapplicable += r.inapplicable;
        report.max_reattempts_used = std::max(report.max_reattempts_used, r.max_reattempts_used);
        if (r.short_of_target && !r.skipped) ++report.short_pairs;
        for (auto& w : r.warnings) report.warnings.push_back(std::move(w));
    }
    for (const auto& w : report.warnings) spdlog::debug("pair {}: {} {}", w.pair_id, w.reason, w.identifier);
    return report;
}

SftDataset synth_ts(const Corpus& corpus, const SynthOptions& options) {
    auto schemas = render_all(corpus, options.example_rows);
    SftDataset out;
    for (const auto& pair : corpus.pairs()) {
        out.push_back(SftRecord{SftTask::TS,
                                build_ts_prompt(schemas.at(pair.db_id), pair.question, pair.hint, meta_of(pair)).text,
                                pair.gold_sql.text, pair.pair_id});
    }
    return out;
}

SftDataset synth_sl(const Corpus& corpus, const SynthOptions& options, std::vector<Warning>* warnings) {
    auto schemas = render_all(corpus, options.example_rows);
    SftDataset out;
    for (const auto& pair : corpus.pairs()) {
        const auto& catalog = corpus.catalog(pair.db_id);
        SchemaSubset subset;
        try {
            auto ex = extract_schema_elements(pair.gold_sql, catalog, pair.pair_id);
            subset = std::move(ex.subset);
            if (warnings) warnings->insert(warnings->end(), ex.warnings.begin(), ex.warnings.end());
        } catch (const SqlParseError& e) {
            if (warnings) warnings->push_back(Warning{pair.pair_id, pair.gold_sql.text, e.what()});
        }
        if (subset.empty()) {
            if (warnings) warnings->push_back(Warning{pair.pair_id, "", "no schema elements; pair skipped"});
            continue;
        }
        out.push_back(SftRecord{SftTask::SL,
                                build_sl_prompt(schemas.at(pair.db_id), pair.question, pair.hint, meta_of(pair)).text,
                                render_linking(subset, catalog), pair.pair_id});
    }
    return out;
}

SftDataset synth_nc(const Corpus& corpus, const std::vector<NegativeExample>& negatives, const SynthOptions& options) {
    auto schemas = render_all(corpus, options.example_rows);
    SftDataset out;
    for (const auto& pair : corpus.pairs()) {
        out.push_back(SftRecord{
            SftTask::NC_POS,
            build_nc_prompt(schemas.at(pair.db_id), pair.question, pair.hint, pair.gold_sql, "", meta_of(pair)).text,
            std::string(kAffirmativeAnswer), pair.pair_id});
    }
    for (const auto& neg : negatives) {
        const CorpusPair* pair = corpus.find_pair(neg.pair_id);
        if (!pair) continue;
        out.push_back(SftRecord{
            SftTask::NC_NEG,
            build_nc_prompt(schemas.at(pair->db_id), pair->question, pair->hint, neg.bad_sql, "", meta_of(*pair)).text,
            negative_answer(pair->gold_sql.text), pair->pair_id});
    }
    return out;
}

SftDataset synth_cw(const Corpus& corpus, const SynthOptions& options, std::vector<Warning>* warnings) {
    auto schemas = render_all(corpus, options.example_rows);
    SftDataset out;
    const auto& pairs = corpus.pairs();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& pair = pairs[i];
        std::string prefix;
        try {
            prefix = truncate_random(pair.gold_sql, mix_seed(options.seed, i));
        } catch (const std::exception& e) {
            if (warnings) warnings->push_back(Warning{pair.pair_id, pair.gold_sql.text, e.what()});
            continue;
        }
        out.push_back(SftRecord{
            SftTask::CW,
            build_cw_prompt(schemas.at(pair.db_id), pair.question, pair.hint, prefix, meta_of(pair)).text,
            pair.gold_sql.text, pair.pair_id});
    }
    return out;
}

FilterResult filter_noise(const Corpus& corpus, LlmBackend& backend, const FilterOptions& options) {
    auto schemas = render_all(corpus, options.example_rows);
    const auto& pairs = corpus.pairs();
    struct Slot {
        std::optional<std::string> removed_verdict;
        std::optional<std::string> failure;
    };
    std::vector<Slot> slots(pairs.size());
    parallel_for(pairs.size(), std::max(options.workers, backend.parallelism()), [&](std::size_t i) {
        const auto& pair = pairs[i];
        try {
            std::string reply = backend.complete(
                build_filter_prompt(schemas.at(pair.db_id), pair.question, pair.hint, pair.gold_sql, meta_of(pair)),
                options.params);
            if (!parse_nc_response(reply).is_correct) slots[i].removed_verdict = reply;
        } catch (const BackendError& e) {
            slots[i].failure = e.what();
        }
    });

    FilterResult result;
    std::vector<CorpusPair> kept;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (slots[i].failure) {
            spdlog::warn("filter: pair {} kept after backend failure: {}", pairs[i].pair_id, *slots[i].failure);
            result.failures.push_back(Warning{pairs[i].pair_id, "", *slots[i].failure});
        }
        if (slots[i].removed_verdict) {
            result.removed.push_back(FilterRemoval{pairs[i].pair_id, *slots[i].removed_verdict});
        } else {
            kept.push_back(pairs[i]);
        }
    }
    result.kept = corpus.with_pairs(std::move(kept));
    return result;
}

MsftCounts plan_msft_counts(const MsftCounts& available, const MsftCaps& caps) {
    MsftCounts out;
    out.ts = available.ts;
    out.sl = caps.sl ? std::min(*caps.sl, available.sl) : available.sl;
    out.cw = caps.cw ? std::min(*caps.cw, available.cw) : available.cw;
    if (!caps.nc) {
        out.nc_pos = available.nc_pos;
        out.nc_neg = available.nc_neg;
    } else {
        const std::size_t cap = std::min(*caps.nc, available.nc());
        double share = std::clamp(caps.nc_positive_share, 0.0, 1.0);
        std::size_t want_pos = static_cast<std::size_t>(std::floor(static_cast<double>(cap) * share));
        out.nc_pos = std::min(want_pos, available.nc_pos);
        out.nc_neg = std::min(cap - out.nc_pos, available.nc_neg);
        out.nc_pos = std::min(cap - out.nc_neg, available.nc_pos);
    }
    return out;
}

namespace {

SftDataset sample(const SftDataset& items, std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    seeded_shuffle(idx, rng);
    idx.resize(std::min(n, idx.size()));
    std::sort(idx.begin(), idx.end());
    SftDataset out;
    for (auto i : idx) out.push_back(items[i]);
    return out;
}

}  // namespace

MsftResult assemble_msft(const SftDataset& ts, const SftDataset& sl, const SftDataset& nc, const SftDataset& cw,
                         const MsftCaps& caps, std::uint64_t seed) {
    SftDataset nc_pos, nc_neg;
    for (const auto& r : nc) (r.task == SftTask::NC_NEG ? nc_neg : nc_pos).push_back(r);

    MsftCounts available{ts.size(), sl.size(), nc_pos.size(), nc_neg.size(), cw.size()};
    MsftResult result;
    result.counts = plan_msft_counts(available, caps);
    auto check = [&](const char* task, const std::optional<std::size_t>& cap, std::size_t have) {
        if (cap && *cap > have) {
            result.warnings.push_back(Warning{"", task,
                                              "cap " + std::to_string(*cap) + " exceeds the " + std::to_string(have) +
                                                  " available records; taking all"});
        }
    };
    check("SL", caps.sl, available.sl);
    check("NC", caps.nc, available.nc());
    check("CW", caps.cw, available.cw);
    for (const auto& w : result.warnings) spdlog::warn("{}: {}", w.identifier, w.reason);

    std::mt19937_64 rng(seed);
    SftDataset all = ts;
    const std::pair<const SftDataset*, std::size_t> parts[] = {
        {&sl, result.counts.sl}, {&nc_pos, result.counts.nc_pos}, {&nc_neg, result.counts.nc_neg}, {&cw, result.counts.cw}};
    for (const auto& [part, n] : parts) {
        auto picked = sample(*part, n, rng);
        all.insert(all.end(), picked.begin(), picked.end());
    }
    seeded_shuffle(all, rng);
    result.records = std::move(all);
    return result;
}

std::string to_jsonl(const SftDataset& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["instruction"] = r.instruction;
        j["output"] = r.response;
        j["task"] = std::string(to_string(r.task));
        j["source_pair_id"] = r.source_pair_id;
        out += j.dump();
        out += '\n';
    }
    return out;
}

SftDataset parse_sft_jsonl(std::string_view jsonl) {
    SftDataset out;
    std::size_t start = 0;
    while (start < jsonl.size()) {
        auto nl = jsonl.find('\n', start);
        auto line = jsonl.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? jsonl.size() : nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto j = nlohmann::json::parse(line);
        out.push_back(SftRecord{parse_sft_task(j.at("task").get<std::string>()), j.at("instruction").get<std::string>(),
                                j.at("output").get<std::string>(), j.at("source_pair_id").get<std::string>()});
    }
    return out;
}

}  // namespace route
