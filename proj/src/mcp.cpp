#include "route/mcp.hpp"

#include <spdlog/spdlog.h>

namespace route {

McpQuestion question_of(const CorpusPair& pair) {
    return McpQuestion{pair.pair_id, pair.question, pair.hint, pair.gold_sql};
}

std::string_view to_string(CwReason reason) {
    switch (reason) {
        case CwReason::None:
            return "none";
        case CwReason::ExecFailed:
            return "exec_failed";
        case CwReason::Hard:
            return "hard";
    }
    return "none";
}

namespace {

PromptMeta meta_of(const DatabaseCatalog& catalog, const McpQuestion& q) { return PromptMeta{q.pair_id, catalog.db_id()}; }

}  // namespace

LinkResult link_schema(const DatabaseCatalog& catalog, const McpQuestion& q, LlmBackend& backend,
                       const McpOptions& options) {
    LinkResult out;
    const std::string schema = render_schema(catalog, nullptr, options.example_rows);

    std::string sl_reply = backend.complete(build_sl_prompt(schema, q.question, q.hint, meta_of(catalog, q)), options.params);
    SchemaSubset linked = parse_sl_response(sl_reply, catalog, &out.warnings, q.pair_id);

    std::string ts_reply = backend.complete(build_ts_prompt(schema, q.question, q.hint, meta_of(catalog, q)), options.params);
    SchemaSubset pseudo(catalog.db_id());
    out.pseudo_sql = try_extract_sql(ts_reply, SqlOrigin::Predicted);
    if (!out.pseudo_sql) {
        out.warnings.push_back(Warning{q.pair_id, "", "no pseudo SQL in response"});
    } else {
        try {
            auto ex = extract_schema_elements(*out.pseudo_sql, catalog, q.pair_id);
            pseudo = std::move(ex.subset);
            out.warnings.insert(out.warnings.end(), ex.warnings.begin(), ex.warnings.end());
        } catch (const SqlParseError& e) {
            out.warnings.push_back(Warning{q.pair_id, out.pseudo_sql->text, std::string("pseudo SQL: ") + e.what()});
        }
    }

    out.subset = merge(linked, pseudo);
    if (out.subset.empty()) {
        out.subset = SchemaSubset::full(catalog);
        out.fell_back = true;
    }
    return out;
}

SqlQuery generate_sql(const SchemaSubset& subset, const DatabaseCatalog& catalog, const McpQuestion& q,
                      LlmBackend& backend, const McpOptions& options) {
    const std::string schema = render_schema(catalog, &subset, options.example_rows);
    std::string reply = backend.complete(build_ts_prompt(schema, q.question, q.hint, meta_of(catalog, q)), options.params);
    if (auto sql = try_extract_sql(reply, SqlOrigin::Predicted)) return *sql;
    return SqlQuery{"", SqlOrigin::Predicted};
}

NcStep correct_noise(const DatabaseCatalog& catalog, const McpQuestion& q, const SqlQuery& sql,
                     const ExecutionOutcome& outcome, LlmBackend& backend, const McpOptions& options) {
    NcStep step;
    step.sql = sql;
    const std::string schema = render_schema(catalog, nullptr, options.example_rows);
    const std::string exception = outcome.ok() ? std::string() : outcome.exception;
    try {
        std::string reply = backend.complete(
            build_nc_prompt(schema, q.question, q.hint, sql, exception, meta_of(catalog, q)), options.params);
        step.verdict = parse_nc_response(reply);
    } catch (const BackendError& e) {
        step.error = std::string("NC: ") + e.what();
        return step;
    }
    if (!step.verdict.is_correct && step.verdict.corrected_sql) {
        step.candidate_outcome = execute(catalog.db_file(), *step.verdict.corrected_sql, options.timeout_ms);
        if (step.candidate_outcome->ok()) {
            step.sql = *step.verdict.corrected_sql;
            step.applied = true;
        }
    }
    return step;
}

CwStep refine_by_continuation(const DatabaseCatalog& catalog, const McpQuestion& q, const SqlQuery& sql,
                              const std::string& prefix, LlmBackend& backend, const McpOptions& options) {
    CwStep step;
    step.sql = sql;
    step.prefix = prefix.empty() ? std::string("SELECT") : prefix;
    const std::string schema = render_schema(catalog, nullptr, options.example_rows);
    std::string reply;
    try {
        reply = backend.complete(build_cw_prompt(schema, q.question, q.hint, step.prefix, meta_of(catalog, q)),
                                 options.params);
    } catch (const BackendError& e) {
        step.error = std::string("CW: ") + e.what();
        return step;
    }
    step.candidate = try_extract_sql(reply, SqlOrigin::Continued);
    if (!step.candidate) return step;
    step.candidate_outcome = execute(catalog.db_file(), *step.candidate, options.timeout_ms);
    if (step.candidate_outcome->ok()) {
        step.sql = *step.candidate;
        step.applied = true;
    }
    return step;
}

namespace {

/// Counts calls made on behalf of one question.
class CountingBackend : public LlmBackend {
  public:
    explicit CountingBackend(LlmBackend& inner) : inner_(inner) {}
    std::string complete(const PromptText& prompt, const GenerationParams& params) override {
        ++calls;
        return inner_.complete(prompt, params);
    }
    std::size_t calls = 0;

  private:
    LlmBackend& inner_;
};

CwReason cw_trigger(const SqlQuery& sql, const ExecutionOutcome& outcome, const DatabaseCatalog& catalog) {
    if (!outcome.ok()) return CwReason::ExecFailed;
    try {
        return difficulty(sql, catalog) == HardnessLevel::Hard ? CwReason::Hard : CwReason::None;
    } catch (const SqlParseError&) {
        return CwReason::Hard;
    }
}

}  // namespace

McpTrace run_mcp(const DatabaseCatalog& catalog, const McpQuestion& q, const McpOptions& options,
                 LlmBackend& backend) {
    if ((options.oracle_schema || options.oracle_hint) && (!q.gold || q.gold->empty())) {
        throw std::invalid_argument("oracle modes need the gold query of pair " + q.pair_id);
    }
    CountingBackend counted(backend);
    McpTrace trace;
    trace.pair_id = q.pair_id;
    trace.db_id = catalog.db_id();
    trace.final_sql = SqlQuery{"", SqlOrigin::Predicted};
    auto finish = [&] {
        trace.final_outcome = execute(catalog.db_file(), trace.final_sql, options.timeout_ms);
        trace.backend_calls = counted.calls;
        for (const auto& e : trace.errors) spdlog::warn("pair {}: {}", q.pair_id, e);
        return trace;
    };

    // Schema linking.
    try {
        if (options.oracle_schema) {
            auto ex = extract_schema_elements(*q.gold, catalog, q.pair_id);
            trace.linked_subset = std::move(ex.subset);
            trace.warnings = std::move(ex.warnings);
            if (trace.linked_subset.empty()) {
                trace.linked_subset = SchemaSubset::full(catalog);
                trace.schema_fallback = true;
            }
        } else if (options.enable_sl) {
            auto link = link_schema(catalog, q, counted, options);
            trace.linked_subset = std::move(link.subset);
            trace.pseudo_sql = std::move(link.pseudo_sql);
            trace.schema_fallback = link.fell_back;
            trace.warnings = std::move(link.warnings);
        } else {
            trace.linked_subset = SchemaSubset::full(catalog);
        }
    } catch (const BackendError& e) {
        trace.errors.push_back(std::string("SL: ") + e.what());
        return finish();
    } catch (const SqlParseError& e) {
        trace.errors.push_back(std::string("gold does not parse: ") + e.what());
        trace.linked_subset = SchemaSubset::full(catalog);
        trace.schema_fallback = true;
    }

    // Initial query over the linked subset.
    try {
        trace.initial_sql = generate_sql(trace.linked_subset, catalog, q, counted, options);
    } catch (const BackendError& e) {
        trace.errors.push_back(std::string("TS: ") + e.what());
        return finish();
    }
    SqlQuery current = trace.initial_sql;
    ExecutionOutcome outcome = execute(catalog.db_file(), current, options.timeout_ms);
    trace.initial_outcome = outcome;

    // Noise correction against the full catalog with execution feedback.
    if (options.enable_nc) {
        for (int round = 0; round < options.nc_rounds && !current.empty(); ++round) {
            NcStep step = correct_noise(catalog, q, current, outcome, counted, options);
            if (step.error) trace.errors.push_back(*step.error);
            if (step.applied) {
                current = step.sql;
                outcome = *step.candidate_outcome;
                trace.nc_applied = true;
            }
            bool stop = step.verdict.is_correct || step.error.has_value();
            trace.nc_steps.push_back(std::move(step));
            if (stop) break;
        }
    }

    // Continuation for wrong or hard queries.
    if (options.enable_cw) {
        for (int round = 0; round < options.cw_rounds; ++round) {
            CwReason reason = cw_trigger(current, outcome, catalog);
            if (reason == CwReason::None) break;
            if (round == 0) {
                trace.cw_triggered = true;
                trace.cw_reason = reason;
            }
            std::string prefix = options.oracle_hint ? truncate_for_refinement(*q.gold, RefinementStrategy::HalfPrefix)
                                                     : truncate_for_refinement(current, options.strategy);
            CwStep step = refine_by_continuation(catalog, q, current, prefix, counted, options);
            if (step.error) trace.errors.push_back(*step.error);
            bool applied = step.applied;
            if (applied) {
                current = step.sql;
                outcome = *step.candidate_outcome;
                trace.cw_applied = true;
            }
            trace.cw_steps.push_back(std::move(step));
            if (!applied) break;
        }
    }

    trace.final_sql = current;
    trace.backend_calls = counted.calls;
    trace.final_outcome = outcome;
    for (const auto& e : trace.errors) spdlog::warn("pair {}: {}", q.pair_id, e);
    return trace;
}

// ---- JSON ---------------------------------------------------------------------------

nlohmann::ordered_json subset_to_json(const SchemaSubset& subset) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [table, columns] : subset.entries()) {
        auto& arr = j[table] = nlohmann::ordered_json::array();
        for (const auto& c : columns) arr.push_back(c);
    }
    return j;
}

namespace {

nlohmann::ordered_json outcome_json(const std::optional<ExecutionOutcome>& o) {
    if (!o) return nullptr;
    nlohmann::ordered_json j;
    j["status"] = std::string(to_string(o->status));
    if (o->ok()) {
        j["row_count"] = o->rows.size();
    } else {
        j["exception"] = o->exception;
    }
    return j;
}

nlohmann::ordered_json sql_json(const std::optional<SqlQuery>& sql) {
    if (!sql) return nullptr;
    return sql->text;
}

}  // namespace

nlohmann::ordered_json trace_to_json(const McpTrace& t) {
    nlohmann::ordered_json j;
    j["pair_id"] = t.pair_id;
    j["db_id"] = t.db_id;
    j["linked_subset"] = subset_to_json(t.linked_subset);
    j["schema_fallback"] = t.schema_fallback;
    j["pseudo_sql"] = sql_json(t.pseudo_sql);
    j["initial_sql"] = t.initial_sql.text;
    j["initial_outcome"] = outcome_json(t.initial_outcome);
    auto& nc = j["nc"] = nlohmann::ordered_json::array();
    for (const auto& s : t.nc_steps) {
        nlohmann::ordered_json step;
        step["is_correct"] = s.verdict.is_correct;
        step["corrected_sql"] = sql_json(s.verdict.corrected_sql);
        step["candidate_outcome"] = outcome_json(s.candidate_outcome);
        step["applied"] = s.applied;
        if (s.error) step["error"] = *s.error;
        nc.push_back(std::move(step));
    }
    j["nc_applied"] = t.nc_applied;
    j["cw_triggered"] = t.cw_triggered;
    j["cw_reason"] = std::string(to_string(t.cw_reason));
    auto& cw = j["cw"] = nlohmann::ordered_json::array();
    for (const auto& s : t.cw_steps) {
        nlohmann::ordered_json step;
        step["prefix"] = s.prefix;
        step["candidate_sql"] = sql_json(s.candidate);
        step["candidate_outcome"] = outcome_json(s.candidate_outcome);
        step["applied"] = s.applied;
        if (s.error) step["error"] = *s.error;
        cw.push_back(std::move(step));
    }
    j["cw_applied"] = t.cw_applied;
    j["final_sql"] = t.final_sql.text;
    j["final_outcome"] = outcome_json(t.final_outcome);
    j["backend_calls"] = t.backend_calls;
    j["errors"] = t.errors;
    auto& warnings = j["warnings"] = nlohmann::ordered_json::array();
    for (const auto& w : t.warnings) warnings.push_back({{"identifier", w.identifier}, {"reason", w.reason}});
    return j;
}

}  // namespace route
