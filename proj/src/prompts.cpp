#include "route/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "route/identifier.hpp"

namespace route {

std::string_view to_string(TaskTag task) {
    switch (task) {
        case TaskTag::TS:
            return "TS";
        case TaskTag::SL:
            return "SL";
        case TaskTag::NC:
            return "NC";
        case TaskTag::CW:
            return "CW";
        case TaskTag::FILTER:
            return "FILTER";
    }
    return "TS";
}

TaskTag parse_task_tag(std::string_view text) {
    for (auto t : {TaskTag::TS, TaskTag::SL, TaskTag::NC, TaskTag::CW, TaskTag::FILTER}) {
        if (ident_equal(text, to_string(t))) return t;
    }
    throw std::invalid_argument("unknown task tag: " + std::string(text));
}

std::string negative_answer(std::string_view sql) {
    return "The execution results of the SQL query cannot correctly answer the question. "
           "The correct SQL query should be: " +
           std::string(sql);
}

namespace {

constexpr std::string_view kTsHeader =
    "### Task: Text-to-SQL\n"
    "Write a SQLite query that answers the question over the database described below.";

constexpr std::string_view kSlHeader =
    "### Task: Schema linking\n"
    "Identify the tables and columns of the database described below that are needed to answer the question.";

constexpr std::string_view kNcHeader =
    "### Task: Noise correction\n"
    "Judge whether the execution results of the SQL query can correctly answer the question. "
    "If they cannot, provide a revised SQL query.";

constexpr std::string_view kFilterHeader =
    "### Task: Noise discrimination\n"
    "Judge whether the SQL query is a correct answer to the question. "
    "If it is not, provide the correct SQL query.";

constexpr std::string_view kCwHeader =
    "### Task: Continuation writing\n"
    "The SQL query below is incomplete. Continue it into a complete and valid SQLite query that answers the "
    "question.";

constexpr std::string_view kSqlAnswerFormat =
    "### Answer format\n"
    "Reply with exactly one SQL statement inside a ```sql fenced code block.";

constexpr std::string_view kSlAnswerFormat =
    "### Answer format\n"
    "Reply with one line per relevant table, written as `table: column1, column2`, and nothing else.";

constexpr std::string_view kCwAnswerFormat =
    "### Answer format\n"
    "Reply with the complete SQL statement, including the given beginning, inside a ```sql fenced code block.";

std::string verdict_format() {
    return "### Answer format\n"
           "If the SQL query is correct, reply exactly: " +
           std::string(kAffirmativeAnswer) +
           "\n"
           "Otherwise reply: " +
           negative_answer("<corrected SQL query>");
}

void section(std::string& out, std::string_view title, std::string_view body) {
    out += "\n\n### ";
    out += title;
    out += '\n';
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.remove_suffix(1);
    out += body;
}

std::string base(std::string_view header, std::string_view schema_text, std::string_view question,
                 const std::optional<std::string>& hint) {
    if (std::all_of(question.begin(), question.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw PromptError("question must not be empty");
    }
    std::string out(header);
    section(out, "Database schema", schema_text);
    section(out, "Question", question);
    if (hint && !hint->empty()) section(out, "Hint", *hint);
    return out;
}

PromptText finish(TaskTag task, std::string text, std::string_view answer_format, PromptMeta meta) {
    text += "\n\n";
    text += answer_format;
    text += '\n';
    return PromptText{task, std::move(text), std::move(meta)};
}

void require_sql(std::string_view sql) {
    if (sql.empty()) throw PromptError("SQL query must not be empty");
}

}  // namespace

PromptText build_ts_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, PromptMeta meta) {
    return finish(TaskTag::TS, base(kTsHeader, schema_text, question, hint), kSqlAnswerFormat, std::move(meta));
}

PromptText build_sl_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, PromptMeta meta) {
    return finish(TaskTag::SL, base(kSlHeader, schema_text, question, hint), kSlAnswerFormat, std::move(meta));
}

PromptText build_nc_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, const SqlQuery& sql, std::string_view exception,
                           PromptMeta meta) {
    require_sql(sql.text);
    std::string text = base(kNcHeader, schema_text, question, hint);
    section(text, "SQL query", sql.text);
    if (!exception.empty()) section(text, "Execution exception", exception);
    return finish(TaskTag::NC, std::move(text), verdict_format(), std::move(meta));
}

PromptText build_filter_prompt(std::string_view schema_text, std::string_view question,
                               const std::optional<std::string>& hint, const SqlQuery& sql, PromptMeta meta) {
    require_sql(sql.text);
    std::string text = base(kFilterHeader, schema_text, question, hint);
    section(text, "SQL query", sql.text);
    return finish(TaskTag::FILTER, std::move(text), verdict_format(), std::move(meta));
}

PromptText build_cw_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, std::string_view partial_sql, PromptMeta meta) {
    require_sql(partial_sql);
    std::string text = base(kCwHeader, schema_text, question, hint);
    section(text, "Incomplete SQL query", partial_sql);
    return finish(TaskTag::CW, std::move(text), kCwAnswerFormat, std::move(meta));
}

// ---- schema linking answers ------------------------------------------------------

std::string render_linking(const SchemaSubset& subset, const DatabaseCatalog& catalog) {
    std::string out;
    for (const auto& table : catalog.tables()) {
        auto it = subset.entries().find(table.name);
        if (it == subset.entries().end()) continue;
        out += table.name;
        out += ':';
        bool first = true;
        for (const auto& col : table.columns) {
            if (!it->second.contains(col.name)) continue;
            out += first ? " " : ", ";
            out += col.name;
            first = false;
        }
        out += '\n';
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view strip_markup(std::string_view s) {
    s = trim(s);
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '`')) s = trim(s.substr(1));
    while (!s.empty() && (s.back() == '`' || s.back() == '.' || s.back() == ',')) s = trim(s.substr(0, s.size() - 1));
    return s;
}

}  // namespace

SchemaSubset parse_sl_response(std::string_view text, const DatabaseCatalog& catalog, std::vector<Warning>* warnings,
                               std::string_view pair_id) {
    SchemaSubset out(catalog.db_id());
    auto warn = [&](std::string_view identifier, std::string reason) {
        if (warnings) warnings->push_back(Warning{std::string(pair_id), std::string(identifier), std::move(reason)});
    };
    const auto table_names = catalog.table_names();
    std::size_t parsed_lines = 0;

    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        line = trim(line);
        if (line.empty() || line.starts_with("```")) continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            warn(line, "not a linking line");
            continue;
        }
        std::string_view table_raw = strip_markup(line.substr(0, colon));
        auto idx = resolve_identifier(table_raw, table_names);
        if (!idx) {
            warn(table_raw, "unknown table");
            continue;
        }
        ++parsed_lines;
        const TableSchema& table = catalog.tables()[*idx];
        out.add_table(table.name);
        const auto column_names = table.column_names();
        std::string_view rest = line.substr(colon + 1);
        while (!rest.empty()) {
            auto comma = rest.find(',');
            std::string_view item = strip_markup(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            if (item.empty()) continue;
            if (auto dot = item.find('.'); dot != std::string_view::npos && !item.starts_with('"')) {
                item = item.substr(dot + 1);
            }
            if (auto c = resolve_identifier(item, column_names)) {
                out.add_column(table.name, column_names[*c]);
            } else {
                warn(item, "unknown column of " + table.name);
            }
        }
    }
    if (parsed_lines == 0) warn(trim(text).substr(0, 80), "no linking lines found");
    return out;
}

// ---- SQL extraction ----------------------------------------------------------------

namespace {

/// Contents of the first ``` fenced block at or after `from`.
std::optional<std::string_view> first_fenced_block(std::string_view text, std::size_t from = 0) {
    auto open = text.find("```", from);
    if (open == std::string_view::npos) return std::nullopt;
    auto body = text.find('\n', open + 3);
    if (body == std::string_view::npos) return std::nullopt;
    ++body;
    auto close = text.find("```", body);
    if (close == std::string_view::npos) close = text.size();
    return text.substr(body, close - body);
}

/// Offset of the first SELECT or WITH ... AS ( keyword at or after `from`.
std::optional<std::size_t> find_statement_start(std::string_view text, std::size_t from) {
    static const std::regex kStart(
        R"((^|[^A-Za-z0-9_])(SELECT\b|WITH\s+(RECURSIVE\s+)?[A-Za-z_"`\[][^\s(]*\s*(\([^)]*\)\s*)?AS\s*(NOT\s+)?(MATERIALIZED\s*)?\())",
        std::regex::icase | std::regex::ECMAScript);
    std::string hay(text.substr(from));
    std::smatch m;
    if (!std::regex_search(hay, m, kStart)) return std::nullopt;
    return from + static_cast<std::size_t>(m.position(2));
}

/// The statement starting at `start`, ending at a top-level ';', a blank line
/// or the end of the text. Quoted literals are skipped intact.
std::string_view statement_at(std::string_view text, std::size_t start) {
    std::size_t i = start;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\'' || c == '"' || c == '`') {
            auto close = text.find(c, i + 1);
            if (close == std::string_view::npos) return text.substr(start);
            i = close + 1;
            continue;
        }
        if (c == ';') break;
        if (c == '\n') {
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
            if (j < text.size() && text[j] == '\n') break;
            if (text.substr(j).starts_with("```")) break;
        }
        ++i;
    }
    return text.substr(start, i - start);
}

std::optional<SqlQuery> extract_from(std::string_view text, std::size_t from, SqlOrigin origin) {
    std::optional<std::string_view> candidate;
    if (auto fenced = first_fenced_block(text, from); fenced && !trim(*fenced).empty()) {
        candidate = fenced;
    } else if (auto start = find_statement_start(text, from)) {
        candidate = statement_at(text, *start);
    }
    if (!candidate) return std::nullopt;
    try {
        return normalize(*candidate, origin);
    } catch (const SqlError&) {
        return std::nullopt;
    }
}

std::size_t find_ci(std::string_view hay, std::string_view needle) {
    auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it == hay.end() ? std::string_view::npos : static_cast<std::size_t>(it - hay.begin());
}

}  // namespace

std::optional<SqlQuery> try_extract_sql(std::string_view text, SqlOrigin origin) {
    return extract_from(text, 0, origin);
}

SqlQuery extract_sql(std::string_view text, SqlOrigin origin) {
    if (auto sql = try_extract_sql(text, origin)) return *sql;
    throw ExtractionError("no SQL statement found in response");
}

NcVerdict parse_nc_response(std::string_view text) {
    NcVerdict verdict;
    auto at = find_ci(text, kNegativePhrase);
    if (at == std::string_view::npos) return verdict;
    verdict.is_correct = false;
    verdict.corrected_sql = extract_from(text, at + kNegativePhrase.size(), SqlOrigin::Corrected);
    return verdict;
}

}  // namespace route
