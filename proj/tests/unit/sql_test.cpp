#include <gtest/gtest.h>

#include "route/identifier.hpp"
#include "route/sql_lexer.hpp"
#include "route/sql_parser.hpp"
#include "route/sql_query.hpp"

using namespace route;

TEST(Normalize, CollapsesWhitespaceOutsideLiterals) {
    auto q = normalize("SELECT   a ,\n\tb  FROM t WHERE s = 'x   y'  ;", SqlOrigin::Gold);
    EXPECT_EQ(q.text, "SELECT a , b FROM t WHERE s = 'x   y'");
    EXPECT_EQ(q.origin, SqlOrigin::Gold);
}

TEST(Normalize, StripsFencesCommentsAndSemicolons) {
    EXPECT_EQ(normalize("```sql\nSELECT 1 -- one\n/* two */ ;;\n```").text, "SELECT 1");
    EXPECT_EQ(normalize("SELECT \"a  b\", [c  d], `e  f` FROM t").text, "SELECT \"a  b\", [c  d], `e  f` FROM t");
}

TEST(Normalize, CommentMarkersInsideStringsSurvive) {
    EXPECT_EQ(normalize("SELECT '--not a comment' , '/*x*/'").text, "SELECT '--not a comment' , '/*x*/'");
}

TEST(Normalize, EmptyInputThrows) {
    EXPECT_THROW(normalize("   ;  -- nothing"), SqlError);
    EXPECT_THROW(normalize("```sql\n```"), SqlError);
}

TEST(Normalize, Idempotent) {
    for (const char* sql : {"SELECT  a FROM t ;", "WITH x AS (SELECT 1) SELECT * FROM x", "SELECT 'a''b'"}) {
        auto once = normalize(sql);
        EXPECT_EQ(normalize(once.text).text, once.text) << sql;
    }
}

TEST(SqlOrigin, Names) {
    EXPECT_EQ(to_string(SqlOrigin::Gold), "gold");
    EXPECT_EQ(to_string(SqlOrigin::Continued), "continued");
    EXPECT_EQ(to_string(SqlOrigin::Injected), "injected");
}

TEST(Lexer, TokenKinds) {
    auto toks = tokenize("SELECT \"q\", 'it''s', 1.5e3, X'0A', ?1, a.b FROM [t] WHERE x >= 2;");
    std::vector<TokenKind> kinds;
    for (const auto& t : toks) kinds.push_back(t.kind);
    std::vector<TokenKind> expected = {
        TokenKind::Word,   TokenKind::QuotedIdent, TokenKind::Comma,    TokenKind::String, TokenKind::Comma,
        TokenKind::Number, TokenKind::Comma,       TokenKind::Blob,     TokenKind::Comma,  TokenKind::Param,
        TokenKind::Comma,  TokenKind::Word,        TokenKind::Dot,      TokenKind::Word,   TokenKind::Word,
        TokenKind::QuotedIdent, TokenKind::Word,   TokenKind::Word,     TokenKind::Operator, TokenKind::Number,
        TokenKind::Semicolon};
    EXPECT_EQ(kinds, expected);
    EXPECT_EQ(toks[3].text, "'it''s'");
    EXPECT_TRUE(toks[0].is("select"));
    EXPECT_TRUE(toks[18].is_op(">="));
}

TEST(Lexer, OffsetsPointIntoSource) {
    std::string sql = "SELECT  name FROM t";
    for (const auto& t : tokenize(sql)) EXPECT_EQ(sql.substr(t.offset, t.text.size()), t.text);
}

TEST(Lexer, UnterminatedLiteralThrows) {
    EXPECT_THROW(tokenize("SELECT 'abc"), SqlParseError);
    EXPECT_THROW(tokenize("SELECT \"abc"), SqlParseError);
    EXPECT_THROW(tokenize("SELECT [abc"), SqlParseError);
}

TEST(Parser, SimpleScope) {
    auto p = parse_sql("SELECT T1.name, count(*) FROM user_profiles AS T1 JOIN tweets T2 ON T1.uid = T2.uid");
    ASSERT_EQ(p.scopes.size(), 1u);
    const auto& s = p.scopes[0];
    ASSERT_EQ(s.sources.size(), 2u);
    EXPECT_EQ(s.sources[0].name, "user_profiles");
    EXPECT_EQ(s.sources[0].alias, "T1");
    EXPECT_TRUE(s.sources[1].joined);
    EXPECT_TRUE(s.sources[1].via_join);
    EXPECT_TRUE(s.count_star);
    ASSERT_GE(s.columns.size(), 3u);
    EXPECT_EQ(s.columns[0].qualifier, "T1");
    EXPECT_EQ(s.columns[0].name, "name");
    EXPECT_EQ(s.columns[0].clause, Clause::Select);
}

TEST(Parser, ClausesAreTagged) {
    auto p = parse_sql("SELECT a FROM t WHERE b = 1 GROUP BY c HAVING count(d) > 1 ORDER BY e LIMIT 3");
    std::map<std::string, Clause> seen;
    for (const auto& c : p.scopes[0].columns) seen[c.name] = c.clause;
    EXPECT_EQ(seen["a"], Clause::Select);
    EXPECT_EQ(seen["b"], Clause::Where);
    EXPECT_EQ(seen["c"], Clause::GroupBy);
    EXPECT_EQ(seen["d"], Clause::Having);
    EXPECT_EQ(seen["e"], Clause::OrderBy);
    EXPECT_TRUE(p.outer_order_by);
}

TEST(Parser, SubqueriesGetChildScopes) {
    auto p = parse_sql("SELECT name FROM u WHERE uid NOT IN (SELECT uid FROM tweets)");
    ASSERT_EQ(p.scopes.size(), 2u);
    EXPECT_EQ(p.scopes[1].parent, 0);
    EXPECT_EQ(p.scopes[1].sources[0].name, "tweets");
    EXPECT_FALSE(p.outer_order_by);
}

TEST(Parser, CompoundSpans) {
    auto p = parse_sql("SELECT a FROM t UNION SELECT b FROM u EXCEPT SELECT c FROM v ORDER BY 1");
    ASSERT_EQ(p.compounds.size(), 1u);
    EXPECT_EQ(p.compounds[0].cores.size(), 3u);
    EXPECT_EQ(p.compounds[0].operators.size(), 2u);
    EXPECT_TRUE(p.outer_order_by);
}

TEST(Parser, CteAndDerivedTables) {
    auto p = parse_sql("WITH top(x) AS (SELECT a FROM t) SELECT x, d.y FROM top JOIN (SELECT y FROM u) AS d");
    const auto& root = p.scopes[p.root_scope];
    ASSERT_EQ(root.sources.size(), 2u);
    EXPECT_TRUE(root.sources[0].is_cte);
    EXPECT_FALSE(root.sources[0].physical());
    EXPECT_GE(root.sources[1].derived_scope, 0);
    EXPECT_EQ(root.sources[1].alias, "d");
}

TEST(Parser, UsingColumnsRecorded) {
    auto p = parse_sql("SELECT * FROM a JOIN b USING (id, k)");
    EXPECT_EQ(p.scopes[0].sources[1].using_columns, (std::vector<std::string>{"id", "k"}));
    EXPECT_TRUE(p.scopes[0].output_has_star);
}

TEST(Parser, WindowAndCaseAndCast) {
    EXPECT_NO_THROW(parse_sql("SELECT rank() OVER (PARTITION BY a ORDER BY b DESC) FROM t"));
    EXPECT_NO_THROW(parse_sql("SELECT CASE WHEN a > 1 THEN 'x' ELSE 'y' END, CAST(b AS REAL) FROM t"));
    EXPECT_NO_THROW(parse_sql("SELECT a FROM t WHERE EXISTS (SELECT 1 FROM u WHERE u.k = t.k) AND b BETWEEN 1 AND 2"));
    EXPECT_NO_THROW(parse_sql("VALUES (1, 2), (3, 4)"));
    EXPECT_NO_THROW(parse_sql("SELECT a FROM t WHERE b LIKE '%x%' ESCAPE '\\' AND c IS NOT NULL;"));
}

TEST(Parser, MarksDoubleQuotedBareNames) {
    auto p = parse_sql("SELECT a FROM t WHERE b = \"Mary\"");
    bool found = false;
    for (const auto& c : p.scopes[0].columns) {
        if (c.name == "\"Mary\"") {
            found = true;
            EXPECT_TRUE(c.double_quoted);
        }
    }
    EXPECT_TRUE(found);
}

TEST(Parser, RejectsNonQueriesAndGarbage) {
    EXPECT_THROW(parse_sql("DELETE FROM t"), SqlParseError);
    EXPECT_THROW(parse_sql("SELECT FROM"), SqlParseError);
    EXPECT_THROW(parse_sql("SELECT a FROM t WHERE"), SqlParseError);
    EXPECT_THROW(parse_sql("SELECT a FROM t; SELECT b FROM u"), SqlParseError);
    EXPECT_THROW(parse_sql("SELEC 1"), SqlParseError);
}

TEST(Parser, ErrorCarriesOffset) {
    try {
        parse_sql("SELECT a FROM t WHERE )");
        FAIL();
    } catch (const SqlParseError& e) {
        EXPECT_EQ(e.offset(), 22u);
    }
}

TEST(Identifier, Ladder) {
    std::vector<std::string> cands = {"Name", "\"Party\"", "State"};
    MatchStage stage{};
    EXPECT_EQ(resolve_identifier("name", cands, &stage), 0u);
    EXPECT_EQ(stage, MatchStage::Exact);
    EXPECT_EQ(resolve_identifier("Party", cands, &stage), 1u);
    EXPECT_EQ(stage, MatchStage::Unquoted);
    EXPECT_EQ(resolve_identifier("Stat", cands, &stage), 2u);
    EXPECT_EQ(stage, MatchStage::Fuzzy);
    EXPECT_FALSE(resolve_identifier("Sta", cands).has_value());
    EXPECT_FALSE(resolve_identifier("xyz", cands).has_value());
}

TEST(Identifier, ShortNamesOnlyMatchExactly) {
    std::vector<std::string> cands = {"id", "f1"};
    EXPECT_FALSE(resolve_identifier("f2", cands).has_value());
    EXPECT_EQ(resolve_identifier("F1", cands), 1u);
}

TEST(Identifier, EditDistance) {
    EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
    EXPECT_EQ(edit_distance("ABC", "abc"), 0u);
    EXPECT_EQ(edit_distance("", "abc"), 3u);
}
