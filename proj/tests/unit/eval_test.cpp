#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "route/eval.hpp"
#include "route/sqlkit.hpp"

using namespace route;
using route::testing::catalog_of;
using route::testing::mini_corpus;

namespace {

std::vector<Prediction> gold_predictions() {
    std::vector<Prediction> out;
    for (const auto& p : mini_corpus().pairs()) out.push_back({p.pair_id, p.db_id, SqlQuery{p.gold_sql.text}});
    return out;
}

}  // namespace

TEST(EvaluateEx, GoldAsPredictionsIsPerfect) {
    auto r = evaluate_ex(mini_corpus(), gold_predictions());
    EXPECT_EQ(r.n_pairs, 20u);
    EXPECT_EQ(r.n_correct, 20u);
    EXPECT_DOUBLE_EQ(r.ex_overall, 1.0);
    EXPECT_EQ(r.missing, 0u);
    EXPECT_EQ(r.gold_failures, 0u);
    EXPECT_EQ(r.by_hardness.at("simple").n + r.by_hardness.at("medium").n + r.by_hardness.at("hard").n, 20u);
    EXPECT_EQ(r.by_label.at("moderate").n, 2u);
}

TEST(EvaluateEx, MissingWrongAndUnknown) {
    auto preds = gold_predictions();
    preds.erase(preds.begin());                          // pair 0 missing
    preds[0].sql = SqlQuery{"SELECT count(*) FROM follows"};  // pair 1 wrong
    preds[1].sql = SqlQuery{"SELECT nme FROM user_profiles"};  // pair 2 fails
    preds.push_back({"999", "social", SqlQuery{"SELECT 1"}});
    preds.push_back({"3", "social", SqlQuery{"SELECT 1"}});  // duplicate id: the first one counts
    auto r = evaluate_ex(mini_corpus(), preds, kDefaultTimeoutMs, 2);
    EXPECT_EQ(r.n_correct, 17u);
    EXPECT_EQ(r.missing, 1u);
    EXPECT_EQ(r.unknown_predictions, (std::vector<std::string>{"999"}));
    EXPECT_TRUE(r.pairs[0].missing);
    EXPECT_EQ(r.pairs[0].pred_status, "missing");
    EXPECT_EQ(r.pairs[2].pred_status, "error");
    EXPECT_NE(r.pairs[2].pred_exception.find("no such column"), std::string::npos);
    EXPECT_TRUE(r.pairs[3].correct);
    EXPECT_DOUBLE_EQ(r.ex_overall, 17.0 / 20.0);
}

TEST(EvaluateEx, EmptyCorpus) {
    auto r = evaluate_ex(mini_corpus().with_pairs({}), {});
    EXPECT_EQ(r.n_pairs, 0u);
    EXPECT_DOUBLE_EQ(r.ex_overall, 0.0);
}

TEST(Predictions, ParseToleratesTruncatedTail) {
    std::string text = "{\"pair_id\":\"1\",\"db_id\":\"social\",\"sql\":\"SELECT 1\"}\n"
                       "{\"pair_id\":2,\"sql\":\"SELECT 2\"}\n"
                       "{\"pair_id\":\"3\",\"sq";
    auto preds = parse_predictions(text);
    ASSERT_EQ(preds.size(), 2u);
    EXPECT_EQ(preds[1].pair_id, "2");
    EXPECT_EQ(preds[1].db_id, "");
    EXPECT_THROW(parse_predictions("garbage\n{\"pair_id\":\"1\",\"sql\":\"x\"}\n"), std::runtime_error);
}

TEST(Predictions, LineRoundTrip) {
    Prediction p{"7", "social", SqlQuery{"SELECT \"a\" FROM t"}};
    auto back = parse_predictions(prediction_line(p) + "\n");
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].pair_id, "7");
    EXPECT_EQ(back[0].sql.text, p.sql.text);
}

TEST(Reports, TextAndJson) {
    auto r = evaluate_ex(mini_corpus(), gold_predictions());
    auto text = render_report(r);
    EXPECT_NE(text.find("overall                        20     100.00"), std::string::npos) << text;
    EXPECT_NE(text.find(kScorerSemantics), std::string::npos);
    auto j = report_to_json(r);
    EXPECT_EQ(j["n_correct"], 20);
    EXPECT_EQ(j["pairs"].size(), 20u);
    EXPECT_EQ(j["scorer_semantics"], std::string(kScorerSemantics));
}

TEST(Linking, MicroAveraged) {
    LinkingReport r;
    SchemaSubset gold("social"), pred("social");
    gold.add_column("follows", "f1");
    gold.add_column("tweets", "uid");
    pred.add_column("follows", "f1");
    pred.add_column("follows", "f2");
    accumulate_linking(r, gold, pred);
    EXPECT_DOUBLE_EQ(r.table_recall, 0.5);
    EXPECT_DOUBLE_EQ(r.table_precision, 1.0);
    EXPECT_DOUBLE_EQ(r.column_recall, 0.5);
    EXPECT_DOUBLE_EQ(r.column_precision, 0.5);
    accumulate_linking(r, gold, gold);
    EXPECT_DOUBLE_EQ(r.table_recall, 3.0 / 4.0);
    EXPECT_DOUBLE_EQ(r.column_precision, 3.0 / 4.0);
}

TEST(Linking, ZeroDenominatorsGiveZero) {
    LinkingReport r;
    accumulate_linking(r, SchemaSubset("social"), SchemaSubset("social"));
    EXPECT_DOUBLE_EQ(r.table_recall, 0.0);
    EXPECT_DOUBLE_EQ(r.column_precision, 0.0);
}

TEST(Linking, GoldSubsetsScorePerfectly) {
    std::map<std::string, SchemaSubset> predicted;
    for (const auto& p : mini_corpus().pairs()) {
        predicted[p.pair_id] = extract_schema_elements(p.gold_sql, catalog_of(p.db_id)).subset;
    }
    auto r = linking_metrics(mini_corpus(), predicted);
    EXPECT_EQ(r.n_pairs, 20u);
    EXPECT_DOUBLE_EQ(r.table_recall, 1.0);
    EXPECT_DOUBLE_EQ(r.column_precision, 1.0);
    auto none = linking_metrics(mini_corpus(), {});
    EXPECT_DOUBLE_EQ(none.table_recall, 0.0);
    EXPECT_NE(render_report(r).find("100.00"), std::string::npos);
    EXPECT_EQ(report_to_json(r)["averaging"], "micro");
}
