#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "fixtures.hpp"
#include "route/llm.hpp"
#include "route/sqlkit.hpp"
#include "route/util.hpp"

using namespace route;
using route::testing::entry;
using route::testing::mini_corpus;

namespace {

PromptText prompt(TaskTag task, std::string pair_id, std::string text = "prompt body") {
    return PromptText{task, std::move(text), PromptMeta{std::move(pair_id), "db"}};
}

}  // namespace

TEST(GenerationParams, Validate) {
    EXPECT_NO_THROW(GenerationParams{}.validate());
    GenerationParams p;
    p.temperature = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.max_tokens = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(MockBackend, FirstMatchWins) {
    MockBackend m({entry(TaskTag::TS, "specific", "3"), entry(TaskTag::TS, "generic"), entry(TaskTag::NC, "nc")});
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "3"), {}), "specific");
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "4"), {}), "generic");
    EXPECT_EQ(m.complete(prompt(TaskTag::NC, "4"), {}), "nc");
    EXPECT_THROW(m.complete(prompt(TaskTag::CW, "4"), {}), BackendError);
    EXPECT_EQ(m.call_count(), 4u);
    auto calls = m.calls();
    EXPECT_EQ(calls[0].task, TaskTag::TS);
    EXPECT_EQ(calls[0].pair_id, "3");
    EXPECT_EQ(calls[0].prompt_sha256, sha256_hex("prompt body"));
}

TEST(MockBackend, ConsumeOnceAdvances) {
    auto first = entry(TaskTag::TS, "one");
    first.consume_once = true;
    MockBackend m({first, entry(TaskTag::TS, "two")});
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "1"), {}), "one");
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "1"), {}), "two");
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "1"), {}), "two");
}

TEST(MockBackend, RegexAndHashSelectors) {
    ScriptEntry by_regex;
    by_regex.regex = "Question\\n.*dogs";
    by_regex.response = "dogs";
    ScriptEntry by_hash;
    by_hash.prompt_sha256 = sha256_hex("exact");
    by_hash.response = "hash";
    MockBackend m({by_regex, by_hash, entry(TaskTag::TS, "fallback")});
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "1", "### Question\nhow many dogs"), {}), "dogs");
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "1", "exact"), {}), "hash");
    EXPECT_EQ(m.complete(prompt(TaskTag::TS, "1", "other"), {}), "fallback");
}

TEST(MockBackend, ErrorNamesTaskAndPair) {
    MockBackend m({});
    try {
        m.complete(prompt(TaskTag::SL, "12"), {});
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_STREQ(e.what(), "mock script has no entry for task SL, pair 12");
    }
}

TEST(Script, ParseSerializeRoundTrip) {
    const std::string text =
        "{\"task\":\"TS\",\"pair_id\":\"1\",\"response\":\"a\"}\n"
        "\n"
        "{\"regex\":\"x+\",\"response\":\"b\",\"consume_once\":true}\n"
        "{\"task\":\"FILTER\",\"prompt_sha256\":\"abc\",\"response\":\"c\"}\n";
    auto entries = parse_script(text);
    ASSERT_EQ(entries.size(), 3u);
    EXPECT_EQ(entries[0].task, TaskTag::TS);
    EXPECT_FALSE(entries[1].task.has_value());
    EXPECT_TRUE(entries[1].consume_once);
    EXPECT_EQ(entries[2].prompt_sha256, "abc");
    auto again = parse_script(serialize_script(entries));
    EXPECT_EQ(serialize_script(again), serialize_script(entries));
}

TEST(Script, MalformedLinesThrow) {
    EXPECT_THROW(parse_script("{\"task\":\"TS\"}\n"), std::invalid_argument);
    EXPECT_THROW(parse_script("{\"task\":\"XX\",\"response\":\"a\"}\n"), std::invalid_argument);
    EXPECT_THROW(parse_script("not json\n"), std::invalid_argument);
    EXPECT_THROW(parse_script("{\"regex\":\"(\",\"response\":\"a\"}\n"), std::invalid_argument);
}

TEST(Script, EchoGoldAnswersEveryTask) {
    const auto& corpus = mini_corpus();
    MockBackend m(echo_gold_script(corpus));
    for (const auto& pair : corpus.pairs()) {
        auto ts = m.complete(prompt(TaskTag::TS, pair.pair_id), {});
        EXPECT_EQ(ts, "```sql\n" + pair.gold_sql.text + "\n```");
        auto sl = m.complete(prompt(TaskTag::SL, pair.pair_id), {});
        const auto& cat = corpus.catalog(pair.db_id);
        EXPECT_EQ(parse_sl_response(sl, cat), extract_schema_elements(pair.gold_sql, cat).subset);
        EXPECT_EQ(m.complete(prompt(TaskTag::NC, pair.pair_id), {}), kAffirmativeAnswer);
        EXPECT_EQ(m.complete(prompt(TaskTag::FILTER, pair.pair_id), {}), kAffirmativeAnswer);
    }
}

TEST(RemoteBackend, RequestBodyIsStable) {
    GenerationParams p;
    p.stop = {";"};
    auto body = RemoteBackend::request_body("m1", prompt(TaskTag::TS, "1", "hi"), p);
    EXPECT_EQ(body,
              "{\"model\":\"m1\",\"messages\":[{\"role\":\"user\",\"content\":\"hi\"}],\"temperature\":0.01,"
              "\"max_tokens\":1024,\"stop\":[\";\"]}");
}

TEST(RemoteBackend, ConfigValidation) {
    RemoteConfig c;
    EXPECT_THROW(RemoteBackend{c}, std::invalid_argument);
    c.endpoint = "localhost:1";
    c.model = "m";
    EXPECT_THROW(RemoteBackend{c}, std::invalid_argument);
}

namespace {

/// Local chat-completions stub answering with a scripted status sequence.
class StubServer {
  public:
    explicit StubServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            std::size_t n = hits_++;
            last_body_ = req.body;
            last_auth_ = req.get_header_value("Authorization");
            int status = n < statuses_.size() ? statuses_[n] : 200;
            res.status = status;
            if (status == 200) {
                nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "SELECT 1"}}}}}}};
                res.set_content(j.dump(), "application/json");
            } else {
                res.set_content("{\"error\":\"busy\"}", "application/json");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    std::size_t hits() const { return hits_; }
    std::string last_body_, last_auth_;

  private:
    std::vector<int> statuses_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<std::size_t> hits_{0};
};

RemoteConfig config_for(const StubServer& s) {
    RemoteConfig c;
    c.endpoint = s.endpoint();
    c.model = "stub";
    c.api_key_env = "ROUTE_TEST_KEY";
    c.initial_backoff_ms = 1;
    c.max_backoff_ms = 4;
    c.request_timeout_s = 5;
    return c;
}

}  // namespace

TEST(RemoteBackend, RetriesServerErrorsThenSucceeds) {
    ::setenv("ROUTE_TEST_KEY", "sekret", 1);
    StubServer s({500, 503});
    RemoteBackend b(config_for(s));
    EXPECT_EQ(b.complete(prompt(TaskTag::TS, "1", "hello"), {}), "SELECT 1");
    EXPECT_EQ(s.hits(), 3u);
    EXPECT_EQ(s.last_auth_, "Bearer sekret");
    EXPECT_EQ(nlohmann::json::parse(s.last_body_)["messages"][0]["content"], "hello");
}

TEST(RemoteBackend, GivesUpAfterMaxAttempts) {
    StubServer s({429, 429, 429, 429});
    RemoteBackend b(config_for(s));
    EXPECT_THROW(b.complete(prompt(TaskTag::TS, "1"), {}), BackendError);
    EXPECT_EQ(s.hits(), 3u);
}

TEST(RemoteBackend, ClientErrorsAreNotRetried) {
    StubServer s({400});
    RemoteBackend b(config_for(s));
    EXPECT_THROW(b.complete(prompt(TaskTag::TS, "1"), {}), BackendError);
    EXPECT_EQ(s.hits(), 1u);
}

TEST(RemoteBackend, TransportFailureIsBackendError) {
    RemoteConfig c;
    c.endpoint = "http://127.0.0.1:1/v1";
    c.model = "m";
    c.max_attempts = 2;
    c.initial_backoff_ms = 1;
    RemoteBackend b(c);
    EXPECT_THROW(b.complete(prompt(TaskTag::TS, "1"), {}), BackendError);
}
