#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include <httplib.h>

#include "gywi/ideagen.hpp"
#include "gywi/providers.hpp"
#include "gywi/retrieval.hpp"
#include "gywi/util.hpp"

using namespace gywi;
using nlohmann::json;

TEST_CASE("mock chat is deterministic and scriptable") {
    providers::MockChatProvider chat(42);
    const std::string prompt = "free-form question with no recognized cue";
    CHECK(chat.chat_user(prompt) == chat.chat_user(prompt));
    CHECK(chat.chat_user(prompt).rfind("mock-response ", 0) == 0);

    providers::MockChatProvider other(43);
    CHECK(chat.chat_user(prompt) != other.chat_user(prompt));

    chat.script(prompt, "canned");
    CHECK(chat.chat_user(prompt) == "canned");
}

TEST_CASE("mock chat emits parseable idea XML for generation prompts") {
    providers::MockChatProvider chat(7);
    const std::string prompt =
        "Abstract: we study retrieval pipelines\nPlease structure your response using the "
        "following XML format:\n<topic>...</topic>";
    const auto idea = ideagen::parse_idea_xml(chat.chat_user(prompt));
    CHECK(idea.motivation.find("we study retrieval pipelines") != std::string::npos);
}

TEST_CASE("mock chat emits the three report headings for report prompts") {
    providers::MockChatProvider chat(7);
    const std::string prompt =
        "Title: Target\nNeighborhood papers:\n- Paper One\n- Paper Two\n\n"
        "## Overview of Key Methods\n## Implementation Insights\n## Performance Considerations\n";
    const std::string reply = chat.chat_user(prompt);
    CHECK(reply.find("## Overview of Key Methods") != std::string::npos);
    CHECK(reply.find("## Implementation Insights") != std::string::npos);
    CHECK(reply.find("## Performance Considerations") != std::string::npos);
    CHECK(reply.find("Paper One") != std::string::npos);
}

TEST_CASE("mock chat orders condensed sections correctly") {
    providers::MockChatProvider chat(7);
    const std::string prompt =
        "You are a research summarization assistant.\n"
        "<GraphRAG_Summary>\nsummary body\n</GraphRAG_Summary>\n"
        "<RAG_Chunks>\n[Chunk 1] From Paper x (self, Score: 1.0000) text\nextra\n</RAG_Chunks>\n";
    const std::string reply = chat.chat_user(prompt);
    const auto g = reply.find("[GraphRAG Context]");
    const auto r = reply.find("[RAG Context]");
    REQUIRE(g != std::string::npos);
    REQUIRE(r != std::string::npos);
    CHECK(g < r);
    CHECK(reply.find("summary body") < r);
    CHECK(reply.find("[Chunk 1]") > r);
}

TEST_CASE("mock chat emits in-range scores for every listed label") {
    providers::MockChatProvider chat(11);
    const std::string prompt =
        "You are a strict research evaluation expert.\n"
        "Only use exact model names from this list: [\"A\",\"B\",\"C\"]\n";
    const json scores = json::parse(chat.chat_user(prompt));
    for (const char* dim : {"Novelty", "Feasibility", "Clarity", "Relevance", "Significance"}) {
        REQUIRE(scores.contains(dim));
        for (const char* label : {"A", "B", "C"}) {
            const int v = scores[dim][label].get<int>();
            CHECK(v >= 1);
            CHECK(v <= 10);
        }
    }
}

TEST_CASE("mock chat answers letter prompts with a-d") {
    providers::MockChatProvider chat(5);
    const std::string reply =
        chat.chat_user("Answer with a single lowercase letter (a, b, c, or d) and nothing else.");
    REQUIRE(reply.size() == 1);
    CHECK(reply[0] >= 'a');
    CHECK(reply[0] <= 'd');
}

TEST_CASE("mock embedder: unit norm, determinism, token correlation") {
    providers::MockEmbedProvider embed(42, 64);
    const auto vectors = embed.embed_batch(
        {"graph community detection", "graph community analysis", "protein folding dynamics"});
    for (const auto& v : vectors) {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(embed.embed("graph community detection") == vectors[0]);
    const double near = retrieval::cosine(vectors[0], vectors[1]);
    const double far = retrieval::cosine(vectors[0], vectors[2]);
    CHECK(near > far);  // shared tokens correlate

    CHECK_THROWS_AS(embed.embed_batch({}), providers::ProviderError);
    CHECK_THROWS_AS(providers::MockEmbedProvider(1, 1), providers::ProviderError);
}

TEST_CASE("chat requires at least one user message") {
    providers::MockChatProvider chat(1);
    CHECK_THROWS_AS(chat.chat({{"system", "only a system message"}}), providers::ProviderError);
}

namespace {

struct TestServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit TestServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

providers::ProviderConfig local_config(int port) {
    providers::ProviderConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "test-model";
    cfg.max_retries = 3;
    cfg.backoff_base_s = 0.01;  // keep test retries fast
    return cfg;
}

}  // namespace

TEST_CASE("http chat retries transient failures and parses the reply") {
    TestServer ts;
    std::atomic<int> hits{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++hits;
        if (n <= 2) {
            res.status = n == 1 ? 500 : 429;  // transient failures first
            return;
        }
        const json body = json::parse(req.body);
        CHECK(body.at("model") == "test-model");
        CHECK(body.at("messages").at(0).at("role") == "user");
        res.set_content(
            json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}}.dump(),
            "application/json");
    });
    ts.start();

    const std::string audit_path = "/tmp/gywi_test_audit.jsonl";
    std::remove(audit_path.c_str());
    providers::AuditTrail audit(audit_path);
    providers::HttpChatProvider chat(local_config(ts.port), &audit);
    CHECK(chat.chat_user("ping") == "pong");
    CHECK(hits == 3);

    std::ifstream in(audit_path);
    std::string line;
    REQUIRE(std::getline(in, line));
    const json rec = json::parse(line);
    CHECK(rec.at("kind") == "chat");
    CHECK(rec.at("attempts") == 3);
    // Digests only; the audit trail must never hold message content or keys.
    CHECK(line.find("ping") == std::string::npos);
    std::remove(audit_path.c_str());
}

TEST_CASE("http chat gives up after exhausting retries") {
    TestServer ts;
    std::atomic<int> hits{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
    });
    ts.start();

    providers::HttpChatProvider chat(local_config(ts.port), nullptr);
    CHECK_THROWS_AS(chat.chat_user("ping"), providers::ProviderError);
    CHECK(hits == 4);  // initial try + 3 retries
}

TEST_CASE("http chat does not retry non-transient errors") {
    TestServer ts;
    std::atomic<int> hits{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    ts.start();

    providers::HttpChatProvider chat(local_config(ts.port), nullptr);
    CHECK_THROWS_WITH_AS(chat.chat_user("ping"), doctest::Contains("400"), providers::ProviderError);
    CHECK(hits == 1);
}

TEST_CASE("missing API key env var fails before any network call") {
    auto cfg = local_config(9);  // port never contacted
    cfg.api_key_env = "GYWI_TEST_KEY_THAT_IS_UNSET";
    unsetenv(cfg.api_key_env.c_str());
    providers::HttpChatProvider chat(cfg, nullptr);
    CHECK_THROWS_WITH_AS(chat.chat_user("ping"), doctest::Contains("GYWI_TEST_KEY_THAT_IS_UNSET"),
                         providers::ProviderError);
}

TEST_CASE("http embeddings round-trip and bearer auth header") {
    TestServer ts;
    std::string seen_auth;
    ts.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const json body = json::parse(req.body);
        json data = json::array();
        for (std::size_t i = 0; i < body.at("input").size(); ++i)
            data.push_back({{"embedding", {1.0 * (i + 1), 0.0}}});
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    ts.start();

    auto cfg = local_config(ts.port);
    cfg.api_key_env = "GYWI_TEST_KEY_SET";
    setenv(cfg.api_key_env.c_str(), "sk-test-value", 1);
    providers::HttpEmbedProvider embed(cfg, nullptr);
    const auto vectors = embed.embed_batch({"a", "b"});
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[1][0] == 2.0);
    CHECK(seen_auth == "Bearer sk-test-value");
    unsetenv(cfg.api_key_env.c_str());
}

TEST_CASE("provider config validation") {
    providers::ProviderConfig cfg;
    cfg.endpoint = "not-a-url";
    CHECK_THROWS_AS(cfg.validate(), providers::ProviderError);
    cfg.endpoint = "http://x";
    cfg.timeout_s = 0;
    CHECK_THROWS_AS(cfg.validate(), providers::ProviderError);
    cfg.timeout_s = 5;
    cfg.max_in_flight = 0;
    CHECK_THROWS_AS(cfg.validate(), providers::ProviderError);
}
