#include "thoughtmem/lm.hpp"
#include "thoughtmem/embedding.hpp"
#include "thoughtmem/errors.hpp"
#include "thoughtmem/hash.hpp"
#include "thoughtmem/text.hpp"

#include "test_helpers.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <random>
#include <thread>

using namespace thoughtmem;
using nlohmann::json;

namespace {

std::string repeated_tokens(const std::string& word, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i > 0) out.push_back(' ');
        out += word + std::to_string(i);
    }
    return out;
}

} // namespace

TEST_SUITE("lm") {

TEST_CASE("answer prompt skips texts that would overflow the budget") {
    std::vector<std::string> texts{repeated_tokens("a", 800), repeated_tokens("b", 800),
                                   repeated_tokens("c", 800)};
    auto prompt = render_answer_prompt("what happened?", texts, 2000);
    CHECK(prompt.find("a0 ") != std::string::npos);
    CHECK(prompt.find("b0 ") != std::string::npos);
    CHECK(prompt.find("c0 ") == std::string::npos);
    CHECK(prompt.find("what happened?") != std::string::npos);
}

TEST_CASE("a later smaller text can still fit after a skip") {
    std::vector<std::string> texts{repeated_tokens("a", 6), repeated_tokens("b", 100),
                                   repeated_tokens("c", 3)};
    auto prompt = render_answer_prompt("q", texts, 10);
    CHECK(prompt.find("a0") != std::string::npos);
    CHECK(prompt.find("b0") == std::string::npos);
    CHECK(prompt.find("c0") != std::string::npos);
}

TEST_CASE("empty retrieval yields a query-only prompt") {
    auto prompt = render_answer_prompt("the only question", {}, 2000);
    CHECK(prompt.find("the only question") != std::string::npos);
    CHECK(prompt.find("Context") == std::string::npos);
}

TEST_CASE("a large budget includes everything in rank order") {
    std::vector<std::string> texts{"first text", "second text", "third text"};
    auto prompt = render_answer_prompt("q", texts, 2000);
    auto p1 = prompt.find("first text");
    auto p2 = prompt.find("second text");
    auto p3 = prompt.find("third text");
    REQUIRE(p1 != std::string::npos);
    REQUIRE(p2 != std::string::npos);
    REQUIRE(p3 != std::string::npos);
    CHECK(p1 < p2);
    CHECK(p2 < p3);
}

TEST_CASE("thought prompt embeds the template with both substitutions") {
    auto prompt = render_thought_prompt("What drives progress?", "Benchmarks do.");
    CHECK(prompt.find("Given query:What drives progress?") != std::string::npos);
    CHECK(prompt.find("given response:Benchmarks do.") != std::string::npos);
    CHECK(prompt.find("succinctly summarize both the question and answer into a coherent "
                      "knowledge point") != std::string::npos);
    CHECK(prompt.find("CONFIDENCE:") != std::string::npos);
    CHECK(prompt.find("THOUGHT:") != std::string::npos);
}

TEST_CASE("empty query or answer is rejected") {
    try {
        render_thought_prompt("q", "   ");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_field);
    }
    CHECK_THROWS_AS(render_thought_prompt("", "a"), Error);
}

TEST_CASE("substitution never alters the surrounding template bytes") {
    // Recover the fixed template segments with sentinel inputs, then check
    // 100 random pairs only ever vary inside the two holes.
    const std::string q_mark = "\x01" "QQ" "\x01";
    const std::string a_mark = "\x02" "AA" "\x02";
    const std::string rendered = render_thought_prompt(q_mark, a_mark);
    const auto q_pos = rendered.find(q_mark);
    const auto a_pos = rendered.find(a_mark);
    REQUIRE(q_pos != std::string::npos);
    REQUIRE(a_pos != std::string::npos);
    REQUIRE(q_pos < a_pos);
    const std::string head = rendered.substr(0, q_pos);
    const std::string mid = rendered.substr(q_pos + q_mark.size(),
                                            a_pos - (q_pos + q_mark.size()));
    const std::string tail = rendered.substr(a_pos + a_mark.size());
    const std::string template_hash = sha256_hex(head + "|" + mid + "|" + tail);

    std::mt19937_64 rng(606);
    for (int i = 0; i < 100; ++i) {
        std::string q = "q" + std::to_string(rng());
        std::string a = "a" + std::to_string(rng());
        CHECK(render_thought_prompt(q, a) == head + q + mid + a + tail);
    }
    CHECK(sha256_hex(head + "|" + mid + "|" + tail) == template_hash);
}

TEST_CASE("well-formed responses parse into text and confidence") {
    auto parsed = parse_thought_response("CONFIDENCE: 1\nTHOUGHT: Benchmarks drive NLP progress.");
    CHECK(parsed.confidence == 1);
    CHECK(parsed.text == "Benchmarks drive NLP progress.");
}

TEST_CASE("malformed output is conservatively rejected") {
    auto parsed = parse_thought_response("I cannot answer this.");
    CHECK(parsed.confidence == 0);
    CHECK(parsed.text == "I cannot answer this.");
}

TEST_CASE("explicit zero confidence wins regardless of the thought text") {
    auto parsed = parse_thought_response("confidence: 0\nTHOUGHT: anything");
    CHECK(parsed.confidence == 0);
    CHECK(parsed.text == "anything");
}

TEST_CASE("thought text may span multiple lines") {
    auto parsed = parse_thought_response("CONFIDENCE: 1\nTHOUGHT: first line\nsecond line");
    CHECK(parsed.confidence == 1);
    CHECK(parsed.text == "first line\nsecond line");
}

TEST_CASE("tag lines tolerate whitespace and case") {
    auto parsed = parse_thought_response("  Confidence : 1 \n\tthought:   padded  ");
    CHECK(parsed.confidence == 1);
    CHECK(parsed.text == "padded");
}

TEST_CASE("confidence 1 without a thought line is rejected") {
    auto parsed = parse_thought_response("CONFIDENCE: 1\nno tag here");
    CHECK(parsed.confidence == 0);
}

TEST_CASE("fuzzing never crashes and never invents confidence") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10000; ++i) {
        std::string raw;
        const std::size_t len = rng() % 64;
        for (std::size_t b = 0; b < len; ++b) {
            raw.push_back(static_cast<char>(rng() % 256));
        }
        // Occasionally splice in near-miss tag fragments.
        if (rng() % 4 == 0) raw = "CONFIDENCE" + raw;
        if (rng() % 4 == 0) raw += "\nTHOUGHT";
        auto parsed = parse_thought_response(raw);
        CHECK((parsed.confidence == 0 || parsed.confidence == 1));
        if (parsed.confidence == 1) {
            // Independent scan for a well-formed CONFIDENCE: 1 line.
            bool found = false;
            std::istringstream lines(raw);
            std::string line;
            while (std::getline(lines, line)) {
                auto lowered = ascii_lower(trim(line));
                if (lowered.rfind("confidence", 0) == 0 &&
                    lowered.find(':') != std::string::npos &&
                    trim(lowered.substr(lowered.find(':') + 1)) == "1") {
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("scripted completions are a pure function of the prompt") {
    ScriptedLanguageModel lm({{ScriptedLanguageModel::Rule::Match::exact, "ping", "pong"},
                              {ScriptedLanguageModel::Rule::Match::contains, "needle",
                               "found"}},
                             "fallback");
    CHECK(lm.complete("ping") == "pong");
    CHECK(lm.complete("ping") == "pong");
    CHECK(lm.complete("hay needle stack") == "found");
    CHECK(lm.complete("nothing") == "fallback");
}

TEST_CASE("scripted rules load from jsonl in order") {
    auto path = helpers::temp_path("lm.jsonl");
    helpers::write_file(path,
                        R"({"prompt":"exact hit","completion":"one"})"
                        "\n"
                        R"({"contains":"part","completion":"two"})"
                        "\n"
                        R"({"fallback":"three"})"
                        "\n");
    auto lm = ScriptedLanguageModel::from_jsonl(path);
    CHECK(lm.complete("exact hit") == "one");
    CHECK(lm.complete("has part inside") == "two");
    CHECK(lm.complete("miss") == "three");
}

TEST_CASE("remote model sends one chat request and reads the first choice") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        ++hits;
        auto body = json::parse(req.body);
        CHECK(body["model"] == "test-model");
        CHECK(body["temperature"] == 0.0);
        CHECK(body["messages"][0]["role"] == "user");
        CHECK(req.get_header_value("Authorization") == "Bearer sk-test");
        res.set_content(json{{"choices",
                              json::array({{{"message",
                                             {{"role", "assistant"},
                                              {"content", "echo: " +
                                                   body["messages"][0]["content"]
                                                       .get<std::string>()}}}}})}}
                            .dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteLanguageModel lm("http://127.0.0.1:" + std::to_string(port) +
                               "/v1/chat/completions",
                           "test-model", "sk-test", 0.0, 3, 1);
    CHECK(lm.complete("hello") == "echo: hello");
    CHECK(hits == 1);

    server.stop();
    runner.join();
}

TEST_CASE("remote model retries transient failures then succeeds") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        const int call = ++hits;
        if (call < 3) {
            res.status = 500;
            return;
        }
        res.set_content(json{{"choices",
                              json::array({{{"message", {{"content", "recovered"}}}}})}}
                            .dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteLanguageModel lm("http://127.0.0.1:" + std::to_string(port) +
                               "/v1/chat/completions",
                           "m", "", 0.0, 3, 1);
    CHECK(lm.complete("x") == "recovered");
    CHECK(hits == 3);

    server.stop();
    runner.join();
}

TEST_CASE("remote settings come from the environment") {
    setenv("THOUGHT_LLM_URL", "http://127.0.0.1:1/v1/chat/completions", 1);
    setenv("THOUGHT_LLM_MODEL", "env-model", 1);
    setenv("THOUGHT_LLM_KEY", "env-key", 1);
    CHECK_NOTHROW(RemoteLanguageModel::from_env());

    unsetenv("THOUGHT_LLM_URL");
    try {
        RemoteLanguageModel::from_env();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_config);
    }
    unsetenv("THOUGHT_LLM_MODEL");
    unsetenv("THOUGHT_LLM_KEY");
}

TEST_CASE("a dead endpoint surfaces BackendUnavailable after bounded retries") {
    RemoteLanguageModel lm("http://127.0.0.1:1/v1/chat/completions", "m", "", 0.0, 3, 1);
    try {
        lm.complete("x");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::backend_unavailable);
    }
}

TEST_CASE("remote embedder reads the embedding array") {
    httplib::Server server;
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body);
        CHECK(body["input"] == "some text");
        res.set_content(json{{"data", json::array({{{"embedding",
                                                     std::vector<double>{3.0, 4.0, 0.0, 0.0,
                                                                         0.0, 0.0, 0.0,
                                                                         0.0}}}})}}
                            .dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteEmbedder embedder("http://127.0.0.1:" + std::to_string(port) + "/v1/embeddings",
                            "embed-model", "", 8, 3, 1);
    auto v = embedder.embed("some text");
    CHECK(v.dimension() == 8);
    CHECK(v.values[0] == doctest::Approx(0.6));
    CHECK(v.values[1] == doctest::Approx(0.8));

    // Embedder contract: equal text yields equal vectors.
    CHECK(embedder.embed("some text").values == v.values);

    server.stop();
    runner.join();
}

} // TEST_SUITE
