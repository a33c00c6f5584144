// Acceptance suite: one pass/fail line per criterion, all tolerances
// pinned in code. Runs with the scripted backend and hashed embedder only.
#include "thoughtmem/corpus.hpp"
#include "thoughtmem/errors.hpp"
#include "thoughtmem/eval.hpp"
#include "thoughtmem/hash.hpp"
#include "thoughtmem/lm.hpp"
#include "thoughtmem/memory.hpp"
#include "thoughtmem/metrics.hpp"
#include "thoughtmem/pipeline.hpp"
#include "thoughtmem/service.hpp"

#include "eval_fixtures.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

using namespace thoughtmem;
using nlohmann::json;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
}

void run(int number, const std::string& name,
         const std::function<std::string()>& criterion) {
    try {
        const std::string detail = criterion(); // empty string on success
        report(number, name, detail.empty(), detail);
    } catch (const std::exception& e) {
        report(number, name, false, e.what());
    }
}

bool near(double actual, double expected, double tolerance) {
    return std::abs(actual - expected) <= tolerance;
}

std::string check_coverage_scenario() {
    auto scenario = build_coverage_scenario();
    auto raw = scenario.coverage_at_window(2);
    if (!near(raw.precision, 1.0, 1e-12) || !near(raw.recall, 0.5, 1e-12)) {
        return "raw-only coverage was (" + std::to_string(raw.precision) + ", " +
               std::to_string(raw.recall) + "), expected (1.0, 0.5)";
    }
    scenario.seed_thoughts();
    auto seeded = scenario.coverage_at_window(2);
    if (!near(seeded.precision, 1.0, 1e-12) || !near(seeded.recall, 1.0, 1e-12)) {
        return "seeded coverage was (" + std::to_string(seeded.precision) + ", " +
               std::to_string(seeded.recall) + "), expected (1.0, 1.0)";
    }
    return "";
}

std::string check_provenance() {
    // Worked layering example: a thought over {T_old, K3} roots to
    // {K1, K2, K3}.
    MemoryStore store(8);
    for (int i = 1; i <= 3; ++i) {
        store.insert_chunk(helpers::make_chunk("K" + std::to_string(i), "chunk"),
                           helpers::unit_axis(8, static_cast<std::size_t>(i)));
    }
    store.insert_thought(helpers::make_thought("T_old", "old", {"K1", "K2"}),
                         helpers::unit_axis(8, 4));
    store.insert_thought(helpers::make_thought("T_new", "new", {"T_old", "K3"}),
                         helpers::unit_axis(8, 5));
    if (store.root_source("T_new") != std::set<std::string>{"K1", "K2", "K3"}) {
        return "layered example did not root to {K1, K2, K3}";
    }

    std::mt19937_64 rng(20240201);
    for (int round = 0; round < 200; ++round) {
        auto random = helpers::random_store(rng, 10 + rng() % 991);
        auto items = random->items_snapshot();
        for (const auto& item : items) {
            if (random->root_source(item.id) != oracles::root_source(items, item.id)) {
                return "mismatch vs traversal oracle in store " + std::to_string(round) +
                       " at item " + item.id;
            }
        }
    }
    return "";
}

std::string check_abstraction_levels() {
    MemoryStore store(8);
    store.insert_chunk(helpers::make_chunk("K1", "one"), helpers::unit_axis(8, 1));
    store.insert_chunk(helpers::make_chunk("K2", "two"), helpers::unit_axis(8, 2));
    if (store.abstraction_level("K1") != 1.0) return "chunk level is not 1.0";

    store.insert_thought(helpers::make_thought("T1", "over chunks", {"K1", "K2"}),
                         helpers::unit_axis(8, 3));
    if (store.abstraction_level("T1") != 2.0) return "all-chunk thought level is not 2.0";

    store.insert_thought(helpers::make_thought("T2", "mixed", {"T1", "K1"}),
                         helpers::unit_axis(8, 4));
    if (store.abstraction_level("T2") != 2.5) return "mixed {2.0, 1.0} level is not 2.5";

    std::mt19937_64 rng(20240202);
    for (int round = 0; round < 200; ++round) {
        auto random = helpers::random_store(rng, 10 + rng() % 500);
        auto items = random->items_snapshot();
        auto expected = oracles::abstraction_levels(items);
        for (const auto& item : items) {
            if (!near(random->abstraction_level(item.id), expected.at(item.id), 1e-12)) {
                return "level mismatch vs recomputation oracle at item " + item.id;
            }
        }
    }
    return "";
}

std::string check_update_gate() {
    HashedBowEmbedder embedder(256);
    MemoryStore store(256);
    store.insert_chunk(helpers::make_chunk("c1", "alpha base"), embedder.embed("alpha base"));

    ScriptedLanguageModel lm(
        {{ScriptedLanguageModel::Rule::Match::contains, "Given query:novel",
          "CONFIDENCE: 1\nTHOUGHT: a brand new insight"},
         {ScriptedLanguageModel::Rule::Match::contains, "Given query:repeat",
          "CONFIDENCE: 1\nTHOUGHT: a brand new insight"},
         {ScriptedLanguageModel::Rule::Match::contains, "Given query:doubt",
          "CONFIDENCE: 0\nTHOUGHT: could be anything"}},
        "scripted answer");
    PipelineConfig config; // epsilon 0.85, the operating default

    auto novel = process_query("q0", "novel alpha", store, lm, embedder, config);
    if (novel.outcome.kind != ThoughtOutcome::Kind::accepted || store.thought_count() != 1) {
        return "novel confident emission did not grow the thought set by exactly 1";
    }

    auto repeated = process_query("q1", "repeat alpha", store, lm, embedder, config);
    if (repeated.outcome.kind != ThoughtOutcome::Kind::rejected_redundant) {
        return "re-emitted thought was not rejected as redundant";
    }
    if (!near(repeated.outcome.max_similarity, 1.0, 1e-9)) {
        return "re-emitted thought max similarity " +
               std::to_string(repeated.outcome.max_similarity) + ", expected 1.0";
    }
    if (store.thought_count() != 1) return "redundant rejection changed the thought set";

    auto doubted = process_query("q2", "doubt alpha", store, lm, embedder, config);
    if (doubted.outcome.kind != ThoughtOutcome::Kind::rejected_low_confidence ||
        store.thought_count() != 1) {
        return "confidence-0 emission did not leave the thought set unchanged";
    }
    return "";
}

std::string check_replay_determinism() {
    std::vector<std::string> queries;
    for (int i = 0; i < 20; ++i) {
        switch (i % 3) {
        case 0: queries.push_back("fresh" + std::to_string(i) + " topic words"); break;
        case 1: queries.push_back("again fresh" + std::to_string(i - 1) + " words"); break;
        default: queries.push_back("doubt" + std::to_string(i) + " filler"); break;
        }
    }

    auto run_once = [&](const std::filesystem::path& path) {
        HashedBowEmbedder embedder(256);
        MemoryStore store(256);
        for (int c = 0; c < 5; ++c) {
            const std::string text = "base" + std::to_string(c) + " fresh" +
                                     std::to_string(c) + " words";
            store.insert_chunk(helpers::make_chunk("c" + std::to_string(c), text, "seed",
                                                   static_cast<std::size_t>(c)),
                               embedder.embed(text));
        }
        std::vector<ScriptedLanguageModel::Rule> rules;
        for (int i = 0; i < 20; i += 3) {
            rules.push_back({ScriptedLanguageModel::Rule::Match::contains,
                             "Given query:fresh" + std::to_string(i),
                             "CONFIDENCE: 1\nTHOUGHT: distilled fresh" + std::to_string(i)});
            rules.push_back({ScriptedLanguageModel::Rule::Match::contains,
                             "Given query:again fresh" + std::to_string(i),
                             "CONFIDENCE: 1\nTHOUGHT: distilled fresh" + std::to_string(i)});
        }
        rules.push_back({ScriptedLanguageModel::Rule::Match::contains, "Given query:doubt",
                         "CONFIDENCE: 0\nTHOUGHT: noise"});
        ScriptedLanguageModel lm(std::move(rules), "the scripted answer");
        PipelineConfig config;
        run_session(queries, store, lm, embedder, config);
        store.persist(path);
    };

    auto first = helpers::temp_path("acc-replay");
    auto second = helpers::temp_path("acc-replay");
    run_once(first);
    run_once(second);
    const auto bytes_a = helpers::read_file(first);
    const auto bytes_b = helpers::read_file(second);
    if (bytes_a.empty()) return "first session persisted an empty file";
    if (sha256_hex(bytes_a) != sha256_hex(bytes_b)) {
        return "session replays persisted different checksums";
    }
    if (bytes_a != bytes_b) return "session replays persisted different bytes";
    return "";
}

std::string check_rouge_oracle() {
    const double example = rouge_l_f1("the cat sat", "the cat ran");
    if (!near(example, 0.6667, 1e-4)) {
        return "'the cat sat' vs 'the cat ran' scored " + std::to_string(example);
    }
    std::mt19937_64 rng(20240203);
    for (int pair = 0; pair < 100; ++pair) {
        std::string a, b;
        const std::size_t alen = 1 + rng() % 20;
        const std::size_t blen = 1 + rng() % 20;
        for (std::size_t i = 0; i < alen; ++i) a += "w" + std::to_string(rng() % 8) + " ";
        for (std::size_t i = 0; i < blen; ++i) b += "w" + std::to_string(rng() % 8) + " ";
        if (rouge_l_f1(a, b) != oracles::rouge_l_f1(a, b)) {
            return "mismatch vs LCS oracle on pair " + std::to_string(pair);
        }
    }
    return "";
}

std::string check_scaling() {
    auto fx = fixtures::build_scaling_fixture();
    FunctionLanguageModel lm([](const std::string&) { return std::string("summary"); });
    PipelineConfig config;
    config.top_k = 2;

    // Chunks-only baseline computed outside the runner.
    auto baseline_store = fx.store->clone_with_thought_budget(0);
    double baseline = 0.0;
    for (const auto& eval_case : fx.cases) {
        baseline += evaluate_case(eval_case, *baseline_store, lm, fx.embedder, config)
                        .chunk_coverage->recall;
    }
    baseline /= static_cast<double>(fx.cases.size());

    auto report = run_scaling_experiment(fx.cases, *fx.store, lm, fx.embedder, config,
                                         {0, 1, 2, 3});
    const double at_zero = report.rows.front().metrics.at("mean_recall");
    const double at_full = report.rows.back().metrics.at("mean_recall");
    if (at_zero != baseline) {
        return "budget-0 recall " + std::to_string(at_zero) + " != chunks-only baseline " +
               std::to_string(baseline);
    }
    double previous = -1.0;
    for (const auto& row : report.rows) {
        const double recall = row.metrics.at("mean_recall");
        if (recall < previous) return "recall decreased at " + row.label;
        previous = recall;
    }
    if (!(at_full > at_zero)) return "full-budget recall is not strictly above budget 0";
    return "";
}

std::string check_heldout_evolution() {
    auto fx = fixtures::build_transfer_fixture();
    PipelineConfig config;
    config.top_k = 2;
    auto report = run_heldout_evolution(fx.cases, 0.5, *fx.store, *fx.lm, fx.embedder,
                                        config, 11);
    const double cold = report.aggregate.at("cold_mean_recall");
    const double evolved = report.aggregate.at("evolved_mean_recall");
    if (!(evolved >= cold)) {
        return "evolved recall " + std::to_string(evolved) + " below cold " +
               std::to_string(cold);
    }
    if (!(evolved - cold > 0.0)) return "evolution delta is not strictly positive";
    return "";
}

std::string check_service_equivalence() {
    HashedBowEmbedder embedder(256);
    auto build_store = [&]() {
        auto store = std::make_shared<MemoryStore>(256);
        for (int c = 0; c < 4; ++c) {
            const std::string text = "svc" + std::to_string(c) + " fresh" +
                                     std::to_string(c);
            store->insert_chunk(helpers::make_chunk("c" + std::to_string(c), text, "seed",
                                                    static_cast<std::size_t>(c)),
                                embedder.embed(text));
        }
        return store;
    };
    auto build_lm = []() {
        std::vector<ScriptedLanguageModel::Rule> rules;
        for (int i = 0; i < 10; ++i) {
            rules.push_back({ScriptedLanguageModel::Rule::Match::contains,
                             "Given query:fresh" + std::to_string(i),
                             "CONFIDENCE: 1\nTHOUGHT: service insight " + std::to_string(i)});
        }
        rules.push_back({ScriptedLanguageModel::Rule::Match::contains, "Given query:doubt",
                         "CONFIDENCE: 0\nTHOUGHT: noise"});
        return std::make_shared<ScriptedLanguageModel>(std::move(rules), "svc answer");
    };
    std::vector<std::string> queries;
    for (int i = 0; i < 10; ++i) {
        queries.push_back(i % 4 == 3 ? "doubt " + std::to_string(i)
                                     : "fresh" + std::to_string(i) + " svc" +
                                           std::to_string(i % 4));
    }

    auto library_path = helpers::temp_path("acc-diff-lib");
    {
        auto store = build_store();
        auto lm = build_lm();
        PipelineConfig config;
        config.top_k = 2;
        run_session(queries, *store, *lm, embedder, config);
        store->persist(library_path);
    }

    auto service_path = helpers::temp_path("acc-diff-svc");
    {
        ServiceConfig config;
        config.store_path = service_path;
        config.audit_log = helpers::temp_path("acc-diff-audit.jsonl");
        config.pipeline.top_k = 2;
        auto store = build_store();
        MemoryService service(store, build_lm(), std::make_shared<HashedBowEmbedder>(256),
                              config);
        const int port = service.bind_any_port();
        std::thread runner([&service] { service.listen(); });
        service.wait_ready();

        httplib::Client client("127.0.0.1", port);
        bool failed = false;
        for (const auto& query : queries) {
            auto res = client.Post("/v1/query", json{{"query", query}}.dump(),
                                   "application/json");
            if (!res || res->status != 200) {
                failed = true;
                break;
            }
        }
        service.stop();
        runner.join();
        if (failed) return "an HTTP query did not return 200";
    }

    if (helpers::read_file(library_path) != helpers::read_file(service_path)) {
        return "library and endpoint paths persisted different stores";
    }
    return "";
}

} // namespace

int main() {
    run(1, "coverage contrast (1.0, 0.5) -> (1.0, 1.0)", check_coverage_scenario);
    run(2, "root-source mapping matches the worked example and traversal oracle",
        check_provenance);
    run(3, "abstraction levels 1.0 / 2.0 / 2.5 and recomputation oracle",
        check_abstraction_levels);
    run(4, "update gate at epsilon 0.85 (redundant / low-confidence / novel)",
        check_update_gate);
    run(5, "20-query scripted session replays to byte-identical memory",
        check_replay_determinism);
    run(6, "ROUGE-L equals the brute-force LCS oracle", check_rouge_oracle);
    run(7, "recall scales monotonically with thought budget", check_scaling);
    run(8, "held-out evolution beats cold start on transfer fixture",
        check_heldout_evolution);
    run(9, "HTTP service is byte-equivalent to library calls", check_service_equivalence);

    if (failures > 0) {
        std::printf("%d of 9 criteria failed\n", failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
