#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace thoughtmem {

class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual std::string complete(const std::string& prompt) const = 0;
};

struct ThoughtCandidate {
    std::string text;
    int confidence = 0; // 0 or 1
};

// Combines the query with as many retrieved texts as fit the token budget.
// Texts are considered in rank order; one that would overflow the
// remaining budget is skipped entirely and later texts are still tried.
// The query always appears regardless of budget.
std::string render_answer_prompt(const std::string& query,
                                 const std::vector<std::string>& retrieved_texts,
                                 std::size_t context_budget_tokens);

// Renders the thought/confidence prompt: a fixed summarization template
// with {query} and {answer} substituted, followed by the tagged output
// format the parser expects. Throws EmptyField when either input is blank.
std::string render_thought_prompt(const std::string& query, const std::string& answer);

// Total parse of model output. Expects a "CONFIDENCE: <0|1>" tag line
// followed by a "THOUGHT: <text...>" line (text runs to the end of
// output); tag lines are case- and whitespace-insensitive. Anything
// malformed maps to {text: raw, confidence: 0}.
ThoughtCandidate parse_thought_response(const std::string& raw);

// Deterministic prompt->completion fixture. Rules are evaluated in order;
// the first match wins; unmatched prompts get the fallback completion.
class ScriptedLanguageModel : public LanguageModel {
public:
    struct Rule {
        enum class Match { exact, contains } match = Match::exact;
        std::string pattern;
        std::string completion;
    };

    explicit ScriptedLanguageModel(std::vector<Rule> rules = {}, std::string fallback = "");

    // JSONL records: {"prompt": p, "completion": c} for exact match,
    // {"contains": s, "completion": c} for substring match, or
    // {"fallback": c}.
    static ScriptedLanguageModel from_jsonl(const std::filesystem::path& path);

    std::string complete(const std::string& prompt) const override;

private:
    std::vector<Rule> rules_;
    std::string fallback_;
};

// Wraps an arbitrary callable; the callable must be a pure function of the
// prompt for sessions to stay replayable.
class FunctionLanguageModel : public LanguageModel {
public:
    explicit FunctionLanguageModel(std::function<std::string(const std::string&)> fn)
        : fn_(std::move(fn)) {}

    std::string complete(const std::string& prompt) const override { return fn_(prompt); }

private:
    std::function<std::string(const std::string&)> fn_;
};

// OpenAI-compatible chat-completion client: one request per complete()
// call, with bounded retries (default 3 attempts, exponential backoff
// starting at 1s) on transport failure. A final failure surfaces as
// BackendUnavailable.
class RemoteLanguageModel : public LanguageModel {
public:
    RemoteLanguageModel(std::string url, std::string model, std::string api_key,
                        double temperature = 0.0, int max_attempts = 3,
                        int initial_backoff_ms = 1000);

    // Reads THOUGHT_LLM_URL, THOUGHT_LLM_MODEL, and THOUGHT_LLM_KEY.
    static RemoteLanguageModel from_env(double temperature = 0.0);

    std::string complete(const std::string& prompt) const override;

private:
    std::string url_;
    std::string model_;
    std::string api_key_;
    double temperature_;
    int max_attempts_;
    int initial_backoff_ms_;
};

} // namespace thoughtmem
