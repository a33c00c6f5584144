#include "thoughtmem/lm.hpp"

#include "thoughtmem/errors.hpp"
#include "thoughtmem/text.hpp"

#include "http_transport.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>

namespace thoughtmem {

using nlohmann::json;

std::string render_answer_prompt(const std::string& query,
                                 const std::vector<std::string>& retrieved_texts,
                                 std::size_t context_budget_tokens) {
    if (context_budget_tokens == 0) {
        throw Error(ErrorCode::invalid_config, "context budget must be at least 1 token");
    }
    std::vector<const std::string*> included;
    std::size_t remaining = context_budget_tokens;
    for (const auto& text : retrieved_texts) {
        const std::size_t cost = token_count(text);
        if (cost > remaining) continue;
        remaining -= cost;
        included.push_back(&text);
    }

    std::string prompt;
    if (included.empty()) {
        prompt += "Answer the question.\n\n";
    } else {
        prompt += "Answer the question using only the provided context.\n\nContext:\n";
        for (const auto* text : included) {
            prompt += *text;
            prompt += "\n\n";
        }
    }
    prompt += "Question: " + query + "\nAnswer:";
    return prompt;
}

namespace {

const char kThoughtTemplateHead[] = "Input: Given query:";
const char kThoughtTemplateMid[] = ", given response:";
const char kThoughtTemplateTail[] =
    ". Based on the provided query and its corresponding response, perform the following "
    "step: succinctly summarize both the question and answer into a coherent knowledge "
    "point, forming a fluent passage.\n\n"
    "First judge whether the response meaningfully answers the query; a response that is "
    "hallucinated, evasive, or unrelated is meaningless. Then reply in exactly this "
    "format:\n"
    "CONFIDENCE: <1 if the knowledge point is meaningful, 0 if it is meaningless>\n"
    "THOUGHT: <the knowledge point>";

} // namespace

std::string render_thought_prompt(const std::string& query, const std::string& answer) {
    if (trim(query).empty()) {
        throw Error(ErrorCode::empty_field, "query is empty");
    }
    if (trim(answer).empty()) {
        throw Error(ErrorCode::empty_field, "answer is empty");
    }
    std::string prompt;
    prompt.reserve(sizeof(kThoughtTemplateHead) + sizeof(kThoughtTemplateMid) +
                   sizeof(kThoughtTemplateTail) + query.size() + answer.size());
    prompt += kThoughtTemplateHead;
    prompt += query;
    prompt += kThoughtTemplateMid;
    prompt += answer;
    prompt += kThoughtTemplateTail;
    return prompt;
}

namespace {

// Matches "TAG : value" with optional surrounding whitespace,
// case-insensitively on the tag. Returns the text after the colon.
std::optional<std::string> match_tag_line(const std::string& line, const std::string& tag) {
    const std::string lowered = ascii_lower(line);
    std::size_t pos = lowered.find_first_not_of(" \t\r");
    if (pos == std::string::npos) return std::nullopt;
    if (lowered.compare(pos, tag.size(), tag) != 0) return std::nullopt;
    pos += tag.size();
    while (pos < lowered.size() && (lowered[pos] == ' ' || lowered[pos] == '\t')) ++pos;
    if (pos >= lowered.size() || lowered[pos] != ':') return std::nullopt;
    ++pos;
    return line.substr(pos);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

} // namespace

ThoughtCandidate parse_thought_response(const std::string& raw) {
    const ThoughtCandidate rejected{raw, 0};
    auto lines = split_lines(raw);

    std::size_t confidence_line = lines.size();
    int confidence = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto value = match_tag_line(lines[i], "confidence");
        if (!value) continue;
        const std::string v = trim(*value);
        if (v != "0" && v != "1") return rejected;
        confidence = v == "1" ? 1 : 0;
        confidence_line = i;
        break;
    }
    if (confidence_line == lines.size()) return rejected;

    for (std::size_t i = confidence_line + 1; i < lines.size(); ++i) {
        auto value = match_tag_line(lines[i], "thought");
        if (!value) continue;
        std::string text = *value;
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            text += '\n';
            text += lines[j];
        }
        text = trim(text);
        if (text.empty()) return rejected;
        return ThoughtCandidate{text, confidence};
    }
    return rejected;
}

ScriptedLanguageModel::ScriptedLanguageModel(std::vector<Rule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

ScriptedLanguageModel ScriptedLanguageModel::from_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "'");
    }
    std::vector<Rule> rules;
    std::string fallback;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw Error(ErrorCode::malformed_record,
                        "invalid JSON on line " + std::to_string(line_number) + " of '" +
                            path.string() + "'");
        }
        if (record.contains("fallback")) {
            fallback = record["fallback"].get<std::string>();
            continue;
        }
        if (!record.contains("completion")) {
            throw Error(ErrorCode::missing_field,
                        "line " + std::to_string(line_number) + ": completion");
        }
        Rule rule;
        rule.completion = record["completion"].get<std::string>();
        if (record.contains("prompt")) {
            rule.match = Rule::Match::exact;
            rule.pattern = record["prompt"].get<std::string>();
        } else if (record.contains("contains")) {
            rule.match = Rule::Match::contains;
            rule.pattern = record["contains"].get<std::string>();
        } else {
            throw Error(ErrorCode::missing_field,
                        "line " + std::to_string(line_number) + ": prompt or contains");
        }
        rules.push_back(std::move(rule));
    }
    return ScriptedLanguageModel(std::move(rules), std::move(fallback));
}

std::string ScriptedLanguageModel::complete(const std::string& prompt) const {
    for (const auto& rule : rules_) {
        const bool hit = rule.match == Rule::Match::exact
                             ? prompt == rule.pattern
                             : prompt.find(rule.pattern) != std::string::npos;
        if (hit) return rule.completion;
    }
    return fallback_;
}

RemoteLanguageModel::RemoteLanguageModel(std::string url, std::string model,
                                         std::string api_key, double temperature,
                                         int max_attempts, int initial_backoff_ms)
    : url_(std::move(url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      temperature_(temperature),
      max_attempts_(max_attempts),
      initial_backoff_ms_(initial_backoff_ms) {
    if (url_.empty()) {
        throw Error(ErrorCode::invalid_config, "remote LM endpoint URL is empty");
    }
}

RemoteLanguageModel RemoteLanguageModel::from_env(double temperature) {
    const char* url = std::getenv("THOUGHT_LLM_URL");
    const char* model = std::getenv("THOUGHT_LLM_MODEL");
    const char* key = std::getenv("THOUGHT_LLM_KEY");
    if (url == nullptr || *url == '\0') {
        throw Error(ErrorCode::invalid_config, "THOUGHT_LLM_URL is not set");
    }
    return RemoteLanguageModel(url, model ? model : "", key ? key : "", temperature);
}

std::string RemoteLanguageModel::complete(const std::string& prompt) const {
    json body{{"model", model_},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", temperature_}};
    auto response = detail::post_json_with_retries(url_, body, api_key_, max_attempts_,
                                                   initial_backoff_ms_);
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty()) {
        throw Error(ErrorCode::backend_unavailable,
                    "completion endpoint returned no choices");
    }
    const auto& first = response["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content")) {
        throw Error(ErrorCode::backend_unavailable,
                    "completion endpoint returned an unexpected shape");
    }
    return first["message"]["content"].get<std::string>();
}

} // namespace thoughtmem
