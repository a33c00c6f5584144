#include "http_transport.hpp"

#include "thoughtmem/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <thread>

namespace thoughtmem::detail {

namespace {

// Splits a full URL into (scheme://host[:port], path).
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::invalid_config, "endpoint URL missing scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

nlohmann::json post_json_with_retries(const std::string& url,
                                      const nlohmann::json& body,
                                      const std::string& api_key,
                                      int max_attempts,
                                      int initial_backoff_ms) {
    auto [base, path] = split_url(url);
    const std::string payload = body.dump();
    std::string last_failure = "no attempt made";

    int backoff_ms = initial_backoff_ms;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(base);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_failure = "server returned status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            // 4xx is not transient; retrying would repeat the same mistake.
            throw Error(ErrorCode::backend_unavailable,
                        "endpoint " + url + " returned status " +
                            std::to_string(res->status) + ": " + res->body);
        }
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) {
            last_failure = "response body is not valid JSON";
            continue;
        }
        return parsed;
    }
    throw Error(ErrorCode::backend_unavailable,
                "endpoint " + url + " failed after " + std::to_string(max_attempts) +
                    " attempts (" + last_failure + ")");
}

} // namespace thoughtmem::detail
