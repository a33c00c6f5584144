#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace thoughtmem::detail {

// POSTs a JSON body to a full endpoint URL with bounded retries and
// exponential backoff on transport failure or 5xx. Returns the parsed
// response body. Throws BackendUnavailable after the final attempt.
nlohmann::json post_json_with_retries(const std::string& url,
                                      const nlohmann::json& body,
                                      const std::string& api_key,
                                      int max_attempts,
                                      int initial_backoff_ms);

} // namespace thoughtmem::detail
