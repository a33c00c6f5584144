#include "thoughtmem/embedding.hpp"

#include "thoughtmem/errors.hpp"
#include "thoughtmem/hash.hpp"
#include "thoughtmem/text.hpp"

#include "http_transport.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace thoughtmem {

EmbeddingVector make_unit_vector(std::vector<double> values) {
    double sum_sq = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::invalid_config, "embedding entry is not finite");
        }
        sum_sq += v * v;
    }
    if (sum_sq == 0.0) {
        throw Error(ErrorCode::empty_text, "cannot normalize a zero vector");
    }
    const double norm = std::sqrt(sum_sq);
    for (double& v : values) v /= norm;
    return EmbeddingVector{std::move(values)};
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "vectors have dimensions " + std::to_string(a.dimension()) +
                        " and " + std::to_string(b.dimension()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot;
}

HashedBowEmbedder::HashedBowEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ < 8) {
        throw Error(ErrorCode::invalid_config, "hashed embedder dimension must be >= 8");
    }
}

EmbeddingVector HashedBowEmbedder::embed(const std::string& text) const {
    return hashed_bow_embed(text, dimension_);
}

EmbeddingVector hashed_bow_embed(const std::string& text, std::size_t dimension) {
    if (dimension < 8) {
        throw Error(ErrorCode::invalid_config, "hashed embedder dimension must be >= 8");
    }
    auto tokens = tokenize(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::empty_text, "no tokens to embed");
    }
    std::vector<double> counts(dimension, 0.0);
    for (const auto& token : tokens) {
        counts[fnv1a64(ascii_lower(token)) % dimension] += 1.0;
    }
    return make_unit_vector(std::move(counts));
}

RemoteEmbedder::RemoteEmbedder(std::string url, std::string model, std::string api_key,
                               std::size_t dimension, int max_attempts,
                               int initial_backoff_ms)
    : url_(std::move(url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      dimension_(dimension),
      max_attempts_(max_attempts),
      initial_backoff_ms_(initial_backoff_ms) {
    if (dimension_ == 0) {
        throw Error(ErrorCode::invalid_config, "remote embedder dimension must be positive");
    }
}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) const {
    nlohmann::json body{{"model", model_}, {"input", text}};
    auto response = detail::post_json_with_retries(url_, body, api_key_,
                                                   max_attempts_, initial_backoff_ms_);
    if (!response.contains("data") || !response["data"].is_array() ||
        response["data"].empty() || !response["data"][0].contains("embedding")) {
        throw Error(ErrorCode::backend_unavailable,
                    "embedding endpoint returned an unexpected shape");
    }
    std::vector<double> values = response["data"][0]["embedding"].get<std::vector<double>>();
    if (values.size() != dimension_) {
        throw Error(ErrorCode::dimension_mismatch,
                    "endpoint returned dimension " + std::to_string(values.size()) +
                        ", expected " + std::to_string(dimension_));
    }
    return make_unit_vector(std::move(values));
}

} // namespace thoughtmem
