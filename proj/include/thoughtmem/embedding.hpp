#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace thoughtmem {

// Unit-length embedding. Vectors are normalized at construction so that
// similarity is a plain dot product.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
};

// Normalizes `values` to unit L2 norm. Rejects non-finite entries and the
// zero vector.
EmbeddingVector make_unit_vector(std::vector<double> values);

// Dot product of two unit vectors. Throws DimensionMismatch on unequal
// dimensions.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;

    // Deterministic: equal text yields equal output.
    virtual EmbeddingVector embed(const std::string& text) const = 0;
    virtual std::size_t dimension() const = 0;
};

// Hashed bag-of-words embedder: lowercased whitespace tokens are hashed
// into `dimension` buckets, counted, and L2-normalized. A pure function of
// (text, dimension), so every ranking and threshold in the system is
// reproducible without model weights.
class HashedBowEmbedder : public Embedder {
public:
    explicit HashedBowEmbedder(std::size_t dimension = 256);

    EmbeddingVector embed(const std::string& text) const override;
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
};

// Free-function form of the hashed embedder.
EmbeddingVector hashed_bow_embed(const std::string& text, std::size_t dimension);

// Client for an OpenAI-compatible /embeddings endpoint. Shares the
// transport and retry behavior of the remote completion backend.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(std::string url, std::string model, std::string api_key,
                   std::size_t dimension, int max_attempts = 3,
                   int initial_backoff_ms = 1000);

    EmbeddingVector embed(const std::string& text) const override;
    std::size_t dimension() const override { return dimension_; }

private:
    std::string url_;
    std::string model_;
    std::string api_key_;
    std::size_t dimension_;
    int max_attempts_;
    int initial_backoff_ms_;
};

} // namespace thoughtmem
