#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace thoughtmem {

class MemoryStore;
class Embedder;

struct Document {
    std::string doc_id;
    std::string text;
    std::map<std::string, std::string> metadata;
};

// An immutable raw knowledge fragment; the base case of provenance.
// chunk_id is a pure function of text (SHA-256 of the chunk bytes), so
// byte-identical texts always collapse to one item.
struct DataChunk {
    std::string chunk_id;
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
    std::size_t token_count = 0;
};

std::string chunk_content_id(const std::string& text);

// Splits a document into chunks of exactly `chunk_size_tokens` whitespace
// tokens (the last chunk may be shorter). Hard cut, no overlap. Chunk text
// is the space-joined token run, so chunks joined by single spaces
// reproduce the tokenized document.
std::vector<DataChunk> chunk_document(const Document& doc, std::size_t chunk_size_tokens);

struct IngestReport {
    std::size_t added = 0;   // chunks inserted
    std::size_t skipped = 0; // duplicate chunk texts
};

IngestReport ingest_documents(const std::vector<Document>& docs, MemoryStore& store,
                              const Embedder& embedder, std::size_t chunk_size_tokens);

// Reads documents from disk. `.jsonl` files carry one
// {"doc_id", "text", "metadata"} record per line; anything else is loaded
// as one UTF-8 plain-text document whose doc_id is the file stem.
std::vector<Document> load_documents(const std::filesystem::path& path);

} // namespace thoughtmem
