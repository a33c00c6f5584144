#include "thoughtmem/corpus.hpp"

#include "thoughtmem/embedding.hpp"
#include "thoughtmem/errors.hpp"
#include "thoughtmem/hash.hpp"
#include "thoughtmem/memory.hpp"
#include "thoughtmem/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace thoughtmem {

using nlohmann::json;

std::string chunk_content_id(const std::string& text) {
    return sha256_hex(text);
}

std::vector<DataChunk> chunk_document(const Document& doc, std::size_t chunk_size_tokens) {
    if (chunk_size_tokens == 0) {
        throw Error(ErrorCode::invalid_config, "chunk size must be at least 1 token");
    }
    auto tokens = tokenize(doc.text);
    if (tokens.empty()) {
        throw Error(ErrorCode::empty_document, "document '" + doc.doc_id + "' has no tokens");
    }
    std::vector<DataChunk> chunks;
    chunks.reserve(tokens.size() / chunk_size_tokens + 1);
    for (std::size_t start = 0; start < tokens.size(); start += chunk_size_tokens) {
        const std::size_t count = std::min(chunk_size_tokens, tokens.size() - start);
        DataChunk chunk;
        chunk.doc_id = doc.doc_id;
        chunk.ordinal = chunks.size();
        chunk.text = join_tokens(tokens, start, count);
        chunk.token_count = count;
        chunk.chunk_id = chunk_content_id(chunk.text);
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

IngestReport ingest_documents(const std::vector<Document>& docs, MemoryStore& store,
                              const Embedder& embedder, std::size_t chunk_size_tokens) {
    std::set<std::string> batch_ids;
    for (const auto& doc : docs) {
        if (!batch_ids.insert(doc.doc_id).second) {
            throw Error(ErrorCode::duplicate_doc_id,
                        "doc_id '" + doc.doc_id + "' appears twice in one batch");
        }
    }
    IngestReport report;
    for (const auto& doc : docs) {
        for (const auto& chunk : chunk_document(doc, chunk_size_tokens)) {
            if (store.contains(chunk.chunk_id)) {
                ++report.skipped;
                continue;
            }
            store.insert_chunk(chunk, embedder.embed(chunk.text));
            ++report.added;
        }
    }
    return report;
}

namespace {

Document document_from_json(const json& record, std::size_t line_number) {
    if (!record.is_object() || !record.contains("doc_id") || !record.contains("text")) {
        throw Error(ErrorCode::malformed_record,
                    "document record on line " + std::to_string(line_number) +
                        " needs doc_id and text");
    }
    Document doc;
    doc.doc_id = record["doc_id"].get<std::string>();
    doc.text = record["text"].get<std::string>();
    if (record.contains("metadata") && record["metadata"].is_object()) {
        for (const auto& [key, value] : record["metadata"].items()) {
            doc.metadata[key] = value.get<std::string>();
        }
    }
    return doc;
}

} // namespace

std::vector<Document> load_documents(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "'");
    }
    std::vector<Document> docs;
    if (path.extension() == ".jsonl") {
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            if (trim(line).empty()) continue;
            json record = json::parse(line, nullptr, false);
            if (record.is_discarded()) {
                throw Error(ErrorCode::malformed_record,
                            "invalid JSON on line " + std::to_string(line_number) + " of '" +
                                path.string() + "'");
            }
            docs.push_back(document_from_json(record, line_number));
        }
    } else {
        std::ostringstream buffer;
        buffer << in.rdbuf();
        Document doc;
        doc.doc_id = path.stem().string();
        doc.text = buffer.str();
        doc.metadata["source"] = path.string();
        docs.push_back(std::move(doc));
    }
    return docs;
}

} // namespace thoughtmem
