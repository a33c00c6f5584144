#pragma once

#include <stdexcept>
#include <string>

namespace thoughtmem {

enum class ErrorCode {
    empty_document,
    duplicate_doc_id,
    store_closed,
    dimension_mismatch,
    empty_text,
    unknown_source,
    empty_source_list,
    unknown_item,
    format_version_mismatch,
    corrupt_file,
    io_failure,
    empty_field,
    backend_unavailable,
    unknown_kind,
    missing_field,
    malformed_record,
    empty_gold_set,
    empty_retrieved_set,
    empty_reference,
    too_few_cases,
    no_thoughts_in_store,
    invalid_config,
};

const char* error_name(ErrorCode code);

// All library failures surface as Error; `code()` identifies the failure
// class and `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    const char* name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

// Raised by session runners; carries the index of the failing query.
class SessionError : public Error {
public:
    SessionError(std::size_t query_index, ErrorCode code, const std::string& message)
        : Error(code, "query " + std::to_string(query_index) + ": " + message),
          query_index_(query_index) {}

    std::size_t query_index() const noexcept { return query_index_; }

private:
    std::size_t query_index_;
};

} // namespace thoughtmem
