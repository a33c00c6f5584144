#include "thoughtmem/errors.hpp"

namespace thoughtmem {

const char* error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::empty_document: return "EmptyDocument";
    case ErrorCode::duplicate_doc_id: return "DuplicateDocId";
    case ErrorCode::store_closed: return "StoreClosed";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::empty_text: return "EmptyText";
    case ErrorCode::unknown_source: return "UnknownSource";
    case ErrorCode::empty_source_list: return "EmptySourceList";
    case ErrorCode::unknown_item: return "UnknownItem";
    case ErrorCode::format_version_mismatch: return "FormatVersionMismatch";
    case ErrorCode::corrupt_file: return "CorruptFile";
    case ErrorCode::io_failure: return "IoFailure";
    case ErrorCode::empty_field: return "EmptyField";
    case ErrorCode::backend_unavailable: return "BackendUnavailable";
    case ErrorCode::unknown_kind: return "UnknownKind";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::malformed_record: return "MalformedRecord";
    case ErrorCode::empty_gold_set: return "EmptyGoldSet";
    case ErrorCode::empty_retrieved_set: return "EmptyRetrievedSet";
    case ErrorCode::empty_reference: return "EmptyReference";
    case ErrorCode::too_few_cases: return "TooFewCases";
    case ErrorCode::no_thoughts_in_store: return "NoThoughtsInStore";
    case ErrorCode::invalid_config: return "InvalidConfig";
    }
    return "UnknownError";
}

} // namespace thoughtmem
