#pragma once

#include "thoughtmem/memory.hpp"

#include <set>
#include <string>

namespace thoughtmem {

struct CoverageResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::set<std::string> mapped_chunks;
    std::set<std::string> gold_chunks;
};

// Chunk-coverage precision/recall: retrieved items are traced to their
// root-source chunks and compared against the gold chunk set.
//   precision = |gold ∩ mapped| / |mapped|
//   recall    = |gold ∩ mapped| / |gold|
CoverageResult coverage(const std::set<std::string>& retrieved_item_ids,
                        const std::set<std::string>& gold_chunk_ids,
                        const MemoryStore& store);

// ROUGE-L F1 over lowercased whitespace tokens, whole-text LCS. With LCS
// length l: P = l/|candidate|, R = l/|reference|, F1 = 2PR/(P+R) and 0
// when l = 0. Throws EmptyReference when the reference has no tokens.
double rouge_l_f1(const std::string& candidate, const std::string& reference);

} // namespace thoughtmem
