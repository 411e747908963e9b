#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

struct CorruptionReport {
    long word_tokens = 0;  // conversation tokens containing a letter
    long selected = 0;     // positions drawn for corruption
    long replaced = 0;
    long skipped = 0;      // selected but no distance-1 candidate existed
};

// Alphabetic token types of the records' conversations, sorted unique.
// Pass the training split to mimic a recognizer constrained to in-domain
// vocabulary.
std::vector<std::string> build_lexicon(
    const std::vector<AnnotatedRecord>& records);

// Per conversation: draws round(rate * word_count) word positions without
// replacement and swaps each for a uniform pick from its phonetic
// candidate_set; words with no candidates stay unchanged and are counted as
// skipped. Conversations use the derived seed (seed xor fnv1a64(id)), so a
// record's corruption does not depend on which other records are present.
// Notes are never touched.
std::vector<AnnotatedRecord> corrupt_corpus(
    const std::vector<AnnotatedRecord>& records, double rate,
    const std::vector<std::string>& lexicon, std::uint64_t seed,
    CorruptionReport* report = nullptr);

std::string corruption_report_tsv(const CorruptionReport& report);

}  // namespace convnote
