#pragma once

#include <string>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

struct SectionStat {
    std::string section_id;
    double mean_sentences = 0.0;
    double mean_tokens = 0.0;
};

struct StatsReport {
    int n_records = 0;
    int n_train = 0;
    int n_validation = 0;
    int n_test = 0;
    double mean_words_per_conversation = 0.0;
    double mean_utterances_per_conversation = 0.0;
    double mean_sentences_per_note = 0.0;
    double mean_evidence_per_sentence = 0.0;
    double contiguous_multi_evidence_fraction = 0.0;
    // novel_ngram_fraction[n-1]: mean over records of the fraction of the
    // note's n-grams that never occur in its conversation.
    double novel_ngram_fraction[3] = {0.0, 0.0, 0.0};
    std::vector<SectionStat> sections;
};

StatsReport corpus_stats(const std::vector<AnnotatedRecord>& records, const SectionScheme& scheme);
std::string stats_to_tsv(const StatsReport& report);

}  // namespace convnote
