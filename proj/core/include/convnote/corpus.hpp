#pragma once

#include <string>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

// Canonical corpus files are JSONL: one record per line with fields
// id, split, utterances:[{index, speaker, text}], note:[{section, text,
// evidence:[int]}]. save_corpus writes keys in that order so its output
// is byte-stable and load_corpus(save_corpus(x)) == x.

std::vector<AnnotatedRecord> load_corpus(const std::string& path, const SectionScheme& scheme);
void save_corpus(const std::vector<AnnotatedRecord>& records, const std::string& path);
std::string render_corpus(const std::vector<AnnotatedRecord>& records);

// One cluster per note sentence (its evidence set, ascending), in note order.
// Sentences with empty evidence contribute no cluster.
std::vector<EvidenceCluster> derive_gold_clusters(const AnnotatedRecord& record);

// Dense noteworthiness labels: labels[scheme section index][utterance index]
// is true iff the utterance appears in the evidence of any note sentence of
// that section.
std::vector<std::vector<bool>> evidence_labels(const AnnotatedRecord& record,
                                               const SectionScheme& scheme);

std::vector<AnnotatedRecord> filter_split(const std::vector<AnnotatedRecord>& records, Split split);

}  // namespace convnote
