#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

// Seeded generator for speaker-alternating template dialogues over a closed
// mini-domain (symptoms, results, medications, plans) with evidence-linked
// note sentences. Structure knobs, all in [0,1] unless noted:
//   n_records        total records (default 600)
//   val_fraction     fraction routed to the validation split (default 1/12)
//   test_fraction    fraction routed to the test split (default 1/12)
//   scheme           section scheme name (default "synthetic4")
//   mean_utterances  target mean conversation length (default 22)
//   vocab_size       closed-vocabulary budget; scales content word pools
//   contiguity       P(multi-utterance evidence set is contiguous), default 0.82
//   cluster_break_rate  P(non-contiguous set gets a gap wider than the
//                       clustering heuristic recovers), default 0.08
//   rare_token_rate  P(content slot draws from the large rare pool), default 0.05
//   shared_fact_rate P(medication fact also yields a plan sentence from the
//                     same evidence utterance), default 0.35
//   ack_evidence_rate P(result fact includes the patient acknowledgement as a
//                      second evidence utterance), default 0.45
//   empty_section_rate P(results / medications section absent), default 0.12
struct SyntheticConfig {
    int n_records = 600;
    double val_fraction = 1.0 / 12.0;
    double test_fraction = 1.0 / 12.0;
    std::string scheme = "synthetic4";
    double mean_utterances = 22.0;
    int vocab_size = 400;
    double contiguity = 0.82;
    double cluster_break_rate = 0.08;
    double rare_token_rate = 0.05;
    double shared_fact_rate = 0.35;
    double ack_evidence_rate = 0.45;
    double empty_section_rate = 0.12;
};

// Flat key=value parsing ('#' comments allowed). Unknown keys and
// out-of-range values raise ConfigError naming the key.
SyntheticConfig parse_synthetic_config(const std::string& text);
SyntheticConfig load_synthetic_config(const std::string& path);
void validate_config(const SyntheticConfig& config);

std::vector<AnnotatedRecord> generate_synthetic(const SyntheticConfig& config,
                                                std::uint64_t seed);

// Content word pools, exposed so tests can reason about slot vocabulary.
// Pool words are built so that any two pool members sit at phonetic distance
// >= 2 from each other (corruption never maps one content word to another).
std::vector<std::string> synthetic_symptom_pool(int count);
std::vector<std::string> synthetic_medication_pool(int count);
std::vector<std::string> synthetic_test_pool(int count);

}  // namespace convnote
