#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

// One abstractor training example: pre-tokenized input (speaker tags
// included), the conditioning section when the decoder is section-aware,
// and the pre-tokenized target.
struct AbstractorPair {
    std::vector<std::string> input_tokens;
    std::optional<std::string> section_id;
    std::vector<std::string> target_tokens;
};

std::string speaker_tag(const std::string& speaker);  // "DR" -> "<spk_dr>"
bool is_speaker_tag(const std::string& token);

// Token ids. The reserved prefix is pad/bos/eos/unk, then the scheme's
// header tokens in canonical order, then any speaker tags observed in the
// training pairs (sorted); reserved tokens ignore min_count. Content tokens
// follow, ordered by count descending then token ascending.
struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;

    SectionScheme scheme;
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> ids;
    int n_reserved = 0;

    int size() const { return static_cast<int>(tokens.size()); }
    int id_of(const std::string& token) const;  // kUnk when absent
    const std::string& token_of(int id) const;
    bool is_header(int id) const;
    int header_id(const std::string& section_id) const;  // ConfigError when absent
    std::vector<int> header_ids() const;                 // canonical order

    static Vocabulary from_tokens(SectionScheme scheme, std::vector<std::string> tokens,
                                  int n_reserved);
};

Vocabulary build_vocab(const std::vector<AbstractorPair>& pairs, const SectionScheme& scheme,
                       int min_count);  // ValidationError on empty pairs

// Per-example copy bookkeeping: source positions mapped onto the vocabulary
// extended with this example's out-of-vocabulary source tokens, numbered in
// first-occurrence order.
struct ExtendedExample {
    std::vector<int> source_ids;      // in-vocabulary ids, unk for oov
    std::vector<int> source_ext_ids;  // oov positions get size() + k
    std::vector<std::string> oov_tokens;

    int ext_size(const Vocabulary& vocab) const {
        return vocab.size() + static_cast<int>(oov_tokens.size());
    }
};

ExtendedExample extend_source(const Vocabulary& vocab,
                              const std::vector<std::string>& source_tokens);

// Target tokens as extended ids: in-vocabulary id, else the source oov id
// when copyable, else unk.
std::vector<int> target_ext_ids(const Vocabulary& vocab, const ExtendedExample& ext,
                                const std::vector<std::string>& target_tokens);

// The emitted token string for an extended id.
const std::string& ext_token(const Vocabulary& vocab, const ExtendedExample& ext, int ext_id);

}  // namespace convnote
