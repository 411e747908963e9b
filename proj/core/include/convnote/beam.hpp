#pragma once

#include <optional>
#include <string>
#include <vector>

#include "convnote/seq2seq.hpp"

namespace convnote {

// Emitted-token length window, 5th to 95th percentile (nearest rank) of the
// training target lengths for the decoding unit.
struct LengthBounds {
    int min_tokens = 1;
    int max_tokens = 64;
};

LengthBounds length_bounds_from_targets(const std::vector<int>& target_lengths);

struct BeamOptions {
    int beam_size = 4;
    LengthBounds bounds;
    bool note_constraints = false;  // force the scheme's headers, in order
};

// Length-bounded beam search over the extended vocabulary; hypotheses are
// ranked by total log-probability during search and by length-normalized
// log-probability at final selection. Under note constraints the first
// token is the first header, a proposed wrong header or premature end token
// is replaced by the expected header, and decoding flushes the remaining
// headers when the length budget requires it, so every header appears
// exactly once in canonical order. beam_size 1 is greedy decoding.
std::vector<std::string> beam_search(const Seq2SeqModel& model,
                                     const std::vector<std::string>& input_tokens,
                                     const std::optional<std::string>& section_id,
                                     const BeamOptions& options);

}  // namespace convnote
