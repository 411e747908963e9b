#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "convnote/beam.hpp"
#include "convnote/seq2seq.hpp"

namespace convnote {

// What one decoder call produces: a whole note (headers inline), one
// section body, or one sentence.
enum class DecodeUnit { Note, Section, Sentence };

DecodeUnit decode_unit_from_string(const std::string& s);  // ConfigError
std::string to_string(DecodeUnit unit);

class Abstractor {
  public:
    virtual ~Abstractor() = default;
    virtual std::vector<std::string> generate(
        const std::vector<std::string>& input_tokens,
        const std::optional<std::string>& section_id) const = 0;
};

// Trained pointer-generator plus its decoding policy. Note-unit decoding
// turns on the header constraints.
class Seq2SeqAbstractor : public Abstractor {
  public:
    Seq2SeqModel model;
    LengthBounds bounds;
    int beam_size = 4;
    DecodeUnit unit = DecodeUnit::Section;

    std::vector<std::string> generate(
        const std::vector<std::string>& input_tokens,
        const std::optional<std::string>& section_id) const override;
};

// Versioned little-endian bundle: decoding policy plus the model block.
void save_abstractor(const Seq2SeqAbstractor& abstractor, const std::string& path);
Seq2SeqAbstractor load_abstractor(const std::string& path);  // ParseError

// Deterministic model-free lower bound: speaker tags and filler tokens are
// stripped, utterances repeating their predecessor are dropped, the rest is
// concatenated in utterance order.
class FusionAbstractor : public Abstractor {
  public:
    FusionAbstractor();
    explicit FusionAbstractor(std::vector<std::string> stoplist);

    // Utterance boundaries are recovered from the speaker tags.
    std::vector<std::string> generate(
        const std::vector<std::string>& input_tokens,
        const std::optional<std::string>& section_id) const override;

    const std::vector<std::string>& stoplist() const { return stoplist_; }

  private:
    std::vector<std::string> stoplist_;
};

const std::vector<std::string>& default_filler_stoplist();

// Fuses one cluster given as separate utterances; ValidationError when the
// cluster is empty. The section is accepted for interface parity with the
// trained abstractor and does not affect the output.
std::vector<std::string> fusion_baseline_generate(
    const std::vector<std::vector<std::string>>& cluster_utterances,
    const std::string& section_id);

}  // namespace convnote
