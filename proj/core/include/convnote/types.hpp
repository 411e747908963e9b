#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace convnote {

// One transcript turn. `tokens` is derived from `text` via tokenize() and is
// kept alongside it because nearly every consumer works on tokens.
struct Utterance {
    int index = 0;
    std::string speaker;
    std::string text;
    std::vector<std::string> tokens;
};

struct Conversation {
    std::string id;
    std::vector<Utterance> utterances;

    int size() const { return static_cast<int>(utterances.size()); }
};

// Ordered catalog of section ids and their reserved header tokens. The order
// is the canonical note order used everywhere (note assembly, decoding
// constraints, reports).
struct SectionScheme {
    std::string name;
    std::vector<std::pair<std::string, std::string>> sections;  // (id, header token)

    int size() const { return static_cast<int>(sections.size()); }
    int index_of(const std::string& section_id) const;  // -1 if absent
    const std::string& header_of(const std::string& section_id) const;  // throws if absent
    std::optional<std::string> section_of_header(const std::string& header_token) const;

    // Built-in schemes.
    static SectionScheme synthetic4();
    static SectionScheme ami();
    static SectionScheme soap15();
    static SectionScheme by_name(const std::string& name);  // throws ConfigError
};

// A note sentence with its evidence links (sorted, unique utterance indices).
// In generated notes the same field carries provenance: the utterance indices
// that conditioned the sentence.
struct NoteSentence {
    std::string section_id;
    std::vector<std::string> tokens;
    std::vector<int> evidence;
};

struct Note {
    std::vector<NoteSentence> sentences;

    bool empty() const { return sentences.empty(); }
};

enum class Split { Train, Validation, Test };

std::string to_string(Split split);
Split split_from_string(const std::string& s);  // throws ParseError

struct AnnotatedRecord {
    Conversation conversation;
    Note note;
    Split split = Split::Train;
};

// Evidence cluster: the utterance indices supporting one note sentence (gold)
// or one generation unit (predicted). Indices sorted ascending, nonempty.
struct EvidenceCluster {
    std::string section_id;
    std::vector<int> indices;
};

// A generated note plus per-sentence provenance (stored on the sentences'
// evidence field).
struct GeneratedNote {
    std::string record_id;
    Note note;
};

// Structural equality helpers (used by round-trip tests and determinism
// checks).
bool operator==(const Utterance& a, const Utterance& b);
bool operator==(const Conversation& a, const Conversation& b);
bool operator==(const NoteSentence& a, const NoteSentence& b);
bool operator==(const Note& a, const Note& b);
bool operator==(const AnnotatedRecord& a, const AnnotatedRecord& b);

// Validates a record against the scheme: contiguous utterance indices,
// resolvable evidence, sentences grouped in canonical section order.
// Throws ValidationError naming the record id.
void validate_record(const AnnotatedRecord& record, const SectionScheme& scheme,
                     bool allow_empty_evidence = true);

}  // namespace convnote
