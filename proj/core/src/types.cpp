#include "convnote/types.hpp"

#include "convnote/error.hpp"

namespace convnote {

int SectionScheme::index_of(const std::string& section_id) const {
    for (int i = 0; i < size(); ++i)
        if (sections[i].first == section_id) return i;
    return -1;
}

const std::string& SectionScheme::header_of(const std::string& section_id) const {
    int i = index_of(section_id);
    if (i < 0) throw ValidationError("unknown section id: " + section_id);
    return sections[i].second;
}

std::optional<std::string> SectionScheme::section_of_header(const std::string& header_token) const {
    for (const auto& [id, header] : sections)
        if (header == header_token) return id;
    return std::nullopt;
}

SectionScheme SectionScheme::synthetic4() {
    return SectionScheme{"synthetic4",
                         {{"symptoms", "<symptoms>"},
                          {"medications", "<medications>"},
                          {"results", "<results>"},
                          {"plan", "<plan>"}}};
}

SectionScheme SectionScheme::ami() {
    return SectionScheme{"ami",
                         {{"abstract", "<abstract>"},
                          {"decisions", "<decisions>"},
                          {"actions", "<actions>"},
                          {"problems", "<problems>"}}};
}

SectionScheme SectionScheme::soap15() {
    SectionScheme s;
    s.name = "soap15";
    const char* ids[] = {
        "chief_complaint",
        "review_of_systems",
        "past_medical_history",
        "past_surgical_history",
        "family_medical_history",
        "social_history",
        "medications",
        "allergies",
        "miscellaneous",
        "immunizations",
        "laboratory_and_imaging_results",
        "assessment",
        "diagnostics_and_appointments",
        "prescriptions_and_therapeutics",
        "healthcare_complaints",
    };
    for (const char* id : ids) s.sections.emplace_back(id, "<" + std::string(id) + ">");
    return s;
}

SectionScheme SectionScheme::by_name(const std::string& name) {
    if (name == "synthetic4") return synthetic4();
    if (name == "ami") return ami();
    if (name == "soap15") return soap15();
    throw ConfigError("unknown section scheme: " + name);
}

std::string to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "validation") return Split::Validation;
    if (s == "test") return Split::Test;
    throw ParseError("unknown split tag: " + s);
}

bool operator==(const Utterance& a, const Utterance& b) {
    return a.index == b.index && a.speaker == b.speaker && a.text == b.text && a.tokens == b.tokens;
}

bool operator==(const Conversation& a, const Conversation& b) {
    return a.id == b.id && a.utterances == b.utterances;
}

bool operator==(const NoteSentence& a, const NoteSentence& b) {
    return a.section_id == b.section_id && a.tokens == b.tokens && a.evidence == b.evidence;
}

bool operator==(const Note& a, const Note& b) { return a.sentences == b.sentences; }

bool operator==(const AnnotatedRecord& a, const AnnotatedRecord& b) {
    return a.conversation == b.conversation && a.note == b.note && a.split == b.split;
}

void validate_record(const AnnotatedRecord& record, const SectionScheme& scheme,
                     bool allow_empty_evidence) {
    const std::string& id = record.conversation.id;
    const int n = record.conversation.size();
    for (int i = 0; i < n; ++i) {
        if (record.conversation.utterances[i].index != i)
            throw ValidationError("record " + id + ": utterance indices not contiguous at position " +
                                  std::to_string(i));
    }
    int last_section = -1;
    for (std::size_t k = 0; k < record.note.sentences.size(); ++k) {
        const NoteSentence& s = record.note.sentences[k];
        int sec = scheme.index_of(s.section_id);
        if (sec < 0)
            throw ValidationError("record " + id + ": unknown section '" + s.section_id + "'");
        if (sec < last_section)
            throw ValidationError("record " + id + ": sentences not in canonical section order");
        last_section = sec;
        if (s.evidence.empty() && !allow_empty_evidence)
            throw ValidationError("record " + id + ": sentence " + std::to_string(k) +
                                  " has empty evidence");
        int prev = -1;
        for (int e : s.evidence) {
            if (e < 0 || e >= n)
                throw ValidationError("record " + id + ": evidence index " + std::to_string(e) +
                                      " out of range (conversation has " + std::to_string(n) +
                                      " utterances)");
            if (e <= prev)
                throw ValidationError("record " + id + ": evidence indices must be sorted unique");
            prev = e;
        }
    }
}

}  // namespace convnote
