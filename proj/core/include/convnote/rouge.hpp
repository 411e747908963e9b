#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

// Clipped n-gram overlap. Empty hypothesis or reference scores 0.
RougeScore rouge_n(const std::vector<std::string>& hypothesis,
                   const std::vector<std::string>& reference, int n);

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b);

// LCS over the full token sequences (not per-sentence union).
RougeScore rouge_l(const std::vector<std::string>& hypothesis,
                   const std::vector<std::string>& reference);

struct RougeReport {
    RougeScore r1;
    RougeScore r2;
    RougeScore rl;
};

RougeReport rouge_all(const std::vector<std::string>& hypothesis,
                      const std::vector<std::string>& reference);

// Note text for scoring: section bodies concatenated in scheme order,
// without headers. Sections absent from the note contribute nothing.
std::vector<std::string> note_scoring_tokens(const Note& note,
                                             const SectionScheme& scheme);

std::vector<std::string> section_tokens(const Note& note,
                                        const std::string& section_id);

// Mean per-record ROUGE over whole notes. Every generated record id must
// exist in the gold corpus (ValidationError otherwise).
RougeReport score_notes_whole(const std::vector<GeneratedNote>& generated,
                              const std::vector<AnnotatedRecord>& gold,
                              const SectionScheme& scheme);

struct SectionRougeRow {
    std::string section_id;
    RougeReport rouge;
    int n_records = 0;           // records with a nonempty gold section
    double mean_gold_tokens = 0.0;
};

// Per-section means, restricted to records whose gold section is nonempty.
std::vector<SectionRougeRow> score_notes_per_section(
    const std::vector<GeneratedNote>& generated,
    const std::vector<AnnotatedRecord>& gold, const SectionScheme& scheme);

std::string whole_note_report_tsv(const RougeReport& report);
std::string per_section_report_tsv(const std::vector<SectionRougeRow>& rows);

}  // namespace convnote
