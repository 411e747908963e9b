#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convnote/abstractor.hpp"
#include "convnote/cluster.hpp"
#include "convnote/extractor.hpp"
#include "convnote/types.hpp"

namespace convnote {

// The four decompositions, the two reference baselines, and the two
// ablations of the section-wise decomposition.
enum class PipelineMethod {
    Conv2Note,
    Ext2Note,
    Ext2Sec,
    Cluster2Sent,
    RandomNote,
    OracleExt,
    AllExt2Sec,
    Ext2SecNoCond,
};

PipelineMethod pipeline_method_from_string(const std::string& s);  // ConfigError
std::string to_string(PipelineMethod method);

// The decoding unit the method's abstractor must be trained for.
// ConfigError for randomnote/oracleext, which use no abstractor.
DecodeUnit decode_unit_for(PipelineMethod method);

struct PipelineConfig {
    PipelineMethod method = PipelineMethod::Conv2Note;
    bool oracle_utterances = false;
    bool oracle_clusters = false;  // cluster2sent only, implies oracle_utterances
    int tau = 2;
    std::uint64_t seed = 0;
    // Per-conversation utterance cap guarding degenerate inputs; the default
    // is far above any desk-scale conversation, so it is normally inert.
    int max_utterances = 4096;
};

// ---- input and target serialization ----

// Utterance indices [0, min(size, cap)).
std::vector<int> all_indices(const Conversation& conversation, int max_utterances);

// Sorts, deduplicates, and drops indices at or beyond the cap.
std::vector<int> capped_indices(std::vector<int> indices, int max_utterances);

// Flat model input: for each index in transcript order, the speaker tag
// followed by the utterance tokens. Indices must be valid for the
// conversation (ValidationError otherwise).
std::vector<std::string> tagged_tokens(const Conversation& conversation,
                                       const std::vector<int>& indices);

// Flat note target: every header token in canonical order, each followed by
// its section's sentence tokens concatenated in note order. An empty
// section is two adjacent headers.
std::vector<std::string> linearize_note(const Note& note, const SectionScheme& scheme);

// Inverse of linearize_note up to sentence boundaries: each nonempty section
// body becomes one sentence (evidence left empty). Requires every header
// exactly once in canonical order, starting at the first token; ParseError
// otherwise.
Note note_from_tokens(const std::vector<std::string>& tokens, const SectionScheme& scheme);

// ---- selection sources ----

// Union of gold evidence per scheme section, sorted ascending.
std::vector<std::vector<int>> oracle_section_selection(const AnnotatedRecord& record,
                                                       const SectionScheme& scheme);

// Union of gold evidence across all sections, sorted ascending.
std::vector<int> oracle_union_selection(const AnnotatedRecord& record);

// Thresholded extractor selections. The model mode must match: multilabel
// for the per-section form, binary for the union form (ConfigError).
std::vector<std::vector<int>> predicted_section_selection(const ExtractorModel& model,
                                                          const Thresholds& thresholds,
                                                          const Conversation& conversation);
std::vector<int> predicted_union_selection(const ExtractorModel& model,
                                           const Thresholds& thresholds,
                                           const Conversation& conversation);

// ---- abstractor supervision ----

// Builds the method's training pairs from gold records: inputs are tagged
// utterance streams chosen the way the method conditions at run time, and
// targets are the matching note, section, or sentence token streams. Pairs
// whose input would be empty are skipped. ConfigError for methods that use
// no abstractor.
std::vector<AbstractorPair> abstractor_training_pairs(
    PipelineMethod method, const std::vector<AnnotatedRecord>& records,
    const SectionScheme& scheme, int max_utterances);

// ---- run operations ----

GeneratedNote run_conv2note(const AnnotatedRecord& record, const SectionScheme& scheme,
                            const Seq2SeqAbstractor& abstractor, int max_utterances);

// Empty selection falls back to an empty note (headers carry no body).
GeneratedNote run_ext2note(const AnnotatedRecord& record, const SectionScheme& scheme,
                           const std::vector<int>& selection,
                           const Seq2SeqAbstractor& abstractor);

// selection is per scheme section; empty sections emit nothing.
// conditioned=false decodes without the section token.
GeneratedNote run_ext2sec(const AnnotatedRecord& record, const SectionScheme& scheme,
                          const std::vector<std::vector<int>>& selection,
                          const Seq2SeqAbstractor& abstractor, bool conditioned);

// One shared selection decoded once per section with that section's token.
GeneratedNote run_allext2sec(const AnnotatedRecord& record, const SectionScheme& scheme,
                             const std::vector<int>& selection,
                             const Seq2SeqAbstractor& abstractor);

// Proximity-clusters each section's selection at tau and decodes one
// sentence per cluster, ordered by cluster first index; provenance is the
// cluster.
GeneratedNote run_cluster2sent(const AnnotatedRecord& record, const SectionScheme& scheme,
                               const std::vector<std::vector<int>>& selection, int tau,
                               const Seq2SeqAbstractor& abstractor);

// Oracle-cluster variant: one sentence per gold evidence cluster.
GeneratedNote run_cluster2sent_gold(const AnnotatedRecord& record,
                                    const SectionScheme& scheme,
                                    const Seq2SeqAbstractor& abstractor);

// Uniform draw from the training notes, deterministic per (seed, record id);
// provenance empty. ValidationError on an empty training set.
GeneratedNote run_randomnote(const AnnotatedRecord& record,
                             const std::vector<AnnotatedRecord>& train_records,
                             std::uint64_t seed);

// Gold evidence utterances verbatim, one sentence per utterance, grouped by
// section in canonical order.
GeneratedNote run_oracleext(const AnnotatedRecord& record, const SectionScheme& scheme);

// ---- unified driver ----

struct PipelineModels {
    const ExtractorModel* extractor = nullptr;
    const Thresholds* thresholds = nullptr;
    const Seq2SeqAbstractor* abstractor = nullptr;
    const std::vector<AnnotatedRecord>* train_records = nullptr;  // randomnote pool
};

// ConfigError when the method's required models are missing, the extractor
// mode or abstractor decode unit does not match the method, the oracle-
// cluster flags are inconsistent, or the cap/tau are out of range.
void validate_pipeline(const PipelineConfig& config, const PipelineModels& models);

GeneratedNote run_pipeline(const PipelineConfig& config, const PipelineModels& models,
                           const SectionScheme& scheme, const AnnotatedRecord& record);

// ---- generated-note serialization ----

// JSONL alongside the corpus schema: {id, note:[{section, text, evidence}]}
// where evidence carries the sentence's provenance indices.
std::string render_generated(const std::vector<GeneratedNote>& notes);
void save_generated(const std::vector<GeneratedNote>& notes, const std::string& path);
std::vector<GeneratedNote> load_generated(const std::string& path,
                                          const SectionScheme& scheme);

}  // namespace convnote
