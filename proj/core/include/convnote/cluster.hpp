#pragma once

#include <functional>
#include <string>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

// Groups sorted unique indices: i<j are close iff j-i-1 <= tau (the count of
// utterances strictly between them); clusters are the transitive closure of
// closeness, ordered by first index.
std::vector<std::vector<int>> proximity_cluster(const std::vector<int>& indices,
                                                int tau);

// Greedy max-Jaccard matching of predicted to gold clusters (each side
// matched at most once); F1 over matched mass weighted by Jaccard.
// Identical lists (including both empty) score 1.0.
double cluster_alignment_score(const std::vector<std::vector<int>>& predicted,
                               const std::vector<std::vector<int>>& gold);

enum class CalibrationMode { ClusterMatched, CountFree };

CalibrationMode calibration_mode_from_string(const std::string& s);
std::string to_string(CalibrationMode mode);

struct SectionCalibration {
    std::string section_id;
    double theta = 1.0;
    long predicted_clusters = 0;  // cluster-matched diagnostics
    long gold_clusters = 0;
    double selection_f1 = 0.0;  // count-free diagnostics
};

struct Thresholds {
    std::vector<SectionCalibration> sections;

    double theta_for(const std::string& section_id) const;  // ConfigError
};

std::string thresholds_tsv(const Thresholds& thresholds);
Thresholds thresholds_from_tsv(const std::string& text);  // ParseError

// Extractor scores for one conversation, dense:
// by_section[scheme section index][utterance index].
struct UtteranceScores {
    std::string record_id;
    std::vector<std::vector<double>> by_section;
};

// Indices with score >= theta, ascending.
std::vector<int> select_indices(const std::vector<double>& scores,
                                double theta);

// Per-section threshold sweep over observed score values plus a sentinel
// above the max. Cluster-matched: minimize |predicted clusters - gold
// clusters| totalled over the split (ties toward the larger theta).
// Count-free: maximize the section's micro-F1 of utterance selection
// (same tie rule). Throws ValidationError on an empty split or when scores
// are missing or mis-shaped for a record.
Thresholds calibrate_thresholds(const std::vector<AnnotatedRecord>& validation,
                                const std::vector<UtteranceScores>& scores,
                                const SectionScheme& scheme, int tau,
                                CalibrationMode mode);

// Calibrates at tau, then macro-averages cluster_alignment_score between
// heuristic and gold clusters over (record, section) pairs where either
// side is nonempty. Cheap stand-in for scoring generated notes.
double proxy_alignment_at_tau(const std::vector<AnnotatedRecord>& validation,
                              const std::vector<UtteranceScores>& scores,
                              const SectionScheme& scheme, int tau,
                              CalibrationMode mode);

struct TauTuneRow {
    int tau = 0;
    double score = 0.0;
};

struct TauTuneResult {
    int best_tau = 0;
    std::vector<TauTuneRow> rows;
};

// Argmax of score_tau over the candidates (sorted, deduplicated); ties go to
// the smaller tau. Throws ConfigError on an empty candidate set.
TauTuneResult tune_tau(const std::vector<int>& candidates,
                       const std::function<double(int)>& score_tau);

std::string tau_tune_tsv(const TauTuneResult& result);

}  // namespace convnote
