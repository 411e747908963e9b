#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convnote/cluster.hpp"
#include "convnote/features.hpp"
#include "convnote/types.hpp"

namespace convnote {

enum class ExtractorMode { Multilabel, Binary };

ExtractorMode extractor_mode_from_string(const std::string& s);  // ConfigError
std::string to_string(ExtractorMode mode);

struct ExtractorHyperparams {
    double learning_rate = 0.05;  // Adam step size
    int max_epochs = 400;
    double tolerance = 1e-8;  // stop when the loss improves less than this
    double l2 = 1e-4;
};

// Logistic regression over FeatureSpace vectors: one weight row per section
// in multilabel mode, exactly one ("any") in binary mode.
struct ExtractorModel {
    ExtractorMode mode = ExtractorMode::Multilabel;
    FeatureSpace space;
    std::vector<std::string> label_ids;
    Eigen::MatrixXd weights;  // labels x feature_dim
    Eigen::VectorXd bias;     // labels
};

// Gold labels for training and evaluation: labels[label][utterance].
// Multilabel rows follow the scheme's section order; binary mode has the
// single any-section row (the union over sections).
std::vector<std::vector<bool>> extraction_labels(const AnnotatedRecord& record,
                                                 const SectionScheme& scheme,
                                                 ExtractorMode mode);

// Full-batch Adam from zero initialization, so training is deterministic;
// the seed is recorded for manifests but never consumed. Throws
// TrainingError naming the epoch if the loss turns non-finite, and
// ValidationError on an empty training split. When logged_scores is given
// it receives the final-epoch training probabilities (one entry per record,
// in input order).
ExtractorModel train_extractor(const std::vector<AnnotatedRecord>& train,
                               const FeatureSpace& space,
                               const SectionScheme& scheme, ExtractorMode mode,
                               const ExtractorHyperparams& hyperparams,
                               std::uint64_t seed,
                               std::vector<UtteranceScores>* logged_scores = nullptr);

// Probabilities by_label[label][utterance] via the logistic link.
UtteranceScores score_utterances(const ExtractorModel& model,
                                 const Conversation& conversation);

// Per-label index lists selected at score >= theta_for(label).
std::vector<std::vector<int>> select_noteworthy(const UtteranceScores& scores,
                                                const std::vector<std::string>& label_ids,
                                                const Thresholds& thresholds);

// Loss and gradient of the batch objective (mean BCE over label cells plus
// (l2/2)*||W||^2); exposed for the finite-difference gradient test.
double extractor_loss(const Eigen::MatrixXd& weights,
                      const Eigen::VectorXd& bias,
                      const std::vector<FeatureVector>& features,
                      const std::vector<std::vector<bool>>& labels, double l2);
void extractor_gradient(const Eigen::MatrixXd& weights,
                        const Eigen::VectorXd& bias,
                        const std::vector<FeatureVector>& features,
                        const std::vector<std::vector<bool>>& labels,
                        double l2, Eigen::MatrixXd& grad_weights,
                        Eigen::VectorXd& grad_bias);

struct LabelClassification {
    std::string label_id;
    long positives = 0;
    long negatives = 0;
    double base_rate = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc;  // absent when either class is empty
};

struct ClassificationReport {
    double accuracy = 0.0;  // micro over all (utterance, label) cells
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;  // over labels with positives
    double micro_auc = 0.0;
    std::optional<double> macro_auc;
    std::vector<LabelClassification> labels;
};

// Rank-based AUC (Mann-Whitney) with average ranks for ties; absent when
// positives or negatives are missing.
std::optional<double> rank_auc(const std::vector<double>& scores,
                               const std::vector<bool>& labels);

ClassificationReport evaluate_extractor(const ExtractorModel& model,
                                        const std::vector<AnnotatedRecord>& records,
                                        const SectionScheme& scheme);

std::string classification_report_tsv(const ClassificationReport& report);

// Versioned little-endian binary checkpoint.
void save_extractor(const ExtractorModel& model, const std::string& path);
ExtractorModel load_extractor(const std::string& path);  // ParseError

}  // namespace convnote
