#include "convnote/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/rouge.hpp"
#include "convnote/serialize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'E', 'X'};
constexpr std::uint32_t kVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot_sparse(const Eigen::MatrixXd& weights, int label,
                  const FeatureVector& x) {
    double z = 0.0;
    for (const auto& [index, value] : x.entries) {
        z += weights(label, index) * value;
    }
    return z;
}

// Binary cross entropy written against the logit so extreme probabilities
// stay finite: bce = softplus(z) - y*z.
double bce_from_logit(double z, bool label) {
    double softplus = z > 0.0 ? z + std::log1p(std::exp(-z))
                              : std::log1p(std::exp(z));
    return softplus - (label ? z : 0.0);
}

}  // namespace

ExtractorMode extractor_mode_from_string(const std::string& s) {
    if (s == "multilabel") return ExtractorMode::Multilabel;
    if (s == "binary") return ExtractorMode::Binary;
    throw ConfigError("unknown extractor mode: " + s);
}

std::string to_string(ExtractorMode mode) {
    return mode == ExtractorMode::Multilabel ? "multilabel" : "binary";
}

std::vector<std::vector<bool>> extraction_labels(const AnnotatedRecord& record,
                                                 const SectionScheme& scheme,
                                                 ExtractorMode mode) {
    auto per_section = evidence_labels(record, scheme);
    if (mode == ExtractorMode::Multilabel) return per_section;
    std::vector<bool> any(record.conversation.size(), false);
    for (const auto& section : per_section) {
        for (std::size_t i = 0; i < section.size(); ++i) {
            if (section[i]) any[i] = true;
        }
    }
    return {any};
}

double extractor_loss(const Eigen::MatrixXd& weights,
                      const Eigen::VectorXd& bias,
                      const std::vector<FeatureVector>& features,
                      const std::vector<std::vector<bool>>& labels,
                      double l2) {
    long n_labels = weights.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (long l = 0; l < n_labels; ++l) {
            double z = dot_sparse(weights, static_cast<int>(l), features[i]) +
                       bias(l);
            total += bce_from_logit(z, labels[i][l]);
        }
    }
    double cells = static_cast<double>(features.size()) *
                   static_cast<double>(n_labels);
    return total / cells + 0.5 * l2 * weights.squaredNorm();
}

void extractor_gradient(const Eigen::MatrixXd& weights,
                        const Eigen::VectorXd& bias,
                        const std::vector<FeatureVector>& features,
                        const std::vector<std::vector<bool>>& labels,
                        double l2, Eigen::MatrixXd& grad_weights,
                        Eigen::VectorXd& grad_bias) {
    long n_labels = weights.rows();
    grad_weights = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
    grad_bias = Eigen::VectorXd::Zero(bias.size());
    double cells = static_cast<double>(features.size()) *
                   static_cast<double>(n_labels);
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (long l = 0; l < n_labels; ++l) {
            double z = dot_sparse(weights, static_cast<int>(l), features[i]) +
                       bias(l);
            double err = (sigmoid(z) - (labels[i][l] ? 1.0 : 0.0)) / cells;
            for (const auto& [index, value] : features[i].entries) {
                grad_weights(l, index) += err * value;
            }
            grad_bias(l) += err;
        }
    }
    grad_weights += l2 * weights;
}

ExtractorModel train_extractor(const std::vector<AnnotatedRecord>& train,
                               const FeatureSpace& space,
                               const SectionScheme& scheme, ExtractorMode mode,
                               const ExtractorHyperparams& hyperparams,
                               std::uint64_t seed,
                               std::vector<UtteranceScores>* logged_scores) {
    (void)seed;  // zero-init full-batch training has no stochastic state
    if (train.empty()) {
        throw ValidationError("extractor training requires a nonempty split");
    }
    ExtractorModel model;
    model.mode = mode;
    model.space = space;
    if (mode == ExtractorMode::Multilabel) {
        for (const auto& [section_id, header] : scheme.sections) {
            model.label_ids.push_back(section_id);
        }
    } else {
        model.label_ids.push_back("any");
    }
    long n_labels = static_cast<long>(model.label_ids.size());

    std::vector<FeatureVector> features;
    std::vector<std::vector<bool>> labels;  // [example][label]
    std::vector<std::size_t> record_offsets;
    for (const auto& record : train) {
        record_offsets.push_back(features.size());
        auto by_label = extraction_labels(record, scheme, mode);
        for (std::size_t u = 0; u < record.conversation.size(); ++u) {
            features.push_back(
                utterance_features(space, record.conversation, u));
            std::vector<bool> cell(n_labels);
            for (long l = 0; l < n_labels; ++l) cell[l] = by_label[l][u];
            labels.push_back(std::move(cell));
        }
    }

    model.weights = Eigen::MatrixXd::Zero(n_labels, space.feature_dim());
    model.bias = Eigen::VectorXd::Zero(n_labels);
    Eigen::MatrixXd m_w = model.weights;
    Eigen::MatrixXd v_w = model.weights;
    Eigen::VectorXd m_b = model.bias;
    Eigen::VectorXd v_b = model.bias;
    const double beta1 = 0.9;
    const double beta2 = 0.999;
    const double eps = 1e-8;
    Eigen::MatrixXd grad_w;
    Eigen::VectorXd grad_b;
    double previous_loss = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= hyperparams.max_epochs; ++epoch) {
        extractor_gradient(model.weights, model.bias, features, labels,
                           hyperparams.l2, grad_w, grad_b);
        double correction1 = 1.0 - std::pow(beta1, epoch);
        double correction2 = 1.0 - std::pow(beta2, epoch);
        m_w = beta1 * m_w + (1.0 - beta1) * grad_w;
        v_w = beta2 * v_w.array().matrix() +
              (1.0 - beta2) * grad_w.array().square().matrix();
        m_b = beta1 * m_b + (1.0 - beta1) * grad_b;
        v_b = beta2 * v_b.array().matrix() +
              (1.0 - beta2) * grad_b.array().square().matrix();
        model.weights.array() -=
            hyperparams.learning_rate * (m_w.array() / correction1) /
            ((v_w.array() / correction2).sqrt() + eps);
        model.bias.array() -=
            hyperparams.learning_rate * (m_b.array() / correction1) /
            ((v_b.array() / correction2).sqrt() + eps);
        double loss = extractor_loss(model.weights, model.bias, features,
                                     labels, hyperparams.l2);
        if (!std::isfinite(loss)) {
            throw TrainingError("extractor loss diverged at epoch " +
                                std::to_string(epoch));
        }
        if (std::abs(previous_loss - loss) < hyperparams.tolerance) break;
        previous_loss = loss;
    }

    if (logged_scores != nullptr) {
        logged_scores->clear();
        for (std::size_t r = 0; r < train.size(); ++r) {
            UtteranceScores scores;
            scores.record_id = train[r].conversation.id;
            scores.by_section.assign(
                static_cast<std::size_t>(n_labels),
                std::vector<double>(train[r].conversation.size(), 0.0));
            for (std::size_t u = 0; u < train[r].conversation.size(); ++u) {
                const auto& x = features[record_offsets[r] + u];
                for (long l = 0; l < n_labels; ++l) {
                    scores.by_section[l][u] = sigmoid(
                        dot_sparse(model.weights, static_cast<int>(l), x) +
                        model.bias(l));
                }
            }
            logged_scores->push_back(std::move(scores));
        }
    }
    return model;
}

UtteranceScores score_utterances(const ExtractorModel& model,
                                 const Conversation& conversation) {
    UtteranceScores scores;
    scores.record_id = conversation.id;
    long n_labels = model.weights.rows();
    scores.by_section.assign(static_cast<std::size_t>(n_labels),
                             std::vector<double>(conversation.size(), 0.0));
    for (std::size_t u = 0; u < conversation.size(); ++u) {
        auto x = utterance_features(model.space, conversation, u);
        for (long l = 0; l < n_labels; ++l) {
            scores.by_section[l][u] = sigmoid(
                dot_sparse(model.weights, static_cast<int>(l), x) +
                model.bias(l));
        }
    }
    return scores;
}

std::vector<std::vector<int>> select_noteworthy(
    const UtteranceScores& scores, const std::vector<std::string>& label_ids,
    const Thresholds& thresholds) {
    std::vector<std::vector<int>> selected;
    for (std::size_t l = 0; l < label_ids.size(); ++l) {
        selected.push_back(select_indices(scores.by_section[l],
                                          thresholds.theta_for(label_ids[l])));
    }
    return selected;
}

std::optional<double> rank_auc(const std::vector<double>& scores,
                               const std::vector<bool>& labels) {
    long positives = std::count(labels.begin(), labels.end(), true);
    long negatives = static_cast<long>(labels.size()) - positives;
    if (positives == 0 || negatives == 0) return std::nullopt;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    std::vector<double> ranks(scores.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() &&
               scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        double average_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = average_rank;
        i = j + 1;
    }
    double positive_rank_sum = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k]) positive_rank_sum += ranks[k];
    }
    double p = static_cast<double>(positives);
    double n = static_cast<double>(negatives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

namespace {

struct BinaryCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    void add(bool predicted, bool label) {
        if (predicted && label) ++tp;
        else if (predicted) ++fp;
        else if (label) ++fn;
        else ++tn;
    }
    double precision() const {
        return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    }
    double recall() const {
        return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    }
    double f1() const { return f1_score(precision(), recall()); }
    double accuracy() const {
        long total = tp + fp + fn + tn;
        return total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    }
};

}  // namespace

ClassificationReport evaluate_extractor(
    const ExtractorModel& model, const std::vector<AnnotatedRecord>& records,
    const SectionScheme& scheme) {
    std::size_t n_labels = model.label_ids.size();
    std::vector<std::vector<double>> label_scores(n_labels);
    std::vector<std::vector<bool>> label_golds(n_labels);
    for (const auto& record : records) {
        auto gold = extraction_labels(record, scheme, model.mode);
        auto scores = score_utterances(model, record.conversation);
        for (std::size_t l = 0; l < n_labels; ++l) {
            label_scores[l].insert(label_scores[l].end(),
                                   scores.by_section[l].begin(),
                                   scores.by_section[l].end());
            label_golds[l].insert(label_golds[l].end(), gold[l].begin(),
                                  gold[l].end());
        }
    }

    ClassificationReport report;
    BinaryCounts micro;
    std::vector<double> pooled_scores;
    std::vector<bool> pooled_labels;
    double macro_f1_sum = 0.0;
    long macro_f1_count = 0;
    double macro_auc_sum = 0.0;
    long macro_auc_count = 0;
    for (std::size_t l = 0; l < n_labels; ++l) {
        LabelClassification row;
        row.label_id = model.label_ids[l];
        BinaryCounts counts;
        for (std::size_t k = 0; k < label_scores[l].size(); ++k) {
            bool predicted = label_scores[l][k] >= 0.5;
            counts.add(predicted, label_golds[l][k]);
            micro.add(predicted, label_golds[l][k]);
        }
        pooled_scores.insert(pooled_scores.end(), label_scores[l].begin(),
                             label_scores[l].end());
        pooled_labels.insert(pooled_labels.end(), label_golds[l].begin(),
                             label_golds[l].end());
        row.positives = counts.tp + counts.fn;
        row.negatives = counts.fp + counts.tn;
        long total = row.positives + row.negatives;
        row.base_rate =
            total > 0 ? static_cast<double>(row.positives) / total : 0.0;
        row.precision = counts.precision();
        row.recall = counts.recall();
        row.f1 = counts.f1();
        row.auc = rank_auc(label_scores[l], label_golds[l]);
        if (row.positives > 0) {
            macro_f1_sum += row.f1;
            ++macro_f1_count;
        }
        if (row.auc.has_value()) {
            macro_auc_sum += *row.auc;
            ++macro_auc_count;
        }
        report.labels.push_back(std::move(row));
    }
    report.accuracy = micro.accuracy();
    report.micro_f1 = micro.f1();
    report.macro_f1 = macro_f1_count > 0 ? macro_f1_sum / macro_f1_count : 0.0;
    auto micro_auc = rank_auc(pooled_scores, pooled_labels);
    report.micro_auc = micro_auc.value_or(0.0);
    if (macro_auc_count > 0) {
        report.macro_auc = macro_auc_sum / macro_auc_count;
    }
    return report;
}

std::string classification_report_tsv(const ClassificationReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"metric", "value"});
    rows.push_back({"accuracy", format_fixed(report.accuracy)});
    rows.push_back({"micro_f1", format_fixed(report.micro_f1)});
    rows.push_back({"macro_f1", format_fixed(report.macro_f1)});
    rows.push_back({"micro_auc", format_fixed(report.micro_auc)});
    rows.push_back({"macro_auc", report.macro_auc.has_value()
                                     ? format_fixed(*report.macro_auc)
                                     : "absent"});
    std::string out = render_tsv(rows);
    rows.clear();
    rows.push_back({"label", "positives", "negatives", "base_rate",
                    "precision", "recall", "f1", "auc"});
    for (const auto& label : report.labels) {
        rows.push_back({label.label_id, std::to_string(label.positives),
                        std::to_string(label.negatives),
                        format_fixed(label.base_rate),
                        format_fixed(label.precision),
                        format_fixed(label.recall), format_fixed(label.f1),
                        label.auc.has_value() ? format_fixed(*label.auc)
                                              : "absent"});
    }
    return out + render_tsv(rows);
}

void save_extractor(const ExtractorModel& model, const std::string& path) {
    std::ostringstream out(std::ios::binary);
    write_magic(out, kMagic, kVersion);
    write_u32(out, model.mode == ExtractorMode::Multilabel ? 1 : 0);
    write_u32(out, static_cast<std::uint32_t>(model.space.window));
    write_string_list(out, model.space.vocabulary);
    Eigen::MatrixXd idf(model.space.idf.size(), 1);
    for (std::size_t i = 0; i < model.space.idf.size(); ++i) {
        idf(static_cast<long>(i), 0) = model.space.idf[i];
    }
    write_matrix(out, idf);
    write_string_list(out, model.label_ids);
    write_matrix(out, model.weights);
    Eigen::MatrixXd bias = model.bias;
    write_matrix(out, bias);
    atomic_write_file(path, out.str());
}

ExtractorModel load_extractor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    read_magic(in, kMagic);
    ExtractorModel model;
    model.mode = read_u32(in) == 1 ? ExtractorMode::Multilabel
                                   : ExtractorMode::Binary;
    model.space.window = static_cast<int>(read_u32(in));
    model.space.vocabulary = read_string_list(in);
    Eigen::MatrixXd idf = read_matrix(in);
    model.space.idf.assign(idf.data(), idf.data() + idf.rows());
    model.label_ids = read_string_list(in);
    model.weights = read_matrix(in);
    Eigen::MatrixXd bias = read_matrix(in);
    model.bias = bias.col(0);
    if (model.weights.rows() != static_cast<long>(model.label_ids.size()) ||
        model.weights.cols() != model.space.feature_dim()) {
        throw ParseError("extractor checkpoint has inconsistent shapes");
    }
    return model;
}

}  // namespace convnote
