#include "convnote/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/rouge.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

std::vector<std::vector<int>> proximity_cluster(const std::vector<int>& indices,
                                                int tau) {
    std::vector<std::vector<int>> clusters;
    // On sorted indices the closure reduces to chaining adjacent gaps: any
    // pair spanning a break is separated by at least the break's gap.
    for (int index : indices) {
        if (!clusters.empty() && index - clusters.back().back() - 1 <= tau) {
            clusters.back().push_back(index);
        } else {
            clusters.push_back({index});
        }
    }
    return clusters;
}

namespace {

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t common = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++common;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    double unions = static_cast<double>(a.size() + b.size() - common);
    return unions > 0.0 ? static_cast<double>(common) / unions : 0.0;
}

}  // namespace

double cluster_alignment_score(const std::vector<std::vector<int>>& predicted,
                               const std::vector<std::vector<int>>& gold) {
    if (predicted.empty() && gold.empty()) return 1.0;
    if (predicted.empty() || gold.empty()) return 0.0;
    std::vector<bool> pred_used(predicted.size(), false);
    std::vector<bool> gold_used(gold.size(), false);
    double matched_mass = 0.0;
    while (true) {
        double best = 0.0;
        std::size_t best_p = 0;
        std::size_t best_g = 0;
        for (std::size_t p = 0; p < predicted.size(); ++p) {
            if (pred_used[p]) continue;
            for (std::size_t g = 0; g < gold.size(); ++g) {
                if (gold_used[g]) continue;
                double j = jaccard(predicted[p], gold[g]);
                if (j > best) {
                    best = j;
                    best_p = p;
                    best_g = g;
                }
            }
        }
        if (best <= 0.0) break;
        pred_used[best_p] = true;
        gold_used[best_g] = true;
        matched_mass += best;
    }
    double precision = matched_mass / static_cast<double>(predicted.size());
    double recall = matched_mass / static_cast<double>(gold.size());
    return f1_score(precision, recall);
}

CalibrationMode calibration_mode_from_string(const std::string& s) {
    if (s == "cluster-matched") return CalibrationMode::ClusterMatched;
    if (s == "count-free") return CalibrationMode::CountFree;
    throw ConfigError("unknown calibration mode: " + s);
}

std::string to_string(CalibrationMode mode) {
    return mode == CalibrationMode::ClusterMatched ? "cluster-matched"
                                                   : "count-free";
}

double Thresholds::theta_for(const std::string& section_id) const {
    for (const auto& section : sections) {
        if (section.section_id == section_id) return section.theta;
    }
    throw ConfigError("no calibrated threshold for section " + section_id);
}

std::string thresholds_tsv(const Thresholds& thresholds) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"section", "theta", "predicted_clusters", "gold_clusters",
                    "selection_f1"});
    for (const auto& s : thresholds.sections) {
        rows.push_back({s.section_id, format_fixed(s.theta, 9),
                        std::to_string(s.predicted_clusters),
                        std::to_string(s.gold_clusters),
                        format_fixed(s.selection_f1)});
    }
    return render_tsv(rows);
}

Thresholds thresholds_from_tsv(const std::string& text) {
    auto rows = parse_tsv(text);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "section") {
        throw ParseError("thresholds table missing header row");
    }
    Thresholds thresholds;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 5) {
            throw ParseError("thresholds row " + std::to_string(i) +
                             ": expected 5 fields, got " +
                             std::to_string(row.size()));
        }
        SectionCalibration s;
        s.section_id = row[0];
        try {
            s.theta = std::stod(row[1]);
            s.predicted_clusters = std::stol(row[2]);
            s.gold_clusters = std::stol(row[3]);
            s.selection_f1 = std::stod(row[4]);
        } catch (const std::exception&) {
            throw ParseError("thresholds row " + std::to_string(i) +
                             ": malformed number");
        }
        thresholds.sections.push_back(std::move(s));
    }
    return thresholds;
}

std::vector<int> select_indices(const std::vector<double>& scores,
                                double theta) {
    std::vector<int> selected;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= theta) selected.push_back(static_cast<int>(i));
    }
    return selected;
}

namespace {

struct SectionView {
    // Per validation record: dense scores and gold labels for one section.
    std::vector<const std::vector<double>*> scores;
    std::vector<std::vector<bool>> labels;
    long gold_clusters = 0;
};

std::vector<SectionView> build_views(
    const std::vector<AnnotatedRecord>& validation,
    const std::vector<UtteranceScores>& scores, const SectionScheme& scheme) {
    if (validation.empty()) {
        throw ValidationError("calibration requires a nonempty split");
    }
    std::unordered_map<std::string, const UtteranceScores*> by_id;
    for (const auto& s : scores) by_id[s.record_id] = &s;
    std::vector<SectionView> views(scheme.sections.size());
    for (const auto& record : validation) {
        const std::string& id = record.conversation.id;
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ValidationError("no scores for record " + id);
        }
        const auto& score_set = *it->second;
        if (score_set.by_section.size() != scheme.sections.size()) {
            throw ValidationError("score table for record " + id +
                                  " has wrong section count");
        }
        for (std::size_t s = 0; s < scheme.sections.size(); ++s) {
            if (score_set.by_section[s].size() != record.conversation.size()) {
                throw ValidationError("score table for record " + id +
                                      " has wrong utterance count");
            }
            views[s].scores.push_back(&score_set.by_section[s]);
        }
        auto labels = evidence_labels(record, scheme);
        auto gold = derive_gold_clusters(record);
        std::vector<long> gold_counts(scheme.sections.size(), 0);
        for (const auto& cluster : gold) {
            int idx = scheme.index_of(cluster.section_id);
            if (idx >= 0) ++gold_counts[idx];
        }
        for (std::size_t s = 0; s < scheme.sections.size(); ++s) {
            views[s].labels.push_back(std::move(labels[s]));
            views[s].gold_clusters += gold_counts[s];
        }
    }
    return views;
}

std::vector<double> candidate_thetas(const SectionView& view) {
    std::set<double> unique;
    double max_score = 0.0;
    for (const auto* scores : view.scores) {
        for (double s : *scores) {
            unique.insert(s);
            max_score = std::max(max_score, s);
        }
    }
    std::vector<double> candidates(unique.begin(), unique.end());
    // Sentinel above every observed score so an empty selection is always
    // reachable; stays at 1.0 for ordinary probability scores.
    double sentinel = candidates.empty()
                          ? 1.0
                          : std::nextafter(
                                max_score,
                                std::numeric_limits<double>::infinity());
    candidates.push_back(std::max(sentinel, 1.0));
    return candidates;
}

long predicted_cluster_count(const SectionView& view, double theta, int tau) {
    long count = 0;
    for (const auto* scores : view.scores) {
        auto selected = select_indices(*scores, theta);
        count += static_cast<long>(proximity_cluster(selected, tau).size());
    }
    return count;
}

double selection_micro_f1(const SectionView& view, double theta) {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    for (std::size_t r = 0; r < view.scores.size(); ++r) {
        const auto& scores = *view.scores[r];
        const auto& labels = view.labels[r];
        for (std::size_t i = 0; i < scores.size(); ++i) {
            bool picked = scores[i] >= theta;
            if (picked && labels[i]) ++tp;
            else if (picked) ++fp;
            else if (labels[i]) ++fn;
        }
    }
    double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    return f1_score(precision, recall);
}

SectionCalibration calibrate_section(const std::string& section_id,
                                     const SectionView& view, int tau,
                                     CalibrationMode mode) {
    SectionCalibration result;
    result.section_id = section_id;
    result.gold_clusters = view.gold_clusters;
    auto candidates = candidate_thetas(view);
    if (mode == CalibrationMode::ClusterMatched) {
        long best_diff = std::numeric_limits<long>::max();
        for (double theta : candidates) {
            long predicted = predicted_cluster_count(view, theta, tau);
            long diff = std::labs(predicted - view.gold_clusters);
            if (diff <= best_diff) {  // ties toward the larger theta
                best_diff = diff;
                result.theta = theta;
                result.predicted_clusters = predicted;
            }
        }
    } else {
        double best_f1 = -1.0;
        for (double theta : candidates) {
            double f1 = selection_micro_f1(view, theta);
            if (f1 >= best_f1) {
                best_f1 = f1;
                result.theta = theta;
                result.selection_f1 = f1;
            }
        }
        result.predicted_clusters = predicted_cluster_count(view, result.theta, tau);
    }
    return result;
}

}  // namespace

Thresholds calibrate_thresholds(const std::vector<AnnotatedRecord>& validation,
                                const std::vector<UtteranceScores>& scores,
                                const SectionScheme& scheme, int tau,
                                CalibrationMode mode) {
    auto views = build_views(validation, scores, scheme);
    Thresholds thresholds;
    for (std::size_t s = 0; s < scheme.sections.size(); ++s) {
        thresholds.sections.push_back(calibrate_section(
            scheme.sections[s].first, views[s], tau, mode));
    }
    return thresholds;
}

double proxy_alignment_at_tau(const std::vector<AnnotatedRecord>& validation,
                              const std::vector<UtteranceScores>& scores,
                              const SectionScheme& scheme, int tau,
                              CalibrationMode mode) {
    auto thresholds = calibrate_thresholds(validation, scores, scheme, tau, mode);
    std::unordered_map<std::string, const UtteranceScores*> by_id;
    for (const auto& s : scores) by_id[s.record_id] = &s;
    double total = 0.0;
    long pairs = 0;
    for (const auto& record : validation) {
        const auto& score_set = *by_id.at(record.conversation.id);
        auto gold = derive_gold_clusters(record);
        for (std::size_t s = 0; s < scheme.sections.size(); ++s) {
            const std::string& section_id = scheme.sections[s].first;
            auto selected = select_indices(score_set.by_section[s],
                                           thresholds.sections[s].theta);
            auto predicted = proximity_cluster(selected, tau);
            std::vector<std::vector<int>> gold_indices;
            for (const auto& cluster : gold) {
                if (cluster.section_id == section_id) {
                    gold_indices.push_back(cluster.indices);
                }
            }
            if (predicted.empty() && gold_indices.empty()) continue;
            total += cluster_alignment_score(predicted, gold_indices);
            ++pairs;
        }
    }
    return pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
}

TauTuneResult tune_tau(const std::vector<int>& candidates,
                       const std::function<double(int)>& score_tau) {
    auto taus = candidates;
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    if (taus.empty()) throw ConfigError("tune_tau requires candidate values");
    TauTuneResult result;
    double best = -std::numeric_limits<double>::infinity();
    for (int tau : taus) {
        double score = score_tau(tau);
        result.rows.push_back({tau, score});
        if (score > best) {  // strict: ties keep the smaller tau
            best = score;
            result.best_tau = tau;
        }
    }
    return result;
}

std::string tau_tune_tsv(const TauTuneResult& result) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"tau", "score", "selected"});
    for (const auto& row : result.rows) {
        rows.push_back({std::to_string(row.tau), format_fixed(row.score),
                        row.tau == result.best_tau ? "1" : "0"});
    }
    return render_tsv(rows);
}

}  // namespace convnote
