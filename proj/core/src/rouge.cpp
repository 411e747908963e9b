#include "convnote/rouge.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "convnote/error.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

double f1_score(double precision, double recall) {
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

std::unordered_map<std::string, int> ngram_counts(
    const std::vector<std::string>& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key += '\x1f';
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

}  // namespace

RougeScore rouge_n(const std::vector<std::string>& hypothesis,
                   const std::vector<std::string>& reference, int n) {
    auto hyp_counts = ngram_counts(hypothesis, n);
    auto ref_counts = ngram_counts(reference, n);
    long hyp_total = 0;
    long ref_total = 0;
    for (const auto& [key, c] : hyp_counts) hyp_total += c;
    for (const auto& [key, c] : ref_counts) ref_total += c;
    long overlap = 0;
    for (const auto& [key, c] : hyp_counts) {
        auto it = ref_counts.find(key);
        if (it != ref_counts.end()) overlap += std::min(c, it->second);
    }
    RougeScore score;
    if (hyp_total > 0) score.precision = static_cast<double>(overlap) / hyp_total;
    if (ref_total > 0) score.recall = static_cast<double>(overlap) / ref_total;
    score.f1 = f1_score(score.precision, score.recall);
    return score;
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    // Two-row DP keeps memory linear in the shorter dimension.
    const auto& rows = a;
    const auto& cols = b;
    std::vector<std::size_t> prev(cols.size() + 1, 0);
    std::vector<std::size_t> curr(cols.size() + 1, 0);
    for (std::size_t i = 1; i <= rows.size(); ++i) {
        for (std::size_t j = 1; j <= cols.size(); ++j) {
            if (rows[i - 1] == cols[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[cols.size()];
}

RougeScore rouge_l(const std::vector<std::string>& hypothesis,
                   const std::vector<std::string>& reference) {
    RougeScore score;
    std::size_t lcs = lcs_length(hypothesis, reference);
    if (!hypothesis.empty())
        score.precision = static_cast<double>(lcs) / hypothesis.size();
    if (!reference.empty())
        score.recall = static_cast<double>(lcs) / reference.size();
    score.f1 = f1_score(score.precision, score.recall);
    return score;
}

RougeReport rouge_all(const std::vector<std::string>& hypothesis,
                      const std::vector<std::string>& reference) {
    RougeReport report;
    report.r1 = rouge_n(hypothesis, reference, 1);
    report.r2 = rouge_n(hypothesis, reference, 2);
    report.rl = rouge_l(hypothesis, reference);
    return report;
}

std::vector<std::string> note_scoring_tokens(const Note& note,
                                             const SectionScheme& scheme) {
    std::vector<std::string> tokens;
    for (const auto& [section_id, header] : scheme.sections) {
        for (const auto& sentence : note.sentences) {
            if (sentence.section_id != section_id) continue;
            tokens.insert(tokens.end(), sentence.tokens.begin(),
                          sentence.tokens.end());
        }
    }
    return tokens;
}

std::vector<std::string> section_tokens(const Note& note,
                                        const std::string& section_id) {
    std::vector<std::string> tokens;
    for (const auto& sentence : note.sentences) {
        if (sentence.section_id != section_id) continue;
        tokens.insert(tokens.end(), sentence.tokens.begin(),
                      sentence.tokens.end());
    }
    return tokens;
}

namespace {

std::unordered_map<std::string, const AnnotatedRecord*> gold_index(
    const std::vector<AnnotatedRecord>& gold) {
    std::unordered_map<std::string, const AnnotatedRecord*> by_id;
    for (const auto& record : gold) by_id[record.conversation.id] = &record;
    return by_id;
}

const AnnotatedRecord& gold_for(
    const std::unordered_map<std::string, const AnnotatedRecord*>& by_id,
    const std::string& record_id) {
    auto it = by_id.find(record_id);
    if (it == by_id.end()) {
        throw ValidationError("generated record " + record_id +
                              " has no gold counterpart");
    }
    return *it->second;
}

struct ScoreAccumulator {
    RougeReport sum;
    int n = 0;

    void add(const RougeReport& report) {
        auto acc = [](RougeScore& total, const RougeScore& x) {
            total.precision += x.precision;
            total.recall += x.recall;
            total.f1 += x.f1;
        };
        acc(sum.r1, report.r1);
        acc(sum.r2, report.r2);
        acc(sum.rl, report.rl);
        ++n;
    }

    RougeReport mean() const {
        RougeReport report = sum;
        if (n == 0) return report;
        auto div = [this](RougeScore& x) {
            x.precision /= n;
            x.recall /= n;
            x.f1 /= n;
        };
        div(report.r1);
        div(report.r2);
        div(report.rl);
        return report;
    }
};

}  // namespace

RougeReport score_notes_whole(const std::vector<GeneratedNote>& generated,
                              const std::vector<AnnotatedRecord>& gold,
                              const SectionScheme& scheme) {
    auto by_id = gold_index(gold);
    ScoreAccumulator acc;
    for (const auto& gen : generated) {
        const auto& record = gold_for(by_id, gen.record_id);
        acc.add(rouge_all(note_scoring_tokens(gen.note, scheme),
                          note_scoring_tokens(record.note, scheme)));
    }
    return acc.mean();
}

std::vector<SectionRougeRow> score_notes_per_section(
    const std::vector<GeneratedNote>& generated,
    const std::vector<AnnotatedRecord>& gold, const SectionScheme& scheme) {
    auto by_id = gold_index(gold);
    std::vector<SectionRougeRow> rows;
    for (const auto& [section_id, header] : scheme.sections) {
        SectionRougeRow row;
        row.section_id = section_id;
        ScoreAccumulator acc;
        double gold_tokens = 0.0;
        for (const auto& gen : generated) {
            const auto& record = gold_for(by_id, gen.record_id);
            auto ref = section_tokens(record.note, section_id);
            if (ref.empty()) continue;
            auto hyp = section_tokens(gen.note, section_id);
            acc.add(rouge_all(hyp, ref));
            gold_tokens += static_cast<double>(ref.size());
        }
        row.rouge = acc.mean();
        row.n_records = acc.n;
        row.mean_gold_tokens = acc.n > 0 ? gold_tokens / acc.n : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

void append_score_cells(std::vector<std::string>& row, const RougeScore& s) {
    row.push_back(format_fixed(s.precision));
    row.push_back(format_fixed(s.recall));
    row.push_back(format_fixed(s.f1));
}

}  // namespace

std::string whole_note_report_tsv(const RougeReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"metric", "precision", "recall", "f1"});
    std::vector<std::string> r1{"rouge1"};
    append_score_cells(r1, report.r1);
    std::vector<std::string> r2{"rouge2"};
    append_score_cells(r2, report.r2);
    std::vector<std::string> rl{"rougeL"};
    append_score_cells(rl, report.rl);
    rows.push_back(std::move(r1));
    rows.push_back(std::move(r2));
    rows.push_back(std::move(rl));
    return render_tsv(rows);
}

std::string per_section_report_tsv(const std::vector<SectionRougeRow>& rows) {
    std::vector<std::vector<std::string>> table;
    table.push_back({"section", "rouge1_f1", "rouge2_f1", "rougeL_f1", "n",
                     "mean_gold_tokens"});
    for (const auto& row : rows) {
        table.push_back({row.section_id, format_fixed(row.rouge.r1.f1),
                         format_fixed(row.rouge.r2.f1),
                         format_fixed(row.rouge.rl.f1),
                         std::to_string(row.n_records),
                         format_fixed(row.mean_gold_tokens)});
    }
    return render_tsv(table);
}

}  // namespace convnote
