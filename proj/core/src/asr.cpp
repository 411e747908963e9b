#include "convnote/asr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "convnote/soundex.hpp"
#include "convnote/tokenize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

bool is_word(const std::string& token) {
    return std::any_of(token.begin(), token.end(), [](unsigned char c) {
        return std::isalpha(c) != 0;
    });
}

class CandidateCache {
  public:
    explicit CandidateCache(const std::vector<std::string>& lexicon)
        : lexicon_(lexicon) {}

    const std::vector<std::string>& for_word(const std::string& word) {
        auto it = cache_.find(word);
        if (it != cache_.end()) return it->second;
        auto [inserted, ok] =
            cache_.emplace(word, candidate_set(word, lexicon_));
        return inserted->second;
    }

  private:
    const std::vector<std::string>& lexicon_;
    std::unordered_map<std::string, std::vector<std::string>> cache_;
};

struct WordPosition {
    std::size_t utterance;
    std::size_t token;
};

void corrupt_conversation(Conversation& conversation, double rate,
                          CandidateCache& cache, std::uint64_t seed,
                          CorruptionReport& report) {
    std::vector<WordPosition> positions;
    for (std::size_t u = 0; u < conversation.utterances.size(); ++u) {
        const auto& tokens = conversation.utterances[u].tokens;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (is_word(tokens[t])) positions.push_back({u, t});
        }
    }
    report.word_tokens += static_cast<long>(positions.size());
    auto n_select = static_cast<std::size_t>(
        std::llround(rate * static_cast<double>(positions.size())));
    n_select = std::min(n_select, positions.size());
    if (n_select == 0) return;

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates; the chosen prefix is then re-sorted so the
    // replacement draws happen in document order.
    for (std::size_t i = 0; i < n_select; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, positions.size() - 1);
        std::swap(positions[i], positions[d(rng)]);
    }
    positions.resize(n_select);
    std::sort(positions.begin(), positions.end(),
              [](const WordPosition& a, const WordPosition& b) {
                  return a.utterance != b.utterance ? a.utterance < b.utterance
                                                    : a.token < b.token;
              });
    report.selected += static_cast<long>(n_select);

    std::set<std::size_t> touched;
    for (const auto& pos : positions) {
        auto& utterance = conversation.utterances[pos.utterance];
        const auto& candidates = cache.for_word(utterance.tokens[pos.token]);
        if (candidates.empty()) {
            ++report.skipped;
            continue;
        }
        std::uniform_int_distribution<std::size_t> d(0, candidates.size() - 1);
        utterance.tokens[pos.token] = candidates[d(rng)];
        ++report.replaced;
        touched.insert(pos.utterance);
    }
    for (std::size_t u : touched) {
        auto& utterance = conversation.utterances[u];
        utterance.text = join_tokens(utterance.tokens);
    }
}

}  // namespace

std::vector<std::string> build_lexicon(
    const std::vector<AnnotatedRecord>& records) {
    std::set<std::string> types;
    for (const auto& record : records) {
        for (const auto& utterance : record.conversation.utterances) {
            for (const auto& token : utterance.tokens) {
                if (is_word(token)) types.insert(token);
            }
        }
    }
    return {types.begin(), types.end()};
}

std::vector<AnnotatedRecord> corrupt_corpus(
    const std::vector<AnnotatedRecord>& records, double rate,
    const std::vector<std::string>& lexicon, std::uint64_t seed,
    CorruptionReport* report) {
    CandidateCache cache(lexicon);
    CorruptionReport totals;
    std::vector<AnnotatedRecord> corrupted = records;
    for (auto& record : corrupted) {
        corrupt_conversation(record.conversation, rate, cache,
                             seed ^ fnv1a64(record.conversation.id), totals);
    }
    if (report != nullptr) *report = totals;
    return corrupted;
}

std::string corruption_report_tsv(const CorruptionReport& report) {
    double replaced_fraction =
        report.word_tokens > 0
            ? static_cast<double>(report.replaced) / report.word_tokens
            : 0.0;
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"key", "value"});
    rows.push_back({"word_tokens", std::to_string(report.word_tokens)});
    rows.push_back({"selected", std::to_string(report.selected)});
    rows.push_back({"replaced", std::to_string(report.replaced)});
    rows.push_back({"skipped", std::to_string(report.skipped)});
    rows.push_back({"replaced_fraction", format_fixed(replaced_fraction)});
    return render_tsv(rows);
}

}  // namespace convnote
