#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "convnote/asr.hpp"
#include "convnote/corpus.hpp"
#include "convnote/soundex.hpp"
#include "convnote/synthetic.hpp"
#include "convnote/tokenize.hpp"

using namespace convnote;

namespace {

std::vector<AnnotatedRecord> sample_corpus(int n_records, std::uint64_t seed) {
    SyntheticConfig config;
    config.n_records = n_records;
    return generate_synthetic(config, seed);
}

long count_changed_tokens(const std::vector<AnnotatedRecord>& before,
                          const std::vector<AnnotatedRecord>& after,
                          std::vector<std::pair<std::string, std::string>>*
                              changes = nullptr) {
    long changed = 0;
    for (std::size_t r = 0; r < before.size(); ++r) {
        const auto& a = before[r].conversation.utterances;
        const auto& b = after[r].conversation.utterances;
        REQUIRE(a.size() == b.size());
        for (std::size_t u = 0; u < a.size(); ++u) {
            REQUIRE(a[u].tokens.size() == b[u].tokens.size());
            for (std::size_t t = 0; t < a[u].tokens.size(); ++t) {
                if (a[u].tokens[t] != b[u].tokens[t]) {
                    ++changed;
                    if (changes != nullptr) {
                        changes->push_back({a[u].tokens[t], b[u].tokens[t]});
                    }
                }
            }
        }
    }
    return changed;
}

}  // namespace

TEST_CASE("corrupt_corpus at rate zero is the identity") {
    auto records = sample_corpus(20, 5);
    auto lexicon = build_lexicon(records);
    CorruptionReport report;
    auto corrupted = corrupt_corpus(records, 0.0, lexicon, 99, &report);
    CHECK(corrupted == records);
    CHECK(report.selected == 0);
    CHECK(report.replaced == 0);
    CHECK(report.word_tokens > 0);
}

TEST_CASE("corrupt_corpus rate one replaces every word with candidates") {
    auto records = sample_corpus(10, 6);
    auto lexicon = build_lexicon(records);
    CorruptionReport report;
    auto corrupted = corrupt_corpus(records, 1.0, lexicon, 3, &report);
    CHECK(report.selected == report.word_tokens);
    CHECK(report.replaced + report.skipped == report.selected);
    CHECK(report.replaced > 0);
    std::vector<std::pair<std::string, std::string>> changes;
    count_changed_tokens(records, corrupted, &changes);
    CHECK(static_cast<long>(changes.size()) == report.replaced);
    // A word was skipped only if it truly has no candidate.
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& before = records[r].conversation.utterances;
        const auto& after = corrupted[r].conversation.utterances;
        for (std::size_t u = 0; u < before.size(); ++u) {
            for (std::size_t t = 0; t < before[u].tokens.size(); ++t) {
                if (before[u].tokens[t] == after[u].tokens[t] &&
                    before[u].tokens[t] != "." &&
                    before[u].tokens[t] != "," &&
                    before[u].tokens[t] != "?") {
                    CHECK(candidate_set(before[u].tokens[t], lexicon).empty());
                }
            }
        }
    }
}

TEST_CASE("every replacement sits at phonetic distance one") {
    auto records = sample_corpus(15, 7);
    auto lexicon = build_lexicon(records);
    auto corrupted = corrupt_corpus(records, 0.2, lexicon, 11);
    std::vector<std::pair<std::string, std::string>> changes;
    count_changed_tokens(records, corrupted, &changes);
    CHECK(!changes.empty());
    for (const auto& [original, replacement] : changes) {
        CHECK(phonetic_distance(original, replacement) == 1);
        CHECK(std::binary_search(lexicon.begin(), lexicon.end(), replacement));
    }
}

TEST_CASE("corruption leaves notes and structure untouched") {
    auto records = sample_corpus(12, 8);
    auto lexicon = build_lexicon(records);
    auto corrupted = corrupt_corpus(records, 0.5, lexicon, 12);
    REQUIRE(corrupted.size() == records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        CHECK(corrupted[r].conversation.id == records[r].conversation.id);
        CHECK(corrupted[r].split == records[r].split);
        CHECK(corrupted[r].note == records[r].note);
        for (std::size_t u = 0; u < records[r].conversation.size(); ++u) {
            const auto& utterance = corrupted[r].conversation.utterances[u];
            CHECK(utterance.speaker ==
                  records[r].conversation.utterances[u].speaker);
            CHECK(utterance.text == join_tokens(utterance.tokens));
        }
    }
}

TEST_CASE("corruption is deterministic and per-record independent") {
    auto records = sample_corpus(8, 9);
    auto lexicon = build_lexicon(records);
    auto once = corrupt_corpus(records, 0.3, lexicon, 42);
    auto twice = corrupt_corpus(records, 0.3, lexicon, 42);
    CHECK(once == twice);
    auto other_seed = corrupt_corpus(records, 0.3, lexicon, 43);
    CHECK(once != other_seed);
    // Corrupting a single record alone reproduces its slice of the batch.
    std::vector<AnnotatedRecord> solo{records[3]};
    auto solo_out = corrupt_corpus(solo, 0.3, lexicon, 42);
    CHECK(solo_out[0] == once[3]);
}

TEST_CASE("selection count follows round(rate * words) per conversation") {
    auto records = sample_corpus(1, 10);
    auto lexicon = build_lexicon(records);
    long words = 0;
    for (const auto& u : records[0].conversation.utterances) {
        for (const auto& token : u.tokens) {
            if (std::any_of(token.begin(), token.end(), [](unsigned char c) {
                    return std::isalpha(c) != 0;
                })) {
                ++words;
            }
        }
    }
    CorruptionReport report;
    corrupt_corpus(records, 0.10, lexicon, 1, &report);
    CHECK(report.word_tokens == words);
    CHECK(report.selected == std::lround(0.10 * static_cast<double>(words)));
}

TEST_CASE("ten percent corruption lands in the reported coverage band") {
    auto records = sample_corpus(120, 20250311);
    auto train = filter_split(records, Split::Train);
    auto lexicon = build_lexicon(train);
    CorruptionReport report;
    auto corrupted = corrupt_corpus(records, 0.10, lexicon, 77, &report);
    double replaced_fraction =
        static_cast<double>(report.replaced) / report.word_tokens;
    CHECK(replaced_fraction >= 0.07);
    CHECK(replaced_fraction <= 0.10);
    CHECK(report.replaced + report.skipped == report.selected);

    // Content slot words are phonetically isolated by construction, so the
    // noise lands on connective words and the named facts survive.
    std::set<std::string> protected_words;
    for (const auto& w : synthetic_symptom_pool(512)) protected_words.insert(w);
    for (const auto& w : synthetic_medication_pool(512))
        protected_words.insert(w);
    for (const auto& w : synthetic_test_pool(512)) protected_words.insert(w);
    std::vector<std::pair<std::string, std::string>> changes;
    count_changed_tokens(records, corrupted, &changes);
    for (const auto& [original, replacement] : changes) {
        CHECK(protected_words.count(original) == 0);
    }
}

TEST_CASE("corruption report renders as a flat table") {
    CorruptionReport report;
    report.word_tokens = 1000;
    report.selected = 100;
    report.replaced = 80;
    report.skipped = 20;
    auto tsv = corruption_report_tsv(report);
    CHECK(tsv.find("key\tvalue") == 0);
    CHECK(tsv.find("replaced\t80") != std::string::npos);
    CHECK(tsv.find("replaced_fraction\t0.080000") != std::string::npos);
}
