#include "convnote/stats.hpp"

#include <set>
#include <string>

#include "convnote/error.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

std::set<std::string> ngrams(const std::vector<const std::vector<std::string>*>& token_lists,
                             int n) {
    std::set<std::string> out;
    for (const auto* tokens : token_lists) {
        for (int i = 0; i + n <= static_cast<int>(tokens->size()); ++i) {
            std::string g = (*tokens)[i];
            for (int j = 1; j < n; ++j) g += " " + (*tokens)[i + j];
            out.insert(std::move(g));
        }
    }
    return out;
}

}  // namespace

StatsReport corpus_stats(const std::vector<AnnotatedRecord>& records,
                         const SectionScheme& scheme) {
    if (records.empty()) throw ValidationError("corpus_stats: empty corpus");
    StatsReport r;
    r.n_records = static_cast<int>(records.size());

    double words = 0, utts = 0, sentences = 0, evidence = 0;
    double multi_sets = 0, contiguous_sets = 0;
    double novel_sum[3] = {0, 0, 0};
    int novel_count[3] = {0, 0, 0};
    std::vector<double> sec_sentences(scheme.size(), 0.0), sec_tokens(scheme.size(), 0.0);

    for (const AnnotatedRecord& rec : records) {
        switch (rec.split) {
            case Split::Train: ++r.n_train; break;
            case Split::Validation: ++r.n_validation; break;
            case Split::Test: ++r.n_test; break;
        }
        utts += rec.conversation.size();
        std::vector<const std::vector<std::string>*> conv_tokens, note_tokens;
        for (const Utterance& u : rec.conversation.utterances) {
            words += u.tokens.size();
            conv_tokens.push_back(&u.tokens);
        }
        sentences += rec.note.sentences.size();
        for (const NoteSentence& s : rec.note.sentences) {
            evidence += s.evidence.size();
            note_tokens.push_back(&s.tokens);
            int sec = scheme.index_of(s.section_id);
            sec_sentences[sec] += 1;
            sec_tokens[sec] += s.tokens.size();
            if (s.evidence.size() >= 2) {
                ++multi_sets;
                bool contiguous = true;
                for (std::size_t i = 1; i < s.evidence.size(); ++i)
                    if (s.evidence[i] != s.evidence[i - 1] + 1) contiguous = false;
                if (contiguous) ++contiguous_sets;
            }
        }
        for (int n = 1; n <= 3; ++n) {
            std::set<std::string> note_grams = ngrams(note_tokens, n);
            if (note_grams.empty()) continue;
            std::set<std::string> conv_grams = ngrams(conv_tokens, n);
            int novel = 0;
            for (const std::string& g : note_grams)
                if (!conv_grams.count(g)) ++novel;
            novel_sum[n - 1] += static_cast<double>(novel) / note_grams.size();
            ++novel_count[n - 1];
        }
    }

    r.mean_words_per_conversation = words / r.n_records;
    r.mean_utterances_per_conversation = utts / r.n_records;
    r.mean_sentences_per_note = sentences / r.n_records;
    r.mean_evidence_per_sentence = sentences > 0 ? evidence / sentences : 0.0;
    r.contiguous_multi_evidence_fraction = multi_sets > 0 ? contiguous_sets / multi_sets : 1.0;
    for (int n = 0; n < 3; ++n)
        r.novel_ngram_fraction[n] = novel_count[n] > 0 ? novel_sum[n] / novel_count[n] : 0.0;
    for (int s = 0; s < scheme.size(); ++s) {
        SectionStat st;
        st.section_id = scheme.sections[s].first;
        st.mean_sentences = sec_sentences[s] / r.n_records;
        st.mean_tokens = sec_sentences[s] > 0 ? sec_tokens[s] / sec_sentences[s] : 0.0;
        r.sections.push_back(st);
    }
    return r;
}

std::string stats_to_tsv(const StatsReport& r) {
    std::vector<TsvRow> rows;
    auto add = [&](const std::string& key, const std::string& value) {
        rows.push_back({key, value});
    };
    add("records", std::to_string(r.n_records));
    add("train_records", std::to_string(r.n_train));
    add("validation_records", std::to_string(r.n_validation));
    add("test_records", std::to_string(r.n_test));
    add("mean_words_per_conversation", format_fixed(r.mean_words_per_conversation));
    add("mean_utterances_per_conversation", format_fixed(r.mean_utterances_per_conversation));
    add("mean_sentences_per_note", format_fixed(r.mean_sentences_per_note));
    add("mean_evidence_per_sentence", format_fixed(r.mean_evidence_per_sentence));
    add("contiguous_multi_evidence_fraction",
        format_fixed(r.contiguous_multi_evidence_fraction));
    for (int n = 0; n < 3; ++n)
        add("novel_" + std::to_string(n + 1) + "gram_fraction",
            format_fixed(r.novel_ngram_fraction[n]));
    for (const SectionStat& st : r.sections) {
        add("section_" + st.section_id + "_mean_sentences", format_fixed(st.mean_sentences));
        add("section_" + st.section_id + "_mean_tokens", format_fixed(st.mean_tokens));
    }
    return render_tsv(rows);
}

}  // namespace convnote
