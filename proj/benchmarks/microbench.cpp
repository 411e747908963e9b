// Microbenchmarks for the hot paths: scoring, clustering, phonetic
// corruption, feature extraction, and the seq2seq decode step. Inputs come
// from the seeded synthetic generator so shapes match real usage.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "convnote/asr.hpp"
#include "convnote/cluster.hpp"
#include "convnote/extractor.hpp"
#include "convnote/features.hpp"
#include "convnote/pipeline.hpp"
#include "convnote/rouge.hpp"
#include "convnote/seq2seq.hpp"
#include "convnote/soundex.hpp"
#include "convnote/synthetic.hpp"
#include "convnote/types.hpp"
#include "convnote/vocab.hpp"

using namespace convnote;

namespace {

const std::vector<AnnotatedRecord>& corpus() {
    static const std::vector<AnnotatedRecord> records = [] {
        SyntheticConfig config;
        config.n_records = 60;
        return generate_synthetic(config, 17);
    }();
    return records;
}

std::vector<std::string> note_tokens(const AnnotatedRecord& record) {
    return note_scoring_tokens(record.note, SectionScheme::synthetic4());
}

void bm_rouge_all(benchmark::State& state) {
    auto hyp = note_tokens(corpus()[0]);
    auto ref = note_tokens(corpus()[1]);
    for (auto _ : state) benchmark::DoNotOptimize(rouge_all(hyp, ref));
}
BENCHMARK(bm_rouge_all);

void bm_lcs_length(benchmark::State& state) {
    std::vector<std::string> a, b;
    for (int i = 0; i < 4; ++i) {
        auto ta = note_tokens(corpus()[i]);
        auto tb = note_tokens(corpus()[i + 4]);
        a.insert(a.end(), ta.begin(), ta.end());
        b.insert(b.end(), tb.begin(), tb.end());
    }
    state.counters["tokens"] = static_cast<double>(a.size() + b.size());
    for (auto _ : state) benchmark::DoNotOptimize(lcs_length(a, b));
}
BENCHMARK(bm_lcs_length);

void bm_proximity_cluster(benchmark::State& state) {
    std::vector<int> indices;
    for (int i = 0; i < 40; ++i) indices.push_back(i * 3 + (i % 2));
    for (auto _ : state) benchmark::DoNotOptimize(proximity_cluster(indices, 2));
}
BENCHMARK(bm_proximity_cluster);

void bm_soundex_encode(benchmark::State& state) {
    const std::vector<std::string> words = {"patient",  "prescription", "acetaminophen",
                                            "dizziness", "appointment", "stomach"};
    for (auto _ : state)
        for (const auto& word : words)
            benchmark::DoNotOptimize(refined_soundex_encode(word));
}
BENCHMARK(bm_soundex_encode);

void bm_candidate_set(benchmark::State& state) {
    auto lexicon = build_lexicon(corpus());
    state.counters["lexicon"] = static_cast<double>(lexicon.size());
    for (auto _ : state) benchmark::DoNotOptimize(candidate_set("take", lexicon));
}
BENCHMARK(bm_candidate_set);

void bm_feature_fit(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(fit_feature_space(corpus(), 2));
}
BENCHMARK(bm_feature_fit);

void bm_extractor_score(benchmark::State& state) {
    SectionScheme scheme = SectionScheme::synthetic4();
    auto space = fit_feature_space(corpus(), 2);
    ExtractorHyperparams hp;
    hp.max_epochs = 40;
    auto model = train_extractor(corpus(), space, scheme, ExtractorMode::Multilabel, hp, 1);
    const auto& conversation = corpus()[0].conversation;
    for (auto _ : state) benchmark::DoNotOptimize(score_utterances(model, conversation));
}
BENCHMARK(bm_extractor_score);

struct DecodeSetup {
    Seq2SeqModel model;
    EncodedInput encoded;
};

const DecodeSetup& decode_setup() {
    static const DecodeSetup setup = [] {
        SectionScheme scheme = SectionScheme::synthetic4();
        auto pairs =
            abstractor_training_pairs(PipelineMethod::Cluster2Sent, corpus(), scheme, 4096);
        DecodeSetup s;
        s.model = init_model(Seq2SeqConfig{24, 24, 48, 24, 32},
                             build_vocab(pairs, scheme, 1), 3);
        s.encoded = encode_input(s.model, pairs[0].input_tokens, pairs[0].section_id);
        return s;
    }();
    return setup;
}

void bm_encode_input(benchmark::State& state) {
    const auto& setup = decode_setup();
    SectionScheme scheme = SectionScheme::synthetic4();
    auto pairs = abstractor_training_pairs(PipelineMethod::Cluster2Sent, corpus(), scheme, 4096);
    state.counters["source_tokens"] = static_cast<double>(pairs[0].input_tokens.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(
            encode_input(setup.model, pairs[0].input_tokens, pairs[0].section_id));
}
BENCHMARK(bm_encode_input);

void bm_decode_step(benchmark::State& state) {
    const auto& setup = decode_setup();
    DecoderState start = initial_state(setup.encoded);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            decode_step(setup.model, setup.encoded, start, Vocabulary::kBos));
}
BENCHMARK(bm_decode_step);

}  // namespace

BENCHMARK_MAIN();
