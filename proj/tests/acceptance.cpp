// Acceptance gate: one binary, one pass/fail line per criterion.
//
// Direction-of-effect criteria run on the default seeded synthetic corpus
// (500 train / 50 validation / 50 test, four sections). Trained bundles are
// cached under the work directory keyed by a fingerprint of everything that
// feeds them (corpus bytes, architecture, hyperparameters, seed), so reruns
// only retrain what changed. Delete the work directory (or pass --fresh)
// after modifying library code; the fingerprint cannot see code changes.
//
// Usage: convnote_acceptance [--only 1,4,8] [--workdir DIR] [--fresh]
// The pipeline-determinism criterion shells out to the CLI binary named by
// CONVNOTE_CLI_PATH.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "convnote/abstractor.hpp"
#include "convnote/ami.hpp"
#include "convnote/asr.hpp"
#include "convnote/cluster.hpp"
#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/extractor.hpp"
#include "convnote/features.hpp"
#include "convnote/manifest.hpp"
#include "convnote/pipeline.hpp"
#include "convnote/rouge.hpp"
#include "convnote/seq2seq.hpp"
#include "convnote/soundex.hpp"
#include "convnote/synthetic.hpp"
#include "convnote/tsv.hpp"
#include "convnote/types.hpp"

using namespace convnote;

namespace {

std::string g_workdir;
std::set<int> g_only;

bool wanted(int id) { return g_only.empty() || g_only.count(id) > 0; }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// shared corpora and trained bundles, cached on disk by input fingerprint

struct Corpora {
    std::vector<AnnotatedRecord> all;
    std::vector<AnnotatedRecord> train, validation, test;
    std::string path;
    std::string checksum;
};

Corpora build_corpora(const std::string& name, const SyntheticConfig& config,
                      std::uint64_t seed) {
    Corpora c;
    c.all = generate_synthetic(config, seed);
    c.train = filter_split(c.all, Split::Train);
    c.validation = filter_split(c.all, Split::Validation);
    c.test = filter_split(c.all, Split::Test);
    c.path = g_workdir + "/" + name + ".jsonl";
    save_corpus(c.all, c.path);
    c.checksum = file_checksum(c.path);
    return c;
}

const Corpora& base_corpus() {
    static const Corpora c = build_corpora("base", SyntheticConfig{}, 42);
    return c;
}

const Corpora& rare_corpus() {
    static const Corpora c = [] {
        SyntheticConfig config;
        config.rare_token_rate = 0.30;
        return build_corpora("rare", config, 43);
    }();
    return c;
}

struct TrainSpec {
    PipelineMethod method = PipelineMethod::Cluster2Sent;
    Seq2SeqConfig config;
    AbstractorHyperparams hp;
    std::uint64_t seed = 0;
    int beam_size = 4;
};

std::string spec_fingerprint(const TrainSpec& spec, const std::string& corpus_checksum) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s|%d %d %d %d %d|%g %d %d %d %g %d %d %g|%llu|%d|%s",
                  to_string(spec.method).c_str(), spec.config.embed_dim,
                  spec.config.encoder_dim, spec.config.decoder_dim,
                  spec.config.attention_dim, spec.config.readout_dim,
                  spec.hp.learning_rate, spec.hp.max_epochs, spec.hp.batch_size,
                  spec.hp.patience, spec.hp.clip_norm, spec.hp.min_count,
                  spec.hp.coverage_epochs, spec.hp.coverage_weight,
                  static_cast<unsigned long long>(spec.seed), spec.beam_size,
                  corpus_checksum.c_str());
    return checksum_hex(buf);
}

// Trains (or reloads) one abstractor on the given records' train/validation
// splits. Deterministic given the fingerprint inputs.
const Seq2SeqAbstractor& bundle_for(const std::string& name, const Corpora& corpus,
                                    const TrainSpec& spec) {
    static std::map<std::string, std::unique_ptr<Seq2SeqAbstractor>> cache;
    std::string fp = spec_fingerprint(spec, corpus.checksum);
    std::string key = name + "-" + fp.substr(0, 16);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;

    std::string path = g_workdir + "/" + key + ".bundle";
    auto bundle = std::make_unique<Seq2SeqAbstractor>();
    if (std::filesystem::exists(path)) {
        *bundle = load_abstractor(path);
    } else {
        SectionScheme scheme = SectionScheme::synthetic4();
        auto train_pairs = abstractor_training_pairs(spec.method, corpus.train, scheme, 4096);
        auto val_pairs =
            abstractor_training_pairs(spec.method, corpus.validation, scheme, 4096);
        auto started = std::chrono::steady_clock::now();
        bundle->model =
            train_abstractor(spec.config, scheme, train_pairs, val_pairs, spec.hp, spec.seed);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                          .count();
        std::vector<int> lengths;
        for (const auto& pair : train_pairs)
            lengths.push_back(static_cast<int>(pair.target_tokens.size()));
        bundle->bounds = length_bounds_from_targets(lengths);
        bundle->beam_size = spec.beam_size;
        bundle->unit = decode_unit_for(spec.method);
        save_abstractor(*bundle, path);
        std::printf("     trained %s: %zu pairs, %.1fs\n", name.c_str(), train_pairs.size(),
                    secs);
        std::fflush(stdout);
    }
    const Seq2SeqAbstractor& ref = *bundle;
    cache.emplace(key, std::move(bundle));
    return ref;
}

TrainSpec desk_spec(PipelineMethod method, std::uint64_t seed) {
    TrainSpec spec;
    spec.method = method;
    spec.config = Seq2SeqConfig{24, 24, 48, 24, 32};
    spec.hp.learning_rate = 0.004;
    spec.hp.max_epochs = 30;
    spec.hp.batch_size = 16;
    spec.hp.patience = 6;
    spec.seed = seed;
    return spec;
}

std::vector<GeneratedNote> generate_notes(const PipelineConfig& config,
                                          const PipelineModels& models,
                                          const std::vector<AnnotatedRecord>& records) {
    SectionScheme scheme = SectionScheme::synthetic4();
    validate_pipeline(config, models);
    std::vector<GeneratedNote> notes;
    notes.reserve(records.size());
    for (const auto& record : records) notes.push_back(run_pipeline(config, models, scheme, record));
    return notes;
}

double r1_points(const std::vector<GeneratedNote>& notes,
                 const std::vector<AnnotatedRecord>& gold) {
    return 100.0 * score_notes_whole(notes, gold, SectionScheme::synthetic4()).r1.f1;
}

double oracle_method_r1(PipelineMethod method, const Seq2SeqAbstractor& abstractor,
                        const std::vector<AnnotatedRecord>& records, bool oracle_clusters,
                        int tau = 2) {
    PipelineConfig config;
    config.method = method;
    config.oracle_utterances = true;
    config.oracle_clusters = oracle_clusters;
    config.tau = tau;
    PipelineModels models;
    models.abstractor = &abstractor;
    return r1_points(generate_notes(config, models, records), records);
}

// ---------------------------------------------------------------------------
// criteria

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome oracle_spectrum() {
    const Corpora& corpus = base_corpus();
    double c2s = oracle_method_r1(PipelineMethod::Cluster2Sent,
                                  bundle_for("c2s", corpus, desk_spec(PipelineMethod::Cluster2Sent, 1001)),
                                  corpus.test, true);
    double e2s = oracle_method_r1(PipelineMethod::Ext2Sec,
                                  bundle_for("e2s", corpus, desk_spec(PipelineMethod::Ext2Sec, 1002)),
                                  corpus.test, false);
    double e2n = oracle_method_r1(PipelineMethod::Ext2Note,
                                  bundle_for("e2n", corpus, desk_spec(PipelineMethod::Ext2Note, 1003)),
                                  corpus.test, false);
    Outcome out;
    out.pass = (c2s - e2s >= 1.0) && (e2s - e2n >= 1.0);
    out.detail = "cluster2sent " + fmt(c2s) + " > ext2sec " + fmt(e2s) + " > ext2note " +
                 fmt(e2n) + ", gaps " + fmt(c2s - e2s) + " and " + fmt(e2s - e2n) +
                 " (need >= 1.00 each)";
    return out;
}

Outcome clustering_robustness() {
    const Corpora& corpus = base_corpus();
    SectionScheme scheme = SectionScheme::synthetic4();
    const Seq2SeqAbstractor& bundle =
        bundle_for("c2s", corpus, desk_spec(PipelineMethod::Cluster2Sent, 1001));

    // Tune tau on validation by gold-vs-heuristic cluster alignment, the
    // cheap proxy used by tune-tau, then compare generation quality.
    auto alignment_at = [&](int tau) {
        double total = 0.0;
        long n = 0;
        for (const auto& record : corpus.validation) {
            auto selection = oracle_section_selection(record, scheme);
            auto gold = derive_gold_clusters(record);
            for (int s = 0; s < scheme.size(); ++s) {
                std::vector<std::vector<int>> gold_here;
                for (const auto& cluster : gold)
                    if (cluster.section_id == scheme.sections[s].first)
                        gold_here.push_back(cluster.indices);
                auto predicted = proximity_cluster(selection[s], tau);
                if (predicted.empty() && gold_here.empty()) continue;
                total += cluster_alignment_score(predicted, gold_here);
                ++n;
            }
        }
        return n > 0 ? total / n : 1.0;
    };
    TauTuneResult tuned = tune_tau({0, 1, 2, 3, 4, 5}, alignment_at);

    double oracle = oracle_method_r1(PipelineMethod::Cluster2Sent, bundle, corpus.validation, true);
    double heuristic = oracle_method_r1(PipelineMethod::Cluster2Sent, bundle, corpus.validation,
                                        false, tuned.best_tau);
    double gap = std::abs(heuristic - oracle);
    Outcome out;
    out.pass = gap <= 1.5;
    out.detail = "heuristic clusters (tau " + std::to_string(tuned.best_tau) + ") " +
                 fmt(heuristic) + " vs oracle clusters " + fmt(oracle) + ", |gap| " + fmt(gap) +
                 " (allowed <= 1.50)";
    return out;
}

Outcome baseline_ordering() {
    const Corpora& corpus = base_corpus();
    SectionScheme scheme = SectionScheme::synthetic4();

    PipelineConfig conv_config;
    conv_config.method = PipelineMethod::Conv2Note;
    PipelineModels conv_models;
    const Seq2SeqAbstractor& conv_bundle =
        bundle_for("conv", corpus, desk_spec(PipelineMethod::Conv2Note, 1004));
    conv_models.abstractor = &conv_bundle;
    double conv = r1_points(generate_notes(conv_config, conv_models, corpus.test), corpus.test);

    PipelineConfig random_config;
    random_config.method = PipelineMethod::RandomNote;
    random_config.seed = 5;
    PipelineModels random_models;
    random_models.train_records = &corpus.train;
    double random_note =
        r1_points(generate_notes(random_config, random_models, corpus.test), corpus.test);

    std::vector<GeneratedNote> extracted;
    for (const auto& record : corpus.test)
        extracted.push_back(run_oracleext(record, scheme));
    double oracle_ext = r1_points(extracted, corpus.test);

    Outcome out;
    out.pass = conv > random_note && conv > oracle_ext;
    out.detail = "conv2note " + fmt(conv) + " vs randomnote " + fmt(random_note) +
                 " and oracleext " + fmt(oracle_ext);
    return out;
}

Outcome copy_ablation() {
    const Corpora& corpus = rare_corpus();
    TrainSpec spec = desk_spec(PipelineMethod::Cluster2Sent, 1007);
    spec.hp.min_count = 3;  // pushes the rare pool out of the decoder vocabulary
    const Seq2SeqAbstractor& with_copy = bundle_for("rare-c2s", corpus, spec);

    Seq2SeqAbstractor no_copy = with_copy;
    no_copy.model.w_pgen.setZero();
    no_copy.model.b_pgen.setConstant(40.0);  // sigmoid saturates, generation only

    double on = oracle_method_r1(PipelineMethod::Cluster2Sent, with_copy, corpus.test, true);
    double off = oracle_method_r1(PipelineMethod::Cluster2Sent, no_copy, corpus.test, true);
    Outcome out;
    out.pass = on - off >= 0.5;
    out.detail = "copy on " + fmt(on) + " vs copy off " + fmt(off) + ", drop " + fmt(on - off) +
                 " (need >= 0.50)";
    return out;
}

Outcome section_conditioning() {
    const Corpora& corpus = base_corpus();
    double e2s = oracle_method_r1(PipelineMethod::Ext2Sec,
                                  bundle_for("e2s", corpus, desk_spec(PipelineMethod::Ext2Sec, 1002)),
                                  corpus.test, false);
    double nocond = oracle_method_r1(
        PipelineMethod::Ext2SecNoCond,
        bundle_for("nocond", corpus, desk_spec(PipelineMethod::Ext2SecNoCond, 1005)),
        corpus.test, false);
    double allext = oracle_method_r1(
        PipelineMethod::AllExt2Sec,
        bundle_for("allext", corpus, desk_spec(PipelineMethod::AllExt2Sec, 1006)),
        corpus.test, false);
    Outcome out;
    out.pass = e2s > nocond && e2s > allext;
    out.detail = "ext2sec " + fmt(e2s) + " vs ext2secnocond " + fmt(nocond) + " and allext2sec " +
                 fmt(allext);
    return out;
}

Outcome asr_robustness() {
    const Corpora& corpus = base_corpus();
    const Seq2SeqAbstractor& clean_bundle =
        bundle_for("c2s", corpus, desk_spec(PipelineMethod::Cluster2Sent, 1001));

    auto lexicon = build_lexicon(corpus.train);
    Corpora corrupted;
    corrupted.all = corrupt_corpus(corpus.all, 0.10, lexicon, 77);
    corrupted.train = filter_split(corrupted.all, Split::Train);
    corrupted.validation = filter_split(corrupted.all, Split::Validation);
    corrupted.test = filter_split(corrupted.all, Split::Test);
    corrupted.path = g_workdir + "/corrupted.jsonl";
    save_corpus(corrupted.all, corrupted.path);
    corrupted.checksum = file_checksum(corrupted.path);

    double clean_on_clean =
        oracle_method_r1(PipelineMethod::Cluster2Sent, clean_bundle, corpus.test, true);
    double clean_on_noisy =
        oracle_method_r1(PipelineMethod::Cluster2Sent, clean_bundle, corrupted.test, true);
    double drop = clean_on_clean - clean_on_noisy;

    const Seq2SeqAbstractor& matched_bundle =
        bundle_for("matched-c2s", corrupted, desk_spec(PipelineMethod::Cluster2Sent, 1008));
    double matched_on_noisy =
        oracle_method_r1(PipelineMethod::Cluster2Sent, matched_bundle, corrupted.test, true);
    double recovered = matched_on_noisy - clean_on_noisy;

    Outcome out;
    out.pass = drop >= 1.0 && recovered >= 0.5 * drop;
    out.detail = "clean-trained " + fmt(clean_on_clean) + " -> " + fmt(clean_on_noisy) +
                 " on 10% noise (drop " + fmt(drop) + ", need >= 1.00); matched retraining " +
                 fmt(matched_on_noisy) + " recovers " + fmt(recovered) + " (need >= " +
                 fmt(0.5 * drop) + ")";
    return out;
}

Outcome extractor_context() {
    const Corpora& corpus = base_corpus();
    SectionScheme scheme = SectionScheme::synthetic4();
    ExtractorHyperparams hp;
    auto windowed_space = fit_feature_space(corpus.train, 2);
    auto flat_space = fit_feature_space(corpus.train, 0);
    auto windowed = train_extractor(corpus.train, windowed_space, scheme,
                                    ExtractorMode::Multilabel, hp, 7);
    auto flat =
        train_extractor(corpus.train, flat_space, scheme, ExtractorMode::Multilabel, hp, 7);
    double auc_w2 = evaluate_extractor(windowed, corpus.validation, scheme).micro_auc;
    double auc_w0 = evaluate_extractor(flat, corpus.validation, scheme).micro_auc;
    Outcome out;
    out.pass = auc_w2 >= auc_w0;
    out.detail = "micro-AUC window 2 " + fmt(100 * auc_w2) + " vs window 0 " + fmt(100 * auc_w0);
    return out;
}

// -- exact fixtures ----------------------------------------------------------

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-9; }

bool rouge_fixtures_ok(std::string& why) {
    auto toks = [](const char* text) {
        std::vector<std::string> out;
        const char* p = text;
        while (*p) {
            const char* q = p;
            while (*q && *q != ' ') ++q;
            out.emplace_back(p, q);
            p = *q ? q + 1 : q;
        }
        return out;
    };
    struct Case {
        const char* hyp;
        const char* ref;
        int n;  // 0 means rouge_l
        double expected;
    };
    const Case cases[] = {
        {"the cat ran", "the cat sat", 1, 2.0 / 3.0},
        {"the cat ran", "the cat sat", 2, 1.0 / 2.0},
        {"a b c d", "a c b d", 0, 3.0 / 4.0},
        {"same text here", "same text here", 1, 1.0},
        {"same text here", "same text here", 2, 1.0},
        {"same text here", "same text here", 0, 1.0},
        {"x y z", "p q r", 1, 0.0},
        {"", "a b", 1, 0.0},
        {"", "a b", 0, 0.0},
    };
    for (const auto& c : cases) {
        RougeScore got = c.n == 0 ? rouge_l(toks(c.hyp), toks(c.ref))
                                  : rouge_n(toks(c.hyp), toks(c.ref), c.n);
        if (!close_to(got.precision, c.expected) || !close_to(got.recall, c.expected) ||
            !close_to(got.f1, c.expected)) {
            why = std::string("rouge fixture '") + c.hyp + "' vs '" + c.ref + "'";
            return false;
        }
    }
    return true;
}

std::vector<std::vector<int>> closure_clusters(const std::vector<int>& indices, int tau) {
    std::vector<std::vector<int>> clusters;
    for (int idx : indices) clusters.push_back({idx});
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
                bool close = false;
                for (int a : clusters[i])
                    for (int b : clusters[j])
                        if (std::abs(a - b) - 1 <= tau) close = true;
                if (!close) continue;
                clusters[i].insert(clusters[i].end(), clusters[j].begin(), clusters[j].end());
                std::sort(clusters[i].begin(), clusters[i].end());
                clusters.erase(clusters.begin() + static_cast<long>(j));
                merged = true;
            }
        }
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return clusters;
}

bool clustering_fixtures_ok(std::string& why, long& cases) {
    cases = 0;
    for (unsigned mask = 0; mask < (1u << 13); ++mask) {
        if (__builtin_popcount(mask) > 5) continue;
        std::vector<int> indices;
        for (int i = 0; i < 13; ++i)
            if (mask >> i & 1u) indices.push_back(i);
        for (int tau = 0; tau <= 4; ++tau) {
            ++cases;
            if (proximity_cluster(indices, tau) != closure_clusters(indices, tau)) {
                why = "clustering mismatch at mask " + std::to_string(mask) + " tau " +
                      std::to_string(tau);
                return false;
            }
        }
    }
    return true;
}

// Exponential oracle: longest subsequence of `a` that also embeds in `b`,
// found by trying every subset of positions of `a`.
int lcs_brute(const char* a, int la, const char* b, int lb) {
    int best = 0;
    for (unsigned mask = 0; mask < (1u << la); ++mask) {
        int pos = 0, len = 0;
        bool ok = true;
        for (int i = 0; i < la && ok; ++i) {
            if (!(mask >> i & 1u)) continue;
            while (pos < lb && b[pos] != a[i]) ++pos;
            if (pos == lb)
                ok = false;
            else {
                ++pos;
                ++len;
            }
        }
        if (ok && len > best) best = len;
    }
    return best;
}

bool lcs_fixtures_ok(std::string& why, long& pairs) {
    struct Seq {
        char tok[8];
        int len;
        std::vector<std::string> tokens;
    };
    std::vector<Seq> seqs;
    seqs.push_back(Seq{{}, 0, {}});
    for (std::size_t start = 0, stop = seqs.size(), len = 1; len <= 8; ++len) {
        for (std::size_t i = start; i < stop; ++i)
            for (char t = 0; t < 3; ++t) {
                Seq next = seqs[i];
                next.tok[next.len++] = t;
                next.tokens.push_back(std::string(1, static_cast<char>('a' + t)));
                seqs.push_back(std::move(next));
            }
        start = stop;
        stop = seqs.size();
    }

    pairs = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        for (std::size_t j = i; j < seqs.size(); ++j) {
            ++pairs;
            int expected = lcs_brute(seqs[i].tok, seqs[i].len, seqs[j].tok, seqs[j].len);
            if (static_cast<int>(lcs_length(seqs[i].tokens, seqs[j].tokens)) != expected ||
                static_cast<int>(lcs_length(seqs[j].tokens, seqs[i].tokens)) != expected) {
                why = "lcs mismatch at sequence pair " + std::to_string(i) + "," +
                      std::to_string(j);
                return false;
            }
        }
    }
    return true;
}

bool soundex_fixtures_ok(std::string& why) {
    const std::pair<const char*, const char*> codes[] = {
        {"patient", "p106086"}, {"doctor", "d603609"}, {"fever", "f20209"},
        {"cough", "c3040"},     {"take", "t6030"},     {"tape", "t6010"},
        {"pain", "p108"},       {"bain", "b108"},      {"pp", "p1"},
        {"a", "a0"},
    };
    for (const auto& [word, code] : codes) {
        if (refined_soundex_encode(word) != code) {
            why = std::string("soundex code for '") + word + "'";
            return false;
        }
    }
    const std::tuple<const char*, const char*, int> distances[] = {
        {"take", "take", 0}, {"take", "tape", 1}, {"pain", "bain", 1},
        {"patient", "pain", 3},  // p106086 vs p108: three deletions past the shared p10
    };
    for (const auto& [a, b, d] : distances) {
        if (phonetic_distance(a, b) != d || phonetic_distance(b, a) != d) {
            why = std::string("phonetic distance ") + a + " vs " + b;
            return false;
        }
    }
    if (levenshtein("kitten", "sitting") != 3 || levenshtein("", "abc") != 3) {
        why = "levenshtein fixture";
        return false;
    }
    return true;
}

Outcome exact_fixtures() {
    Outcome out;
    std::string why;

    if (!rouge_fixtures_ok(why)) {
        out.detail = why;
        return out;
    }
    long cluster_cases = 0;
    if (!clustering_fixtures_ok(why, cluster_cases)) {
        out.detail = why;
        return out;
    }
    long lcs_pairs = 0;
    if (!lcs_fixtures_ok(why, lcs_pairs)) {
        out.detail = why;
        return out;
    }
    if (!soundex_fixtures_ok(why)) {
        out.detail = why;
        return out;
    }

    SectionScheme scheme = SectionScheme::synthetic4();
    auto pairs = abstractor_training_pairs(PipelineMethod::Cluster2Sent,
                                           {base_corpus().train.begin(),
                                            base_corpus().train.begin() + 2},
                                           scheme, 4096);
    if (pairs.size() > 3) pairs.resize(3);
    double grad = gradient_check(Seq2SeqConfig{12, 12, 24, 12, 16}, scheme, pairs, 99, 1e-5);
    if (!(grad < 1e-4)) {
        out.detail = "gradient check " + std::to_string(grad) + " (need < 1e-4)";
        return out;
    }

    out.pass = true;
    out.detail = "rouge exact to 1e-9; clustering matches closure on " +
                 std::to_string(cluster_cases) + " cases; lcs matches brute force on " +
                 std::to_string(lcs_pairs) + " pairs; soundex fixtures hold; gradient check " +
                 fmt(grad * 1e6) + "e-6";
    return out;
}

// -- pipeline determinism ----------------------------------------------------

int shell(const std::string& command) { return std::system(command.c_str()); }

Outcome pipeline_determinism() {
    Outcome out;
    const char* cli = std::getenv("CONVNOTE_CLI_PATH");
    if (!cli || !*cli) {
        out.detail = "CONVNOTE_CLI_PATH not set";
        return out;
    }

    const std::string config_path = g_workdir + "/determinism.cfg";
    atomic_write_file(config_path,
                      "embed_dim = 16\nencoder_dim = 16\ndecoder_dim = 32\nattention_dim = 16\n"
                      "readout_dim = 24\nlearning_rate = 0.005\nmax_epochs = 12\n"
                      "batch_size = 8\npatience = 4\nbeam_size = 2\n");

    auto run_once = [&](const std::string& dir) -> std::string {
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        const std::string log = " >> " + dir + "/log.txt 2>&1";
        const std::vector<std::string> steps = {
            "synth --n 120 --seed 9 --out " + dir + "/corpus.jsonl",
            "train-extractor --corpus " + dir + "/corpus.jsonl --seed 1 --out " + dir +
                "/ext.cnex",
            "calibrate --corpus " + dir + "/corpus.jsonl --extractor " + dir +
                "/ext.cnex --tau 2 --out " + dir + "/thresholds.tsv",
            "train-abstractor --corpus " + dir + "/corpus.jsonl --method cluster2sent --config " +
                config_path + " --seed 11 --out " + dir + "/c2s.bundle",
            "generate --method cluster2sent --corpus " + dir + "/corpus.jsonl --extractor " +
                dir + "/ext.cnex --thresholds " + dir + "/thresholds.tsv --abstractor " + dir +
                "/c2s.bundle --out " + dir + "/notes.jsonl",
            "score --generated " + dir + "/notes.jsonl --gold " + dir + "/corpus.jsonl --out " +
                dir + "/report.tsv",
        };
        for (const auto& step : steps)
            if (shell(std::string(cli) + " " + step + log) != 0) return step;
        return "";
    };

    const std::string dir_a = g_workdir + "/determinism-a";
    const std::string dir_b = g_workdir + "/determinism-b";
    std::string failed = run_once(dir_a);
    if (failed.empty()) failed = run_once(dir_b);
    if (!failed.empty()) {
        out.detail = "pipeline step failed: " + failed;
        return out;
    }

    for (const char* file :
         {"/corpus.jsonl", "/thresholds.tsv", "/notes.jsonl", "/report.tsv",
          "/report.sections.tsv"}) {
        if (read_file(dir_a + file) != read_file(dir_b + file)) {
            out.detail = std::string("runs differ at ") + (file + 1);
            return out;
        }
    }
    out.pass = true;
    out.detail =
        "synth, train, calibrate, generate, score run twice: corpus, thresholds, notes, and "
        "both score tables byte-identical";
    return out;
}

Outcome ami_ingestion() {
    const std::string fixtures = CONVNOTE_FIXTURE_DIR;
    AnnotatedRecord record =
        ingest_ami(fixtures + "/ami_transcript.tsv", fixtures + "/ami_summary.tsv",
                   fixtures + "/ami_links.tsv", SectionScheme::ami(), Split::Train);
    Outcome out;
    std::size_t retained = record.note.sentences.size();
    if (retained != 9) {
        out.detail = "expected 9 retained sentences, got " + std::to_string(retained);
        return out;
    }
    const std::string path = g_workdir + "/ami.jsonl";
    save_corpus({record}, path);
    auto reloaded = load_corpus(path, SectionScheme::ami());
    if (reloaded.size() != 1 || !(reloaded[0] == record)) {
        out.detail = "round trip through the corpus format changed the record";
        return out;
    }
    out.pass = true;
    out.detail = "10 summary sentences, 1 unlinked, 9 retained; round trip identical";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    g_workdir = (std::filesystem::temp_directory_path() / "convnote_acceptance").string();
    bool fresh = false;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--workdir" && i + 1 < argc) {
            g_workdir = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            std::string list = argv[++i];
            for (std::size_t pos = 0; pos < list.size();) {
                std::size_t comma = list.find(',', pos);
                if (comma == std::string::npos) comma = list.size();
                g_only.insert(std::stoi(list.substr(pos, comma - pos)));
                pos = comma + 1;
            }
        } else if (arg == "--fresh") {
            fresh = true;
        } else {
            std::fprintf(stderr, "usage: %s [--only 1,2] [--workdir DIR] [--fresh]\n", argv[0]);
            return 2;
        }
    }
    if (fresh) std::filesystem::remove_all(g_workdir);
    std::filesystem::create_directories(g_workdir);

    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "oracle spectrum", oracle_spectrum},
        {2, "clustering robustness", clustering_robustness},
        {3, "baseline ordering", baseline_ordering},
        {4, "copy ablation", copy_ablation},
        {5, "section conditioning", section_conditioning},
        {6, "asr robustness", asr_robustness},
        {7, "extractor context", extractor_context},
        {8, "exact fixtures", exact_fixtures},
        {9, "pipeline determinism", pipeline_determinism},
        {10, "ami ingestion", ami_ingestion},
    };

    int ran = 0, passed = 0;
    for (const auto& criterion : criteria) {
        if (!wanted(criterion.id)) continue;
        ++ran;
        auto started = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (outcome.pass) ++passed;
        std::printf("[%2d] %s %s: %s (%.1fs)\n", criterion.id,
                    outcome.pass ? "PASS" : "FAIL", criterion.name, outcome.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/%d criteria passed\n", passed, ran);
    return passed == ran ? 0 : 1;
}
