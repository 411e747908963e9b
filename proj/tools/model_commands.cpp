#include <CLI11.hpp>
#include <cstdio>
#include <functional>
#include <memory>

#include "cli_common.hpp"
#include "convnote/abstractor.hpp"
#include "convnote/beam.hpp"
#include "convnote/cluster.hpp"
#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/extractor.hpp"
#include "convnote/features.hpp"
#include "convnote/pipeline.hpp"
#include "convnote/rouge.hpp"
#include "convnote/tsv.hpp"

namespace convnote::cli {

namespace {

struct TrainExtractorOptions {
    std::string corpus;
    std::string scheme_name = "synthetic4";
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
};

void record_extractor_settings(RunRecorder& run, const ExtractorTrainSettings& s) {
    run.config("mode", to_string(s.mode));
    run.config("window", std::to_string(s.window));
    run.config("learning_rate", double_text(s.hyperparams.learning_rate));
    run.config("max_epochs", std::to_string(s.hyperparams.max_epochs));
    run.config("tolerance", double_text(s.hyperparams.tolerance));
    run.config("l2", double_text(s.hyperparams.l2));
}

void run_train_extractor(const TrainExtractorOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    RunRecorder run("train-extractor", opt.seed);
    run.config("scheme", opt.scheme_name);
    ExtractorTrainSettings settings;
    if (!opt.config_path.empty()) {
        run.input("config", opt.config_path);
        settings = parse_extractor_settings(read_file(opt.config_path));
    }
    record_extractor_settings(run, settings);
    run.input("corpus", opt.corpus);

    auto records = load_corpus(opt.corpus, scheme);
    auto train = filter_split(records, Split::Train);
    auto validation = filter_split(records, Split::Validation);
    FeatureSpace space = fit_feature_space(train, settings.window);
    ExtractorModel model =
        train_extractor(train, space, scheme, settings.mode, settings.hyperparams, opt.seed);

    const auto& eval = validation.empty() ? train : validation;
    run.config("eval_split", validation.empty() ? "train" : "validation");
    ClassificationReport report = evaluate_extractor(model, eval, scheme);

    const std::string report_path = opt.out + ".report.tsv";
    run.output("checkpoint", opt.out);
    run.output("report", report_path);
    run.save(manifest_path_for(opt.out));
    save_extractor(model, opt.out);
    atomic_write_file(report_path, classification_report_tsv(report));
    std::printf("train-extractor: micro-AUC %s on the %s split, checkpoint %s\n",
                format_fixed(report.micro_auc, 4).c_str(),
                validation.empty() ? "train" : "validation", opt.out.c_str());
}

struct TrainAbstractorOptions {
    std::string corpus;
    std::string scheme_name = "synthetic4";
    std::string method_name;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
};

void record_abstractor_settings(RunRecorder& run, const AbstractorTrainSettings& s) {
    run.config("embed_dim", std::to_string(s.dims.embed_dim));
    run.config("encoder_dim", std::to_string(s.dims.encoder_dim));
    run.config("decoder_dim", std::to_string(s.dims.decoder_dim));
    run.config("attention_dim", std::to_string(s.dims.attention_dim));
    run.config("readout_dim", std::to_string(s.dims.readout_dim));
    run.config("learning_rate", double_text(s.hyperparams.learning_rate));
    run.config("max_epochs", std::to_string(s.hyperparams.max_epochs));
    run.config("batch_size", std::to_string(s.hyperparams.batch_size));
    run.config("patience", std::to_string(s.hyperparams.patience));
    run.config("clip_norm", double_text(s.hyperparams.clip_norm));
    run.config("min_count", std::to_string(s.hyperparams.min_count));
    run.config("coverage_epochs", std::to_string(s.hyperparams.coverage_epochs));
    run.config("coverage_weight", double_text(s.hyperparams.coverage_weight));
    run.config("beam_size", std::to_string(s.beam_size));
    run.config("max_utterances", std::to_string(s.max_utterances));
}

void run_train_abstractor(const TrainAbstractorOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    PipelineMethod method = pipeline_method_from_string(opt.method_name);
    RunRecorder run("train-abstractor", opt.seed);
    run.config("scheme", opt.scheme_name);
    run.config("method", opt.method_name);
    AbstractorTrainSettings settings;
    if (!opt.config_path.empty()) {
        run.input("config", opt.config_path);
        settings = parse_abstractor_settings(read_file(opt.config_path));
    }
    record_abstractor_settings(run, settings);
    run.input("corpus", opt.corpus);

    auto records = load_corpus(opt.corpus, scheme);
    auto pairs = abstractor_training_pairs(method, filter_split(records, Split::Train), scheme,
                                           settings.max_utterances);
    auto val_pairs = abstractor_training_pairs(method, filter_split(records, Split::Validation),
                                               scheme, settings.max_utterances);
    if (pairs.empty()) throw ValidationError("no training pairs for method " + opt.method_name);

    std::vector<TrainingLogRow> log;
    Seq2SeqAbstractor abstractor;
    abstractor.model = train_abstractor(settings.dims, scheme, pairs, val_pairs,
                                        settings.hyperparams, opt.seed, &log);
    std::vector<int> lengths;
    lengths.reserve(pairs.size());
    for (const AbstractorPair& pair : pairs)
        lengths.push_back(static_cast<int>(pair.target_tokens.size()));
    abstractor.bounds = length_bounds_from_targets(lengths);
    abstractor.beam_size = settings.beam_size;
    abstractor.unit = decode_unit_for(method);

    const std::string log_path = opt.out + ".log.tsv";
    run.output("bundle", opt.out);
    run.output("log", log_path);
    run.save(manifest_path_for(opt.out));
    save_abstractor(abstractor, opt.out);
    atomic_write_file(log_path, training_log_tsv(log));
    double final_loss = log.empty() ? 0.0 : log.back().train_loss;
    std::printf("train-abstractor: %zu pairs (%zu validation), %zu epochs, final loss %s, bundle %s\n",
                pairs.size(), val_pairs.size(), log.size(), format_fixed(final_loss, 4).c_str(),
                opt.out.c_str());
}

struct CalibrateOptions {
    std::string corpus;
    std::string extractor_path;
    std::string scheme_name = "synthetic4";
    std::string split_name = "validation";
    int tau = 2;
    std::string mode_name = "cluster-matched";
    std::string out;
};

void run_calibrate(const CalibrateOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    Split split = split_flag(opt.split_name);
    CalibrationMode mode = calibration_mode_from_string(opt.mode_name);
    if (opt.tau < 0) throw ConfigError("tau must be >= 0");

    RunRecorder run("calibrate", 0);
    run.config("scheme", opt.scheme_name);
    run.config("split", opt.split_name);
    run.config("tau", std::to_string(opt.tau));
    run.config("mode", opt.mode_name);
    run.input("corpus", opt.corpus);
    run.input("extractor", opt.extractor_path);

    auto part = filter_split(load_corpus(opt.corpus, scheme), split);
    if (part.empty()) throw ValidationError("no records in the " + opt.split_name + " split");
    ExtractorModel model = load_extractor(opt.extractor_path);
    run.config("extractor_mode", to_string(model.mode));

    SectionScheme eff_scheme = scheme;
    if (model.mode == ExtractorMode::Binary) {
        eff_scheme = any_section_scheme();
        part = collapse_to_any(std::move(part));
    }
    std::vector<UtteranceScores> scores;
    scores.reserve(part.size());
    for (const AnnotatedRecord& record : part)
        scores.push_back(score_utterances(model, record.conversation));
    Thresholds thresholds = calibrate_thresholds(part, scores, eff_scheme, opt.tau, mode);

    run.output("thresholds", opt.out);
    run.save(manifest_path_for(opt.out));
    atomic_write_file(opt.out, thresholds_tsv(thresholds));
    std::printf("calibrate: %zu section thresholds from %zu records, table %s\n",
                thresholds.sections.size(), part.size(), opt.out.c_str());
}

struct TuneTauOptions {
    std::string corpus;
    std::string extractor_path;
    std::string abstractor_path;
    std::string scheme_name = "synthetic4";
    std::string split_name = "validation";
    std::string taus = "0,1,2,3,4,5";
    std::string mode_name = "cluster-matched";
    std::string objective = "proxy";
    std::string out;
};

void run_tune_tau(const TuneTauOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    Split split = split_flag(opt.split_name);
    CalibrationMode mode = calibration_mode_from_string(opt.mode_name);
    std::vector<int> taus = parse_int_list("taus", opt.taus);
    if (opt.objective != "proxy" && opt.objective != "rouge")
        throw ConfigError("unknown objective '" + opt.objective + "' (want proxy or rouge)");

    RunRecorder run("tune-tau", 0);
    run.config("scheme", opt.scheme_name);
    run.config("split", opt.split_name);
    run.config("taus", opt.taus);
    run.config("mode", opt.mode_name);
    run.config("objective", opt.objective);
    run.input("corpus", opt.corpus);
    run.input("extractor", opt.extractor_path);

    auto part = filter_split(load_corpus(opt.corpus, scheme), split);
    if (part.empty()) throw ValidationError("no records in the " + opt.split_name + " split");
    ExtractorModel model = load_extractor(opt.extractor_path);

    SectionScheme eff_scheme = scheme;
    if (model.mode == ExtractorMode::Binary) {
        eff_scheme = any_section_scheme();
        part = collapse_to_any(std::move(part));
    }
    std::vector<UtteranceScores> scores;
    scores.reserve(part.size());
    for (const AnnotatedRecord& record : part)
        scores.push_back(score_utterances(model, record.conversation));

    std::function<double(int)> score_tau;
    Seq2SeqAbstractor abstractor;
    if (opt.objective == "proxy") {
        score_tau = [&](int tau) {
            return proxy_alignment_at_tau(part, scores, eff_scheme, tau, mode);
        };
    } else {
        if (opt.abstractor_path.empty())
            throw ConfigError("the rouge objective needs --abstractor");
        if (model.mode != ExtractorMode::Multilabel)
            throw ConfigError("the rouge objective needs a multilabel extractor");
        run.input("abstractor", opt.abstractor_path);
        abstractor = load_abstractor(opt.abstractor_path);
        if (abstractor.unit != DecodeUnit::Sentence)
            throw ConfigError("the rouge objective needs a sentence-unit abstractor");
        score_tau = [&](int tau) {
            Thresholds thresholds = calibrate_thresholds(part, scores, scheme, tau, mode);
            std::vector<GeneratedNote> generated;
            generated.reserve(part.size());
            for (const AnnotatedRecord& record : part) {
                auto selection =
                    predicted_section_selection(model, thresholds, record.conversation);
                generated.push_back(run_cluster2sent(record, scheme, selection, tau, abstractor));
            }
            return score_notes_whole(generated, part, scheme).r1.f1;
        };
    }
    TauTuneResult result = tune_tau(taus, score_tau);

    run.output("table", opt.out);
    run.save(manifest_path_for(opt.out));
    atomic_write_file(opt.out, tau_tune_tsv(result));
    std::printf("tune-tau: best tau %d by the %s objective, table %s\n", result.best_tau,
                opt.objective.c_str(), opt.out.c_str());
}

}  // namespace

void register_model_commands(CLI::App& app) {
    auto ext_opt = std::make_shared<TrainExtractorOptions>();
    CLI::App* ext = app.add_subcommand("train-extractor",
                                       "Train the noteworthiness extractor on the train split");
    ext->add_option("--corpus", ext_opt->corpus, "Corpus JSONL path")->required();
    ext->add_option("--scheme", ext_opt->scheme_name, "Section scheme")->capture_default_str();
    ext->add_option("--config", ext_opt->config_path, "Extractor config file");
    ext->add_option("--seed", ext_opt->seed, "Recorded training seed")->capture_default_str();
    ext->add_option("--out", ext_opt->out, "Checkpoint path")->required();
    ext->callback([ext_opt] { run_train_extractor(*ext_opt); });

    auto abs_opt = std::make_shared<TrainAbstractorOptions>();
    CLI::App* abs = app.add_subcommand("train-abstractor",
                                       "Train the pointer-generator abstractor for one method");
    abs->add_option("--corpus", abs_opt->corpus, "Corpus JSONL path")->required();
    abs->add_option("--scheme", abs_opt->scheme_name, "Section scheme")->capture_default_str();
    abs->add_option("--method", abs_opt->method_name, "Pipeline method the pairs are built for")
        ->required();
    abs->add_option("--config", abs_opt->config_path, "Abstractor config file");
    abs->add_option("--seed", abs_opt->seed, "Training seed")->capture_default_str();
    abs->add_option("--out", abs_opt->out, "Bundle path")->required();
    abs->callback([abs_opt] { run_train_abstractor(*abs_opt); });

    auto cal_opt = std::make_shared<CalibrateOptions>();
    CLI::App* cal =
        app.add_subcommand("calibrate", "Fit per-section selection thresholds on one split");
    cal->add_option("--corpus", cal_opt->corpus, "Corpus JSONL path")->required();
    cal->add_option("--extractor", cal_opt->extractor_path, "Extractor checkpoint")->required();
    cal->add_option("--scheme", cal_opt->scheme_name, "Section scheme")->capture_default_str();
    cal->add_option("--split", cal_opt->split_name, "Calibration split")->capture_default_str();
    cal->add_option("--tau", cal_opt->tau, "Clustering gap tolerance")->capture_default_str();
    cal->add_option("--mode", cal_opt->mode_name, "cluster-matched or count-free")
        ->capture_default_str();
    cal->add_option("--out", cal_opt->out, "Thresholds TSV path")->required();
    cal->callback([cal_opt] { run_calibrate(*cal_opt); });

    auto tau_opt = std::make_shared<TuneTauOptions>();
    CLI::App* tau = app.add_subcommand("tune-tau", "Sweep the clustering gap tolerance");
    tau->add_option("--corpus", tau_opt->corpus, "Corpus JSONL path")->required();
    tau->add_option("--extractor", tau_opt->extractor_path, "Extractor checkpoint")->required();
    tau->add_option("--abstractor", tau_opt->abstractor_path,
                    "Sentence-unit bundle (rouge objective only)");
    tau->add_option("--scheme", tau_opt->scheme_name, "Section scheme")->capture_default_str();
    tau->add_option("--split", tau_opt->split_name, "Tuning split")->capture_default_str();
    tau->add_option("--taus", tau_opt->taus, "Comma-separated candidates")->capture_default_str();
    tau->add_option("--mode", tau_opt->mode_name, "cluster-matched or count-free")
        ->capture_default_str();
    tau->add_option("--objective", tau_opt->objective, "proxy or rouge")->capture_default_str();
    tau->add_option("--out", tau_opt->out, "Sweep table TSV path")->required();
    tau->callback([tau_opt] { run_tune_tau(*tau_opt); });
}

}  // namespace convnote::cli
