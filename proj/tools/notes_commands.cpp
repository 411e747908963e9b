#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_set>

#include "cli_common.hpp"
#include "convnote/abstractor.hpp"
#include "convnote/cluster.hpp"
#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/extractor.hpp"
#include "convnote/pipeline.hpp"
#include "convnote/rouge.hpp"
#include "convnote/tsv.hpp"

namespace convnote::cli {

namespace {

struct GenerateOptions {
    std::string corpus;
    std::string scheme_name = "synthetic4";
    std::string method_name;
    std::string split_name = "test";
    bool oracle_utterances = false;
    bool oracle_clusters = false;
    bool no_copy = false;
    int tau = 2;
    std::uint64_t seed = 0;
    int beam_size = 0;  // 0 keeps the bundle's setting
    int max_utterances = 4096;
    int jobs = 1;
    std::string extractor_path;
    std::string thresholds_path;
    std::string abstractor_path;
    std::string out;
};

std::vector<GeneratedNote> generate_notes(const PipelineConfig& config,
                                          const PipelineModels& models,
                                          const SectionScheme& scheme,
                                          const std::vector<AnnotatedRecord>& targets, int jobs) {
    std::vector<GeneratedNote> generated(targets.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < targets.size(); ++i)
            generated[i] = run_pipeline(config, models, scheme, targets[i]);
        return generated;
    }
    // Record-indexed slots keep the output independent of scheduling.
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        while (!stop.load()) {
            std::size_t i = next.fetch_add(1);
            if (i >= targets.size()) return;
            try {
                generated[i] = run_pipeline(config, models, scheme, targets[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                stop.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return generated;
}

void run_generate(const GenerateOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    PipelineMethod method = pipeline_method_from_string(opt.method_name);
    Split split = split_flag(opt.split_name);
    if (opt.jobs < 1) throw ConfigError("jobs must be >= 1");

    RunRecorder run("generate", opt.seed);
    run.config("scheme", opt.scheme_name);
    run.config("method", opt.method_name);
    run.config("split", opt.split_name);
    run.config("oracle_utterances", opt.oracle_utterances ? "true" : "false");
    run.config("oracle_clusters", opt.oracle_clusters ? "true" : "false");
    run.config("no_copy", opt.no_copy ? "true" : "false");
    run.config("tau", std::to_string(opt.tau));
    run.config("max_utterances", std::to_string(opt.max_utterances));
    run.config("jobs", std::to_string(opt.jobs));
    run.input("corpus", opt.corpus);

    auto records = load_corpus(opt.corpus, scheme);
    auto targets = filter_split(records, split);
    if (targets.empty()) throw ValidationError("no records in the " + opt.split_name + " split");
    auto train_pool = filter_split(records, Split::Train);

    std::optional<ExtractorModel> extractor;
    std::optional<Thresholds> thresholds;
    std::optional<Seq2SeqAbstractor> abstractor;
    if (!opt.extractor_path.empty()) {
        run.input("extractor", opt.extractor_path);
        extractor = load_extractor(opt.extractor_path);
    }
    if (!opt.thresholds_path.empty()) {
        run.input("thresholds", opt.thresholds_path);
        thresholds = thresholds_from_tsv(read_file(opt.thresholds_path));
    }
    if (!opt.abstractor_path.empty()) {
        run.input("abstractor", opt.abstractor_path);
        abstractor = load_abstractor(opt.abstractor_path);
        if (opt.beam_size > 0) abstractor->beam_size = opt.beam_size;
        if (opt.no_copy) {
            // Ablation switch: pin the mixture gate at p_gen = 1 so decoding
            // never copies from the source.
            abstractor->model.w_pgen.setZero();
            abstractor->model.b_pgen.setConstant(40.0);
        }
    }
    run.config("beam_size", std::to_string(abstractor ? abstractor->beam_size : 0));

    PipelineConfig config;
    config.method = method;
    config.oracle_utterances = opt.oracle_utterances;
    config.oracle_clusters = opt.oracle_clusters;
    config.tau = opt.tau;
    config.seed = opt.seed;
    config.max_utterances = opt.max_utterances;

    PipelineModels models;
    if (extractor) models.extractor = &*extractor;
    if (thresholds) models.thresholds = &*thresholds;
    if (abstractor) models.abstractor = &*abstractor;
    models.train_records = &train_pool;
    validate_pipeline(config, models);

    auto generated = generate_notes(config, models, scheme, targets, opt.jobs);
    std::stable_sort(generated.begin(), generated.end(),
                     [](const GeneratedNote& a, const GeneratedNote& b) {
                         return a.record_id < b.record_id;
                     });

    run.output("notes", opt.out);
    run.save(manifest_path_for(opt.out));
    save_generated(generated, opt.out);
    std::printf("generate: wrote %zu notes to %s\n", generated.size(), opt.out.c_str());
}

struct ScoreOptions {
    std::string generated_path;
    std::string gold_path;
    std::string scheme_name = "synthetic4";
    std::string granularity = "both";
    std::string out;
    std::string sections_out;
};

std::string default_sections_path(const std::string& out) {
    const std::string ext = ".tsv";
    if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
        return out.substr(0, out.size() - ext.size()) + ".sections.tsv";
    return out + ".sections.tsv";
}

void run_score(const ScoreOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    bool want_whole = opt.granularity == "both" || opt.granularity == "whole";
    bool want_sections = opt.granularity == "both" || opt.granularity == "section";
    if (!want_whole && !want_sections)
        throw ConfigError("unknown granularity '" + opt.granularity +
                          "' (want whole, section, or both)");

    RunRecorder run("score", 0);
    run.config("scheme", opt.scheme_name);
    run.config("granularity", opt.granularity);
    run.input("generated", opt.generated_path);
    run.input("gold", opt.gold_path);

    auto generated = load_generated(opt.generated_path, scheme);
    auto gold = load_corpus(opt.gold_path, scheme);

    std::unordered_set<std::string> gold_ids;
    for (const AnnotatedRecord& record : gold) gold_ids.insert(record.conversation.id);
    std::string unmatched;
    for (const GeneratedNote& note : generated) {
        if (gold_ids.count(note.record_id)) continue;
        if (!unmatched.empty()) unmatched += ", ";
        unmatched += note.record_id;
    }
    if (!unmatched.empty())
        throw ValidationError("generated records with no gold counterpart: " + unmatched);

    std::string whole_table;
    std::string sections_table;
    if (want_whole) whole_table = whole_note_report_tsv(score_notes_whole(generated, gold, scheme));
    if (want_sections)
        sections_table = per_section_report_tsv(score_notes_per_section(generated, gold, scheme));

    if (opt.out.empty()) {
        if (want_whole) std::fputs(whole_table.c_str(), stdout);
        if (want_whole && want_sections) std::fputs("\n", stdout);
        if (want_sections) std::fputs(sections_table.c_str(), stdout);
        return;
    }

    // --out carries the whole-note table, or the per-section table when that
    // is the only granularity asked for.
    std::string sections_path;
    if (want_whole) {
        run.output("whole", opt.out);
        if (want_sections) {
            sections_path =
                opt.sections_out.empty() ? default_sections_path(opt.out) : opt.sections_out;
            run.output("sections", sections_path);
        }
    } else {
        sections_path = opt.out;
        run.output("sections", sections_path);
    }
    run.save(manifest_path_for(opt.out));
    if (want_whole) atomic_write_file(opt.out, whole_table);
    if (want_sections) atomic_write_file(sections_path, sections_table);
    std::printf("score: scored %zu notes, tables at %s\n", generated.size(), opt.out.c_str());
}

}  // namespace

void register_notes_commands(CLI::App& app) {
    auto gen_opt = std::make_shared<GenerateOptions>();
    CLI::App* gen = app.add_subcommand("generate", "Generate notes for one split");
    gen->add_option("--corpus", gen_opt->corpus, "Corpus JSONL path")->required();
    gen->add_option("--method", gen_opt->method_name, "Pipeline method")->required();
    gen->add_option("--scheme", gen_opt->scheme_name, "Section scheme")->capture_default_str();
    gen->add_option("--split", gen_opt->split_name, "Split to generate for")
        ->capture_default_str();
    gen->add_flag("--oracle-utterances", gen_opt->oracle_utterances,
                  "Use gold evidence utterances instead of the extractor");
    gen->add_flag("--oracle-clusters", gen_opt->oracle_clusters,
                  "Use gold evidence clusters (cluster2sent, with --oracle-utterances)");
    gen->add_flag("--no-copy", gen_opt->no_copy, "Disable the copy mixture (ablation)");
    gen->add_option("--tau", gen_opt->tau, "Clustering gap tolerance")->capture_default_str();
    gen->add_option("--seed", gen_opt->seed, "Seed (randomnote draws)")->capture_default_str();
    gen->add_option("--beam-size", gen_opt->beam_size, "Override the bundle's beam size");
    gen->add_option("--max-utterances", gen_opt->max_utterances, "Per-conversation input cap")
        ->capture_default_str();
    gen->add_option("--jobs", gen_opt->jobs, "Worker threads")->capture_default_str();
    gen->add_option("--extractor", gen_opt->extractor_path, "Extractor checkpoint");
    gen->add_option("--thresholds", gen_opt->thresholds_path, "Calibrated thresholds TSV");
    gen->add_option("--abstractor", gen_opt->abstractor_path, "Abstractor bundle");
    gen->add_option("--out", gen_opt->out, "Generated notes JSONL path")->required();
    gen->callback([gen_opt] { run_generate(*gen_opt); });

    auto score_opt = std::make_shared<ScoreOptions>();
    CLI::App* score = app.add_subcommand("score", "ROUGE tables for generated notes");
    score->add_option("--generated", score_opt->generated_path, "Generated notes JSONL")
        ->required();
    score->add_option("--gold", score_opt->gold_path, "Gold corpus JSONL")->required();
    score->add_option("--scheme", score_opt->scheme_name, "Section scheme")
        ->capture_default_str();
    score->add_option("--granularity", score_opt->granularity, "whole, section, or both")
        ->capture_default_str();
    score->add_option("--out", score_opt->out, "Report TSV path (stdout when omitted)");
    score->add_option("--sections-out", score_opt->sections_out,
                      "Per-section table path (default: derived from --out)");
    score->callback([score_opt] { run_score(*score_opt); });
}

}  // namespace convnote::cli
