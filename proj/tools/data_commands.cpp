#include <CLI11.hpp>
#include <cstdio>
#include <memory>

#include "cli_common.hpp"
#include "convnote/asr.hpp"
#include "convnote/ami.hpp"
#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/stats.hpp"
#include "convnote/synthetic.hpp"
#include "convnote/tsv.hpp"

namespace convnote::cli {

namespace {

struct SynthOptions {
    std::string config_path;
    std::string out;
    int n = 0;
    bool n_given = false;
    std::uint64_t seed = 0;
};

void run_synth(const SynthOptions& opt) {
    RunRecorder run("synth", opt.seed);
    SyntheticConfig cfg;
    if (!opt.config_path.empty()) {
        run.input("config", opt.config_path);
        cfg = load_synthetic_config(opt.config_path);
    }
    if (opt.n_given) {
        if (opt.n < 0)
            throw ConfigError("record count must be nonnegative, got " + std::to_string(opt.n));
        cfg.n_records = opt.n;
    }
    validate_config(cfg);

    run.config("n_records", std::to_string(cfg.n_records));
    run.config("val_fraction", double_text(cfg.val_fraction));
    run.config("test_fraction", double_text(cfg.test_fraction));
    run.config("scheme", cfg.scheme);
    run.config("mean_utterances", double_text(cfg.mean_utterances));
    run.config("vocab_size", std::to_string(cfg.vocab_size));
    run.config("contiguity", double_text(cfg.contiguity));
    run.config("cluster_break_rate", double_text(cfg.cluster_break_rate));
    run.config("rare_token_rate", double_text(cfg.rare_token_rate));
    run.config("shared_fact_rate", double_text(cfg.shared_fact_rate));
    run.config("ack_evidence_rate", double_text(cfg.ack_evidence_rate));
    run.config("empty_section_rate", double_text(cfg.empty_section_rate));
    run.output("corpus", opt.out);

    auto records = generate_synthetic(cfg, opt.seed);
    run.save(manifest_path_for(opt.out));
    save_corpus(records, opt.out);
    std::printf("synth: wrote %zu records to %s\n", records.size(), opt.out.c_str());
}

struct IngestOptions {
    std::string transcript;
    std::string summary;
    std::string links;
    std::string scheme_name = "ami";
    std::string split_name = "train";
    std::string out;
};

void run_ingest(const IngestOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    Split split = split_flag(opt.split_name);
    RunRecorder run("ingest-ami", 0);
    run.config("scheme", opt.scheme_name);
    run.config("split", opt.split_name);
    run.input("transcript", opt.transcript);
    run.input("summary", opt.summary);
    run.input("links", opt.links);

    AnnotatedRecord record = ingest_ami(opt.transcript, opt.summary, opt.links, scheme, split);
    if (opt.out.empty()) {
        std::fputs(render_corpus({record}).c_str(), stdout);
        return;
    }
    run.output("corpus", opt.out);
    run.save(manifest_path_for(opt.out));
    save_corpus({record}, opt.out);
    std::printf("ingest-ami: wrote 1 record with %zu note sentences to %s\n",
                record.note.sentences.size(), opt.out.c_str());
}

struct StatsOptions {
    std::string corpus;
    std::string scheme_name = "synthetic4";
    std::string out;
};

void run_stats(const StatsOptions& opt) {
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    RunRecorder run("stats", 0);
    run.config("scheme", opt.scheme_name);
    run.input("corpus", opt.corpus);
    auto records = load_corpus(opt.corpus, scheme);
    std::string table = stats_to_tsv(corpus_stats(records, scheme));
    if (opt.out.empty()) {
        std::fputs(table.c_str(), stdout);
        return;
    }
    run.output("report", opt.out);
    run.save(manifest_path_for(opt.out));
    atomic_write_file(opt.out, table);
    std::printf("stats: wrote %s\n", opt.out.c_str());
}

struct CorruptOptions {
    std::string corpus;
    std::string lexicon_path;
    std::string scheme_name = "synthetic4";
    double rate = 0.1;
    std::uint64_t seed = 0;
    std::string out;
};

void run_corrupt(const CorruptOptions& opt) {
    if (!(opt.rate >= 0.0 && opt.rate <= 1.0)) throw ConfigError("rate must be in [0,1]");
    SectionScheme scheme = SectionScheme::by_name(opt.scheme_name);
    RunRecorder run("corrupt", opt.seed);
    run.config("rate", double_text(opt.rate));
    run.config("scheme", opt.scheme_name);
    run.input("corpus", opt.corpus);
    auto records = load_corpus(opt.corpus, scheme);

    auto lexicon_source = records;
    if (!opt.lexicon_path.empty()) {
        run.input("lexicon", opt.lexicon_path);
        lexicon_source = load_corpus(opt.lexicon_path, scheme);
    }
    // In-domain recognizer vocabulary; a corpus without a train split falls
    // back to its full vocabulary.
    auto train = filter_split(lexicon_source, Split::Train);
    auto lexicon = build_lexicon(train.empty() ? lexicon_source : train);

    CorruptionReport report;
    auto corrupted = corrupt_corpus(records, opt.rate, lexicon, opt.seed, &report);

    const std::string report_path = opt.out + ".report.tsv";
    run.output("corpus", opt.out);
    run.output("report", report_path);
    run.save(manifest_path_for(opt.out));
    save_corpus(corrupted, opt.out);
    atomic_write_file(report_path, corruption_report_tsv(report));
    std::printf("corrupt: replaced %ld of %ld selected positions (%ld skipped) in %s\n",
                report.replaced, report.selected, report.skipped, opt.out.c_str());
}

}  // namespace

void register_data_commands(CLI::App& app) {
    auto synth_opt = std::make_shared<SynthOptions>();
    CLI::App* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    synth->add_option("--config", synth_opt->config_path, "Synthetic generator config file");
    synth->add_option("--n", synth_opt->n, "Record count (overrides the config)")
        ->each([synth_opt](const std::string&) { synth_opt->n_given = true; });
    synth->add_option("--seed", synth_opt->seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", synth_opt->out, "Corpus JSONL path")->required();
    synth->callback([synth_opt] { run_synth(*synth_opt); });

    auto ingest_opt = std::make_shared<IngestOptions>();
    CLI::App* ingest = app.add_subcommand("ingest-ami", "Ingest one meeting from the AMI export");
    ingest->add_option("--transcript", ingest_opt->transcript, "Transcript TSV")->required();
    ingest->add_option("--summary", ingest_opt->summary, "Summary TSV")->required();
    ingest->add_option("--links", ingest_opt->links, "Sentence-to-utterance link TSV")->required();
    ingest->add_option("--scheme", ingest_opt->scheme_name, "Section scheme")->capture_default_str();
    ingest->add_option("--split", ingest_opt->split_name, "Split to tag the record with")
        ->capture_default_str();
    ingest->add_option("--out", ingest_opt->out, "Corpus JSONL path (stdout when omitted)");
    ingest->callback([ingest_opt] { run_ingest(*ingest_opt); });

    auto stats_opt = std::make_shared<StatsOptions>();
    CLI::App* stats = app.add_subcommand("stats", "Corpus statistics table");
    stats->add_option("corpus", stats_opt->corpus, "Corpus JSONL path")->required();
    stats->add_option("--scheme", stats_opt->scheme_name, "Section scheme")->capture_default_str();
    stats->add_option("--out", stats_opt->out, "Report TSV path (stdout when omitted)");
    stats->callback([stats_opt] { run_stats(*stats_opt); });

    auto corrupt_opt = std::make_shared<CorruptOptions>();
    CLI::App* corrupt =
        app.add_subcommand("corrupt", "Simulate recognizer errors with phonetic swaps");
    corrupt->add_option("--corpus", corrupt_opt->corpus, "Corpus JSONL path")->required();
    corrupt->add_option("--rate", corrupt_opt->rate, "Word error rate")->capture_default_str();
    corrupt->add_option("--lexicon", corrupt_opt->lexicon_path,
                        "Corpus supplying the replacement lexicon (default: the input corpus)");
    corrupt->add_option("--scheme", corrupt_opt->scheme_name, "Section scheme")
        ->capture_default_str();
    corrupt->add_option("--seed", corrupt_opt->seed, "Corruption seed")->capture_default_str();
    corrupt->add_option("--out", corrupt_opt->out, "Corrupted corpus JSONL path")->required();
    corrupt->callback([corrupt_opt] { run_corrupt(*corrupt_opt); });
}

}  // namespace convnote::cli
