#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "convnote/extractor.hpp"
#include "convnote/manifest.hpp"
#include "convnote/seq2seq.hpp"
#include "convnote/types.hpp"

namespace CLI {
class App;
}

namespace convnote::cli {

// Collects the manifest for one invocation. Commands construct it first,
// register inputs as they read them, and call save() after all compute but
// before writing any result file.
class RunRecorder {
  public:
    RunRecorder(std::string command, std::uint64_t seed);

    void config(const std::string& key, const std::string& value);
    void input(const std::string& name, const std::string& path);
    void output(const std::string& name, const std::string& path);
    void save(const std::string& manifest_path);

  private:
    ExperimentManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

std::string manifest_path_for(const std::string& out_path);

// Shortest round-trip decimal form, so manifest config snapshots regenerate
// results exactly.
std::string double_text(double value);

// Flag-value interpreters; all throw ConfigError naming the key.
int int_value(const std::string& key, const std::string& value);
double double_value(const std::string& key, const std::string& value);
std::vector<int> parse_int_list(const std::string& key, const std::string& text);
Split split_flag(const std::string& value);

// Binary extractors score the union label, so calibration reuses the
// per-section machinery against this single-section view of the corpus.
SectionScheme any_section_scheme();
std::vector<AnnotatedRecord> collapse_to_any(std::vector<AnnotatedRecord> records);

struct ExtractorTrainSettings {
    ExtractorMode mode = ExtractorMode::Multilabel;
    int window = 2;
    ExtractorHyperparams hyperparams;
};

struct AbstractorTrainSettings {
    Seq2SeqConfig dims;
    AbstractorHyperparams hyperparams;
    int beam_size = 4;
    int max_utterances = 4096;
};

// Flat key=value config files; unknown keys raise ConfigError naming the key.
ExtractorTrainSettings parse_extractor_settings(const std::string& text);
AbstractorTrainSettings parse_abstractor_settings(const std::string& text);

void register_data_commands(CLI::App& app);
void register_model_commands(CLI::App& app);
void register_notes_commands(CLI::App& app);

}  // namespace convnote::cli
