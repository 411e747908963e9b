#include "cli_common.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <utility>

#include "convnote/error.hpp"

namespace convnote::cli {

RunRecorder::RunRecorder(std::string command, std::uint64_t seed)
    : start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.tool_version = tool_version();
    manifest_.seed = seed;
    manifest_.versions = module_versions();
}

void RunRecorder::config(const std::string& key, const std::string& value) {
    manifest_.config.emplace_back(key, value);
}

void RunRecorder::input(const std::string& name, const std::string& path) {
    manifest_.inputs.push_back({name, path, file_checksum(path)});
}

void RunRecorder::output(const std::string& name, const std::string& path) {
    manifest_.outputs.push_back({name, path, ""});
}

void RunRecorder::save(const std::string& manifest_path) {
    std::sort(manifest_.config.begin(), manifest_.config.end());
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    save_manifest(manifest_, manifest_path);
}

std::string manifest_path_for(const std::string& out_path) { return out_path + ".manifest"; }

std::string double_text(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

int int_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for key '" + key + "': " + value);
    }
}

double double_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number for key '" + key + "': " + value);
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
    std::vector<int> values;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t a = item.find_first_not_of(" \t");
        std::size_t z = item.find_last_not_of(" \t");
        if (a == std::string::npos)
            throw ConfigError("bad integer list for '" + key + "': " + text);
        values.push_back(int_value(key, item.substr(a, z - a + 1)));
    }
    if (values.empty()) throw ConfigError("'" + key + "' must list at least one integer");
    return values;
}

Split split_flag(const std::string& value) {
    try {
        return split_from_string(value);
    } catch (const ParseError&) {
        throw ConfigError("bad split '" + value + "' (want train, validation, or test)");
    }
}

SectionScheme any_section_scheme() { return SectionScheme{"any", {{"any", "<any>"}}}; }

std::vector<AnnotatedRecord> collapse_to_any(std::vector<AnnotatedRecord> records) {
    for (AnnotatedRecord& record : records)
        for (NoteSentence& sentence : record.note.sentences) sentence.section_id = "any";
    return records;
}

ExtractorTrainSettings parse_extractor_settings(const std::string& text) {
    ExtractorTrainSettings s;
    for (const auto& [key, value] : parse_flat_kv(text)) {
        if (key == "mode") s.mode = extractor_mode_from_string(value);
        else if (key == "window") s.window = int_value(key, value);
        else if (key == "learning_rate") s.hyperparams.learning_rate = double_value(key, value);
        else if (key == "max_epochs") s.hyperparams.max_epochs = int_value(key, value);
        else if (key == "tolerance") s.hyperparams.tolerance = double_value(key, value);
        else if (key == "l2") s.hyperparams.l2 = double_value(key, value);
        else throw ConfigError("unknown extractor config key '" + key + "'");
    }
    if (s.window < 0) throw ConfigError("window must be >= 0");
    if (!(s.hyperparams.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (s.hyperparams.max_epochs <= 0) throw ConfigError("max_epochs must be positive");
    if (s.hyperparams.tolerance < 0.0) throw ConfigError("tolerance must be >= 0");
    if (s.hyperparams.l2 < 0.0) throw ConfigError("l2 must be >= 0");
    return s;
}

AbstractorTrainSettings parse_abstractor_settings(const std::string& text) {
    AbstractorTrainSettings s;
    for (const auto& [key, value] : parse_flat_kv(text)) {
        if (key == "embed_dim") s.dims.embed_dim = int_value(key, value);
        else if (key == "encoder_dim") s.dims.encoder_dim = int_value(key, value);
        else if (key == "decoder_dim") s.dims.decoder_dim = int_value(key, value);
        else if (key == "attention_dim") s.dims.attention_dim = int_value(key, value);
        else if (key == "readout_dim") s.dims.readout_dim = int_value(key, value);
        else if (key == "learning_rate") s.hyperparams.learning_rate = double_value(key, value);
        else if (key == "max_epochs") s.hyperparams.max_epochs = int_value(key, value);
        else if (key == "batch_size") s.hyperparams.batch_size = int_value(key, value);
        else if (key == "patience") s.hyperparams.patience = int_value(key, value);
        else if (key == "clip_norm") s.hyperparams.clip_norm = double_value(key, value);
        else if (key == "min_count") s.hyperparams.min_count = int_value(key, value);
        else if (key == "coverage_epochs") s.hyperparams.coverage_epochs = int_value(key, value);
        else if (key == "coverage_weight") s.hyperparams.coverage_weight = double_value(key, value);
        else if (key == "beam_size") s.beam_size = int_value(key, value);
        else if (key == "max_utterances") s.max_utterances = int_value(key, value);
        else throw ConfigError("unknown abstractor config key '" + key + "'");
    }
    if (s.dims.embed_dim <= 0 || s.dims.encoder_dim <= 0 || s.dims.decoder_dim <= 0 ||
        s.dims.attention_dim <= 0 || s.dims.readout_dim <= 0)
        throw ConfigError("model dimensions must be positive");
    if (!(s.hyperparams.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (s.hyperparams.max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
    if (s.hyperparams.batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (s.hyperparams.patience < 0) throw ConfigError("patience must be >= 0");
    if (!(s.hyperparams.clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
    if (s.hyperparams.min_count < 1) throw ConfigError("min_count must be >= 1");
    if (s.hyperparams.coverage_epochs < 0) throw ConfigError("coverage_epochs must be >= 0");
    if (s.hyperparams.coverage_weight < 0.0) throw ConfigError("coverage_weight must be >= 0");
    if (s.beam_size < 1) throw ConfigError("beam_size must be >= 1");
    if (s.max_utterances <= 0) throw ConfigError("max_utterances must be positive");
    return s;
}

}  // namespace convnote::cli
