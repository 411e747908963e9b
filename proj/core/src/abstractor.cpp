#include "convnote/abstractor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "convnote/error.hpp"
#include "convnote/serialize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

constexpr char kBundleMagic[4] = {'C', 'N', 'A', 'B'};
constexpr std::uint32_t kBundleVersion = 1;

}  // namespace

DecodeUnit decode_unit_from_string(const std::string& s) {
    if (s == "note") return DecodeUnit::Note;
    if (s == "section") return DecodeUnit::Section;
    if (s == "sentence") return DecodeUnit::Sentence;
    throw ConfigError("unknown decode unit: " + s);
}

std::string to_string(DecodeUnit unit) {
    switch (unit) {
        case DecodeUnit::Note: return "note";
        case DecodeUnit::Section: return "section";
        case DecodeUnit::Sentence: return "sentence";
    }
    throw ConfigError("unknown decode unit");
}

std::vector<std::string> Seq2SeqAbstractor::generate(
    const std::vector<std::string>& input_tokens,
    const std::optional<std::string>& section_id) const {
    BeamOptions options;
    options.beam_size = beam_size;
    options.bounds = bounds;
    options.note_constraints = unit == DecodeUnit::Note;
    return beam_search(model, input_tokens, section_id, options);
}

void save_abstractor(const Seq2SeqAbstractor& abstractor, const std::string& path) {
    std::ostringstream out(std::ios::binary);
    write_magic(out, kBundleMagic, kBundleVersion);
    write_string(out, to_string(abstractor.unit));
    write_u32(out, static_cast<std::uint32_t>(abstractor.beam_size));
    write_u32(out, static_cast<std::uint32_t>(abstractor.bounds.min_tokens));
    write_u32(out, static_cast<std::uint32_t>(abstractor.bounds.max_tokens));
    write_model(out, abstractor.model);
    atomic_write_file(path, out.str());
}

Seq2SeqAbstractor load_abstractor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open abstractor checkpoint: " + path);
    read_magic(in, kBundleMagic);
    Seq2SeqAbstractor abstractor;
    abstractor.unit = decode_unit_from_string(read_string(in));
    abstractor.beam_size = static_cast<int>(read_u32(in));
    abstractor.bounds.min_tokens = static_cast<int>(read_u32(in));
    abstractor.bounds.max_tokens = static_cast<int>(read_u32(in));
    abstractor.model = read_model(in);
    return abstractor;
}

const std::vector<std::string>& default_filler_stoplist() {
    static const std::vector<std::string> kStoplist = {
        "ah", "alright", "hmm", "huh",    "mm",  "mm-hmm", "oh",  "ok",
        "okay", "uh",     "uh-huh", "uhm", "um",  "yeah",   "yep",
    };
    return kStoplist;
}

FusionAbstractor::FusionAbstractor() : stoplist_(default_filler_stoplist()) {}

FusionAbstractor::FusionAbstractor(std::vector<std::string> stoplist)
    : stoplist_(std::move(stoplist)) {}

namespace {

std::vector<std::string> fuse(const std::vector<std::vector<std::string>>& utterances,
                              const std::vector<std::string>& stoplist) {
    if (utterances.empty()) throw ValidationError("cannot fuse an empty cluster");
    auto keep = [&](const std::string& token) {
        if (is_speaker_tag(token)) return false;
        return std::find(stoplist.begin(), stoplist.end(), token) == stoplist.end();
    };
    std::vector<std::string> out;
    std::vector<std::string> previous;
    for (const auto& utterance : utterances) {
        std::vector<std::string> kept;
        for (const auto& token : utterance)
            if (keep(token)) kept.push_back(token);
        if (kept.empty() || kept == previous) continue;
        out.insert(out.end(), kept.begin(), kept.end());
        previous = std::move(kept);
    }
    return out;
}

}  // namespace

std::vector<std::string> FusionAbstractor::generate(
    const std::vector<std::string>& input_tokens,
    const std::optional<std::string>& section_id) const {
    (void)section_id;
    if (input_tokens.empty()) throw ValidationError("cannot fuse an empty cluster");
    std::vector<std::vector<std::string>> utterances;
    for (const auto& token : input_tokens) {
        if (is_speaker_tag(token) || utterances.empty()) utterances.emplace_back();
        utterances.back().push_back(token);
    }
    return fuse(utterances, stoplist_);
}

std::vector<std::string> fusion_baseline_generate(
    const std::vector<std::vector<std::string>>& cluster_utterances,
    const std::string& section_id) {
    (void)section_id;
    return fuse(cluster_utterances, default_filler_stoplist());
}

}  // namespace convnote
