#include "convnote/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "convnote/corpus.hpp"
#include "convnote/error.hpp"
#include "convnote/tokenize.hpp"
#include "convnote/tsv.hpp"
#include "convnote/vocab.hpp"

namespace convnote {

PipelineMethod pipeline_method_from_string(const std::string& s) {
    if (s == "conv2note") return PipelineMethod::Conv2Note;
    if (s == "ext2note") return PipelineMethod::Ext2Note;
    if (s == "ext2sec") return PipelineMethod::Ext2Sec;
    if (s == "cluster2sent") return PipelineMethod::Cluster2Sent;
    if (s == "randomnote") return PipelineMethod::RandomNote;
    if (s == "oracleext") return PipelineMethod::OracleExt;
    if (s == "allext2sec") return PipelineMethod::AllExt2Sec;
    if (s == "ext2secnocond") return PipelineMethod::Ext2SecNoCond;
    throw ConfigError("unknown pipeline method: " + s);
}

std::string to_string(PipelineMethod method) {
    switch (method) {
        case PipelineMethod::Conv2Note: return "conv2note";
        case PipelineMethod::Ext2Note: return "ext2note";
        case PipelineMethod::Ext2Sec: return "ext2sec";
        case PipelineMethod::Cluster2Sent: return "cluster2sent";
        case PipelineMethod::RandomNote: return "randomnote";
        case PipelineMethod::OracleExt: return "oracleext";
        case PipelineMethod::AllExt2Sec: return "allext2sec";
        case PipelineMethod::Ext2SecNoCond: return "ext2secnocond";
    }
    throw ConfigError("unknown pipeline method value");
}

DecodeUnit decode_unit_for(PipelineMethod method) {
    switch (method) {
        case PipelineMethod::Conv2Note:
        case PipelineMethod::Ext2Note: return DecodeUnit::Note;
        case PipelineMethod::Ext2Sec:
        case PipelineMethod::Ext2SecNoCond:
        case PipelineMethod::AllExt2Sec: return DecodeUnit::Section;
        case PipelineMethod::Cluster2Sent: return DecodeUnit::Sentence;
        case PipelineMethod::RandomNote:
        case PipelineMethod::OracleExt: break;
    }
    throw ConfigError("method " + to_string(method) + " does not use an abstractor");
}

std::vector<int> all_indices(const Conversation& conversation, int max_utterances) {
    int n = std::min(conversation.size(), max_utterances);
    std::vector<int> indices(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = i;
    return indices;
}

std::vector<int> capped_indices(std::vector<int> indices, int max_utterances) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    while (!indices.empty() && indices.back() >= max_utterances) indices.pop_back();
    return indices;
}

std::vector<std::string> tagged_tokens(const Conversation& conversation,
                                       const std::vector<int>& indices) {
    std::vector<std::string> out;
    for (int index : indices) {
        if (index < 0 || index >= conversation.size())
            throw ValidationError("utterance index " + std::to_string(index) +
                                  " out of range in conversation " + conversation.id);
        const Utterance& u = conversation.utterances[static_cast<std::size_t>(index)];
        out.push_back(speaker_tag(u.speaker));
        out.insert(out.end(), u.tokens.begin(), u.tokens.end());
    }
    return out;
}

std::vector<std::string> linearize_note(const Note& note, const SectionScheme& scheme) {
    std::vector<std::string> out;
    for (const auto& [section_id, header] : scheme.sections) {
        out.push_back(header);
        for (const NoteSentence& s : note.sentences) {
            if (s.section_id != section_id) continue;
            out.insert(out.end(), s.tokens.begin(), s.tokens.end());
        }
    }
    return out;
}

Note note_from_tokens(const std::vector<std::string>& tokens,
                      const SectionScheme& scheme) {
    std::vector<std::vector<std::string>> bodies(
        static_cast<std::size_t>(scheme.size()));
    int current = -1;
    for (const std::string& token : tokens) {
        auto section = scheme.section_of_header(token);
        if (section.has_value()) {
            int index = scheme.index_of(*section);
            if (index != current + 1)
                throw ParseError("generated note headers out of order at " + token);
            current = index;
            continue;
        }
        if (current < 0)
            throw ParseError("generated note does not start with a section header");
        bodies[static_cast<std::size_t>(current)].push_back(token);
    }
    if (current != scheme.size() - 1)
        throw ParseError("generated note is missing section headers");

    Note note;
    for (int i = 0; i < scheme.size(); ++i) {
        if (bodies[static_cast<std::size_t>(i)].empty()) continue;
        NoteSentence s;
        s.section_id = scheme.sections[static_cast<std::size_t>(i)].first;
        s.tokens = std::move(bodies[static_cast<std::size_t>(i)]);
        note.sentences.push_back(std::move(s));
    }
    return note;
}

std::vector<std::vector<int>> oracle_section_selection(const AnnotatedRecord& record,
                                                       const SectionScheme& scheme) {
    std::vector<std::vector<int>> selection(static_cast<std::size_t>(scheme.size()));
    for (const NoteSentence& s : record.note.sentences) {
        int section = scheme.index_of(s.section_id);
        if (section < 0) continue;
        auto& list = selection[static_cast<std::size_t>(section)];
        list.insert(list.end(), s.evidence.begin(), s.evidence.end());
    }
    for (auto& list : selection) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return selection;
}

std::vector<int> oracle_union_selection(const AnnotatedRecord& record) {
    std::vector<int> all;
    for (const NoteSentence& s : record.note.sentences)
        all.insert(all.end(), s.evidence.begin(), s.evidence.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

std::vector<std::vector<int>> predicted_section_selection(
    const ExtractorModel& model, const Thresholds& thresholds,
    const Conversation& conversation) {
    if (model.mode != ExtractorMode::Multilabel)
        throw ConfigError("per-section selection needs a multilabel extractor");
    return select_noteworthy(score_utterances(model, conversation), model.label_ids,
                             thresholds);
}

std::vector<int> predicted_union_selection(const ExtractorModel& model,
                                           const Thresholds& thresholds,
                                           const Conversation& conversation) {
    if (model.mode != ExtractorMode::Binary)
        throw ConfigError("union selection needs a binary extractor");
    auto lists = select_noteworthy(score_utterances(model, conversation),
                                   model.label_ids, thresholds);
    return lists.empty() ? std::vector<int>{} : lists.front();
}

namespace {

std::vector<std::string> section_body(const Note& note, const std::string& section_id) {
    std::vector<std::string> body;
    for (const NoteSentence& s : note.sentences) {
        if (s.section_id != section_id) continue;
        body.insert(body.end(), s.tokens.begin(), s.tokens.end());
    }
    return body;
}

AbstractorPair make_pair(std::vector<std::string> input,
                         std::optional<std::string> section,
                         std::vector<std::string> target) {
    AbstractorPair p;
    p.input_tokens = std::move(input);
    p.section_id = std::move(section);
    p.target_tokens = std::move(target);
    return p;
}

}  // namespace

std::vector<AbstractorPair> abstractor_training_pairs(
    PipelineMethod method, const std::vector<AnnotatedRecord>& records,
    const SectionScheme& scheme, int max_utterances) {
    decode_unit_for(method);  // rejects the model-free methods
    std::vector<AbstractorPair> pairs;
    for (const AnnotatedRecord& record : records) {
        const Conversation& conv = record.conversation;
        switch (method) {
            case PipelineMethod::Conv2Note: {
                auto indices = all_indices(conv, max_utterances);
                if (indices.empty()) break;
                pairs.push_back(make_pair(tagged_tokens(conv, indices), std::nullopt,
                                          linearize_note(record.note, scheme)));
                break;
            }
            case PipelineMethod::Ext2Note: {
                auto indices =
                    capped_indices(oracle_union_selection(record), max_utterances);
                if (indices.empty()) break;
                pairs.push_back(make_pair(tagged_tokens(conv, indices), std::nullopt,
                                          linearize_note(record.note, scheme)));
                break;
            }
            case PipelineMethod::Ext2Sec:
            case PipelineMethod::Ext2SecNoCond: {
                auto selection = oracle_section_selection(record, scheme);
                for (int i = 0; i < scheme.size(); ++i) {
                    auto indices = capped_indices(
                        selection[static_cast<std::size_t>(i)], max_utterances);
                    if (indices.empty()) continue;
                    const std::string& section_id =
                        scheme.sections[static_cast<std::size_t>(i)].first;
                    std::optional<std::string> condition;
                    if (method == PipelineMethod::Ext2Sec) condition = section_id;
                    pairs.push_back(make_pair(tagged_tokens(conv, indices), condition,
                                              section_body(record.note, section_id)));
                }
                break;
            }
            case PipelineMethod::AllExt2Sec: {
                auto indices =
                    capped_indices(oracle_union_selection(record), max_utterances);
                if (indices.empty()) break;
                auto input = tagged_tokens(conv, indices);
                for (const auto& [section_id, header] : scheme.sections) {
                    auto body = section_body(record.note, section_id);
                    if (body.empty()) continue;
                    pairs.push_back(make_pair(input, section_id, std::move(body)));
                }
                break;
            }
            case PipelineMethod::Cluster2Sent: {
                for (const NoteSentence& s : record.note.sentences) {
                    auto indices = capped_indices(s.evidence, max_utterances);
                    if (indices.empty()) continue;
                    pairs.push_back(make_pair(tagged_tokens(conv, indices),
                                              s.section_id, s.tokens));
                }
                break;
            }
            case PipelineMethod::RandomNote:
            case PipelineMethod::OracleExt: break;
        }
    }
    return pairs;
}

GeneratedNote run_conv2note(const AnnotatedRecord& record, const SectionScheme& scheme,
                            const Seq2SeqAbstractor& abstractor, int max_utterances) {
    GeneratedNote out;
    out.record_id = record.conversation.id;
    auto indices = all_indices(record.conversation, max_utterances);
    if (indices.empty()) return out;
    auto tokens = abstractor.generate(tagged_tokens(record.conversation, indices),
                                      std::nullopt);
    out.note = note_from_tokens(tokens, scheme);
    for (NoteSentence& s : out.note.sentences) s.evidence = indices;
    return out;
}

GeneratedNote run_ext2note(const AnnotatedRecord& record, const SectionScheme& scheme,
                           const std::vector<int>& selection,
                           const Seq2SeqAbstractor& abstractor) {
    GeneratedNote out;
    out.record_id = record.conversation.id;
    if (selection.empty()) return out;  // headers-only fallback
    auto tokens = abstractor.generate(tagged_tokens(record.conversation, selection),
                                      std::nullopt);
    out.note = note_from_tokens(tokens, scheme);
    for (NoteSentence& s : out.note.sentences) s.evidence = selection;
    return out;
}

GeneratedNote run_ext2sec(const AnnotatedRecord& record, const SectionScheme& scheme,
                          const std::vector<std::vector<int>>& selection,
                          const Seq2SeqAbstractor& abstractor, bool conditioned) {
    if (static_cast<int>(selection.size()) != scheme.size())
        throw ValidationError("selection does not cover the section scheme");
    GeneratedNote out;
    out.record_id = record.conversation.id;
    for (int i = 0; i < scheme.size(); ++i) {
        const auto& indices = selection[static_cast<std::size_t>(i)];
        if (indices.empty()) continue;
        const std::string& section_id =
            scheme.sections[static_cast<std::size_t>(i)].first;
        std::optional<std::string> condition;
        if (conditioned) condition = section_id;
        NoteSentence s;
        s.section_id = section_id;
        s.tokens =
            abstractor.generate(tagged_tokens(record.conversation, indices), condition);
        s.evidence = indices;
        out.note.sentences.push_back(std::move(s));
    }
    return out;
}

GeneratedNote run_allext2sec(const AnnotatedRecord& record, const SectionScheme& scheme,
                             const std::vector<int>& selection,
                             const Seq2SeqAbstractor& abstractor) {
    GeneratedNote out;
    out.record_id = record.conversation.id;
    if (selection.empty()) return out;
    auto input = tagged_tokens(record.conversation, selection);
    for (const auto& [section_id, header] : scheme.sections) {
        NoteSentence s;
        s.section_id = section_id;
        s.tokens = abstractor.generate(input, section_id);
        s.evidence = selection;
        out.note.sentences.push_back(std::move(s));
    }
    return out;
}

namespace {

GeneratedNote cluster2sent_from_clusters(
    const AnnotatedRecord& record, const SectionScheme& scheme,
    const std::vector<std::vector<std::vector<int>>>& clusters_by_section,
    const Seq2SeqAbstractor& abstractor) {
    GeneratedNote out;
    out.record_id = record.conversation.id;
    for (int i = 0; i < scheme.size(); ++i) {
        const std::string& section_id =
            scheme.sections[static_cast<std::size_t>(i)].first;
        for (const auto& cluster : clusters_by_section[static_cast<std::size_t>(i)]) {
            NoteSentence s;
            s.section_id = section_id;
            s.tokens = abstractor.generate(tagged_tokens(record.conversation, cluster),
                                           section_id);
            s.evidence = cluster;
            out.note.sentences.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace

GeneratedNote run_cluster2sent(const AnnotatedRecord& record, const SectionScheme& scheme,
                               const std::vector<std::vector<int>>& selection, int tau,
                               const Seq2SeqAbstractor& abstractor) {
    if (static_cast<int>(selection.size()) != scheme.size())
        throw ValidationError("selection does not cover the section scheme");
    std::vector<std::vector<std::vector<int>>> clusters(
        static_cast<std::size_t>(scheme.size()));
    for (int i = 0; i < scheme.size(); ++i)
        clusters[static_cast<std::size_t>(i)] =
            proximity_cluster(selection[static_cast<std::size_t>(i)], tau);
    return cluster2sent_from_clusters(record, scheme, clusters, abstractor);
}

GeneratedNote run_cluster2sent_gold(const AnnotatedRecord& record,
                                    const SectionScheme& scheme,
                                    const Seq2SeqAbstractor& abstractor) {
    std::vector<std::vector<std::vector<int>>> clusters(
        static_cast<std::size_t>(scheme.size()));
    for (const EvidenceCluster& c : derive_gold_clusters(record)) {
        int section = scheme.index_of(c.section_id);
        if (section < 0) continue;
        clusters[static_cast<std::size_t>(section)].push_back(c.indices);
    }
    // gold clusters arrive in note order; generation orders by first index
    for (auto& section_clusters : clusters) {
        std::stable_sort(section_clusters.begin(), section_clusters.end(),
                         [](const std::vector<int>& a, const std::vector<int>& b) {
                             return a.front() < b.front();
                         });
    }
    return cluster2sent_from_clusters(record, scheme, clusters, abstractor);
}

GeneratedNote run_randomnote(const AnnotatedRecord& record,
                             const std::vector<AnnotatedRecord>& train_records,
                             std::uint64_t seed) {
    if (train_records.empty())
        throw ValidationError("cannot sample a note from an empty training set");
    std::mt19937_64 rng(seed ^ fnv1a64(record.conversation.id));
    std::uniform_int_distribution<std::size_t> pick(0, train_records.size() - 1);
    GeneratedNote out;
    out.record_id = record.conversation.id;
    out.note = train_records[pick(rng)].note;
    for (NoteSentence& s : out.note.sentences) s.evidence.clear();
    return out;
}

GeneratedNote run_oracleext(const AnnotatedRecord& record, const SectionScheme& scheme) {
    GeneratedNote out;
    out.record_id = record.conversation.id;
    auto selection = oracle_section_selection(record, scheme);
    for (int i = 0; i < scheme.size(); ++i) {
        const std::string& section_id =
            scheme.sections[static_cast<std::size_t>(i)].first;
        for (int index : selection[static_cast<std::size_t>(i)]) {
            if (index < 0 || index >= record.conversation.size()) continue;
            NoteSentence s;
            s.section_id = section_id;
            s.tokens =
                record.conversation.utterances[static_cast<std::size_t>(index)].tokens;
            s.evidence = {index};
            out.note.sentences.push_back(std::move(s));
        }
    }
    return out;
}

void validate_pipeline(const PipelineConfig& config, const PipelineModels& models) {
    if (config.max_utterances <= 0)
        throw ConfigError("utterance cap must be positive");
    if (config.tau < 0) throw ConfigError("tau must be non-negative");
    if (config.oracle_clusters && config.method != PipelineMethod::Cluster2Sent)
        throw ConfigError("oracle clusters require the cluster2sent method");
    if (config.oracle_clusters && !config.oracle_utterances)
        throw ConfigError("oracle clusters require oracle utterances");

    PipelineMethod m = config.method;
    if (m == PipelineMethod::RandomNote) {
        if (models.train_records == nullptr || models.train_records->empty())
            throw ConfigError("randomnote needs a nonempty training pool");
        return;
    }
    if (m == PipelineMethod::OracleExt) return;

    if (models.abstractor == nullptr)
        throw ConfigError("method " + to_string(m) + " needs an abstractor");
    DecodeUnit unit = decode_unit_for(m);
    if (models.abstractor->unit != unit)
        throw ConfigError("method " + to_string(m) + " needs a " + to_string(unit) +
                          "-unit abstractor, got " + to_string(models.abstractor->unit));
    if (m == PipelineMethod::Conv2Note || config.oracle_utterances) return;

    if (models.extractor == nullptr || models.thresholds == nullptr)
        throw ConfigError("method " + to_string(m) +
                          " needs an extractor and thresholds in predicted mode");
    bool wants_binary =
        m == PipelineMethod::Ext2Note || m == PipelineMethod::AllExt2Sec;
    if (wants_binary && models.extractor->mode != ExtractorMode::Binary)
        throw ConfigError("method " + to_string(m) + " needs a binary extractor");
    if (!wants_binary && models.extractor->mode != ExtractorMode::Multilabel)
        throw ConfigError("method " + to_string(m) + " needs a multilabel extractor");
}

GeneratedNote run_pipeline(const PipelineConfig& config, const PipelineModels& models,
                           const SectionScheme& scheme, const AnnotatedRecord& record) {
    validate_pipeline(config, models);
    const Conversation& conv = record.conversation;
    switch (config.method) {
        case PipelineMethod::Conv2Note:
            return run_conv2note(record, scheme, *models.abstractor,
                                 config.max_utterances);
        case PipelineMethod::Ext2Note: {
            auto selection =
                config.oracle_utterances
                    ? oracle_union_selection(record)
                    : predicted_union_selection(*models.extractor, *models.thresholds,
                                                conv);
            return run_ext2note(record, scheme,
                                capped_indices(std::move(selection),
                                               config.max_utterances),
                                *models.abstractor);
        }
        case PipelineMethod::Ext2Sec:
        case PipelineMethod::Ext2SecNoCond: {
            auto selection = config.oracle_utterances
                                 ? oracle_section_selection(record, scheme)
                                 : predicted_section_selection(
                                       *models.extractor, *models.thresholds, conv);
            for (auto& list : selection)
                list = capped_indices(std::move(list), config.max_utterances);
            return run_ext2sec(record, scheme, selection, *models.abstractor,
                               config.method == PipelineMethod::Ext2Sec);
        }
        case PipelineMethod::AllExt2Sec: {
            auto selection =
                config.oracle_utterances
                    ? oracle_union_selection(record)
                    : predicted_union_selection(*models.extractor, *models.thresholds,
                                                conv);
            return run_allext2sec(record, scheme,
                                  capped_indices(std::move(selection),
                                                 config.max_utterances),
                                  *models.abstractor);
        }
        case PipelineMethod::Cluster2Sent: {
            if (config.oracle_clusters)
                return run_cluster2sent_gold(record, scheme, *models.abstractor);
            auto selection = config.oracle_utterances
                                 ? oracle_section_selection(record, scheme)
                                 : predicted_section_selection(
                                       *models.extractor, *models.thresholds, conv);
            for (auto& list : selection)
                list = capped_indices(std::move(list), config.max_utterances);
            return run_cluster2sent(record, scheme, selection, config.tau,
                                    *models.abstractor);
        }
        case PipelineMethod::RandomNote:
            return run_randomnote(record, *models.train_records, config.seed);
        case PipelineMethod::OracleExt: return run_oracleext(record, scheme);
    }
    throw ConfigError("unknown pipeline method value");
}

std::string render_generated(const std::vector<GeneratedNote>& notes) {
    using ordered_json = nlohmann::ordered_json;
    std::string out;
    for (const GeneratedNote& g : notes) {
        ordered_json j;
        j["id"] = g.record_id;
        j["note"] = ordered_json::array();
        for (const NoteSentence& s : g.note.sentences) {
            ordered_json js;
            js["section"] = s.section_id;
            js["text"] = join_tokens(s.tokens);
            js["evidence"] = s.evidence;
            j["note"].push_back(std::move(js));
        }
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

void save_generated(const std::vector<GeneratedNote>& notes, const std::string& path) {
    atomic_write_file(path, render_generated(notes));
}

std::vector<GeneratedNote> load_generated(const std::string& path,
                                          const SectionScheme& scheme) {
    using ordered_json = nlohmann::ordered_json;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open generated notes file: " + path);
    std::vector<GeneratedNote> notes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError("line " + std::to_string(line_no) + ": malformed JSON");
        GeneratedNote g;
        try {
            g.record_id = j.at("id").get<std::string>();
            for (const auto& js : j.at("note")) {
                NoteSentence s;
                s.section_id = js.at("section").get<std::string>();
                if (scheme.index_of(s.section_id) < 0)
                    throw ParseError("line " + std::to_string(line_no) +
                                     ": unknown section " + s.section_id);
                std::istringstream text(js.at("text").get<std::string>());
                std::string token;
                while (text >> token) s.tokens.push_back(token);
                for (const auto& je : js.at("evidence")) s.evidence.push_back(je.get<int>());
                g.note.sentences.push_back(std::move(s));
            }
        } catch (const ordered_json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        notes.push_back(std::move(g));
    }
    return notes;
}

}  // namespace convnote
