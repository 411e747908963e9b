#include "convnote/corpus.hpp"

#include <fstream>

#include <json.hpp>

#include "convnote/error.hpp"
#include "convnote/tokenize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

using ordered_json = nlohmann::ordered_json;

AnnotatedRecord record_from_json(const ordered_json& j, const SectionScheme& scheme, int line_no) {
    AnnotatedRecord rec;
    try {
        rec.conversation.id = j.at("id").get<std::string>();
        rec.split = split_from_string(j.at("split").get<std::string>());
        for (const auto& ju : j.at("utterances")) {
            Utterance u;
            u.index = ju.at("index").get<int>();
            u.speaker = ju.at("speaker").get<std::string>();
            u.text = ju.at("text").get<std::string>();
            u.tokens = tokenize(u.text);
            rec.conversation.utterances.push_back(std::move(u));
        }
        for (const auto& js : j.at("note")) {
            NoteSentence s;
            s.section_id = js.at("section").get<std::string>();
            s.tokens = tokenize(js.at("text").get<std::string>());
            for (const auto& je : js.at("evidence")) s.evidence.push_back(je.get<int>());
            rec.note.sentences.push_back(std::move(s));
        }
    } catch (const ordered_json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    validate_record(rec, scheme);
    return rec;
}

}  // namespace

std::vector<AnnotatedRecord> load_corpus(const std::string& path, const SectionScheme& scheme) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    std::vector<AnnotatedRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError("line " + std::to_string(line_no) + ": malformed JSON");
        records.push_back(record_from_json(j, scheme, line_no));
    }
    return records;
}

std::string render_corpus(const std::vector<AnnotatedRecord>& records) {
    std::string out;
    for (const AnnotatedRecord& rec : records) {
        ordered_json j;
        j["id"] = rec.conversation.id;
        j["split"] = to_string(rec.split);
        j["utterances"] = ordered_json::array();
        for (const Utterance& u : rec.conversation.utterances) {
            ordered_json ju;
            ju["index"] = u.index;
            ju["speaker"] = u.speaker;
            ju["text"] = u.text;
            j["utterances"].push_back(std::move(ju));
        }
        j["note"] = ordered_json::array();
        for (const NoteSentence& s : rec.note.sentences) {
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

void save_corpus(const std::vector<AnnotatedRecord>& records, const std::string& path) {
    atomic_write_file(path, render_corpus(records));
}

std::vector<EvidenceCluster> derive_gold_clusters(const AnnotatedRecord& record) {
    std::vector<EvidenceCluster> clusters;
    for (const NoteSentence& s : record.note.sentences) {
        if (s.evidence.empty()) continue;
        EvidenceCluster c;
        c.section_id = s.section_id;
        c.indices = s.evidence;
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::vector<std::vector<bool>> evidence_labels(const AnnotatedRecord& record,
                                               const SectionScheme& scheme) {
    std::vector<std::vector<bool>> labels(
        scheme.sections.size(),
        std::vector<bool>(record.conversation.size(), false));
    for (const NoteSentence& s : record.note.sentences) {
        int section = scheme.index_of(s.section_id);
        if (section < 0) continue;
        for (int index : s.evidence) {
            if (index >= 0 &&
                index < static_cast<int>(record.conversation.size())) {
                labels[section][index] = true;
            }
        }
    }
    return labels;
}

std::vector<AnnotatedRecord> filter_split(const std::vector<AnnotatedRecord>& records, Split split) {
    std::vector<AnnotatedRecord> out;
    for (const AnnotatedRecord& r : records)
        if (r.split == split) out.push_back(r);
    return out;
}

}  // namespace convnote
