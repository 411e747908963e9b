#include "convnote/ami.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "convnote/error.hpp"
#include "convnote/tokenize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad " + what + ": '" + s + "'");
    }
}

void check_meeting(const std::string& file, const std::string& got, std::string& meeting_id) {
    if (meeting_id.empty())
        meeting_id = got;
    else if (got != meeting_id)
        throw ValidationError(file + " mixes meetings '" + meeting_id + "' and '" + got + "'");
}

}  // namespace

AnnotatedRecord ingest_ami(const std::string& transcript_path, const std::string& summary_path,
                           const std::string& link_path, const SectionScheme& scheme,
                           Split split) {
    std::string meeting_id;
    AnnotatedRecord rec;

    for (const TsvRow& row : read_tsv(transcript_path)) {
        if (row.size() != 4) throw ParseError("transcript row needs 4 fields, got " +
                                              std::to_string(row.size()));
        check_meeting("transcript", row[0], meeting_id);
        Utterance u;
        u.index = parse_int(row[1], "utterance index");
        u.speaker = row[2];
        u.text = row[3];
        u.tokens = tokenize(u.text);
        rec.conversation.utterances.push_back(std::move(u));
    }

    struct SummaryRow {
        std::string section;
        std::string text;
    };
    std::map<int, SummaryRow> summary;
    for (const TsvRow& row : read_tsv(summary_path)) {
        if (row.size() != 4) throw ParseError("summary row needs 4 fields, got " +
                                              std::to_string(row.size()));
        check_meeting("summary", row[0], meeting_id);
        int idx = parse_int(row[1], "sentence index");
        if (scheme.index_of(row[2]) < 0)
            throw ValidationError("unknown section label '" + row[2] + "'");
        summary[idx] = SummaryRow{row[2], row[3]};
    }

    std::set<int> utterance_ids;
    for (const Utterance& u : rec.conversation.utterances) utterance_ids.insert(u.index);

    std::map<int, std::vector<int>> links;
    for (const TsvRow& row : read_tsv(link_path)) {
        if (row.size() != 3) throw ParseError("link row needs 3 fields, got " +
                                              std::to_string(row.size()));
        check_meeting("links", row[0], meeting_id);
        int sent = parse_int(row[1], "sentence index");
        int utt = parse_int(row[2], "utterance index");
        if (!summary.count(sent))
            throw ValidationError("link names summary sentence " + std::to_string(sent) +
                                  " which does not exist");
        if (!utterance_ids.count(utt))
            throw ValidationError("link names utterance " + std::to_string(utt) +
                                  " which does not exist");
        links[sent].push_back(utt);
    }

    rec.conversation.id = meeting_id;
    rec.split = split;

    // Canonical section order, authoring order within a section; unlinked
    // sentences are dropped.
    for (const auto& [section_id, header] : scheme.sections) {
        (void)header;
        for (const auto& [sent_idx, srow] : summary) {
            if (srow.section != section_id) continue;
            auto it = links.find(sent_idx);
            if (it == links.end()) continue;
            NoteSentence s;
            s.section_id = srow.section;
            s.tokens = tokenize(srow.text);
            s.evidence = it->second;
            std::sort(s.evidence.begin(), s.evidence.end());
            s.evidence.erase(std::unique(s.evidence.begin(), s.evidence.end()), s.evidence.end());
            rec.note.sentences.push_back(std::move(s));
        }
    }

    validate_record(rec, scheme);
    return rec;
}

}  // namespace convnote
