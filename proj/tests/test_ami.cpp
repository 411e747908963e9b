#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "convnote/ami.hpp"
#include "convnote/corpus.hpp"
#include "convnote/error.hpp"

using namespace convnote;

namespace {

const std::string kFixtures = CONVNOTE_FIXTURE_DIR;

AnnotatedRecord ingest_fixture() {
    return ingest_ami(kFixtures + "/ami_transcript.tsv", kFixtures + "/ami_summary.tsv",
                      kFixtures + "/ami_links.tsv", SectionScheme::ami(), Split::Test);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
}

}  // namespace

TEST_CASE("fixture meeting drops the one unlinked sentence") {
    AnnotatedRecord rec = ingest_fixture();
    CHECK(rec.conversation.id == "ES2002a");
    CHECK(rec.conversation.size() == 14);
    // 10 summary sentences, sentence 7 has no links.
    CHECK(rec.note.sentences.size() == 9);
    CHECK(derive_gold_clusters(rec).size() == 9);
}

TEST_CASE("fixture evidence is sorted and sections come out in scheme order") {
    AnnotatedRecord rec = ingest_fixture();
    int last = -1;
    SectionScheme scheme = SectionScheme::ami();
    for (const NoteSentence& s : rec.note.sentences) {
        CHECK(scheme.index_of(s.section_id) >= last);
        last = scheme.index_of(s.section_id);
        CHECK(!s.evidence.empty());
        CHECK(std::is_sorted(s.evidence.begin(), s.evidence.end()));
    }
    // linked out of order in the file, sorted in the record
    CHECK(rec.note.sentences[0].evidence == std::vector<int>{0, 2});
}

TEST_CASE("fixture round trips through the canonical format") {
    AnnotatedRecord rec = ingest_fixture();
    std::string path = "/tmp/convnote_test_ami_roundtrip.jsonl";
    save_corpus({rec}, path);
    auto loaded = load_corpus(path, SectionScheme::ami());
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0] == rec);
    std::remove(path.c_str());
}

TEST_CASE("link to a nonexistent utterance fails") {
    std::string links = "/tmp/convnote_test_ami_badlink.tsv";
    write_file(links, "ES2002a\t0\t99\n");
    CHECK_THROWS_AS(ingest_ami(kFixtures + "/ami_transcript.tsv",
                               kFixtures + "/ami_summary.tsv", links, SectionScheme::ami(),
                               Split::Test),
                    ValidationError);
    std::remove(links.c_str());
}

TEST_CASE("unknown section label fails") {
    std::string summary = "/tmp/convnote_test_ami_badsection.tsv";
    write_file(summary, "ES2002a\t0\tminutes\tsome sentence .\n");
    CHECK_THROWS_AS(ingest_ami(kFixtures + "/ami_transcript.tsv", summary,
                               kFixtures + "/ami_links.tsv", SectionScheme::ami(), Split::Test),
                    ValidationError);
    std::remove(summary.c_str());
}

TEST_CASE("mixed meeting ids fail") {
    std::string transcript = "/tmp/convnote_test_ami_mixed.tsv";
    write_file(transcript, "ES2002a\t0\tA\thello .\nES2002b\t1\tB\tworld .\n");
    CHECK_THROWS_AS(ingest_ami(transcript, kFixtures + "/ami_summary.tsv",
                               kFixtures + "/ami_links.tsv", SectionScheme::ami(), Split::Test),
                    ValidationError);
    std::remove(transcript.c_str());
}
