#include <doctest.h>

#include "convnote/error.hpp"
#include "convnote/tokenize.hpp"
#include "convnote/types.hpp"

using namespace convnote;

namespace {

AnnotatedRecord small_record() {
    AnnotatedRecord rec;
    rec.conversation.id = "r1";
    for (int i = 0; i < 4; ++i) {
        Utterance u;
        u.index = i;
        u.speaker = i % 2 ? "PT" : "DR";
        u.text = "utterance " + std::to_string(i) + " .";
        u.tokens = tokenize(u.text);
        rec.conversation.utterances.push_back(u);
    }
    NoteSentence s;
    s.section_id = "symptoms";
    s.tokens = {"fine", "."};
    s.evidence = {1, 2};
    rec.note.sentences.push_back(s);
    return rec;
}

}  // namespace

TEST_CASE("scheme lookups") {
    SectionScheme s = SectionScheme::synthetic4();
    CHECK(s.size() == 4);
    CHECK(s.index_of("symptoms") == 0);
    CHECK(s.index_of("plan") == 3);
    CHECK(s.index_of("nope") == -1);
    CHECK(s.header_of("results") == "<results>");
    CHECK_THROWS_AS(s.header_of("nope"), ValidationError);
    CHECK(s.section_of_header("<plan>") == std::optional<std::string>("plan"));
    CHECK(!s.section_of_header("plan").has_value());
}

TEST_CASE("scheme catalog") {
    CHECK(SectionScheme::ami().size() == 4);
    CHECK(SectionScheme::soap15().size() == 15);
    CHECK(SectionScheme::soap15().sections.front().first == "chief_complaint");
    CHECK(SectionScheme::soap15().sections.back().first == "healthcare_complaints");
    CHECK_THROWS_AS(SectionScheme::by_name("bogus"), ConfigError);
}

TEST_CASE("split round trip") {
    for (Split s : {Split::Train, Split::Validation, Split::Test})
        CHECK(split_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(split_from_string("dev"), ParseError);
}

TEST_CASE("validate_record accepts a well formed record") {
    CHECK_NOTHROW(validate_record(small_record(), SectionScheme::synthetic4()));
}

TEST_CASE("validate_record rejects dangling evidence") {
    AnnotatedRecord rec = small_record();
    rec.note.sentences[0].evidence = {99};
    CHECK_THROWS_AS(validate_record(rec, SectionScheme::synthetic4()), ValidationError);
}

TEST_CASE("validate_record rejects non contiguous utterance indices") {
    AnnotatedRecord rec = small_record();
    rec.conversation.utterances[2].index = 7;
    CHECK_THROWS_AS(validate_record(rec, SectionScheme::synthetic4()), ValidationError);
}

TEST_CASE("validate_record rejects out of order sections") {
    AnnotatedRecord rec = small_record();
    NoteSentence plan;
    plan.section_id = "plan";
    plan.tokens = {"rest", "."};
    plan.evidence = {0};
    NoteSentence symptoms = rec.note.sentences[0];
    rec.note.sentences = {plan, symptoms};
    CHECK_THROWS_AS(validate_record(rec, SectionScheme::synthetic4()), ValidationError);
}

TEST_CASE("validate_record rejects unsorted evidence") {
    AnnotatedRecord rec = small_record();
    rec.note.sentences[0].evidence = {2, 1};
    CHECK_THROWS_AS(validate_record(rec, SectionScheme::synthetic4()), ValidationError);
}
