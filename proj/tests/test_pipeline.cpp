#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "convnote/error.hpp"
#include "convnote/pipeline.hpp"
#include "convnote/rouge.hpp"
#include "convnote/tokenize.hpp"

using namespace convnote;

namespace {

AnnotatedRecord fixture_record() {
    AnnotatedRecord rec;
    rec.conversation.id = "rec1";
    rec.split = Split::Train;
    auto add = [&](const std::string& speaker, const std::string& text) {
        Utterance u;
        u.index = rec.conversation.size();
        u.speaker = speaker;
        u.text = text;
        u.tokens = tokenize(text);
        rec.conversation.utterances.push_back(std::move(u));
    };
    add("DR", "any fever lately");
    add("PT", "yes fever and chills");
    add("DR", "okay");
    add("PT", "my knee aches");
    add("DR", "i see");
    add("DR", "please rest and hydrate");
    auto sentence = [&](const std::string& section, const std::string& text,
                        std::vector<int> evidence) {
        NoteSentence s;
        s.section_id = section;
        s.tokens = tokenize(text);
        s.evidence = std::move(evidence);
        rec.note.sentences.push_back(std::move(s));
    };
    sentence("symptoms", "fever and chills", {0, 1});
    sentence("symptoms", "knee pain", {3});
    sentence("plan", "rest and fluids", {5});
    return rec;
}

AnnotatedRecord bare_record(const std::string& id) {
    AnnotatedRecord rec;
    rec.conversation.id = id;
    Utterance u;
    u.index = 0;
    u.speaker = "DR";
    u.text = "hello there";
    u.tokens = tokenize(u.text);
    rec.conversation.utterances.push_back(std::move(u));
    return rec;
}

Seq2SeqConfig small_config() {
    Seq2SeqConfig c;
    c.embed_dim = 12;
    c.encoder_dim = 12;
    c.decoder_dim = 24;
    c.attention_dim = 12;
    c.readout_dim = 16;
    return c;
}

Seq2SeqAbstractor trained_on(PipelineMethod method, const AnnotatedRecord& record,
                             int epochs, std::uint64_t seed) {
    auto scheme = SectionScheme::synthetic4();
    auto pairs = abstractor_training_pairs(method, {record}, scheme, 4096);
    AbstractorHyperparams hp;
    hp.learning_rate = 0.01;
    hp.max_epochs = epochs;
    hp.batch_size = static_cast<int>(pairs.size());
    Seq2SeqAbstractor abstractor;
    abstractor.model = train_abstractor(small_config(), scheme, pairs, {}, hp, seed);
    std::vector<int> lengths;
    for (const auto& p : pairs) lengths.push_back(static_cast<int>(p.target_tokens.size()));
    abstractor.bounds = length_bounds_from_targets(lengths);
    abstractor.unit = decode_unit_for(method);
    return abstractor;
}

}  // namespace

TEST_CASE("pipeline method names round trip") {
    for (auto method : {PipelineMethod::Conv2Note, PipelineMethod::Ext2Note,
                        PipelineMethod::Ext2Sec, PipelineMethod::Cluster2Sent,
                        PipelineMethod::RandomNote, PipelineMethod::OracleExt,
                        PipelineMethod::AllExt2Sec, PipelineMethod::Ext2SecNoCond})
        CHECK(pipeline_method_from_string(to_string(method)) == method);
    CHECK_THROWS_AS(pipeline_method_from_string("pipeline9"), ConfigError);
}

TEST_CASE("each method maps to its decoding unit") {
    CHECK(decode_unit_for(PipelineMethod::Conv2Note) == DecodeUnit::Note);
    CHECK(decode_unit_for(PipelineMethod::Ext2Note) == DecodeUnit::Note);
    CHECK(decode_unit_for(PipelineMethod::Ext2Sec) == DecodeUnit::Section);
    CHECK(decode_unit_for(PipelineMethod::Ext2SecNoCond) == DecodeUnit::Section);
    CHECK(decode_unit_for(PipelineMethod::AllExt2Sec) == DecodeUnit::Section);
    CHECK(decode_unit_for(PipelineMethod::Cluster2Sent) == DecodeUnit::Sentence);
    CHECK_THROWS_AS(decode_unit_for(PipelineMethod::RandomNote), ConfigError);
    CHECK_THROWS_AS(decode_unit_for(PipelineMethod::OracleExt), ConfigError);
}

TEST_CASE("index helpers cap and canonicalize") {
    auto rec = fixture_record();
    CHECK(all_indices(rec.conversation, 4096) == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(all_indices(rec.conversation, 3) == std::vector<int>{0, 1, 2});
    CHECK(capped_indices({5, 1, 3, 1}, 4096) == std::vector<int>{1, 3, 5});
    CHECK(capped_indices({5, 1, 3}, 4) == std::vector<int>{1, 3});
    CHECK(capped_indices({}, 4096).empty());
}

TEST_CASE("tagged tokens keep transcript order and speaker tags") {
    auto rec = fixture_record();
    CHECK(tagged_tokens(rec.conversation, {0, 2}) ==
          std::vector<std::string>{"<spk_dr>", "any", "fever", "lately", "<spk_dr>",
                                   "okay"});
    CHECK(tagged_tokens(rec.conversation, {3}) ==
          std::vector<std::string>{"<spk_pt>", "my", "knee", "aches"});
    CHECK_THROWS_AS(tagged_tokens(rec.conversation, {6}), ValidationError);
    CHECK_THROWS_AS(tagged_tokens(rec.conversation, {-1}), ValidationError);
}

TEST_CASE("note linearization writes adjacent headers for empty sections") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto tokens = linearize_note(rec.note, scheme);
    CHECK(tokens == std::vector<std::string>{"<symptoms>", "fever", "and", "chills",
                                             "knee", "pain", "<medications>",
                                             "<results>", "<plan>", "rest", "and",
                                             "fluids"});

    Note parsed = note_from_tokens(tokens, scheme);
    REQUIRE(parsed.sentences.size() == 2);
    CHECK(parsed.sentences[0].section_id == "symptoms");
    CHECK(parsed.sentences[0].tokens ==
          std::vector<std::string>{"fever", "and", "chills", "knee", "pain"});
    CHECK(parsed.sentences[1].section_id == "plan");
    CHECK(parsed.sentences[1].tokens == std::vector<std::string>{"rest", "and", "fluids"});
}

TEST_CASE("note parsing rejects malformed header streams") {
    auto scheme = SectionScheme::synthetic4();
    CHECK_THROWS_AS(note_from_tokens({"fever", "<symptoms>", "<medications>",
                                      "<results>", "<plan>"},
                                     scheme),
                    ParseError);
    CHECK_THROWS_AS(note_from_tokens({"<symptoms>", "<results>", "<medications>",
                                      "<plan>"},
                                     scheme),
                    ParseError);
    CHECK_THROWS_AS(note_from_tokens({"<symptoms>", "<medications>", "<results>"},
                                     scheme),
                    ParseError);
    CHECK_THROWS_AS(note_from_tokens({"<symptoms>", "<symptoms>", "<medications>",
                                      "<results>", "<plan>"},
                                     scheme),
                    ParseError);
    CHECK(note_from_tokens({"<symptoms>", "<medications>", "<results>", "<plan>"},
                           scheme)
              .sentences.empty());
}

TEST_CASE("oracle selections take sorted evidence unions") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto per_section = oracle_section_selection(rec, scheme);
    REQUIRE(per_section.size() == 4);
    CHECK(per_section[0] == std::vector<int>{0, 1, 3});
    CHECK(per_section[1].empty());
    CHECK(per_section[2].empty());
    CHECK(per_section[3] == std::vector<int>{5});
    CHECK(oracle_union_selection(rec) == std::vector<int>{0, 1, 3, 5});
    CHECK(oracle_union_selection(bare_record("r")).empty());
}

TEST_CASE("training pairs follow each method's conditioning") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto linearized = linearize_note(rec.note, scheme);

    auto conv = abstractor_training_pairs(PipelineMethod::Conv2Note, {rec}, scheme, 4096);
    REQUIRE(conv.size() == 1);
    CHECK(conv[0].input_tokens == tagged_tokens(rec.conversation, {0, 1, 2, 3, 4, 5}));
    CHECK(!conv[0].section_id.has_value());
    CHECK(conv[0].target_tokens == linearized);

    auto e2n = abstractor_training_pairs(PipelineMethod::Ext2Note, {rec}, scheme, 4096);
    REQUIRE(e2n.size() == 1);
    CHECK(e2n[0].input_tokens == tagged_tokens(rec.conversation, {0, 1, 3, 5}));
    CHECK(e2n[0].target_tokens == linearized);

    auto e2s = abstractor_training_pairs(PipelineMethod::Ext2Sec, {rec}, scheme, 4096);
    REQUIRE(e2s.size() == 2);
    CHECK(e2s[0].input_tokens == tagged_tokens(rec.conversation, {0, 1, 3}));
    CHECK(e2s[0].section_id == std::optional<std::string>("symptoms"));
    CHECK(e2s[0].target_tokens ==
          std::vector<std::string>{"fever", "and", "chills", "knee", "pain"});
    CHECK(e2s[1].section_id == std::optional<std::string>("plan"));
    CHECK(e2s[1].target_tokens == std::vector<std::string>{"rest", "and", "fluids"});

    auto nocond =
        abstractor_training_pairs(PipelineMethod::Ext2SecNoCond, {rec}, scheme, 4096);
    REQUIRE(nocond.size() == 2);
    CHECK(!nocond[0].section_id.has_value());
    CHECK(!nocond[1].section_id.has_value());
    CHECK(nocond[0].target_tokens == e2s[0].target_tokens);

    auto shared = abstractor_training_pairs(PipelineMethod::AllExt2Sec, {rec}, scheme, 4096);
    REQUIRE(shared.size() == 2);
    CHECK(shared[0].input_tokens == tagged_tokens(rec.conversation, {0, 1, 3, 5}));
    CHECK(shared[1].input_tokens == shared[0].input_tokens);
    CHECK(shared[0].section_id == std::optional<std::string>("symptoms"));
    CHECK(shared[1].section_id == std::optional<std::string>("plan"));

    auto c2s = abstractor_training_pairs(PipelineMethod::Cluster2Sent, {rec}, scheme, 4096);
    REQUIRE(c2s.size() == 3);
    CHECK(c2s[0].input_tokens == tagged_tokens(rec.conversation, {0, 1}));
    CHECK(c2s[0].target_tokens == std::vector<std::string>{"fever", "and", "chills"});
    CHECK(c2s[1].input_tokens == tagged_tokens(rec.conversation, {3}));
    CHECK(c2s[2].input_tokens == tagged_tokens(rec.conversation, {5}));
    CHECK(c2s[2].section_id == std::optional<std::string>("plan"));

    // records without evidence add nothing to evidence-driven methods
    auto bare = bare_record("r2");
    CHECK(abstractor_training_pairs(PipelineMethod::Ext2Note, {bare}, scheme, 4096)
              .empty());
    CHECK(abstractor_training_pairs(PipelineMethod::Cluster2Sent, {bare}, scheme, 4096)
              .empty());
    CHECK(abstractor_training_pairs(PipelineMethod::Conv2Note, {bare}, scheme, 4096)
              .size() == 1);

    CHECK_THROWS_AS(
        abstractor_training_pairs(PipelineMethod::RandomNote, {rec}, scheme, 4096),
        ConfigError);
}

TEST_CASE("random note baseline is a deterministic uniform draw") {
    auto rec = fixture_record();
    std::vector<AnnotatedRecord> pool{rec};
    auto target = bare_record("target");

    auto once = run_randomnote(target, pool, 7);
    auto again = run_randomnote(target, pool, 7);
    CHECK(once.record_id == "target");
    REQUIRE(once.note.sentences.size() == 3);
    for (std::size_t i = 0; i < once.note.sentences.size(); ++i) {
        CHECK(once.note.sentences[i].section_id == rec.note.sentences[i].section_id);
        CHECK(once.note.sentences[i].tokens == rec.note.sentences[i].tokens);
        CHECK(once.note.sentences[i].evidence.empty());
    }
    CHECK(once.note == again.note);

    CHECK_THROWS_AS(run_randomnote(target, {}, 7), ValidationError);
}

TEST_CASE("oracle extraction copies evidence utterances per section") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto note = run_oracleext(rec, scheme);
    CHECK(note.record_id == "rec1");
    REQUIRE(note.note.sentences.size() == 4);
    CHECK(note.note.sentences[0].section_id == "symptoms");
    CHECK(note.note.sentences[0].tokens ==
          std::vector<std::string>{"any", "fever", "lately"});
    CHECK(note.note.sentences[0].evidence == std::vector<int>{0});
    CHECK(note.note.sentences[1].tokens ==
          std::vector<std::string>{"yes", "fever", "and", "chills"});
    CHECK(note.note.sentences[2].tokens ==
          std::vector<std::string>{"my", "knee", "aches"});
    CHECK(note.note.sentences[3].section_id == "plan");
    CHECK(note.note.sentences[3].tokens ==
          std::vector<std::string>{"please", "rest", "and", "hydrate"});

    CHECK(run_oracleext(bare_record("r"), scheme).note.empty());
}

TEST_CASE("cluster to sentence pipeline regenerates a memorized record") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto abstractor = trained_on(PipelineMethod::Cluster2Sent, rec, 150, 5);

    auto gold_mode = run_cluster2sent_gold(rec, scheme, abstractor);
    REQUIRE(gold_mode.note.sentences.size() == 3);  // one sentence per gold cluster
    CHECK(gold_mode.note.sentences[0].tokens ==
          std::vector<std::string>{"fever", "and", "chills"});
    CHECK(gold_mode.note.sentences[0].evidence == std::vector<int>{0, 1});
    CHECK(gold_mode.note.sentences[1].tokens == std::vector<std::string>{"knee", "pain"});
    CHECK(gold_mode.note.sentences[2].section_id == "plan");
    CHECK(gold_mode.note.sentences[2].tokens ==
          std::vector<std::string>{"rest", "and", "fluids"});

    // heuristic clusters at tau 0 split the symptoms selection the gold way
    auto selection = oracle_section_selection(rec, scheme);
    auto tau0 = run_cluster2sent(rec, scheme, selection, 0, abstractor);
    REQUIRE(tau0.note.sentences.size() == 3);
    CHECK(tau0.note.sentences[0].evidence == std::vector<int>{0, 1});
    CHECK(tau0.note.sentences[1].evidence == std::vector<int>{3});
    CHECK(tau0.note == gold_mode.note);

    // tau 1 bridges the gap at index 2 and merges the symptoms clusters
    auto tau1 = run_cluster2sent(rec, scheme, selection, 1, abstractor);
    REQUIRE(tau1.note.sentences.size() == 2);
    CHECK(tau1.note.sentences[0].evidence == std::vector<int>{0, 1, 3});

    auto repeat = run_cluster2sent(rec, scheme, selection, 0, abstractor);
    CHECK(repeat.note == tau0.note);

    CHECK_THROWS_AS(run_cluster2sent(rec, scheme, {{0}}, 0, abstractor),
                    ValidationError);
}

TEST_CASE("conversation to note pipeline regenerates a memorized record") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto abstractor = trained_on(PipelineMethod::Conv2Note, rec, 200, 9);

    auto out = run_conv2note(rec, scheme, abstractor, 4096);
    CHECK(out.record_id == "rec1");
    CHECK(section_tokens(out.note, "symptoms") ==
          std::vector<std::string>{"fever", "and", "chills", "knee", "pain"});
    CHECK(section_tokens(out.note, "medications").empty());
    CHECK(section_tokens(out.note, "plan") ==
          std::vector<std::string>{"rest", "and", "fluids"});
    for (const auto& s : out.note.sentences)
        CHECK(s.evidence == std::vector<int>{0, 1, 2, 3, 4, 5});

    // the full selection makes ext2note see the conv2note input stream
    auto via_ext = run_ext2note(rec, scheme, all_indices(rec.conversation, 4096),
                                abstractor);
    CHECK(via_ext.note == out.note);

    // any constrained decode parses, seen input or not
    auto partial = run_ext2note(rec, scheme, oracle_union_selection(rec), abstractor);
    CHECK(partial.record_id == "rec1");
    for (const auto& s : partial.note.sentences)
        CHECK(s.evidence == std::vector<int>{0, 1, 3, 5});

    CHECK(run_ext2note(rec, scheme, {}, abstractor).note.empty());
}

TEST_CASE("section pipelines respect selections and conditioning flags") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto abstractor = trained_on(PipelineMethod::Ext2Sec, rec, 150, 11);

    auto selection = oracle_section_selection(rec, scheme);
    auto out = run_ext2sec(rec, scheme, selection, abstractor, true);
    REQUIRE(out.note.sentences.size() == 2);  // empty selections emit nothing
    CHECK(out.note.sentences[0].section_id == "symptoms");
    CHECK(out.note.sentences[0].tokens ==
          std::vector<std::string>{"fever", "and", "chills", "knee", "pain"});
    CHECK(out.note.sentences[0].evidence == std::vector<int>{0, 1, 3});
    CHECK(out.note.sentences[1].section_id == "plan");
    CHECK(out.note.sentences[1].tokens == std::vector<std::string>{"rest", "and", "fluids"});

    CHECK_THROWS_AS(run_ext2sec(rec, scheme, {{0}}, abstractor, true), ValidationError);

    auto shared = run_allext2sec(rec, scheme, oracle_union_selection(rec), abstractor);
    REQUIRE(shared.note.sentences.size() == 4);  // every section is decoded
    for (const auto& s : shared.note.sentences)
        CHECK(s.evidence == std::vector<int>{0, 1, 3, 5});
    CHECK(shared.note.sentences[0].section_id == "symptoms");
    CHECK(shared.note.sentences[3].section_id == "plan");
    CHECK(run_allext2sec(rec, scheme, {}, abstractor).note.empty());
}

TEST_CASE("pipeline validation names the missing pieces") {
    auto rec = fixture_record();
    std::vector<AnnotatedRecord> pool{rec};
    Seq2SeqAbstractor note_unit;
    note_unit.unit = DecodeUnit::Note;
    Seq2SeqAbstractor sentence_unit;
    sentence_unit.unit = DecodeUnit::Sentence;

    PipelineConfig config;
    PipelineModels models;

    config.method = PipelineMethod::Conv2Note;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);
    models.abstractor = &sentence_unit;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);  // unit mismatch
    models.abstractor = &note_unit;
    CHECK_NOTHROW(validate_pipeline(config, models));

    config.max_utterances = 0;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);
    config.max_utterances = 4096;
    config.tau = -1;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);
    config.tau = 2;

    config.method = PipelineMethod::Ext2Note;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);  // no extractor
    config.oracle_utterances = true;
    CHECK_NOTHROW(validate_pipeline(config, models));

    config.method = PipelineMethod::Cluster2Sent;
    config.oracle_clusters = true;
    models.abstractor = &sentence_unit;
    CHECK_NOTHROW(validate_pipeline(config, models));
    config.oracle_utterances = false;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);
    config.method = PipelineMethod::Ext2Sec;
    config.oracle_utterances = true;
    models.abstractor = nullptr;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);

    config = PipelineConfig{};
    models = PipelineModels{};
    config.method = PipelineMethod::RandomNote;
    CHECK_THROWS_AS(validate_pipeline(config, models), ConfigError);
    models.train_records = &pool;
    CHECK_NOTHROW(validate_pipeline(config, models));

    config.method = PipelineMethod::OracleExt;
    CHECK_NOTHROW(validate_pipeline(config, PipelineModels{}));
}

TEST_CASE("the unified driver dispatches to the baselines") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    std::vector<AnnotatedRecord> pool{rec};

    PipelineConfig config;
    config.method = PipelineMethod::OracleExt;
    PipelineModels models;
    auto oracle = run_pipeline(config, models, scheme, rec);
    CHECK(oracle.note == run_oracleext(rec, scheme).note);

    config.method = PipelineMethod::RandomNote;
    config.seed = 21;
    models.train_records = &pool;
    auto random_note = run_pipeline(config, models, scheme, rec);
    CHECK(random_note.note == run_randomnote(rec, pool, 21).note);
}

TEST_CASE("generated notes round trip through jsonl") {
    auto rec = fixture_record();
    auto scheme = SectionScheme::synthetic4();
    auto generated = run_oracleext(rec, scheme);

    std::string path = "/tmp/convnote_pipeline_generated.jsonl";
    save_generated({generated}, path);
    auto loaded = load_generated(path, scheme);
    std::remove(path.c_str());

    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].record_id == generated.record_id);
    CHECK(loaded[0].note == generated.note);

    CHECK_THROWS_AS(load_generated("/tmp/convnote_pipeline_missing.jsonl", scheme),
                    ParseError);
}
