#include "convnote/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "convnote/error.hpp"
#include "convnote/tokenize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

// One letter per Refined Soundex consonant class, so distinct consonant
// choices always yield distinct code digits.
constexpr char kClassLetters[8] = {'b', 'f', 'c', 'g', 'd', 'l', 'm', 'r'};
constexpr char kVowels[5] = {'a', 'e', 'i', 'o', 'u'};

// Pool words use four consonant slots with an xor parity constraint, so any
// two distinct words differ in at least two consonant classes. Together with
// a category-specific suffix this keeps every pool member at phonetic
// distance >= 2 from every other content word.
std::string pool_word(int t, const char* suffix) {
    int i1 = (t >> 6) & 7, i2 = (t >> 3) & 7, i3 = t & 7;
    int i4 = i1 ^ i2 ^ i3;
    std::string w;
    w += kClassLetters[i1];
    w += kVowels[(i1 + 2 * i2 + i3) % 5];
    w += kClassLetters[i2];
    w += kVowels[(i2 + 3 * i3) % 5];
    w += kClassLetters[i3];
    w += kVowels[(i1 + i2 + i3) % 5];
    w += kClassLetters[i4];
    w += suffix;
    return w;
}

std::vector<std::string> make_pool(int first, int count, const char* suffix) {
    std::vector<std::string> pool;
    pool.reserve(count);
    for (int t = first; t < first + count && t < 512; ++t) pool.push_back(pool_word(t, suffix));
    return pool;
}

const char* kDurations[] = {"two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};
const char* kSeverities[] = {"mild", "moderate", "severe"};
const char* kResultAdjs[] = {"normal", "stable", "clear", "improved", "slightly elevated"};
const char* kDoses[] = {"five", "ten", "twenty", "forty", "eighty"};
const char* kFreqs[] = {"daily", "twice daily", "every morning", "at night", "with meals"};
const char* kPlanActions[] = {
    "rest at home for a while", "drink more water",        "use a warm pack at night",
    "walk a little each day",   "keep a daily log",        "come back for a follow up",
    "avoid heavy lifting",      "get more sleep",
};

const char* kDrFillers[] = {
    "i see .",         "alright .",           "go on .",
    "right .",         "let me note that down .", "understood .",
    "one moment please .", "let me check your chart .",
};
const char* kPtFillersSafe[] = {
    "hmm let me think .", "sure .", "yes doctor .", "um , well .", "of course .",
};
// "that is good to hear ." doubles as result-acknowledgement evidence, so it
// is kept out of the slot right after an evidence utterance and only appears
// as filler deeper inside a filler run or in the greeting block.
const char* kPtAmbiguousAck = "that is good to hear .";

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const T (&arr)[N]) {
    std::uniform_int_distribution<std::size_t> d(0, N - 1);
    return arr[d(rng)];
}

const std::string& pick(std::mt19937_64& rng, const std::vector<std::string>& v) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng)];
}

bool chance(std::mt19937_64& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

int weighted(std::mt19937_64& rng, std::initializer_list<double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    double x = std::uniform_real_distribution<double>(0.0, total)(rng);
    int i = 0;
    for (double w : weights) {
        if (x < w) return i;
        x -= w;
        ++i;
    }
    return static_cast<int>(weights.size()) - 1;
}

struct RecordBuilder {
    std::mt19937_64& rng;
    AnnotatedRecord rec;
    std::string last_speaker;
    std::map<std::string, int> last_evidence;
    int fillers_since_evidence = 99;

    explicit RecordBuilder(std::mt19937_64& r) : rng(r) {}

    int append(const std::string& speaker, const std::string& text) {
        Utterance u;
        u.index = static_cast<int>(rec.conversation.utterances.size());
        u.speaker = speaker;
        u.text = text;
        u.tokens = tokenize(text);
        rec.conversation.utterances.push_back(std::move(u));
        last_speaker = speaker;
        return rec.conversation.utterances.size() - 1;
    }

    std::string other(const std::string& speaker) const { return speaker == "DR" ? "PT" : "DR"; }

    void append_filler() {
        std::string speaker = last_speaker.empty() ? "DR" : other(last_speaker);
        if (speaker == "DR") {
            append("DR", pick(rng, kDrFillers));
        } else if (fillers_since_evidence >= 1 && chance(rng, 0.2)) {
            append("PT", kPtAmbiguousAck);
        } else {
            append("PT", pick(rng, kPtFillersSafe));
        }
        ++fillers_since_evidence;
    }

    // Inserts fillers so the fact's first evidence utterance lands at least
    // `spacing` utterances after this section's previous evidence, and so the
    // fact's first speaker alternates with the last appended utterance.
    void prepare(const std::string& section, int lead, int spacing,
                 const std::string& first_speaker) {
        auto it = last_evidence.find(section);
        if (it != last_evidence.end()) {
            while (static_cast<int>(rec.conversation.utterances.size()) + lead - it->second - 1 <
                   spacing)
                append_filler();
        }
        if (!last_speaker.empty() && last_speaker == first_speaker) append_filler();
    }

    int evidence(const std::string& section, const std::string& speaker, const std::string& text) {
        int idx = append(speaker, text);
        last_evidence[section] = idx;
        fillers_since_evidence = 0;
        return idx;
    }

    void sentence(const std::string& section, const std::string& text, std::vector<int> ev) {
        NoteSentence s;
        s.section_id = section;
        s.tokens = tokenize(text);
        s.evidence = std::move(ev);
        rec.note.sentences.push_back(std::move(s));
    }
};

struct Pools {
    std::vector<std::string> symptoms, meds, tests;
    std::vector<std::string> rare_symptoms, rare_meds, rare_tests;
};

struct NoteDraft {
    std::vector<NoteSentence> by_section[4];
};

class Generator {
  public:
    Generator(const SyntheticConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), rng_(seed), scheme_(SectionScheme::by_name(cfg.scheme)) {
        int n_sym = std::max(8, cfg.vocab_size * 6 / 100);
        int n_med = std::max(8, cfg.vocab_size * 8 / 100);
        int n_test = std::max(6, cfg.vocab_size * 4 / 100);
        pools_.symptoms = synthetic_symptom_pool(n_sym);
        pools_.meds = synthetic_medication_pool(n_med);
        pools_.tests = synthetic_test_pool(n_test);
        pools_.rare_symptoms = make_pool(n_sym, 512 - n_sym, "");
        pools_.rare_meds = make_pool(n_med, 512 - n_med, "ol");
        pools_.rare_tests = make_pool(n_test, 512 - n_test, "ina");
    }

    std::vector<AnnotatedRecord> run() {
        int n_val = static_cast<int>(std::lround(cfg_.n_records * cfg_.val_fraction));
        int n_test = static_cast<int>(std::lround(cfg_.n_records * cfg_.test_fraction));
        int n_train = cfg_.n_records - n_val - n_test;
        if (n_train <= 0) throw ConfigError("n_records too small for the requested splits");
        std::vector<AnnotatedRecord> records;
        records.reserve(cfg_.n_records);
        for (int i = 0; i < cfg_.n_records; ++i) {
            Split split = i < n_train           ? Split::Train
                          : i < n_train + n_val ? Split::Validation
                                                : Split::Test;
            records.push_back(make_record(i, split));
        }
        return records;
    }

  private:
    const SyntheticConfig& cfg_;
    std::mt19937_64 rng_;
    SectionScheme scheme_;
    Pools pools_;

    const std::string& draw_slot(const std::vector<std::string>& common,
                                 const std::vector<std::string>& rare) {
        if (!rare.empty() && chance(rng_, cfg_.rare_token_rate)) return pick(rng_, rare);
        return pick(rng_, common);
    }

    // Gap between consecutive evidence utterances inside one fact. Zero with
    // probability `contiguity`; otherwise a small gap the tau heuristic still
    // bridges, except for rare wide breaks. Parity of the nonzero gap is
    // dictated by whether the two evidence utterances share a speaker.
    int draw_gap(bool same_speaker) {
        if (chance(rng_, cfg_.contiguity)) return 0;
        bool wide = chance(rng_, cfg_.cluster_break_rate);
        if (same_speaker) return wide ? 3 : 1;
        return wide ? 4 : 2;
    }

    int spacing_draw() {
        switch (weighted(rng_, {0.15, 0.5, 0.35})) {
            case 0: return 3;
            case 1: return 4;
            default: return 5;
        }
    }

    void gap_fillers(RecordBuilder& b, int gap) {
        for (int i = 0; i < gap; ++i) b.append_filler();
    }

    void symptom_fact(RecordBuilder& b, NoteDraft& draft, bool first) {
        const std::string& s = draw_slot(pools_.symptoms, pools_.rare_symptoms);
        const std::string& d = pick(rng_, kDurations);
        int k = 1 + weighted(rng_, {0.55, 0.30, 0.15});
        if (k == 1) {
            b.prepare("symptoms", 1, spacing_draw(), "DR");
            b.append("DR", first ? "so what brings you in today ?"
                                 : "is there anything else bothering you ?");
            int e0 = b.evidence("symptoms", "PT",
                                "i have been having " + s + " for " + d + " days .");
            push(draft, "symptoms", "patient reports " + s + " for " + d + " days .", {e0});
        } else if (k == 2) {
            int gap = draw_gap(true);
            if (gap == 0) {
                b.prepare("symptoms", 0, spacing_draw(), "DR");
                int e0 = b.evidence("symptoms", "DR", "how long have you had the " + s + " ?");
                int e1 = b.evidence("symptoms", "PT", "about " + d + " days now .");
                push(draft, "symptoms", "patient reports " + s + " for " + d + " days .",
                     {e0, e1});
            } else {
                b.prepare("symptoms", 0, spacing_draw(), "PT");
                int e0 = b.evidence("symptoms", "PT", "i have been having " + s + " lately .");
                gap_fillers(b, gap);
                int e1 = b.evidence("symptoms", "PT", "it started about " + d + " days ago .");
                push(draft, "symptoms", "patient reports " + s + " for " + d + " days .",
                     {e0, e1});
            }
        } else {
            const std::string& v = pick(rng_, kSeverities);
            int gap = draw_gap(false);
            b.prepare("symptoms", 0, spacing_draw(), "PT");
            int e0 = b.evidence("symptoms", "PT", "i am here about some " + s + " .");
            int e1 = b.evidence("symptoms", "DR", "is the " + s + " mild or severe ?");
            gap_fillers(b, gap);
            int e2 = b.evidence("symptoms", "PT",
                                "it is " + v + " and started " + d + " days ago .");
            push(draft, "symptoms",
                 "patient reports " + v + " " + s + " for " + d + " days .", {e0, e1, e2});
        }
    }

    void result_fact(RecordBuilder& b, NoteDraft& draft) {
        const std::string& t = draw_slot(pools_.tests, pools_.rare_tests);
        const std::string& a = pick(rng_, kResultAdjs);
        std::string stmt = chance(rng_, 0.5)
                               ? "your " + t + " results came back " + a + " ."
                               : "the " + t + " panel looks " + a + " overall .";
        if (chance(rng_, cfg_.ack_evidence_rate)) {
            int gap = draw_gap(false);
            if (gap >= 3) gap = 2;
            b.prepare("results", 0, spacing_draw(), "DR");
            int e0 = b.evidence("results", "DR", stmt);
            gap_fillers(b, gap);
            int e1 = b.evidence("results", "PT", kPtAmbiguousAck);
            push(draft, "results", t + " was " + a + " and was discussed .", {e0, e1});
        } else {
            b.prepare("results", 0, spacing_draw(), "DR");
            int e0 = b.evidence("results", "DR", stmt);
            push(draft, "results", t + " was " + a + " .", {e0});
        }
    }

    void medication_fact(RecordBuilder& b, NoteDraft& draft) {
        const std::string& m = draw_slot(pools_.meds, pools_.rare_meds);
        const std::string& d = pick(rng_, kDoses);
        const std::string& f = pick(rng_, kFreqs);
        std::string stmt = chance(rng_, 0.5)
                               ? "i am going to start you on " + m + " " + d + " milligrams " +
                                     f + " ."
                               : "i will put you on " + m + " " + d + " milligrams " + f + " .";
        b.prepare("medications", 0, spacing_draw(), "DR");
        int e0 = b.evidence("medications", "DR", stmt);
        b.append("PT", "okay sounds good .");
        push(draft, "medications", "start " + m + " " + d + " milligrams " + f + " .", {e0});
        if (chance(rng_, cfg_.shared_fact_rate)) {
            push(draft, "plan", "continue " + m + " as directed .", {e0});
            b.last_evidence["plan"] = e0;
        }
    }

    void plan_fact(RecordBuilder& b, NoteDraft& draft) {
        const std::string& p = pick(rng_, kPlanActions);
        std::string stmt =
            chance(rng_, 0.5) ? "i want you to " + p + " ." : "please try to " + p + " .";
        b.prepare("plan", 0, spacing_draw(), "DR");
        int e0 = b.evidence("plan", "DR", stmt);
        b.append("PT", chance(rng_, 0.5) ? "will do ." : "alright i can do that .");
        push(draft, "plan", "patient to " + p + " .", {e0});
    }

    void push(NoteDraft& draft, const std::string& section, const std::string& text,
              std::vector<int> ev) {
        NoteSentence s;
        s.section_id = section;
        s.tokens = tokenize(text);
        s.evidence = std::move(ev);
        draft.by_section[scheme_.index_of(section)].push_back(std::move(s));
    }

    AnnotatedRecord make_record(int index, Split split) {
        RecordBuilder b(rng_);
        NoteDraft draft;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%05d", index);
        b.rec.conversation.id = idbuf;
        b.rec.split = split;

        b.append("DR", "good morning , how are you feeling today ?");
        b.append("PT", "good morning doctor , i am doing okay .");
        if (chance(rng_, 0.3)) {
            b.append("DR", "i reviewed your file before you came in .");
            b.append("PT", kPtAmbiguousAck);
        }

        int n_sym = 1 + weighted(rng_, {0.30, 0.45, 0.25});
        for (int i = 0; i < n_sym; ++i) symptom_fact(b, draft, i == 0);

        if (!chance(rng_, cfg_.empty_section_rate)) {
            int n_res = 1 + weighted(rng_, {0.70, 0.30});
            for (int i = 0; i < n_res; ++i) result_fact(b, draft);
        }

        if (!chance(rng_, cfg_.empty_section_rate)) {
            int n_med = 1 + weighted(rng_, {0.40, 0.40, 0.20});
            for (int i = 0; i < n_med; ++i) medication_fact(b, draft);
        }

        int n_plan = weighted(rng_, {0.25, 0.45, 0.30});
        for (int i = 0; i < n_plan; ++i) plan_fact(b, draft);

        int target = static_cast<int>(
            std::lround(std::normal_distribution<double>(cfg_.mean_utterances, 2.5)(rng_)));
        int pad = target - 2 - b.rec.conversation.utterances.size();
        for (int i = 0; i < pad && i < 40; ++i) b.append_filler();

        if (b.last_speaker == "DR") b.append_filler();
        b.append("DR", "take care and call us if anything changes .");
        b.append("PT", "thank you doctor , see you soon .");

        for (int s = 0; s < 4 && s < static_cast<int>(scheme_.sections.size()); ++s)
            for (NoteSentence& ns : draft.by_section[s])
                b.rec.note.sentences.push_back(std::move(ns));

        validate_record(b.rec, scheme_);
        return b.rec;
    }
};

void parse_one(SyntheticConfig& cfg, const std::string& key, const std::string& value) {
    auto as_int = [&](int& slot) {
        try {
            slot = std::stoi(value);
        } catch (const std::exception&) {
            throw ConfigError("bad integer for key '" + key + "': " + value);
        }
    };
    auto as_double = [&](double& slot) {
        try {
            slot = std::stod(value);
        } catch (const std::exception&) {
            throw ConfigError("bad number for key '" + key + "': " + value);
        }
    };
    if (key == "n_records") as_int(cfg.n_records);
    else if (key == "val_fraction") as_double(cfg.val_fraction);
    else if (key == "test_fraction") as_double(cfg.test_fraction);
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "mean_utterances") as_double(cfg.mean_utterances);
    else if (key == "vocab_size") as_int(cfg.vocab_size);
    else if (key == "contiguity") as_double(cfg.contiguity);
    else if (key == "cluster_break_rate") as_double(cfg.cluster_break_rate);
    else if (key == "rare_token_rate") as_double(cfg.rare_token_rate);
    else if (key == "shared_fact_rate") as_double(cfg.shared_fact_rate);
    else if (key == "ack_evidence_rate") as_double(cfg.ack_evidence_rate);
    else if (key == "empty_section_rate") as_double(cfg.empty_section_rate);
    else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

SyntheticConfig parse_synthetic_config(const std::string& text) {
    SyntheticConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::size_t last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            std::size_t a = s.find_first_not_of(" \t");
            std::size_t z = s.find_last_not_of(" \t");
            s = a == std::string::npos ? "" : s.substr(a, z - a + 1);
        };
        trim(key);
        trim(value);
        parse_one(cfg, key, value);
    }
    validate_config(cfg);
    return cfg;
}

SyntheticConfig load_synthetic_config(const std::string& path) {
    return parse_synthetic_config(read_file(path));
}

void validate_config(const SyntheticConfig& cfg) {
    auto in01 = [](const char* name, double v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError(std::string(name) + " must be in [0,1]");
    };
    if (cfg.n_records <= 0) throw ConfigError("n_records must be positive");
    if (cfg.vocab_size < 100) throw ConfigError("vocab_size must be at least 100");
    if (cfg.mean_utterances < 8) throw ConfigError("mean_utterances must be at least 8");
    in01("val_fraction", cfg.val_fraction);
    in01("test_fraction", cfg.test_fraction);
    if (cfg.val_fraction + cfg.test_fraction >= 1.0)
        throw ConfigError("val_fraction + test_fraction must be below 1");
    in01("contiguity", cfg.contiguity);
    in01("cluster_break_rate", cfg.cluster_break_rate);
    in01("rare_token_rate", cfg.rare_token_rate);
    in01("shared_fact_rate", cfg.shared_fact_rate);
    in01("ack_evidence_rate", cfg.ack_evidence_rate);
    in01("empty_section_rate", cfg.empty_section_rate);
    SectionScheme::by_name(cfg.scheme);
}

std::vector<AnnotatedRecord> generate_synthetic(const SyntheticConfig& config,
                                                std::uint64_t seed) {
    validate_config(config);
    Generator gen(config, seed);
    return gen.run();
}

std::vector<std::string> synthetic_symptom_pool(int count) { return make_pool(0, count, ""); }
std::vector<std::string> synthetic_medication_pool(int count) { return make_pool(0, count, "ol"); }
std::vector<std::string> synthetic_test_pool(int count) { return make_pool(0, count, "ina"); }

}  // namespace convnote
