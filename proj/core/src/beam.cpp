#include "convnote/beam.hpp"

#include <algorithm>
#include <cmath>

#include "convnote/error.hpp"

namespace convnote {

LengthBounds length_bounds_from_targets(const std::vector<int>& target_lengths) {
    if (target_lengths.empty())
        throw ValidationError("cannot derive length bounds from no targets");
    std::vector<int> sorted = target_lengths;
    std::sort(sorted.begin(), sorted.end());
    auto nearest_rank = [&](double percentile) {
        double n = static_cast<double>(sorted.size());
        auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
        rank = std::min(std::max<std::size_t>(rank, 1), sorted.size());
        return sorted[rank - 1];
    };
    return LengthBounds{nearest_rank(5.0), nearest_rank(95.0)};
}

namespace {

struct Hyp {
    std::vector<int> emitted;  // extended ids, end token excluded
    double logprob = 0.0;
    DecoderState state;
    int prev = Vocabulary::kBos;
    int headers_done = 0;
};

struct Candidate {
    double score = 0.0;
    int parent = 0;
    int token = 0;
};

double log_floor(double p) { return std::log(std::max(p, 1e-300)); }

}  // namespace

std::vector<std::string> beam_search(const Seq2SeqModel& model,
                                     const std::vector<std::string>& input_tokens,
                                     const std::optional<std::string>& section_id,
                                     const BeamOptions& options) {
    EncodedInput encoded = encode_input(model, input_tokens, section_id);
    const Vocabulary& vocab = model.vocab;
    const int n_headers = options.note_constraints ? vocab.scheme.size() : 0;
    const std::vector<int> headers = vocab.header_ids();
    const int ext_size = encoded.ext.ext_size(vocab);

    std::vector<Hyp> live{Hyp{{}, 0.0, initial_state(encoded), Vocabulary::kBos, 0}};
    std::vector<Hyp> finished;
    const int hard_cap = options.bounds.max_tokens + n_headers + 2;

    for (int round = 0; round < hard_cap && !live.empty(); ++round) {
        std::vector<Candidate> pool;
        std::vector<StepResult> steps(live.size());
        for (std::size_t p = 0; p < live.size(); ++p) {
            steps[p] = decode_step(model, encoded, live[p].state, live[p].prev);
            const Eigen::VectorXd& dist = steps[p].dist;
            const Hyp& hyp = live[p];
            int len = static_cast<int>(hyp.emitted.size());
            int remaining = n_headers - hyp.headers_done;
            int budget = options.bounds.max_tokens - len;
            auto push = [&](int token) {
                pool.push_back({hyp.logprob + log_floor(dist(token)),
                                static_cast<int>(p), token});
            };
            if (remaining > 0) {
                // Headers still owed: wrong headers and premature end tokens
                // collapse onto the expected header, so it is the only
                // header-or-end candidate; the budget check flushes the owed
                // headers while they still fit.
                int next_header = headers[hyp.headers_done];
                if (len == 0 || budget <= remaining) {
                    push(next_header);
                    continue;
                }
                for (int id = 0; id < ext_size; ++id) {
                    if (id == Vocabulary::kPad || id == Vocabulary::kBos ||
                        id == Vocabulary::kEos)
                        continue;
                    if (vocab.is_header(id) && id != next_header) continue;
                    push(id);
                }
            } else {
                if (budget <= 0) {
                    push(Vocabulary::kEos);
                    continue;
                }
                for (int id = 0; id < ext_size; ++id) {
                    if (id == Vocabulary::kPad || id == Vocabulary::kBos) continue;
                    if (id == Vocabulary::kEos && len < options.bounds.min_tokens) continue;
                    if (n_headers > 0 && vocab.is_header(id)) continue;
                    push(id);
                }
            }
        }

        std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.parent != b.parent) return a.parent < b.parent;
            return a.token < b.token;
        });

        std::vector<Hyp> next;
        for (const Candidate& c : pool) {
            if (static_cast<int>(next.size()) >= options.beam_size) break;
            const Hyp& parent = live[static_cast<std::size_t>(c.parent)];
            if (c.token == Vocabulary::kEos) {
                Hyp done = parent;
                done.logprob = c.score;
                finished.push_back(std::move(done));
                continue;
            }
            Hyp h;
            h.emitted = parent.emitted;
            h.emitted.push_back(c.token);
            h.logprob = c.score;
            h.state = steps[static_cast<std::size_t>(c.parent)].state;
            h.prev = c.token;
            h.headers_done = parent.headers_done + (vocab.is_header(c.token) ? 1 : 0);
            next.push_back(std::move(h));
        }
        live = std::move(next);
        if (static_cast<int>(finished.size()) >= options.beam_size) break;
    }

    if (finished.empty() && !live.empty()) {
        // Only reachable if the hard cap fires first; keep the best survivor.
        finished.push_back(live.front());
    }

    const Hyp* best = nullptr;
    double best_score = 0.0;
    for (const Hyp& h : finished) {
        double normalized = h.logprob / static_cast<double>(h.emitted.size() + 1);
        if (!best || normalized > best_score) {
            best = &h;
            best_score = normalized;
        }
    }

    std::vector<std::string> out;
    out.reserve(best->emitted.size());
    for (int id : best->emitted) out.push_back(ext_token(vocab, encoded.ext, id));
    return out;
}

}  // namespace convnote
