#include "convnote/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "convnote/error.hpp"
#include "convnote/serialize.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

constexpr char kModelMagic[4] = {'C', 'N', 'S', '2'};
constexpr std::uint32_t kModelVersion = 1;
constexpr double kLogFloor = 1e-12;

void collect(std::vector<Eigen::MatrixXd*>& out, GruParams& g) {
    out.insert(out.end(), {&g.wz, &g.uz, &g.bz, &g.wr, &g.ur, &g.br, &g.wn, &g.un, &g.bn});
}

}  // namespace

std::vector<Eigen::MatrixXd*> Seq2SeqModel::parameters() {
    std::vector<Eigen::MatrixXd*> out;
    out.push_back(&embedding);
    collect(out, enc_fwd);
    collect(out, enc_bwd);
    collect(out, dec);
    out.insert(out.end(), {&w_init, &b_init, &attn_w, &attn_u, &attn_b, &attn_v, &w_out1,
                           &b_out1, &w_out2, &b_out2, &w_pgen, &b_pgen});
    return out;
}

std::vector<const Eigen::MatrixXd*> Seq2SeqModel::parameters() const {
    auto mutable_list = const_cast<Seq2SeqModel*>(this)->parameters();
    return std::vector<const Eigen::MatrixXd*>(mutable_list.begin(), mutable_list.end());
}

namespace {

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-r, r);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

GruParams init_gru(int hidden, int input, std::mt19937_64& rng) {
    GruParams g;
    g.wz = glorot(hidden, input, rng);
    g.uz = glorot(hidden, hidden, rng);
    g.bz = Eigen::MatrixXd::Zero(hidden, 1);
    g.wr = glorot(hidden, input, rng);
    g.ur = glorot(hidden, hidden, rng);
    g.br = Eigen::MatrixXd::Zero(hidden, 1);
    g.wn = glorot(hidden, input, rng);
    g.un = glorot(hidden, hidden, rng);
    g.bn = Eigen::MatrixXd::Zero(hidden, 1);
    return g;
}

}  // namespace

Seq2SeqModel init_model(const Seq2SeqConfig& config, const Vocabulary& vocab,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Seq2SeqModel m;
    m.config = config;
    m.vocab = vocab;
    int v = vocab.size();
    int enc2 = 2 * config.encoder_dim;
    int dec_in = config.embed_dim + enc2;

    m.embedding = glorot(config.embed_dim, v, rng);
    m.enc_fwd = init_gru(config.encoder_dim, config.embed_dim, rng);
    m.enc_bwd = init_gru(config.encoder_dim, config.embed_dim, rng);
    m.dec = init_gru(config.decoder_dim, dec_in, rng);
    m.w_init = glorot(config.decoder_dim, enc2, rng);
    m.b_init = Eigen::MatrixXd::Zero(config.decoder_dim, 1);
    m.attn_w = glorot(config.attention_dim, config.decoder_dim, rng);
    m.attn_u = glorot(config.attention_dim, enc2, rng);
    m.attn_b = Eigen::MatrixXd::Zero(config.attention_dim, 1);
    m.attn_v = glorot(1, config.attention_dim, rng);
    m.w_out1 = glorot(config.readout_dim, config.decoder_dim + enc2, rng);
    m.b_out1 = Eigen::MatrixXd::Zero(config.readout_dim, 1);
    m.w_out2 = glorot(v, config.readout_dim, rng);
    m.b_out2 = Eigen::MatrixXd::Zero(v, 1);
    m.w_pgen = glorot(1, config.decoder_dim + enc2 + dec_in, rng);
    m.b_pgen = Eigen::MatrixXd::Zero(1, 1);
    return m;
}

std::vector<std::string> conditioned_tokens(const Vocabulary& vocab,
                                            const std::vector<std::string>& input_tokens,
                                            const std::optional<std::string>& section_id) {
    if (input_tokens.empty())
        throw ValidationError("cannot encode an empty input sequence");
    std::vector<std::string> out;
    out.reserve(input_tokens.size() + 1);
    if (section_id) out.push_back(vocab.scheme.header_of(*section_id));
    out.insert(out.end(), input_tokens.begin(), input_tokens.end());
    return out;
}

// ---- tape forward ----

namespace {

struct GruNodes {
    int wz, uz, bz, wr, ur, br, wn, un, bn;
};

struct ModelNodes {
    int embedding;
    GruNodes enc_fwd, enc_bwd, dec;
    int w_init, b_init, attn_w, attn_u, attn_b, attn_v;
    int w_out1, b_out1, w_out2, b_out2, w_pgen, b_pgen;
    std::vector<int> all;  // parameters() order
};

GruNodes load_gru(Tape& tape, const GruParams& g, std::vector<int>& all) {
    GruNodes n;
    n.wz = tape.leaf(g.wz);
    n.uz = tape.leaf(g.uz);
    n.bz = tape.leaf(g.bz);
    n.wr = tape.leaf(g.wr);
    n.ur = tape.leaf(g.ur);
    n.br = tape.leaf(g.br);
    n.wn = tape.leaf(g.wn);
    n.un = tape.leaf(g.un);
    n.bn = tape.leaf(g.bn);
    all.insert(all.end(), {n.wz, n.uz, n.bz, n.wr, n.ur, n.br, n.wn, n.un, n.bn});
    return n;
}

ModelNodes load_model_nodes(Tape& tape, const Seq2SeqModel& m) {
    ModelNodes n;
    n.embedding = tape.leaf(m.embedding);
    n.all.push_back(n.embedding);
    n.enc_fwd = load_gru(tape, m.enc_fwd, n.all);
    n.enc_bwd = load_gru(tape, m.enc_bwd, n.all);
    n.dec = load_gru(tape, m.dec, n.all);
    n.w_init = tape.leaf(m.w_init);
    n.b_init = tape.leaf(m.b_init);
    n.attn_w = tape.leaf(m.attn_w);
    n.attn_u = tape.leaf(m.attn_u);
    n.attn_b = tape.leaf(m.attn_b);
    n.attn_v = tape.leaf(m.attn_v);
    n.w_out1 = tape.leaf(m.w_out1);
    n.b_out1 = tape.leaf(m.b_out1);
    n.w_out2 = tape.leaf(m.w_out2);
    n.b_out2 = tape.leaf(m.b_out2);
    n.w_pgen = tape.leaf(m.w_pgen);
    n.b_pgen = tape.leaf(m.b_pgen);
    n.all.insert(n.all.end(), {n.w_init, n.b_init, n.attn_w, n.attn_u, n.attn_b, n.attn_v,
                               n.w_out1, n.b_out1, n.w_out2, n.b_out2, n.w_pgen, n.b_pgen});
    return n;
}

int gru_step(Tape& t, const GruNodes& g, int x, int h) {
    int z = t.sigmoid(t.add(t.add(t.matmul(g.wz, x), t.matmul(g.uz, h)), g.bz));
    int r = t.sigmoid(t.add(t.add(t.matmul(g.wr, x), t.matmul(g.ur, h)), g.br));
    int n = t.tanh(t.add(t.add(t.matmul(g.wn, x), t.matmul(g.un, t.cmul(r, h))), g.bn));
    return t.add(n, t.cmul(z, t.sub(h, n)));
}

// Decoder input ids under teacher forcing: bos then the target mapped into
// the plain vocabulary (copied oov tokens embed as unk).
std::vector<int> decoder_input_ids(const Vocabulary& vocab,
                                   const std::vector<std::string>& target_tokens) {
    std::vector<int> in{Vocabulary::kBos};
    for (const auto& token : target_tokens) in.push_back(vocab.id_of(token));
    return in;
}

int pair_loss(Tape& t, const ModelNodes& n, const Seq2SeqModel& m, const AbstractorPair& pair,
              bool coverage, double coverage_weight) {
    const Vocabulary& vocab = m.vocab;
    auto source = conditioned_tokens(vocab, pair.input_tokens, pair.section_id);
    auto ext = extend_source(vocab, source);
    int length = static_cast<int>(source.size());
    int ext_size = ext.ext_size(vocab);

    std::vector<int> y_out = target_ext_ids(vocab, ext, pair.target_tokens);
    y_out.push_back(Vocabulary::kEos);
    std::vector<int> y_in = decoder_input_ids(vocab, pair.target_tokens);

    // bidirectional encoder
    std::vector<int> x(length);
    for (int i = 0; i < length; ++i) x[i] = t.embed_col(n.embedding, {ext.source_ids[i]});
    int enc_dim = m.config.encoder_dim;
    std::vector<int> fwd(length), bwd(length);
    int h = t.leaf(Eigen::MatrixXd::Zero(enc_dim, 1));
    for (int i = 0; i < length; ++i) h = fwd[i] = gru_step(t, n.enc_fwd, x[i], h);
    h = t.leaf(Eigen::MatrixXd::Zero(enc_dim, 1));
    for (int i = length - 1; i >= 0; --i) h = bwd[i] = gru_step(t, n.enc_bwd, x[i], h);

    std::vector<int> columns(length);
    for (int i = 0; i < length; ++i) columns[i] = t.vconcat(fwd[i], bwd[i]);
    int states = t.concat_cols(columns);
    int attn_proj = t.matmul(n.attn_u, states);
    int s = t.tanh(t.add(t.matmul(n.w_init, t.vconcat(fwd[length - 1], bwd[0])), n.b_init));
    int ctx = t.leaf(Eigen::MatrixXd::Zero(2 * enc_dim, 1));
    int cov = coverage ? t.leaf(Eigen::MatrixXd::Zero(length, 1)) : -1;

    int loss = -1;
    int steps = static_cast<int>(y_out.size());
    for (int step = 0; step < steps; ++step) {
        int input = t.vconcat(t.embed_col(n.embedding, {y_in[step]}), ctx);
        s = gru_step(t, n.dec, input, s);

        int proj = t.add_colwise(attn_proj, t.add(t.matmul(n.attn_w, s), n.attn_b));
        int a_row = t.softmax(t.matmul(n.attn_v, t.tanh(proj)));
        int a_col = t.transpose(a_row);
        ctx = t.matmul(states, a_col);

        int readout = t.tanh(t.add(t.matmul(n.w_out1, t.vconcat(s, ctx)), n.b_out1));
        int gen = t.softmax(t.add(t.matmul(n.w_out2, readout), n.b_out2));
        int features = t.vconcat(t.vconcat(s, ctx), input);
        int pg = t.sigmoid(t.add(t.matmul(n.w_pgen, features), n.b_pgen));

        int dist = t.add(t.scale_by(t.pad_rows(gen, ext_size), pg),
                         t.scale_by(t.scatter_sum(a_col, ext.source_ext_ids, ext_size),
                                    t.affine_const(pg, -1.0, 1.0)));
        int nll = t.affine_const(
            t.log(t.affine_const(t.pick(dist, y_out[step]), 1.0, kLogFloor)), -1.0, 0.0);
        loss = loss < 0 ? nll : t.add(loss, nll);

        if (coverage) {
            int penalty = t.sum_elements(t.cmin(a_col, cov));
            loss = t.add(loss, t.affine_const(penalty, coverage_weight, 0.0));
            cov = t.add(cov, a_col);
        }
    }
    return t.affine_const(loss, 1.0 / steps, 0.0);
}

}  // namespace

ExampleTape example_loss(Tape& tape, const Seq2SeqModel& model, const AbstractorPair& pair,
                         bool coverage, double coverage_weight) {
    ExampleTape out;
    ModelNodes nodes = load_model_nodes(tape, model);
    out.param_nodes = nodes.all;
    out.loss = pair_loss(tape, nodes, model, pair, coverage, coverage_weight);
    return out;
}

// ---- plain decoding path ----

namespace {

Eigen::MatrixXd sigmoid_plain(const Eigen::MatrixXd& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::VectorXd softmax_plain(const Eigen::VectorXd& x) {
    Eigen::ArrayXd e = (x.array() - x.maxCoeff()).exp();
    return (e / e.sum()).matrix();
}

Eigen::MatrixXd gru_step_plain(const GruParams& g, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& h) {
    Eigen::MatrixXd z = sigmoid_plain(g.wz * x + g.uz * h + g.bz);
    Eigen::MatrixXd r = sigmoid_plain(g.wr * x + g.ur * h + g.br);
    Eigen::MatrixXd n = (g.wn * x + g.un * r.cwiseProduct(h) + g.bn).array().tanh().matrix();
    return n + z.cwiseProduct(h - n);
}

}  // namespace

EncodedInput encode_input(const Seq2SeqModel& model,
                          const std::vector<std::string>& input_tokens,
                          const std::optional<std::string>& section_id) {
    auto source = conditioned_tokens(model.vocab, input_tokens, section_id);
    EncodedInput enc;
    enc.ext = extend_source(model.vocab, source);
    int length = static_cast<int>(source.size());
    int enc_dim = model.config.encoder_dim;

    Eigen::MatrixXd x(model.config.embed_dim, length);
    for (int i = 0; i < length; ++i) x.col(i) = model.embedding.col(enc.ext.source_ids[i]);

    enc.states.resize(2 * enc_dim, length);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(enc_dim, 1);
    for (int i = 0; i < length; ++i) {
        h = gru_step_plain(model.enc_fwd, x.col(i), h);
        enc.states.col(i).topRows(enc_dim) = h;
    }
    h = Eigen::MatrixXd::Zero(enc_dim, 1);
    for (int i = length - 1; i >= 0; --i) {
        h = gru_step_plain(model.enc_bwd, x.col(i), h);
        enc.states.col(i).bottomRows(enc_dim) = h;
    }

    Eigen::MatrixXd final_states(2 * enc_dim, 1);
    final_states.topRows(enc_dim) = enc.states.col(length - 1).topRows(enc_dim);
    final_states.bottomRows(enc_dim) = enc.states.col(0).bottomRows(enc_dim);
    enc.s0 = (model.w_init * final_states + model.b_init).array().tanh().matrix();
    enc.attn_proj = model.attn_u * enc.states;
    if (!enc.states.allFinite() || !enc.s0.allFinite())
        throw TrainingError("non-finite activation while encoding input");
    return enc;
}

DecoderState initial_state(const EncodedInput& encoded) {
    DecoderState state;
    state.s = encoded.s0;
    state.ctx = Eigen::MatrixXd::Zero(encoded.states.rows(), 1);
    return state;
}

StepResult decode_step(const Seq2SeqModel& model, const EncodedInput& encoded,
                       const DecoderState& state, int prev_ext_id) {
    int vocab_size = model.vocab.size();
    int prev = prev_ext_id < vocab_size ? prev_ext_id : Vocabulary::kUnk;

    Eigen::MatrixXd input(model.config.embed_dim + state.ctx.rows(), 1);
    input.topRows(model.config.embed_dim) = model.embedding.col(prev);
    input.bottomRows(state.ctx.rows()) = state.ctx;

    StepResult out;
    out.state.s = gru_step_plain(model.dec, input, state.s);

    Eigen::MatrixXd proj =
        (encoded.attn_proj.colwise() +
         Eigen::VectorXd(model.attn_w * out.state.s + model.attn_b))
            .array()
            .tanh()
            .matrix();
    Eigen::VectorXd scores = (model.attn_v * proj).transpose();
    out.attention = softmax_plain(scores);
    out.state.ctx = encoded.states * out.attention;

    Eigen::MatrixXd combined(out.state.s.rows() + out.state.ctx.rows(), 1);
    combined.topRows(out.state.s.rows()) = out.state.s;
    combined.bottomRows(out.state.ctx.rows()) = out.state.ctx;
    Eigen::MatrixXd readout =
        (model.w_out1 * combined + model.b_out1).array().tanh().matrix();
    Eigen::VectorXd gen = softmax_plain(model.w_out2 * readout + model.b_out2);

    Eigen::MatrixXd features(combined.rows() + input.rows(), 1);
    features.topRows(combined.rows()) = combined;
    features.bottomRows(input.rows()) = input;
    out.p_gen = sigmoid_plain(model.w_pgen * features + model.b_pgen)(0, 0);

    int ext_size = encoded.ext.ext_size(model.vocab);
    out.dist = Eigen::VectorXd::Zero(ext_size);
    out.dist.topRows(vocab_size) = out.p_gen * gen;
    for (std::size_t i = 0; i < encoded.ext.source_ext_ids.size(); ++i)
        out.dist(encoded.ext.source_ext_ids[i]) +=
            (1.0 - out.p_gen) * out.attention(static_cast<Eigen::Index>(i));

    if (!out.dist.allFinite())
        throw TrainingError("non-finite activation in decode step");
    return out;
}

double teacher_forced_loss(const Seq2SeqModel& model, const AbstractorPair& pair,
                           bool coverage, double coverage_weight) {
    auto encoded = encode_input(model, pair.input_tokens, pair.section_id);
    std::vector<int> y_out = target_ext_ids(model.vocab, encoded.ext, pair.target_tokens);
    y_out.push_back(Vocabulary::kEos);
    std::vector<int> y_in = decoder_input_ids(model.vocab, pair.target_tokens);

    DecoderState state = initial_state(encoded);
    Eigen::VectorXd cov = Eigen::VectorXd::Zero(encoded.states.cols());
    double loss = 0.0;
    for (std::size_t step = 0; step < y_out.size(); ++step) {
        StepResult r = decode_step(model, encoded, state, y_in[step]);
        loss += -std::log(r.dist(y_out[step]) + kLogFloor);
        if (coverage) {
            loss += coverage_weight * cov.cwiseMin(r.attention).sum();
            cov += r.attention;
        }
        state = r.state;
    }
    return loss / static_cast<double>(y_out.size());
}

double teacher_forced_accuracy(const Seq2SeqModel& model,
                               const std::vector<AbstractorPair>& pairs) {
    long hits = 0;
    long total = 0;
    for (const auto& pair : pairs) {
        auto encoded = encode_input(model, pair.input_tokens, pair.section_id);
        std::vector<int> y_out = target_ext_ids(model.vocab, encoded.ext, pair.target_tokens);
        y_out.push_back(Vocabulary::kEos);
        std::vector<int> y_in = decoder_input_ids(model.vocab, pair.target_tokens);
        DecoderState state = initial_state(encoded);
        for (std::size_t step = 0; step < y_out.size(); ++step) {
            StepResult r = decode_step(model, encoded, state, y_in[step]);
            Eigen::Index best = 0;
            r.dist.maxCoeff(&best);
            hits += best == y_out[step];
            ++total;
            state = r.state;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

// ---- training driver ----

std::string training_log_tsv(const std::vector<TrainingLogRow>& rows) {
    std::vector<TsvRow> table{{"epoch", "train_loss", "val_accuracy", "coverage_phase"}};
    for (const auto& row : rows)
        table.push_back({std::to_string(row.epoch), format_fixed(row.train_loss),
                         format_fixed(row.val_accuracy), row.coverage_phase ? "1" : "0"});
    return render_tsv(table);
}

namespace {

struct AdamState {
    std::vector<Eigen::MatrixXd> m, v;
    long t = 0;
};

void adam_step(std::vector<Eigen::MatrixXd*>& params, std::vector<Eigen::MatrixXd>& grads,
               AdamState& adam, double lr, double clip_norm) {
    double sq = 0.0;
    for (const auto& g : grads) sq += g.squaredNorm();
    double norm = std::sqrt(sq);
    if (clip_norm > 0.0 && norm > clip_norm) {
        double scale = clip_norm / norm;
        for (auto& g : grads) g *= scale;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++adam.t;
    double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
    double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        adam.m[k] = b1 * adam.m[k] + (1.0 - b1) * grads[k];
        adam.v[k] = b2 * adam.v[k].array().matrix() +
                    (1.0 - b2) * grads[k].array().square().matrix();
        Eigen::ArrayXXd mhat = adam.m[k].array() / c1;
        Eigen::ArrayXXd vhat = adam.v[k].array() / c2;
        params[k]->array() -= lr * mhat / (vhat.sqrt() + eps);
    }
}

std::vector<int> shuffled_order(int n, std::mt19937_64& rng) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(order[i], order[static_cast<std::size_t>(pick(rng))]);
    }
    return order;
}

std::vector<Eigen::MatrixXd> snapshot(const std::vector<Eigen::MatrixXd*>& params) {
    std::vector<Eigen::MatrixXd> copy;
    copy.reserve(params.size());
    for (const auto* p : params) copy.push_back(*p);
    return copy;
}

void restore(std::vector<Eigen::MatrixXd*>& params, const std::vector<Eigen::MatrixXd>& copy) {
    for (std::size_t k = 0; k < params.size(); ++k) *params[k] = copy[k];
}

// One epoch of minibatch Adam; returns the mean per-example loss.
double run_epoch(Seq2SeqModel& model, std::vector<Eigen::MatrixXd*>& params,
                 const std::vector<AbstractorPair>& train_pairs, AdamState& adam,
                 const AbstractorHyperparams& hp, bool coverage, std::mt19937_64& rng) {
    auto order = shuffled_order(static_cast<int>(train_pairs.size()), rng);
    double loss_sum = 0.0;
    std::size_t at = 0;
    while (at < order.size()) {
        std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(hp.batch_size));
        std::vector<Eigen::MatrixXd> grads;
        for (const auto* p : params) grads.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        for (std::size_t i = at; i < end; ++i) {
            Tape tape;
            ExampleTape ex = example_loss(tape, model, train_pairs[order[i]], coverage,
                                          hp.coverage_weight);
            loss_sum += tape.value(ex.loss)(0, 0);
            tape.backward(ex.loss);
            for (std::size_t k = 0; k < params.size(); ++k)
                grads[k] += tape.grad(ex.param_nodes[k]);
        }
        double inv = 1.0 / static_cast<double>(end - at);
        for (auto& g : grads) g *= inv;
        adam_step(params, grads, adam, hp.learning_rate, hp.clip_norm);
        at = end;
    }
    return loss_sum / static_cast<double>(train_pairs.size());
}

}  // namespace

Seq2SeqModel train_abstractor(const Seq2SeqConfig& config, const SectionScheme& scheme,
                              const std::vector<AbstractorPair>& train_pairs,
                              const std::vector<AbstractorPair>& val_pairs,
                              const AbstractorHyperparams& hyperparams, std::uint64_t seed,
                              std::vector<TrainingLogRow>* log) {
    if (train_pairs.empty()) throw ValidationError("cannot train an abstractor on no pairs");
    Vocabulary vocab = build_vocab(train_pairs, scheme, hyperparams.min_count);
    Seq2SeqModel model = init_model(config, vocab, seed);
    auto params = model.parameters();

    AdamState adam;
    for (const auto* p : params) {
        adam.m.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        adam.v.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
    std::mt19937_64 rng(seed + 1);

    double best_accuracy = -1.0;
    std::vector<Eigen::MatrixXd> best_params;
    int stale = 0;
    int epoch = 0;

    for (int i = 0; i < hyperparams.max_epochs; ++i) {
        ++epoch;
        double loss = run_epoch(model, params, train_pairs, adam, hyperparams, false, rng);
        if (!std::isfinite(loss))
            throw TrainingError("abstractor loss diverged at epoch " + std::to_string(epoch));
        double accuracy = val_pairs.empty() ? 0.0 : teacher_forced_accuracy(model, val_pairs);
        if (log) log->push_back({epoch, loss, accuracy, false});
        if (!val_pairs.empty()) {
            if (accuracy > best_accuracy) {
                best_accuracy = accuracy;
                best_params = snapshot(params);
                stale = 0;
            } else if (++stale >= hyperparams.patience) {
                break;
            }
        }
    }
    if (!best_params.empty()) restore(params, best_params);

    for (int i = 0; i < hyperparams.coverage_epochs; ++i) {
        ++epoch;
        double loss = run_epoch(model, params, train_pairs, adam, hyperparams, true, rng);
        if (!std::isfinite(loss))
            throw TrainingError("abstractor loss diverged at epoch " + std::to_string(epoch));
        double accuracy = val_pairs.empty() ? 0.0 : teacher_forced_accuracy(model, val_pairs);
        if (log) log->push_back({epoch, loss, accuracy, true});
    }
    model.trained_with_coverage = hyperparams.coverage_epochs > 0;
    return model;
}

double gradient_check(const Seq2SeqConfig& config, const SectionScheme& scheme,
                      const std::vector<AbstractorPair>& pairs, std::uint64_t seed,
                      double epsilon) {
    Vocabulary vocab = build_vocab(pairs, scheme, 1);
    Seq2SeqModel model = init_model(config, vocab, seed);
    constexpr double kCoverageWeight = 0.5;

    auto total_loss = [&]() {
        double sum = 0.0;
        for (const auto& pair : pairs)
            sum += teacher_forced_loss(model, pair, true, kCoverageWeight);
        return sum;
    };

    Tape tape;
    ModelNodes nodes = load_model_nodes(tape, model);
    int loss = -1;
    for (const auto& pair : pairs) {
        int l = pair_loss(tape, nodes, model, pair, true, kCoverageWeight);
        loss = loss < 0 ? l : tape.add(loss, l);
    }
    tape.backward(loss);

    auto params = model.parameters();
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Eigen::MatrixXd& p = *params[k];
        const Eigen::MatrixXd& analytic = tape.grad(nodes.all[k]);
        Eigen::Index size = p.size();
        std::vector<Eigen::Index> cells{0, size / 2, size - 1};
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        for (Eigen::Index cell : cells) {
            double keep = p.data()[cell];
            p.data()[cell] = keep + epsilon;
            double up = total_loss();
            p.data()[cell] = keep - epsilon;
            double down = total_loss();
            p.data()[cell] = keep;
            double fd = (up - down) / (2.0 * epsilon);
            double a = analytic.data()[cell];
            double denom = std::max(std::abs(a), std::abs(fd));
            double err = denom < 1e-8 ? std::abs(a - fd) : std::abs(a - fd) / denom;
            worst = std::max(worst, err);
        }
    }
    return worst;
}

// ---- checkpoint ----

void write_model(std::ostream& out, const Seq2SeqModel& model) {
    write_magic(out, kModelMagic, kModelVersion);
    write_u32(out, static_cast<std::uint32_t>(model.config.embed_dim));
    write_u32(out, static_cast<std::uint32_t>(model.config.encoder_dim));
    write_u32(out, static_cast<std::uint32_t>(model.config.decoder_dim));
    write_u32(out, static_cast<std::uint32_t>(model.config.attention_dim));
    write_u32(out, static_cast<std::uint32_t>(model.config.readout_dim));
    write_string(out, model.vocab.scheme.name);
    write_u32(out, static_cast<std::uint32_t>(model.vocab.scheme.size()));
    for (const auto& [id, header] : model.vocab.scheme.sections) {
        write_string(out, id);
        write_string(out, header);
    }
    write_u32(out, static_cast<std::uint32_t>(model.vocab.n_reserved));
    write_string_list(out, model.vocab.tokens);
    write_u32(out, model.trained_with_coverage ? 1 : 0);
    for (const auto* p : model.parameters()) write_matrix(out, *p);
}

Seq2SeqModel read_model(std::istream& in) {
    read_magic(in, kModelMagic);
    Seq2SeqModel model;
    model.config.embed_dim = static_cast<int>(read_u32(in));
    model.config.encoder_dim = static_cast<int>(read_u32(in));
    model.config.decoder_dim = static_cast<int>(read_u32(in));
    model.config.attention_dim = static_cast<int>(read_u32(in));
    model.config.readout_dim = static_cast<int>(read_u32(in));
    SectionScheme scheme;
    scheme.name = read_string(in);
    std::uint32_t n_sections = read_u32(in);
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        std::string id = read_string(in);
        std::string header = read_string(in);
        scheme.sections.emplace_back(std::move(id), std::move(header));
    }
    int n_reserved = static_cast<int>(read_u32(in));
    std::vector<std::string> tokens = read_string_list(in);
    model.vocab = Vocabulary::from_tokens(std::move(scheme), std::move(tokens), n_reserved);
    model.trained_with_coverage = read_u32(in) != 0;
    for (auto* p : model.parameters()) *p = read_matrix(in);
    if (model.embedding.rows() != model.config.embed_dim ||
        model.embedding.cols() != model.vocab.size() ||
        model.w_out2.rows() != model.vocab.size() ||
        model.w_out2.cols() != model.config.readout_dim)
        throw ParseError("abstractor checkpoint has inconsistent shapes");
    return model;
}

}  // namespace convnote
