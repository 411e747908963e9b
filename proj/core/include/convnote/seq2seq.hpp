#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "convnote/autodiff.hpp"
#include "convnote/vocab.hpp"

namespace convnote {

struct Seq2SeqConfig {
    int embed_dim = 32;
    int encoder_dim = 32;  // per direction
    int decoder_dim = 64;
    int attention_dim = 48;
    int readout_dim = 64;
};

struct GruParams {
    Eigen::MatrixXd wz, uz, bz;
    Eigen::MatrixXd wr, ur, br;
    Eigen::MatrixXd wn, un, bn;
};

// Pointer-generator sequence-to-sequence model: bidirectional GRU encoder,
// GRU decoder with input feeding, additive attention, and a p_gen gate
// mixing the generation softmax with the attention-as-copy distribution
// over the example's extended vocabulary.
struct Seq2SeqModel {
    Seq2SeqConfig config;
    Vocabulary vocab;
    bool trained_with_coverage = false;

    Eigen::MatrixXd embedding;  // embed_dim x vocab
    GruParams enc_fwd, enc_bwd;
    GruParams dec;                     // input is [embedding; previous context]
    Eigen::MatrixXd w_init, b_init;    // decoder init from final encoder states
    Eigen::MatrixXd attn_w, attn_u, attn_b, attn_v;
    Eigen::MatrixXd w_out1, b_out1;    // readout from [state; context]
    Eigen::MatrixXd w_out2, b_out2;    // vocabulary logits
    Eigen::MatrixXd w_pgen, b_pgen;    // gate from [state; context; input]

    // Fixed registry order shared by the optimizer, the tape loader, the
    // checkpoint, and the gradient check.
    std::vector<Eigen::MatrixXd*> parameters();
    std::vector<const Eigen::MatrixXd*> parameters() const;
};

Seq2SeqModel init_model(const Seq2SeqConfig& config, const Vocabulary& vocab,
                        std::uint64_t seed);

// The section header token is prepended when a conditioning section is
// given. Throws ValidationError when the input itself is empty.
std::vector<std::string> conditioned_tokens(const Vocabulary& vocab,
                                            const std::vector<std::string>& input_tokens,
                                            const std::optional<std::string>& section_id);

// ---- training path (autodiff tape) ----

struct ExampleTape {
    int loss = -1;                 // 1x1 node, token-mean objective
    std::vector<int> param_nodes;  // leaves aligned with parameters()
};

ExampleTape example_loss(Tape& tape, const Seq2SeqModel& model, const AbstractorPair& pair,
                         bool coverage, double coverage_weight);

// ---- decoding path (plain Eigen, no tape) ----

struct EncodedInput {
    ExtendedExample ext;
    Eigen::MatrixXd states;     // 2*encoder_dim x L, bidirectional
    Eigen::MatrixXd attn_proj;  // attention projection of the states
    Eigen::MatrixXd s0;
};

struct DecoderState {
    Eigen::MatrixXd s;
    Eigen::MatrixXd ctx;
};

struct StepResult {
    Eigen::VectorXd dist;       // over the extended vocabulary, sums to 1
    Eigen::VectorXd attention;  // over source positions, sums to 1
    double p_gen = 0.0;
    DecoderState state;
};

EncodedInput encode_input(const Seq2SeqModel& model,
                          const std::vector<std::string>& input_tokens,
                          const std::optional<std::string>& section_id);

DecoderState initial_state(const EncodedInput& encoded);

// prev_ext_id above the vocabulary (a copied oov token) embeds as unk.
// Throws TrainingError on non-finite activations.
StepResult decode_step(const Seq2SeqModel& model, const EncodedInput& encoded,
                       const DecoderState& state, int prev_ext_id);

// Teacher-forced token-mean negative log-likelihood via the decoding path;
// matches example_loss on the same pair to float precision.
double teacher_forced_loss(const Seq2SeqModel& model, const AbstractorPair& pair,
                           bool coverage, double coverage_weight);

// Fraction of target positions (end token included) whose extended
// distribution argmax equals the gold token, pooled over pairs.
double teacher_forced_accuracy(const Seq2SeqModel& model,
                               const std::vector<AbstractorPair>& pairs);

// ---- training driver ----

struct AbstractorHyperparams {
    double learning_rate = 0.003;  // Adam step size
    int max_epochs = 80;
    int batch_size = 8;
    int patience = 8;       // epochs without validation improvement
    double clip_norm = 5.0;
    int min_count = 1;      // vocabulary cutoff
    int coverage_epochs = 0;  // second-phase epochs with the coverage penalty
    double coverage_weight = 1.0;
};

struct TrainingLogRow {
    int epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    bool coverage_phase = false;
};

std::string training_log_tsv(const std::vector<TrainingLogRow>& rows);

// Teacher-forced training with per-epoch shuffling, minibatch Adam, global
// gradient-norm clipping, and early stopping on validation next-token
// accuracy (skipped when val_pairs is empty). The best phase-one weights
// are restored before the optional coverage phase. Throws TrainingError
// naming the epoch when the loss turns non-finite.
Seq2SeqModel train_abstractor(const Seq2SeqConfig& config, const SectionScheme& scheme,
                              const std::vector<AbstractorPair>& train_pairs,
                              const std::vector<AbstractorPair>& val_pairs,
                              const AbstractorHyperparams& hyperparams, std::uint64_t seed,
                              std::vector<TrainingLogRow>* log = nullptr);

// Max relative error between tape gradients and central finite differences
// over a deterministic sample of parameter cells; near-zero pairs fall back
// to absolute error. The coverage term is enabled so its path is covered.
double gradient_check(const Seq2SeqConfig& config, const SectionScheme& scheme,
                      const std::vector<AbstractorPair>& pairs, std::uint64_t seed,
                      double epsilon);

// Versioned little-endian model block (shared by the abstractor bundle).
void write_model(std::ostream& out, const Seq2SeqModel& model);
Seq2SeqModel read_model(std::istream& in);  // ParseError

}  // namespace convnote
