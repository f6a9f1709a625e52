#pragma once

#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "qwf/tape.hpp"

namespace qwf {

struct EncoderConfig {
    int layers = 2;
    int heads = 4;
    int dim = 64;
    int ff = 128;
    int max_len = 44;
    int vocab_size = 0;  // set from the trained vocabulary

    void validate() const;
};

struct PosLstmConfig {
    int tag_vocab = 47;
    int emb = 16;
    int hidden = 32;
    int proj = 32;
    int max_len = 20;

    void validate() const;
};

struct FusionConfig {
    int hidden = 64;
    int classes = 2;

    void validate() const;
};

// All learnable weights of the encoder, the POS LSTM, and the fusion head.
// Parameter storage is pointer-stable so tapes can bind across batches.
class ModelParams {
public:
    ModelParams(EncoderConfig enc, PosLstmConfig pos, FusionConfig fuse, std::mt19937& rng);

    const EncoderConfig& encoder_config() const { return enc_; }
    const PosLstmConfig& pos_config() const { return pos_; }
    const FusionConfig& fusion_config() const { return fuse_; }

    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    std::vector<Parameter*> parameters();
    const std::vector<std::string>& names() const { return order_; }

    void zero_grad();
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& snap);

private:
    EncoderConfig enc_;
    PosLstmConfig pos_;
    FusionConfig fuse_;
    std::vector<std::unique_ptr<Parameter>> store_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, Parameter*> index_;

    Parameter& add(const std::string& name, Tensor init);
};

// Forward pass artifacts of the encoder; attention holds the post-softmax
// weights per layer and head, rows normalized over unmasked keys.
struct EncoderTrace {
    Var hidden;                           // [max_len, dim], final layer
    Var cls;                              // [1, dim], row 0 of the final layer
    std::vector<std::vector<Var>> attention;  // [layer][head] -> [max_len, max_len]
};

EncoderTrace encoder_forward(Tape& tape, ModelParams& params, const std::vector<int>& ids,
                             const std::vector<int>& mask);

// POS channel: embedding -> unidirectional LSTM over real timesteps only ->
// projection with relu. All-PAD input uses the zero initial state.
Var pos_forward(Tape& tape, ModelParams& params, const std::vector<int>& tag_ids);

// One LSTM cell step; exposed for direct verification against hand-computed
// gate arithmetic.
struct LstmState {
    Var h;
    Var c;
};
LstmState lstm_cell_step(Tape& tape, ModelParams& params, Var x_t, LstmState prev);

// Concatenation + dropout + dense relu layer + softmax output.
Var fuse_classify(Tape& tape, ModelParams& params, Var cls, Var pos_repr, double dropout_rate,
                  bool train, std::mt19937& rng);

// Post-softmax attention matrices of a full forward pass, [layer][head].
std::vector<std::vector<Tensor>> attention_maps(ModelParams& params, const std::vector<int>& ids,
                                                const std::vector<int>& mask);

}  // namespace qwf
