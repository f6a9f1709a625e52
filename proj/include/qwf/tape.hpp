#pragma once

#include <functional>
#include <random>
#include <vector>

#include "qwf/optimizer.hpp"
#include "qwf/tensor.hpp"

namespace qwf {

// Handle to a node on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode differentiation. Every op records the closure
// needed to push gradients to its inputs; backward() replays the records in
// reverse creation order, visiting each exactly once, then accumulates leaf
// gradients into their bound Parameters.
//
// A tape built with grad_enabled=false records values only, which makes
// inference forwards cheaper.
class Tape {
public:
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    // Leaves.
    Var constant(Tensor v);
    Var input(Tensor v);          // differentiable leaf without a Parameter sink
    Var param(Parameter& p);      // differentiable leaf; backward() adds into p.gradient

    // Element-wise and linear algebra.
    Var add(Var a, Var b);                      // same shape
    Var add_bias(Var a, Var b);                 // a: [m,n] or [n]; b: [n], broadcast over rows
    Var mul(Var a, Var b);                      // Hadamard
    Var scale(Var a, Scalar c);
    Var matmul(Var a, Var b);                   // [m,k]x[k,n]
    Var matmul_nt(Var a, Var b);                // [m,k]x([n,k])^T -> [m,n]

    // Activations.
    Var relu(Var x);
    Var gelu(Var x);
    Var sigmoid(Var x);
    Var tanh_act(Var x);

    // softmax along `axis`; numerically stabilized by max subtraction.
    Var softmax(Var x, int axis);
    // Row softmax over unmasked key columns only; masked columns are exactly 0.
    // key_mask has one entry per column, nonzero = attendable.
    Var masked_softmax_rows(Var x, const std::vector<int>& key_mask);

    // Normalizes the last dimension to zero mean / unit variance (eps 1e-5),
    // then applies per-feature gain and bias.
    Var layer_norm(Var x, Var gain, Var bias);

    // Gathers rows of `table` by id; gradient scatters back.
    Var embedding_lookup(Var table, const std::vector<int>& ids);

    // Inverted dropout: kept units scaled by 1/(1-rate) in training; identity
    // in evaluation. rate must be in [0,1).
    Var dropout(Var x, double rate, std::mt19937& rng, bool train);

    Var concat_cols(const std::vector<Var>& parts);  // 2D, same row count
    Var row_slice(Var x, int row);                   // -> [1,n]
    Var col_slice(Var x, int start, int len);        // -> [m,len]
    Var sum(Var x);                                  // -> [1]

    // -log(probabilities[label]); probabilities is any tensor whose elements
    // form one distribution.
    Var cross_entropy(Var probabilities, int label);

    const Tensor& value(Var v) const;
    // Gradient of the last backward() target w.r.t. v. Zero-sized if v did
    // not participate.
    const Tensor& grad(Var v) const;

    // loss must be a scalar recorded on this tape. Leaf Parameter gradients
    // accumulate across calls; the caller zeroes them between steps.
    void backward(Var loss);

    void clear();
    std::size_t size() const { return nodes_.size(); }
    bool grad_enabled() const { return grad_enabled_; }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // lazily sized
        std::function<void(Tape&)> backward;
        Parameter* sink = nullptr;
        bool requires_grad = false;
    };

    std::vector<Node> nodes_;
    bool grad_enabled_ = true;

    Var make(Tensor value, bool requires_grad, std::function<void(Tape&)> bw, const char* op);
    const Node& node(Var v) const;
    Node& node(Var v);
    bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }
    // Gradient buffer of node id, allocated on first use.
    Tensor& gbuf(int id);
    bool has_grad(int id) const { return !nodes_[static_cast<std::size_t>(id)].grad.data.empty(); }
    const Tensor& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
};

}  // namespace qwf
