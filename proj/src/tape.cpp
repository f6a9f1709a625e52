#include "qwf/tape.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qwf {

namespace {

// C[m,n] += A[m,k] * B[k,n]
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        const Scalar* arow = a.data.data() + static_cast<std::size_t>(i) * k;
        Scalar* crow = c.data.data() + static_cast<std::size_t>(i) * n;
        for (int l = 0; l < k; ++l) {
            const Scalar av = arow[l];
            if (av == Scalar{0}) continue;
            const Scalar* brow = b.data.data() + static_cast<std::size_t>(l) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m,n] += A[m,k] * B[n,k]^T
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const int m = a.rows(), k = a.cols(), n = b.rows();
    for (int i = 0; i < m; ++i) {
        const Scalar* arow = a.data.data() + static_cast<std::size_t>(i) * k;
        Scalar* crow = c.data.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const Scalar* brow = b.data.data() + static_cast<std::size_t>(j) * k;
            Scalar acc = 0;
            for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
            crow[j] += acc;
        }
    }
}

// C[k,n] += A[m,k]^T * B[m,n]
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        const Scalar* arow = a.data.data() + static_cast<std::size_t>(i) * k;
        const Scalar* brow = b.data.data() + static_cast<std::size_t>(i) * n;
        for (int l = 0; l < k; ++l) {
            const Scalar av = arow[l];
            if (av == Scalar{0}) continue;
            Scalar* crow = c.data.data() + static_cast<std::size_t>(l) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

constexpr double kLayerNormEps = 1e-5;
constexpr double kProbFloor = 1e-300;

}  // namespace

Var Tape::make(Tensor value, bool requires_grad, std::function<void(Tape&)> bw, const char* op) {
    if (!value.all_finite()) {
        throw std::runtime_error(std::string(op) + ": non-finite value in output");
    }
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && grad_enabled_;
    if (n.requires_grad) n.backward = std::move(bw);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        throw ShapeError("variable is not on this tape");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
}

Tape::Node& Tape::node(Var v) {
    return const_cast<Node&>(static_cast<const Tape*>(this)->node(v));
}

Tensor& Tape::gbuf(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.data.empty() && n.value.numel() > 0) n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const { return node(v).grad; }

void Tape::clear() { nodes_.clear(); }

Var Tape::constant(Tensor v) { return make(std::move(v), false, nullptr, "constant"); }

Var Tape::input(Tensor v) { return make(std::move(v), true, nullptr, "input"); }

Var Tape::param(Parameter& p) {
    Var v = make(p.value, true, nullptr, "param");
    if (grad_enabled_) nodes_.back().sink = &p;
    return v;
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    check_same_shape(ta, tb, "add");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += tb[i];
    const int ia = a.id, ib = b.id, io = static_cast<int>(nodes_.size());
    const bool ga = needs_grad(a), gb = needs_grad(b);
    return make(std::move(out), ga || gb,
                [ia, ib, io, ga, gb](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    if (ga) {
                        Tensor& g = t.gbuf(ia);
                        for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i];
                    }
                    if (gb) {
                        Tensor& g = t.gbuf(ib);
                        for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i];
                    }
                },
                "add");
}

Var Tape::add_bias(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (tb.ndim() != 1) throw ShapeError("add_bias: bias must be rank 1, got " + tb.shape_str());
    const int n = tb.dim(0);
    Tensor out = ta;
    if (ta.ndim() == 1 && ta.dim(0) == n) {
        for (int j = 0; j < n; ++j)
            out[static_cast<std::size_t>(j)] += tb[static_cast<std::size_t>(j)];
    } else if (ta.ndim() == 2 && ta.cols() == n) {
        for (int i = 0; i < ta.rows(); ++i)
            for (int j = 0; j < n; ++j) out.at(i, j) += tb[static_cast<std::size_t>(j)];
    } else {
        throw ShapeError("add_bias: shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    }
    const int ia = a.id, ib = b.id, io = static_cast<int>(nodes_.size());
    const bool ga = needs_grad(a), gb = needs_grad(b);
    return make(std::move(out), ga || gb,
                [ia, ib, io, ga, gb, n](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    if (ga) {
                        Tensor& g = t.gbuf(ia);
                        for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i];
                    }
                    if (gb) {
                        Tensor& g = t.gbuf(ib);
                        const std::size_t rows = go.numel() / static_cast<std::size_t>(n);
                        for (std::size_t r = 0; r < rows; ++r)
                            for (int j = 0; j < n; ++j)
                                g[static_cast<std::size_t>(j)] +=
                                    go[r * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                    }
                },
                "add_bias");
}

Var Tape::mul(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    check_same_shape(ta, tb, "mul");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= tb[i];
    const int ia = a.id, ib = b.id, io = static_cast<int>(nodes_.size());
    const bool ga = needs_grad(a), gb = needs_grad(b);
    return make(std::move(out), ga || gb,
                [ia, ib, io, ga, gb](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& va = t.val(ia);
                    const Tensor& vb = t.val(ib);
                    if (ga) {
                        Tensor& g = t.gbuf(ia);
                        for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i] * vb[i];
                    }
                    if (gb) {
                        Tensor& g = t.gbuf(ib);
                        for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i] * va[i];
                    }
                },
                "mul");
}

Var Tape::scale(Var a, Scalar c) {
    Tensor out = value(a);
    for (Scalar& v : out.data) v *= c;
    const int ia = a.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(a),
                [ia, io, c](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    Tensor& g = t.gbuf(ia);
                    for (std::size_t i = 0; i < go.numel(); ++i) g[i] += c * go[i];
                },
                "scale");
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.rows()) {
        throw ShapeError("matmul: incompatible shapes " + ta.shape_str() + " x " + tb.shape_str());
    }
    Tensor out({ta.rows(), tb.cols()});
    matmul_acc(ta, tb, out);
    const int ia = a.id, ib = b.id, io = static_cast<int>(nodes_.size());
    const bool ga = needs_grad(a), gb = needs_grad(b);
    return make(std::move(out), ga || gb,
                [ia, ib, io, ga, gb](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    if (ga) matmul_nt_acc(go, t.val(ib), t.gbuf(ia));
                    if (gb) matmul_tn_acc(t.val(ia), go, t.gbuf(ib));
                },
                "matmul");
}

Var Tape::matmul_nt(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.cols()) {
        throw ShapeError("matmul_nt: incompatible shapes " + ta.shape_str() + " x " +
                         tb.shape_str() + "^T");
    }
    Tensor out({ta.rows(), tb.rows()});
    matmul_nt_acc(ta, tb, out);
    const int ia = a.id, ib = b.id, io = static_cast<int>(nodes_.size());
    const bool ga = needs_grad(a), gb = needs_grad(b);
    return make(std::move(out), ga || gb,
                [ia, ib, io, ga, gb](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    if (ga) matmul_acc(go, t.val(ib), t.gbuf(ia));
                    if (gb) matmul_tn_acc(go, t.val(ia), t.gbuf(ib));
                },
                "matmul_nt");
}

Var Tape::relu(Var x) {
    Tensor out = value(x);
    for (Scalar& v : out.data)
        if (v < Scalar{0}) v = 0;
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& y = t.val(io);
                    Tensor& g = t.gbuf(ix);
                    for (std::size_t i = 0; i < go.numel(); ++i)
                        if (y[i] > Scalar{0}) g[i] += go[i];
                },
                "relu");
}

Var Tape::gelu(Var x) {
    Tensor out = value(x);
    for (Scalar& v : out.data) {
        const double xv = static_cast<double>(v);
        v = static_cast<Scalar>(0.5 * xv * (1.0 + std::erf(xv / std::numbers::sqrt2)));
    }
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& xv = t.val(ix);
                    Tensor& g = t.gbuf(ix);
                    constexpr double inv_sqrt2pi = 0.3989422804014327;
                    for (std::size_t i = 0; i < go.numel(); ++i) {
                        const double xd = static_cast<double>(xv[i]);
                        const double cdf = 0.5 * (1.0 + std::erf(xd / std::numbers::sqrt2));
                        const double pdf = inv_sqrt2pi * std::exp(-0.5 * xd * xd);
                        g[i] += go[i] * static_cast<Scalar>(cdf + xd * pdf);
                    }
                },
                "gelu");
}

Var Tape::sigmoid(Var x) {
    Tensor out = value(x);
    for (Scalar& v : out.data)
        v = static_cast<Scalar>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& y = t.val(io);
                    Tensor& g = t.gbuf(ix);
                    for (std::size_t i = 0; i < go.numel(); ++i)
                        g[i] += go[i] * y[i] * (Scalar{1} - y[i]);
                },
                "sigmoid");
}

Var Tape::tanh_act(Var x) {
    Tensor out = value(x);
    for (Scalar& v : out.data) v = static_cast<Scalar>(std::tanh(static_cast<double>(v)));
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& y = t.val(io);
                    Tensor& g = t.gbuf(ix);
                    for (std::size_t i = 0; i < go.numel(); ++i)
                        g[i] += go[i] * (Scalar{1} - y[i] * y[i]);
                },
                "tanh");
}

Var Tape::softmax(Var x, int axis) {
    const Tensor& tx = value(x);
    if (axis < 0) axis += tx.ndim();
    if (axis < 0 || axis >= tx.ndim()) throw ShapeError("softmax: invalid axis");
    if (tx.dim(axis) == 0) throw ShapeError("softmax: empty axis");
    std::size_t inner = 1;
    for (int i = axis + 1; i < tx.ndim(); ++i) inner *= static_cast<std::size_t>(tx.dim(i));
    const std::size_t len = static_cast<std::size_t>(tx.dim(axis));
    const std::size_t outer = tx.numel() / (inner * len);
    Tensor out = tx;
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            Scalar mx = out[base];
            for (std::size_t l = 1; l < len; ++l) mx = std::max(mx, out[base + l * inner]);
            double total = 0;
            for (std::size_t l = 0; l < len; ++l) {
                const double e = std::exp(static_cast<double>(out[base + l * inner] - mx));
                out[base + l * inner] = static_cast<Scalar>(e);
                total += e;
            }
            for (std::size_t l = 0; l < len; ++l)
                out[base + l * inner] = static_cast<Scalar>(out[base + l * inner] / total);
        }
    }
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io, inner, len, outer](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& y = t.val(io);
                    Tensor& g = t.gbuf(ix);
                    for (std::size_t o = 0; o < outer; ++o) {
                        for (std::size_t in = 0; in < inner; ++in) {
                            const std::size_t base = o * len * inner + in;
                            double dot = 0;
                            for (std::size_t l = 0; l < len; ++l) {
                                const std::size_t i = base + l * inner;
                                dot += static_cast<double>(go[i]) * y[i];
                            }
                            for (std::size_t l = 0; l < len; ++l) {
                                const std::size_t i = base + l * inner;
                                g[i] += y[i] * (go[i] - static_cast<Scalar>(dot));
                            }
                        }
                    }
                },
                "softmax");
}

Var Tape::masked_softmax_rows(Var x, const std::vector<int>& key_mask) {
    const Tensor& tx = value(x);
    if (tx.ndim() != 2) throw ShapeError("masked_softmax_rows: want rank 2, got " + tx.shape_str());
    if (static_cast<int>(key_mask.size()) != tx.cols()) {
        throw ShapeError("masked_softmax_rows: mask length " + std::to_string(key_mask.size()) +
                         " vs columns " + std::to_string(tx.cols()));
    }
    bool any = false;
    for (int m : key_mask) any = any || (m != 0);
    if (!any) throw ShapeError("masked_softmax_rows: all keys masked");
    const int rows = tx.rows(), cols = tx.cols();
    Tensor out({rows, cols});
    for (int i = 0; i < rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < cols; ++j)
            if (key_mask[static_cast<std::size_t>(j)])
                mx = std::max(mx, static_cast<double>(tx.at(i, j)));
        double total = 0;
        for (int j = 0; j < cols; ++j) {
            if (!key_mask[static_cast<std::size_t>(j)]) continue;
            const double e = std::exp(static_cast<double>(tx.at(i, j)) - mx);
            out.at(i, j) = static_cast<Scalar>(e);
            total += e;
        }
        for (int j = 0; j < cols; ++j)
            if (key_mask[static_cast<std::size_t>(j)])
                out.at(i, j) = static_cast<Scalar>(out.at(i, j) / total);
    }
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io](Tape& t) {
                    // masked entries have y == 0, so the softmax Jacobian
                    // formula already yields zero gradient there
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    const Tensor& y = t.val(io);
                    Tensor& g = t.gbuf(ix);
                    const int rows = y.rows(), cols = y.cols();
                    for (int i = 0; i < rows; ++i) {
                        double dot = 0;
                        for (int j = 0; j < cols; ++j)
                            dot += static_cast<double>(go.at(i, j)) * y.at(i, j);
                        for (int j = 0; j < cols; ++j)
                            g.at(i, j) += y.at(i, j) * (go.at(i, j) - static_cast<Scalar>(dot));
                    }
                },
                "masked_softmax_rows");
}

Var Tape::layer_norm(Var x, Var gain, Var bias) {
    const Tensor& tx = value(x);
    const Tensor& tg = value(gain);
    const Tensor& tb = value(bias);
    if (tx.ndim() == 0 || tx.numel() == 0) throw ShapeError("layer_norm: empty input");
    const int n = tx.dim(tx.ndim() - 1);
    if (tg.ndim() != 1 || tb.ndim() != 1 || tg.dim(0) != n || tb.dim(0) != n) {
        throw ShapeError("layer_norm: gain/bias must be [" + std::to_string(n) + "], got " +
                         tg.shape_str() + " and " + tb.shape_str());
    }
    const std::size_t rows = tx.numel() / static_cast<std::size_t>(n);
    Tensor out = tx;
    Tensor xhat = tx;
    Tensor invstd({static_cast<int>(rows)});
    for (std::size_t r = 0; r < rows; ++r) {
        Scalar* row = out.data.data() + r * static_cast<std::size_t>(n);
        double mean = 0;
        for (int j = 0; j < n; ++j) mean += row[j];
        mean /= n;
        double var = 0;
        for (int j = 0; j < n; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= n;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        invstd[r] = static_cast<Scalar>(inv);
        Scalar* xh = xhat.data.data() + r * static_cast<std::size_t>(n);
        for (int j = 0; j < n; ++j) {
            const double h = (row[j] - mean) * inv;
            xh[j] = static_cast<Scalar>(h);
            row[j] = static_cast<Scalar>(h * tg[static_cast<std::size_t>(j)] +
                                         tb[static_cast<std::size_t>(j)]);
        }
    }
    const int ix = x.id, ig = gain.id, ib = bias.id, io = static_cast<int>(nodes_.size());
    const bool gx = needs_grad(x), gg = needs_grad(gain), gb = needs_grad(bias);
    return make(
        std::move(out), gx || gg || gb,
        [ix, ig, ib, io, gx, gg, gb, n, rows, xhat = std::move(xhat),
         invstd = std::move(invstd)](Tape& t) {
            const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
            const Tensor& g_val = t.val(ig);
            for (std::size_t r = 0; r < rows; ++r) {
                const Scalar* gorow = go.data.data() + r * static_cast<std::size_t>(n);
                const Scalar* xh = xhat.data.data() + r * static_cast<std::size_t>(n);
                if (gg) {
                    Tensor& gd = t.gbuf(ig);
                    for (int j = 0; j < n; ++j)
                        gd[static_cast<std::size_t>(j)] += gorow[j] * xh[j];
                }
                if (gb) {
                    Tensor& bd = t.gbuf(ib);
                    for (int j = 0; j < n; ++j) bd[static_cast<std::size_t>(j)] += gorow[j];
                }
                if (gx) {
                    Tensor& xd = t.gbuf(ix);
                    Scalar* xdrow = xd.data.data() + r * static_cast<std::size_t>(n);
                    double mean_dy = 0, mean_dy_xh = 0;
                    for (int j = 0; j < n; ++j) {
                        const double dy = static_cast<double>(gorow[j]) *
                                          g_val[static_cast<std::size_t>(j)];
                        mean_dy += dy;
                        mean_dy_xh += dy * xh[j];
                    }
                    mean_dy /= n;
                    mean_dy_xh /= n;
                    const double inv = invstd[r];
                    for (int j = 0; j < n; ++j) {
                        const double dy = static_cast<double>(gorow[j]) *
                                          g_val[static_cast<std::size_t>(j)];
                        xdrow[j] += static_cast<Scalar>((dy - mean_dy - xh[j] * mean_dy_xh) * inv);
                    }
                }
            }
        },
        "layer_norm");
}

Var Tape::embedding_lookup(Var table, const std::vector<int>& ids) {
    const Tensor& tt = value(table);
    if (tt.ndim() != 2) throw ShapeError("embedding_lookup: table must be rank 2");
    const int v = tt.rows(), d = tt.cols();
    for (int id : ids) {
        if (id < 0 || id >= v) {
            throw ShapeError("embedding_lookup: id " + std::to_string(id) +
                             " out of range for table " + tt.shape_str());
        }
    }
    Tensor out({static_cast<int>(ids.size()), d});
    for (std::size_t t = 0; t < ids.size(); ++t) {
        const Scalar* src = tt.data.data() + static_cast<std::size_t>(ids[t]) * d;
        std::copy(src, src + d, out.data.data() + t * static_cast<std::size_t>(d));
    }
    const int it = table.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(table),
                [it, io, ids, d](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    Tensor& g = t.gbuf(it);
                    for (std::size_t r = 0; r < ids.size(); ++r) {
                        Scalar* dst = g.data.data() + static_cast<std::size_t>(ids[r]) * d;
                        const Scalar* src = go.data.data() + r * static_cast<std::size_t>(d);
                        for (int j = 0; j < d; ++j) dst[j] += src[j];
                    }
                },
                "embedding_lookup");
}

Var Tape::dropout(Var x, double rate, std::mt19937& rng, bool train) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
    }
    const int ix = x.id;
    if (!train || rate == 0.0) {
        Tensor out = value(x);
        const int io = static_cast<int>(nodes_.size());
        return make(std::move(out), needs_grad(x),
                    [ix, io](Tape& t) {
                        const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                        Tensor& g = t.gbuf(ix);
                        for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i];
                    },
                    "dropout");
    }
    const Tensor& tx = value(x);
    Tensor out = tx;
    Tensor mask(tx.shape);
    const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        mask[i] = (u(rng) >= rate) ? keep_scale : Scalar{0};
        out[i] *= mask[i];
    }
    const int io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io, mask = std::move(mask)](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    Tensor& g = t.gbuf(ix);
                    for (std::size_t i = 0; i < go.numel(); ++i) g[i] += go[i] * mask[i];
                },
                "dropout");
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const int rows = value(parts[0]).rows();
    int total = 0;
    bool rg = false;
    for (Var p : parts) {
        const Tensor& tp = value(p);
        if (tp.ndim() != 2 || tp.rows() != rows) {
            throw ShapeError("concat_cols: incompatible part shape " + tp.shape_str());
        }
        total += tp.cols();
        rg = rg || needs_grad(p);
    }
    Tensor out({rows, total});
    std::vector<int> part_ids;
    std::vector<int> offsets;
    std::vector<int> widths;
    std::vector<char> part_grad;
    int off = 0;
    for (Var p : parts) {
        const Tensor& tp = value(p);
        for (int i = 0; i < rows; ++i) {
            std::copy(tp.data.data() + static_cast<std::size_t>(i) * tp.cols(),
                      tp.data.data() + static_cast<std::size_t>(i + 1) * tp.cols(),
                      out.data.data() + static_cast<std::size_t>(i) * total + off);
        }
        part_ids.push_back(p.id);
        offsets.push_back(off);
        widths.push_back(tp.cols());
        part_grad.push_back(needs_grad(p) ? 1 : 0);
        off += tp.cols();
    }
    const int io = static_cast<int>(nodes_.size());
    return make(std::move(out), rg,
                [io, rows, total, part_ids = std::move(part_ids), offsets = std::move(offsets),
                 widths = std::move(widths), part_grad = std::move(part_grad)](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    for (std::size_t p = 0; p < part_ids.size(); ++p) {
                        if (!part_grad[p]) continue;
                        Tensor& g = t.gbuf(part_ids[p]);
                        for (int i = 0; i < rows; ++i) {
                            const Scalar* src = go.data.data() +
                                                static_cast<std::size_t>(i) * total + offsets[p];
                            Scalar* dst =
                                g.data.data() + static_cast<std::size_t>(i) * widths[p];
                            for (int j = 0; j < widths[p]; ++j) dst[j] += src[j];
                        }
                    }
                },
                "concat_cols");
}

Var Tape::row_slice(Var x, int row) {
    const Tensor& tx = value(x);
    if (tx.ndim() != 2 || row < 0 || row >= tx.rows()) {
        throw ShapeError("row_slice: row " + std::to_string(row) + " of " + tx.shape_str());
    }
    const int cols = tx.cols();
    Tensor out({1, cols});
    std::copy(tx.data.data() + static_cast<std::size_t>(row) * cols,
              tx.data.data() + static_cast<std::size_t>(row + 1) * cols, out.data.data());
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io, row, cols](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    Tensor& g = t.gbuf(ix);
                    Scalar* dst = g.data.data() + static_cast<std::size_t>(row) * cols;
                    for (int j = 0; j < cols; ++j) dst[j] += go[static_cast<std::size_t>(j)];
                },
                "row_slice");
}

Var Tape::col_slice(Var x, int start, int len) {
    const Tensor& tx = value(x);
    if (tx.ndim() != 2 || start < 0 || len <= 0 || start + len > tx.cols()) {
        throw ShapeError("col_slice: [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") of " + tx.shape_str());
    }
    const int rows = tx.rows(), cols = tx.cols();
    Tensor out({rows, len});
    for (int i = 0; i < rows; ++i) {
        std::copy(tx.data.data() + static_cast<std::size_t>(i) * cols + start,
                  tx.data.data() + static_cast<std::size_t>(i) * cols + start + len,
                  out.data.data() + static_cast<std::size_t>(i) * len);
    }
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(std::move(out), needs_grad(x),
                [ix, io, start, len, rows, cols](Tape& t) {
                    const Tensor& go = t.nodes_[static_cast<std::size_t>(io)].grad;
                    Tensor& g = t.gbuf(ix);
                    for (int i = 0; i < rows; ++i) {
                        const Scalar* src = go.data.data() + static_cast<std::size_t>(i) * len;
                        Scalar* dst = g.data.data() + static_cast<std::size_t>(i) * cols + start;
                        for (int j = 0; j < len; ++j) dst[j] += src[j];
                    }
                },
                "col_slice");
}

Var Tape::sum(Var x) {
    const Tensor& tx = value(x);
    double total = 0;
    for (Scalar v : tx.data) total += v;
    const int ix = x.id, io = static_cast<int>(nodes_.size());
    return make(Tensor::scalar(static_cast<Scalar>(total)), needs_grad(x),
                [ix, io](Tape& t) {
                    const Scalar go = t.nodes_[static_cast<std::size_t>(io)].grad[0];
                    Tensor& g = t.gbuf(ix);
                    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += go;
                },
                "sum");
}

Var Tape::cross_entropy(Var probabilities, int label) {
    const Tensor& tp = value(probabilities);
    if (label < 0 || static_cast<std::size_t>(label) >= tp.numel()) {
        throw ShapeError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         tp.shape_str());
    }
    const double p = std::max(static_cast<double>(tp[static_cast<std::size_t>(label)]), kProbFloor);
    const int ip = probabilities.id, io = static_cast<int>(nodes_.size());
    return make(Tensor::scalar(static_cast<Scalar>(-std::log(p))), needs_grad(probabilities),
                [ip, io, label, p](Tape& t) {
                    const Scalar go = t.nodes_[static_cast<std::size_t>(io)].grad[0];
                    Tensor& g = t.gbuf(ip);
                    g[static_cast<std::size_t>(label)] += go * static_cast<Scalar>(-1.0 / p);
                },
                "cross_entropy");
}

void Tape::backward(Var loss) {
    const Node& ln = node(loss);
    if (ln.value.numel() != 1) {
        throw ShapeError("backward: loss must be scalar, got " + ln.value.shape_str());
    }
    for (Node& n : nodes_) n.grad = Tensor();
    gbuf(loss.id)[0] = 1;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad || !n.backward || !has_grad(id)) continue;
        n.backward(*this);
    }
    for (Node& n : nodes_) {
        if (n.sink != nullptr && !n.grad.data.empty()) {
            for (std::size_t i = 0; i < n.grad.numel(); ++i) n.sink->gradient[i] += n.grad[i];
        }
    }
}

}  // namespace qwf
