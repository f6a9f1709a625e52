#include "qwf/model.hpp"

#include <cmath>

#include "qwf/pos_tagger.hpp"

namespace qwf {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

Tensor normal_init(std::vector<int> shape, std::mt19937& rng, double stddev = 0.02) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> nd(0.0, stddev);
    for (auto& v : t.data) v = static_cast<Scalar>(nd(rng));
    return t;
}

}  // namespace

void EncoderConfig::validate() const {
    require(layers >= 1 && heads >= 1 && dim >= 1 && ff >= 1 && max_len >= 1 && vocab_size >= 4,
            "encoder config: all dimensions must be >= 1 and vocab_size must cover the specials");
    require(dim % heads == 0, "encoder config: dim " + std::to_string(dim) +
                                  " not divisible by heads " + std::to_string(heads));
}

void PosLstmConfig::validate() const {
    require(tag_vocab >= 2 && emb >= 1 && hidden >= 1 && proj >= 1 && max_len >= 1,
            "pos-lstm config: all dimensions must be >= 1");
}

void FusionConfig::validate() const {
    require(hidden >= 1 && classes >= 2, "fusion config: hidden >= 1 and classes >= 2 required");
}

ModelParams::ModelParams(EncoderConfig enc, PosLstmConfig pos, FusionConfig fuse,
                         std::mt19937& rng)
    : enc_(enc), pos_(pos), fuse_(fuse) {
    enc_.validate();
    pos_.validate();
    fuse_.validate();

    add("enc.tok_emb", normal_init({enc_.vocab_size, enc_.dim}, rng));
    add("enc.pos_emb", normal_init({enc_.max_len, enc_.dim}, rng));
    for (int l = 0; l < enc_.layers; ++l) {
        const std::string p = "enc.l" + std::to_string(l) + ".";
        for (const char* w : {"wq", "wk", "wv", "wo"})
            add(p + w, normal_init({enc_.dim, enc_.dim}, rng));
        for (const char* b : {"bq", "bk", "bv", "bo"}) add(p + b, Tensor::zeros({enc_.dim}));
        add(p + "ln1_g", Tensor::full({enc_.dim}, 1.0));
        add(p + "ln1_b", Tensor::zeros({enc_.dim}));
        add(p + "w1", normal_init({enc_.dim, enc_.ff}, rng));
        add(p + "b1", Tensor::zeros({enc_.ff}));
        add(p + "w2", normal_init({enc_.ff, enc_.dim}, rng));
        add(p + "b2", Tensor::zeros({enc_.dim}));
        add(p + "ln2_g", Tensor::full({enc_.dim}, 1.0));
        add(p + "ln2_b", Tensor::zeros({enc_.dim}));
    }

    add("pos.emb", normal_init({pos_.tag_vocab, pos_.emb}, rng));
    for (const char* g : {"i", "f", "g", "o"}) {
        add(std::string("pos.lstm.wx_") + g, normal_init({pos_.emb, pos_.hidden}, rng));
        add(std::string("pos.lstm.wh_") + g, normal_init({pos_.hidden, pos_.hidden}, rng));
        add(std::string("pos.lstm.b_") + g, Tensor::zeros({pos_.hidden}));
    }
    add("pos.w_c", normal_init({pos_.hidden, pos_.proj}, rng));
    add("pos.b_c", Tensor::zeros({pos_.proj}));

    const int fused_in = enc_.dim + pos_.proj;
    add("fuse.w_t", normal_init({fused_in, fuse_.hidden}, rng));
    add("fuse.b_t", Tensor::zeros({fuse_.hidden}));
    add("fuse.w_s", normal_init({fuse_.hidden, fuse_.classes}, rng));
    add("fuse.b_s", Tensor::zeros({fuse_.classes}));
}

Parameter& ModelParams::add(const std::string& name, Tensor init) {
    store_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    order_.push_back(name);
    index_[name] = store_.back().get();
    return *store_.back();
}

Parameter& ModelParams::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return *it->second;
}

const Parameter& ModelParams::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return *it->second;
}

std::vector<Parameter*> ModelParams::parameters() {
    std::vector<Parameter*> out;
    out.reserve(store_.size());
    for (auto& p : store_) out.push_back(p.get());
    return out;
}

void ModelParams::zero_grad() {
    for (auto& p : store_) p->zero_grad();
}

std::vector<Tensor> ModelParams::snapshot() const {
    std::vector<Tensor> snap;
    snap.reserve(store_.size());
    for (const auto& p : store_) snap.push_back(p->value);
    return snap;
}

void ModelParams::restore(const std::vector<Tensor>& snap) {
    if (snap.size() != store_.size()) throw ShapeError("snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) {
        if (!snap[i].same_shape(store_[i]->value)) {
            throw ShapeError("snapshot shape mismatch for '" + store_[i]->name + "'");
        }
        store_[i]->value = snap[i];
    }
}

EncoderTrace encoder_forward(Tape& tape, ModelParams& params, const std::vector<int>& ids,
                             const std::vector<int>& mask) {
    const EncoderConfig& cfg = params.encoder_config();
    if (static_cast<int>(ids.size()) != cfg.max_len ||
        static_cast<int>(mask.size()) != cfg.max_len) {
        throw ShapeError("encoder_forward: expected " + std::to_string(cfg.max_len) +
                         " ids and mask entries, got " + std::to_string(ids.size()) + "/" +
                         std::to_string(mask.size()));
    }
    const int head_dim = cfg.dim / cfg.heads;
    const Scalar att_scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(head_dim)));

    std::vector<int> positions(static_cast<std::size_t>(cfg.max_len));
    for (int i = 0; i < cfg.max_len; ++i) positions[static_cast<std::size_t>(i)] = i;

    Var x = tape.add(tape.embedding_lookup(tape.param(params.get("enc.tok_emb")), ids),
                     tape.embedding_lookup(tape.param(params.get("enc.pos_emb")), positions));

    EncoderTrace trace;
    trace.attention.resize(static_cast<std::size_t>(cfg.layers));
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string p = "enc.l" + std::to_string(l) + ".";
        Var q = tape.add_bias(tape.matmul(x, tape.param(params.get(p + "wq"))),
                              tape.param(params.get(p + "bq")));
        Var k = tape.add_bias(tape.matmul(x, tape.param(params.get(p + "wk"))),
                              tape.param(params.get(p + "bk")));
        Var v = tape.add_bias(tape.matmul(x, tape.param(params.get(p + "wv"))),
                              tape.param(params.get(p + "bv")));

        std::vector<Var> heads;
        heads.reserve(static_cast<std::size_t>(cfg.heads));
        for (int h = 0; h < cfg.heads; ++h) {
            Var qh = tape.col_slice(q, h * head_dim, head_dim);
            Var kh = tape.col_slice(k, h * head_dim, head_dim);
            Var vh = tape.col_slice(v, h * head_dim, head_dim);
            Var scores = tape.scale(tape.matmul_nt(qh, kh), att_scale);
            Var weights = tape.masked_softmax_rows(scores, mask);
            trace.attention[static_cast<std::size_t>(l)].push_back(weights);
            heads.push_back(tape.matmul(weights, vh));
        }
        Var attn = tape.add_bias(tape.matmul(tape.concat_cols(heads),
                                             tape.param(params.get(p + "wo"))),
                                 tape.param(params.get(p + "bo")));
        x = tape.layer_norm(tape.add(x, attn), tape.param(params.get(p + "ln1_g")),
                            tape.param(params.get(p + "ln1_b")));

        Var ff = tape.add_bias(
            tape.matmul(tape.gelu(tape.add_bias(tape.matmul(x, tape.param(params.get(p + "w1"))),
                                                tape.param(params.get(p + "b1")))),
                        tape.param(params.get(p + "w2"))),
            tape.param(params.get(p + "b2")));
        x = tape.layer_norm(tape.add(x, ff), tape.param(params.get(p + "ln2_g")),
                            tape.param(params.get(p + "ln2_b")));
    }
    trace.hidden = x;
    trace.cls = tape.row_slice(x, 0);
    return trace;
}

LstmState lstm_cell_step(Tape& tape, ModelParams& params, Var x_t, LstmState prev) {
    auto gate = [&](const char* g) {
        return tape.add_bias(
            tape.add(tape.matmul(x_t, tape.param(params.get(std::string("pos.lstm.wx_") + g))),
                     tape.matmul(prev.h, tape.param(params.get(std::string("pos.lstm.wh_") + g)))),
            tape.param(params.get(std::string("pos.lstm.b_") + g)));
    };
    Var i = tape.sigmoid(gate("i"));
    Var f = tape.sigmoid(gate("f"));
    Var g = tape.tanh_act(gate("g"));
    Var o = tape.sigmoid(gate("o"));
    LstmState next;
    next.c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
    next.h = tape.mul(o, tape.tanh_act(next.c));
    return next;
}

Var pos_forward(Tape& tape, ModelParams& params, const std::vector<int>& tag_ids) {
    const PosLstmConfig& cfg = params.pos_config();
    if (static_cast<int>(tag_ids.size()) != cfg.max_len) {
        throw ShapeError("pos_forward: expected " + std::to_string(cfg.max_len) + " tags, got " +
                         std::to_string(tag_ids.size()));
    }
    int real_steps = 0;
    for (std::size_t i = 0; i < tag_ids.size(); ++i) {
        if (tag_ids[i] != tags::kPad) real_steps = static_cast<int>(i) + 1;
    }

    LstmState state{tape.constant(Tensor::zeros({1, cfg.hidden})),
                    tape.constant(Tensor::zeros({1, cfg.hidden}))};
    if (real_steps > 0) {
        Var emb = tape.embedding_lookup(tape.param(params.get("pos.emb")), tag_ids);
        for (int step = 0; step < real_steps; ++step) {
            state = lstm_cell_step(tape, params, tape.row_slice(emb, step), state);
        }
    }
    return tape.relu(tape.add_bias(tape.matmul(state.h, tape.param(params.get("pos.w_c"))),
                                   tape.param(params.get("pos.b_c"))));
}

Var fuse_classify(Tape& tape, ModelParams& params, Var cls, Var pos_repr, double dropout_rate,
                  bool train, std::mt19937& rng) {
    Var fused = tape.concat_cols({cls, pos_repr});
    fused = tape.dropout(fused, dropout_rate, rng, train);
    Var s = tape.relu(tape.add_bias(tape.matmul(fused, tape.param(params.get("fuse.w_t"))),
                                    tape.param(params.get("fuse.b_t"))));
    return tape.softmax(tape.add_bias(tape.matmul(s, tape.param(params.get("fuse.w_s"))),
                                      tape.param(params.get("fuse.b_s"))),
                        1);
}

std::vector<std::vector<Tensor>> attention_maps(ModelParams& params, const std::vector<int>& ids,
                                                const std::vector<int>& mask) {
    Tape tape(/*grad_enabled=*/false);
    EncoderTrace trace = encoder_forward(tape, params, ids, mask);
    std::vector<std::vector<Tensor>> maps;
    maps.reserve(trace.attention.size());
    for (const auto& layer : trace.attention) {
        std::vector<Tensor> row;
        row.reserve(layer.size());
        for (Var head : layer) row.push_back(tape.value(head));
        maps.push_back(std::move(row));
    }
    return maps;
}

}  // namespace qwf
