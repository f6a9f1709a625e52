#include "qwf/baselines.hpp"

#include <algorithm>
#include <map>

namespace qwf {

const std::vector<std::string>& default_question_words() {
    static const std::vector<std::string> kWords = {
        "what", "why",  "how",  "when", "where", "who",  "whom",   "whose", "which",
        "is",   "are",  "can",  "do",   "does",  "did",  "will",   "would", "should",
        "could"};
    return kWords;
}

Metrics question_word_classify(const std::vector<LabeledExample>& test,
                               const std::vector<std::string>& word_list) {
    if (word_list.empty()) throw ConfigError("question word list is empty");
    if (test.empty()) throw ConfigError("question_word_classify: empty test set");
    std::vector<int> preds, labels;
    for (const LabeledExample& ex : test) {
        const auto tokens = whitespace_tokens(to_lower(ex.record.text));
        const bool hit = !tokens.empty() &&
                         std::find(word_list.begin(), word_list.end(), tokens.front()) !=
                             word_list.end();
        preds.push_back(hit ? kWellFormed : kPoorlyFormed);
        labels.push_back(ex.label);
    }
    return compute_metrics(preds, labels);
}

Metrics majority_class_classify(const std::vector<LabeledExample>& examples) {
    if (examples.empty()) throw ConfigError("majority_class_classify: empty example set");
    long positive = 0;
    for (const LabeledExample& ex : examples)
        if (ex.label == kWellFormed) ++positive;
    const long negative = static_cast<long>(examples.size()) - positive;
    const int majority = positive > negative ? kWellFormed : kPoorlyFormed;
    std::vector<int> preds(examples.size(), majority), labels;
    for (const LabeledExample& ex : examples) labels.push_back(ex.label);
    return compute_metrics(preds, labels);
}

// ---- word BiLSTM ------------------------------------------------------

WordVocab WordVocab::build(const std::vector<LabeledExample>& train) {
    WordVocab v;
    v.words_.push_back("[UNK]");
    std::map<std::string, long> freq;
    for (const LabeledExample& ex : train) {
        for (const std::string& w : whitespace_tokens(to_lower(ex.record.text))) ++freq[w];
    }
    for (const auto& [word, count] : freq) {
        (void)count;
        v.words_.push_back(word);
    }
    for (std::size_t i = 0; i < v.words_.size(); ++i) v.index_[v.words_[i]] = static_cast<int>(i);
    return v;
}

int WordVocab::id(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? unk_id() : it->second;
}

std::vector<int> WordVocab::encode(const std::string& text, int max_len) const {
    std::vector<int> out;
    for (const std::string& w : whitespace_tokens(to_lower(text))) {
        if (static_cast<int>(out.size()) >= max_len) break;
        out.push_back(id(w));
    }
    return out;
}

void fill_word_ids(std::vector<EncodedExample>& examples, const WordVocab& vocab, int max_len) {
    for (EncodedExample& ex : examples) ex.words = vocab.encode(ex.text, max_len);
}

namespace {

Tensor normal_init(std::vector<int> shape, std::mt19937& rng, double stddev = 0.05) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> nd(0.0, stddev);
    for (auto& v : t.data) v = static_cast<Scalar>(nd(rng));
    return t;
}

struct LstmParams {
    Parameter* wx[4];
    Parameter* wh[4];
    Parameter* b[4];
};

struct HC {
    Var h;
    Var c;
};

HC lstm_step(Tape& tape, const LstmParams& p, Var x_t, HC prev) {
    auto gate = [&](int g) {
        return tape.add_bias(tape.add(tape.matmul(x_t, tape.param(*p.wx[g])),
                                      tape.matmul(prev.h, tape.param(*p.wh[g]))),
                             tape.param(*p.b[g]));
    };
    Var i = tape.sigmoid(gate(0));
    Var f = tape.sigmoid(gate(1));
    Var g = tape.tanh_act(gate(2));
    Var o = tape.sigmoid(gate(3));
    HC next;
    next.c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
    next.h = tape.mul(o, tape.tanh_act(next.c));
    return next;
}

}  // namespace

BiLstmClassifier::BiLstmClassifier(int word_vocab_size, BiLstmConfig cfg, unsigned init_seed)
    : cfg_(cfg) {
    if (word_vocab_size < 1 || cfg.emb < 1 || cfg.hidden < 1 || cfg.max_len < 1) {
        throw ConfigError("bilstm config: all dimensions must be >= 1");
    }
    std::mt19937 rng(init_seed);
    add("emb", normal_init({word_vocab_size, cfg_.emb}, rng));
    for (const char* dir : {"fwd", "bwd"}) {
        for (const char* g : {"i", "f", "g", "o"}) {
            add(std::string(dir) + ".wx_" + g, normal_init({cfg_.emb, cfg_.hidden}, rng));
            add(std::string(dir) + ".wh_" + g, normal_init({cfg_.hidden, cfg_.hidden}, rng));
            add(std::string(dir) + ".b_" + g, Tensor::zeros({cfg_.hidden}));
        }
    }
    add("out.w", normal_init({2 * cfg_.hidden, 2}, rng));
    add("out.b", Tensor::zeros({2}));
}

Parameter& BiLstmClassifier::add(const std::string& name, Tensor init) {
    store_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    index_[name] = store_.back().get();
    return *store_.back();
}

Parameter& BiLstmClassifier::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown bilstm parameter '" + name + "'");
    return *it->second;
}

std::vector<Parameter*> BiLstmClassifier::parameters() {
    std::vector<Parameter*> out;
    for (auto& p : store_) out.push_back(p.get());
    return out;
}

std::vector<Tensor> BiLstmClassifier::snapshot() const {
    std::vector<Tensor> out;
    for (const auto& p : store_) out.push_back(p->value);
    return out;
}

void BiLstmClassifier::restore(const std::vector<Tensor>& snap) {
    if (snap.size() != store_.size()) throw ShapeError("bilstm snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) store_[i]->value = snap[i];
}

Var BiLstmClassifier::forward(Tape& tape, const EncodedExample& ex, bool, std::mt19937&) {
    LstmParams fwd{}, bwd{};
    const char* gates[4] = {"i", "f", "g", "o"};
    for (int g = 0; g < 4; ++g) {
        fwd.wx[g] = &get(std::string("fwd.wx_") + gates[g]);
        fwd.wh[g] = &get(std::string("fwd.wh_") + gates[g]);
        fwd.b[g] = &get(std::string("fwd.b_") + gates[g]);
        bwd.wx[g] = &get(std::string("bwd.wx_") + gates[g]);
        bwd.wh[g] = &get(std::string("bwd.wh_") + gates[g]);
        bwd.b[g] = &get(std::string("bwd.b_") + gates[g]);
    }

    std::vector<int> words = ex.words;
    if (static_cast<int>(words.size()) > cfg_.max_len)
        words.resize(static_cast<std::size_t>(cfg_.max_len));

    HC f{tape.constant(Tensor::zeros({1, cfg_.hidden})),
         tape.constant(Tensor::zeros({1, cfg_.hidden}))};
    HC b = f;
    if (!words.empty()) {
        Var emb = tape.embedding_lookup(tape.param(get("emb")), words);
        const int n = static_cast<int>(words.size());
        for (int t = 0; t < n; ++t) f = lstm_step(tape, fwd, tape.row_slice(emb, t), f);
        for (int t = n - 1; t >= 0; --t) b = lstm_step(tape, bwd, tape.row_slice(emb, t), b);
    }
    Var concat = tape.concat_cols({f.h, b.h});
    return tape.softmax(tape.add_bias(tape.matmul(concat, tape.param(get("out.w"))),
                                      tape.param(get("out.b"))),
                        1);
}

Metrics word_bilstm_baseline(const DatasetSplits& splits, const BiLstmConfig& cfg,
                             const TrainConfig& train_cfg) {
    const WordVocab vocab = WordVocab::build(splits.train);
    SubwordVocab dummy = SubwordVocab::from_tokens({"[PAD]", "[UNK]", "[CLS]"});
    PosTagger tagger;
    auto enc = [&](const std::vector<LabeledExample>& xs) {
        auto encoded = encode_dataset(xs, dummy, tagger, 2, 2);
        fill_word_ids(encoded, vocab, cfg.max_len);
        return encoded;
    };
    std::vector<EncodedExample> train = enc(splits.train);
    std::vector<EncodedExample> dev = enc(splits.dev);
    std::vector<EncodedExample> test = enc(splits.test);

    BiLstmClassifier model(vocab.size(), cfg, train_cfg.seed);
    train_curriculum(model, no_curriculum_plan(static_cast<int>(train.size())), train, dev,
                     train_cfg);
    return evaluate(model, test);
}

// ---- hashed n-gram feed-forward network --------------------------------

void NgramFeatureSpec::validate() const {
    if (hash_buckets < 1) throw ConfigError("hash_buckets must be >= 1");
    if (emb_dim < 1 || hidden1 < 1 || hidden2 < 1) {
        throw ConfigError("ngram ffnn dimensions must be >= 1");
    }
    if (family_names().empty()) throw ConfigError("no n-gram families enabled");
    for (int o : word_orders)
        if (o < 1) throw ConfigError("word n-gram order must be >= 1");
    for (int o : char_orders)
        if (o < 1) throw ConfigError("char n-gram order must be >= 1");
    for (int o : pos_orders)
        if (o < 1) throw ConfigError("pos n-gram order must be >= 1");
}

std::vector<std::string> NgramFeatureSpec::family_names() const {
    std::vector<std::string> out;
    if (use_words)
        for (int o : word_orders) out.push_back("w" + std::to_string(o));
    if (use_chars)
        for (int o : char_orders) out.push_back("c" + std::to_string(o));
    if (use_pos)
        for (int o : pos_orders) out.push_back("p" + std::to_string(o));
    return out;
}

namespace {
constexpr const char* kJoiner = "\xe2\x96\x81";  // "▁"
}

std::vector<std::string> word_ngrams(const std::string& text, int order) {
    const auto tokens = whitespace_tokens(to_lower(text));
    std::vector<std::string> out;
    if (order < 1 || static_cast<int>(tokens.size()) < order) return out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(order) <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (int k = 1; k < order; ++k) {
            gram += kJoiner;
            gram += tokens[i + static_cast<std::size_t>(k)];
        }
        out.push_back(std::move(gram));
    }
    return out;
}

std::vector<std::string> char_ngrams(const std::string& text, int order) {
    std::vector<std::string> out;
    if (order < 1) return out;
    for (const std::string& word : whitespace_tokens(to_lower(text))) {
        const std::string marked = "^" + word + "$";
        if (static_cast<int>(marked.size()) < order) continue;
        for (std::size_t i = 0; i + static_cast<std::size_t>(order) <= marked.size(); ++i) {
            out.push_back(marked.substr(i, static_cast<std::size_t>(order)));
        }
    }
    return out;
}

std::vector<std::string> pos_ngrams(const std::vector<std::string>& tag_names, int order) {
    std::vector<std::string> out;
    if (order < 1 || static_cast<int>(tag_names.size()) < order) return out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(order) <= tag_names.size(); ++i) {
        std::string gram = tag_names[i];
        for (int k = 1; k < order; ++k) {
            gram += kJoiner;
            gram += tag_names[i + static_cast<std::size_t>(k)];
        }
        out.push_back(std::move(gram));
    }
    return out;
}

std::vector<std::vector<std::uint32_t>> extract_features(const std::string& text,
                                                         const PosTagger& tagger,
                                                         const NgramFeatureSpec& spec) {
    std::vector<std::vector<std::uint32_t>> out;
    auto hash_into = [&](const std::string& family, const std::vector<std::string>& grams) {
        std::vector<std::uint32_t> ids;
        ids.reserve(grams.size());
        for (const std::string& g : grams) {
            const std::uint64_t h = fnv1a64(g, fnv1a64(family + ":"));
            ids.push_back(static_cast<std::uint32_t>(h % static_cast<std::uint64_t>(spec.hash_buckets)));
        }
        out.push_back(std::move(ids));
    };
    if (spec.use_words) {
        for (int o : spec.word_orders) hash_into("w" + std::to_string(o), word_ngrams(text, o));
    }
    if (spec.use_chars) {
        for (int o : spec.char_orders) hash_into("c" + std::to_string(o), char_ngrams(text, o));
    }
    if (spec.use_pos) {
        std::vector<std::string> names;
        for (int id : tagger.tag(text)) names.push_back(tags::names()[static_cast<std::size_t>(id)]);
        for (int o : spec.pos_orders) hash_into("p" + std::to_string(o), pos_ngrams(names, o));
    }
    return out;
}

NgramFfnnClassifier::NgramFfnnClassifier(NgramFeatureSpec spec, unsigned init_seed)
    : spec_(std::move(spec)) {
    spec_.validate();
    std::mt19937 rng(init_seed);
    const auto families = spec_.family_names();
    for (const std::string& f : families) {
        add("emb." + f, normal_init({spec_.hash_buckets, spec_.emb_dim}, rng, 0.02));
    }
    const int in_dim = static_cast<int>(families.size()) * spec_.emb_dim;
    add("w1", normal_init({in_dim, spec_.hidden1}, rng, 0.05));
    add("b1", Tensor::zeros({spec_.hidden1}));
    add("w2", normal_init({spec_.hidden1, spec_.hidden2}, rng, 0.05));
    add("b2", Tensor::zeros({spec_.hidden2}));
    add("w3", normal_init({spec_.hidden2, 2}, rng, 0.05));
    add("b3", Tensor::zeros({2}));
}

Parameter& NgramFfnnClassifier::add(const std::string& name, Tensor init) {
    store_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    index_[name] = store_.back().get();
    return *store_.back();
}

void NgramFfnnClassifier::prepare(std::vector<EncodedExample>& examples,
                                  const PosTagger& tagger) const {
    for (EncodedExample& ex : examples) ex.feats = extract_features(ex.text, tagger, spec_);
}

std::vector<Parameter*> NgramFfnnClassifier::parameters() {
    std::vector<Parameter*> out;
    for (auto& p : store_) out.push_back(p.get());
    return out;
}

std::vector<Tensor> NgramFfnnClassifier::snapshot() const {
    std::vector<Tensor> out;
    for (const auto& p : store_) out.push_back(p->value);
    return out;
}

void NgramFfnnClassifier::restore(const std::vector<Tensor>& snap) {
    if (snap.size() != store_.size()) throw ShapeError("ffnn snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) store_[i]->value = snap[i];
}

Var NgramFfnnClassifier::forward(Tape& tape, const EncodedExample& ex, bool, std::mt19937&) {
    const auto families = spec_.family_names();
    if (ex.feats.size() != families.size()) {
        throw ShapeError("example has " + std::to_string(ex.feats.size()) +
                         " feature families, spec wants " + std::to_string(families.size()) +
                         " (was prepare() run?)");
    }
    std::vector<Var> pooled;
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto& ids32 = ex.feats[f];
        if (ids32.empty()) {
            pooled.push_back(tape.constant(Tensor::zeros({1, spec_.emb_dim})));
            continue;
        }
        std::vector<int> ids(ids32.begin(), ids32.end());
        Var emb = tape.embedding_lookup(
            tape.param(*index_.at("emb." + families[f])), ids);
        Var ones = tape.constant(Tensor::full({1, static_cast<int>(ids.size())}, 1.0));
        pooled.push_back(tape.scale(tape.matmul(ones, emb),
                                    static_cast<Scalar>(1.0 / static_cast<double>(ids.size()))));
    }
    Var x = tape.concat_cols(pooled);
    Var h1 = tape.relu(tape.add_bias(tape.matmul(x, tape.param(*index_.at("w1"))),
                                     tape.param(*index_.at("b1"))));
    Var h2 = tape.relu(tape.add_bias(tape.matmul(h1, tape.param(*index_.at("w2"))),
                                     tape.param(*index_.at("b2"))));
    return tape.softmax(tape.add_bias(tape.matmul(h2, tape.param(*index_.at("w3"))),
                                      tape.param(*index_.at("b3"))),
                        1);
}

Metrics ngram_ffnn_baseline(const DatasetSplits& splits, const NgramFeatureSpec& spec,
                            const TrainConfig& train_cfg) {
    SubwordVocab dummy = SubwordVocab::from_tokens({"[PAD]", "[UNK]", "[CLS]"});
    PosTagger tagger;
    NgramFfnnClassifier model(spec, train_cfg.seed);
    auto enc = [&](const std::vector<LabeledExample>& xs) {
        auto encoded = encode_dataset(xs, dummy, tagger, 2, 2);
        model.prepare(encoded, tagger);
        return encoded;
    };
    std::vector<EncodedExample> train = enc(splits.train);
    std::vector<EncodedExample> dev = enc(splits.dev);
    std::vector<EncodedExample> test = enc(splits.test);
    train_curriculum(model, no_curriculum_plan(static_cast<int>(train.size())), train, dev,
                     train_cfg);
    return evaluate(model, test);
}

}  // namespace qwf
