#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>

#include "doctest.h"
#include "qwf/baselines.hpp"

using namespace qwf;

namespace {
LabeledExample make_example(const std::string& text, double p) {
    LabeledExample ex;
    ex.record.text = text;
    ex.record.p = p;
    ex.label = p >= 0.8 ? kWellFormed : kPoorlyFormed;
    ex.bucket = assign_bucket(p, BucketSpec::defaults());
    return ex;
}
}  // namespace

TEST_CASE("question word rule on reference queries") {
    const std::vector<LabeledExample> test = {
        make_example("How many potatoes is 550 grams ?", 0.8),  // starts with "how" -> positive
        make_example("1961 penney worth ?", 0.0),               // starts with a number -> negative
    };
    const Metrics m = question_word_classify(test);
    CHECK(m.accuracy == 1.0);  // both rule decisions match the labels here

    // flipping the labels shows the rule itself, not the data, drives it
    const std::vector<LabeledExample> flipped = {
        make_example("How many potatoes is 550 grams ?", 0.0),
        make_example("1961 penney worth ?", 1.0),
    };
    CHECK(question_word_classify(flipped).accuracy == 0.0);

    const std::vector<std::string> custom = {"zork"};
    const Metrics custom_m = question_word_classify(test, custom);
    CHECK(custom_m.accuracy == 0.5);  // everything predicted negative
    CHECK_THROWS_AS(question_word_classify(test, {}), ConfigError);
}

TEST_CASE("majority baseline accuracies") {
    std::vector<LabeledExample> balanced;
    for (int i = 0; i < 10; ++i) balanced.push_back(make_example("q ?", i % 2 ? 1.0 : 0.0));
    CHECK(majority_class_classify(balanced).accuracy == 0.5);

    std::vector<LabeledExample> single;
    for (int i = 0; i < 7; ++i) single.push_back(make_example("q ?", 1.0));
    CHECK(majority_class_classify(single).accuracy == 1.0);

    std::vector<LabeledExample> skewed;
    for (int i = 0; i < 10; ++i) skewed.push_back(make_example("q", i < 6 ? 0.0 : 1.0));
    CHECK(majority_class_classify(skewed).accuracy == doctest::Approx(0.6));
}

TEST_CASE("rule baselines are deterministic and training-free") {
    const DatasetSplits s = synth_dataset(41, 300);
    const Metrics a = question_word_classify(s.test);
    const Metrics b = question_word_classify(s.test);
    CHECK(a.accuracy == b.accuracy);
    const Metrics ma = majority_class_classify(s.test);
    const Metrics mb = majority_class_classify(s.test);
    CHECK(ma.accuracy == mb.accuracy);
}

TEST_CASE("word n-grams of 'a b c'") {
    const auto uni = word_ngrams("a b c", 1);
    CHECK(uni == std::vector<std::string>{"a", "b", "c"});
    const auto bi = word_ngrams("a b c", 2);
    REQUIRE(bi.size() == 2);
    CHECK(bi[0] == std::string("a") + "\xe2\x96\x81" + "b");
    CHECK(bi[1] == std::string("b") + "\xe2\x96\x81" + "c");
    CHECK(word_ngrams("a", 2).empty());
}

TEST_CASE("character trigrams of 'abc' use boundary markers, never cross spaces") {
    const auto tri = char_ngrams("abc", 3);
    CHECK(tri == std::vector<std::string>{"^ab", "abc", "bc$"});
    const auto two_words = char_ngrams("ab cd", 3);
    CHECK(two_words == std::vector<std::string>{"^ab", "ab$", "^cd", "cd$"});
    for (const std::string& g : two_words) CHECK(g.find(' ') == std::string::npos);
}

TEST_CASE("POS n-grams") {
    const auto bi = pos_ngrams({"NNS", "VBP", "."}, 2);
    REQUIRE(bi.size() == 2);
    CHECK(bi[0] == std::string("NNS") + "\xe2\x96\x81" + "VBP");
    const auto tri = pos_ngrams({"NNS", "VBP"}, 3);
    CHECK(tri.empty());
}

TEST_CASE("feature extraction is pure and respects family selection") {
    PosTagger tagger;
    NgramFeatureSpec all;
    const auto f1 = extract_features("how many potatoes ?", tagger, all);
    const auto f2 = extract_features("how many potatoes ?", tagger, all);
    CHECK(f1 == f2);
    CHECK(f1.size() == 7);  // w1 w2 c3 c4 p1 p2 p3
    for (const auto& fam : f1) {
        for (std::uint32_t id : fam) CHECK(id < static_cast<std::uint32_t>(all.hash_buckets));
    }

    NgramFeatureSpec word_only = all;
    word_only.use_chars = false;
    word_only.use_pos = false;
    CHECK(extract_features("how many ?", tagger, word_only).size() == 2);

    // adding POS features widens the input by |POS families| x emb_dim
    NgramFeatureSpec word_pos = word_only;
    word_pos.use_pos = true;
    const int width_delta = static_cast<int>(word_pos.family_names().size() -
                                             word_only.family_names().size()) *
                            all.emb_dim;
    CHECK(width_delta == 3 * all.emb_dim);
}

TEST_CASE("bilstm output is a distribution and both directions contribute") {
    const DatasetSplits s = synth_dataset(43, 60);
    const WordVocab vocab = WordVocab::build(s.train);
    BiLstmConfig cfg;
    cfg.emb = 8;
    cfg.hidden = 8;
    BiLstmClassifier model(vocab.size(), cfg, 5);

    SubwordVocab dummy = SubwordVocab::from_tokens({"[PAD]", "[UNK]", "[CLS]"});
    PosTagger tagger;
    auto encoded = encode_dataset(s.train, dummy, tagger, 2, 2);
    fill_word_ids(encoded, vocab, cfg.max_len);

    std::mt19937 rng(0);
    Tape tape(false);
    Var o = model.forward(tape, encoded[0], false, rng);
    const Tensor& dist = tape.value(o);
    CHECK(dist.at(0, 0) + dist.at(0, 1) == doctest::Approx(1.0).epsilon(1e-9));

    // zero one direction: the output must change (both final states feed in)
    const auto before = tape.value(o).data;
    for (const char* g : {"i", "f", "g", "o"}) {
        model.get(std::string("bwd.wx_") + g).value.fill(0);
        model.get(std::string("bwd.wh_") + g).value.fill(0);
    }
    Tape tape2(false);
    const auto after = tape2.value(model.forward(tape2, encoded[0], false, rng)).data;
    CHECK(before != after);
}

TEST_CASE("bilstm learns the synthetic task well past the majority rate") {
    const DatasetSplits s = synth_dataset(47, 600);
    BiLstmConfig cfg;
    cfg.emb = 16;
    cfg.hidden = 16;
    TrainConfig tc;
    tc.batch_size = 25;
    tc.epochs_per_phase = 8;
    tc.lr = 1e-2;
    tc.dropout = 0.0;
    tc.seed = 9;
    const Metrics bilstm = word_bilstm_baseline(s, cfg, tc);
    const Metrics majority = majority_class_classify(s.test);
    CHECK(bilstm.accuracy >= majority.accuracy + 0.10);
}

TEST_CASE("ngram ffnn: variants select families and the model trains") {
    const DatasetSplits s = synth_dataset(53, 400);
    NgramFeatureSpec spec;
    spec.hash_buckets = 1 << 10;
    spec.emb_dim = 8;
    spec.hidden1 = 32;
    spec.hidden2 = 16;
    TrainConfig tc;
    tc.batch_size = 25;
    tc.epochs_per_phase = 6;
    tc.lr = 5e-3;
    tc.dropout = 0.0;
    tc.seed = 9;
    const Metrics wcp = ngram_ffnn_baseline(s, spec, tc);
    const Metrics majority = majority_class_classify(s.test);
    CHECK(wcp.accuracy > majority.accuracy);

    NgramFeatureSpec wp = spec;  // word + POS variant
    wp.use_chars = false;
    const Metrics wp_m = ngram_ffnn_baseline(s, wp, tc);
    CHECK(wp_m.accuracy > 0.5);
}

TEST_CASE("ngram ffnn rejects un-prepared examples") {
    NgramFeatureSpec spec;
    spec.hash_buckets = 64;
    spec.emb_dim = 4;
    spec.hidden1 = 8;
    spec.hidden2 = 8;
    NgramFfnnClassifier model(spec, 1);
    EncodedExample ex;
    ex.text = "how many ?";
    Tape tape;
    std::mt19937 rng(0);
    CHECK_THROWS_AS(model.forward(tape, ex, false, rng), ShapeError);
}
