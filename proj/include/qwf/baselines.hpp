#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qwf/data.hpp"
#include "qwf/trainer.hpp"

namespace qwf {

// WH words plus common leading auxiliaries. The exact inventory is
// configurable; accuracy tolerances in comparisons account for that.
const std::vector<std::string>& default_question_words();

// Predict well-formed iff the first token (lowercased) is in word_list.
Metrics question_word_classify(const std::vector<LabeledExample>& test,
                               const std::vector<std::string>& word_list =
                                   default_question_words());

// Constant prediction of the majority label of the given set.
Metrics majority_class_classify(const std::vector<LabeledExample>& examples);

// ---- word BiLSTM ------------------------------------------------------

class WordVocab {
public:
    static WordVocab build(const std::vector<LabeledExample>& train);
    int id(const std::string& word) const;  // unk for unseen
    int size() const { return static_cast<int>(words_.size()); }
    int unk_id() const { return 0; }
    std::vector<int> encode(const std::string& text, int max_len) const;

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
};

struct BiLstmConfig {
    int emb = 32;
    int hidden = 32;
    int max_len = 30;
};

// Bidirectional LSTM over word embeddings; forward and backward final states
// concatenated into a softmax layer.
class BiLstmClassifier : public Classifier {
public:
    BiLstmClassifier(int word_vocab_size, BiLstmConfig cfg, unsigned init_seed);

    Var forward(Tape& tape, const EncodedExample& ex, bool train, std::mt19937& rng) override;
    std::vector<Parameter*> parameters() override;
    std::vector<Tensor> snapshot() const override;
    void restore(const std::vector<Tensor>& snap) override;

    Parameter& get(const std::string& name);

private:
    BiLstmConfig cfg_;
    std::vector<std::unique_ptr<Parameter>> store_;
    std::unordered_map<std::string, Parameter*> index_;
    Parameter& add(const std::string& name, Tensor init);
};

void fill_word_ids(std::vector<EncodedExample>& examples, const WordVocab& vocab, int max_len);

Metrics word_bilstm_baseline(const DatasetSplits& splits, const BiLstmConfig& cfg,
                             const TrainConfig& train_cfg);

// ---- hashed n-gram feed-forward network --------------------------------

struct NgramFeatureSpec {
    std::vector<int> word_orders{1, 2};
    std::vector<int> char_orders{3, 4};
    std::vector<int> pos_orders{1, 2, 3};
    bool use_words = true;
    bool use_chars = true;
    bool use_pos = true;
    int hash_buckets = 1 << 15;
    int emb_dim = 16;
    int hidden1 = 256;
    int hidden2 = 128;

    void validate() const;
    // one family per enabled (type, order) pair
    std::vector<std::string> family_names() const;
};

// Pure feature extraction; exposed for direct verification.
std::vector<std::string> word_ngrams(const std::string& text, int order);
// per word, with ^ and $ boundary markers, never across spaces
std::vector<std::string> char_ngrams(const std::string& text, int order);
std::vector<std::string> pos_ngrams(const std::vector<std::string>& tag_names, int order);

// Hashed bucket ids for every enabled family of one query.
std::vector<std::vector<std::uint32_t>> extract_features(const std::string& text,
                                                         const PosTagger& tagger,
                                                         const NgramFeatureSpec& spec);

// Mean-pooled bucket embeddings per family, concatenated into a two hidden
// layer relu network with a softmax output.
class NgramFfnnClassifier : public Classifier {
public:
    NgramFfnnClassifier(NgramFeatureSpec spec, unsigned init_seed);

    // fills ex.feats for every example
    void prepare(std::vector<EncodedExample>& examples, const PosTagger& tagger) const;

    Var forward(Tape& tape, const EncodedExample& ex, bool train, std::mt19937& rng) override;
    std::vector<Parameter*> parameters() override;
    std::vector<Tensor> snapshot() const override;
    void restore(const std::vector<Tensor>& snap) override;

    const NgramFeatureSpec& spec() const { return spec_; }

private:
    NgramFeatureSpec spec_;
    std::vector<std::unique_ptr<Parameter>> store_;
    std::unordered_map<std::string, Parameter*> index_;
    Parameter& add(const std::string& name, Tensor init);
};

Metrics ngram_ffnn_baseline(const DatasetSplits& splits, const NgramFeatureSpec& spec,
                            const TrainConfig& train_cfg);

}  // namespace qwf
