#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qwf/curriculum.hpp"
#include "qwf/data.hpp"
#include "qwf/metrics.hpp"
#include "qwf/model.hpp"
#include "qwf/pos_tagger.hpp"
#include "qwf/tokenizer.hpp"

namespace qwf {

// An example in model-ready form. Models use the fields they need: the fused
// model reads ids/mask/tags, word-level baselines read words, feature
// baselines fill and read feats.
struct EncodedExample {
    int label = 0;
    double p = 0;
    Bucket bucket = Bucket::Easy;
    std::string text;
    std::vector<int> ids;
    std::vector<int> mask;
    std::vector<int> tags;
    std::vector<int> words;
    std::vector<std::vector<std::uint32_t>> feats;
};

// Subword + POS encoding. Pre-tagged records (TSV column 3) keep their tags;
// everything else goes through the bundled tagger.
std::vector<EncodedExample> encode_dataset(const std::vector<LabeledExample>& examples,
                                           const SubwordVocab& vocab, const PosTagger& tagger,
                                           int enc_max_len, int pos_max_len);

// Anything trainable by the phase loop: a forward pass producing a class
// distribution plus parameter access for the optimizer and snapshots.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual Var forward(Tape& tape, const EncodedExample& ex, bool train, std::mt19937& rng) = 0;
    virtual std::vector<Parameter*> parameters() = 0;
    virtual std::vector<Tensor> snapshot() const = 0;
    virtual void restore(const std::vector<Tensor>& snap) = 0;
};

// The full architecture: encoder CLS vector + POS LSTM representation fused
// through the dense softmax head.
class FusedClassifier : public Classifier {
public:
    FusedClassifier(EncoderConfig enc, PosLstmConfig pos, FusionConfig fuse, double dropout,
                    unsigned init_seed);

    Var forward(Tape& tape, const EncodedExample& ex, bool train, std::mt19937& rng) override;
    std::vector<Parameter*> parameters() override { return params_->parameters(); }
    std::vector<Tensor> snapshot() const override { return params_->snapshot(); }
    void restore(const std::vector<Tensor>& snap) override { params_->restore(snap); }

    ModelParams& params() { return *params_; }
    double dropout_rate() const { return dropout_; }

private:
    std::unique_ptr<ModelParams> params_;
    double dropout_;
};

struct TrainConfig {
    int batch_size = 50;
    int epochs_per_phase = 10;
    int patience = 5;
    double dropout = 0.5;
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.01;
    unsigned seed = 1;
    int runs = 1;
    Strategy strategy = Strategy::None;
    std::vector<Bucket> ordering;  // empty -> default_ordering(strategy)
    BucketSpec buckets = BucketSpec::defaults();
    bool reset_optimizer_per_phase = false;

    void validate() const;
};

struct EpochRecord {
    int run = 0;
    int phase = 0;
    int epoch = 0;  // within phase
    double train_loss = 0;
    double dev_accuracy = 0;
    double dev_f1 = 0;
    int examples_seen = 0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    double best_dev_accuracy = -1;
    int best_epoch_index = -1;

    std::string to_csv() const;  // run,phase,epoch,loss,dev_acc,dev_f1
};

// Argmax predictions through the shared metrics path; dropout disabled.
Metrics evaluate(Classifier& model, const std::vector<EncodedExample>& examples);

// Executes the plan phase by phase on one shared model. Optimizer state
// persists across phases unless configured otherwise. Within a phase,
// training stops early after `patience` consecutive epochs without a dev
// accuracy improvement; the returned model is the best-on-dev snapshot seen
// anywhere in the run.
TrainHistory train_curriculum(Classifier& model, const CurriculumPlan& plan,
                              const std::vector<EncodedExample>& train,
                              const std::vector<EncodedExample>& dev, const TrainConfig& config,
                              int run_index = 0);

CurriculumPlan build_plan(const TrainConfig& config, const std::vector<EncodedExample>& train);

struct SeedRunResult {
    unsigned seed = 0;
    Metrics test;
    TrainHistory history;
    std::unique_ptr<Classifier> model;  // best-on-dev snapshot
};

struct AggregateReport {
    std::vector<SeedRunResult> runs;
    Metrics mean;
};

// Trains k models with seeds seed+0..k-1 and reports per-run and mean
// metrics. Runs are independent and may execute in parallel; results are
// identical either way.
AggregateReport run_seeds(const std::function<std::unique_ptr<Classifier>(unsigned)>& make_model,
                          const CurriculumPlan& plan, const std::vector<EncodedExample>& train,
                          const std::vector<EncodedExample>& dev,
                          const std::vector<EncodedExample>& test, const TrainConfig& config,
                          int k, bool parallel = true);

}  // namespace qwf
