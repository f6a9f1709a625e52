#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "qwf/trainer.hpp"

using namespace qwf;

namespace {

// Deterministic dev-accuracy script: training forwards return a fixed
// distribution, evaluation forwards hit the scripted accuracy for the
// current evaluation pass.
class ScriptedClassifier : public Classifier {
public:
    ScriptedClassifier(std::vector<double> dev_accuracies, std::size_t dev_size)
        : accuracies_(std::move(dev_accuracies)), dev_size_(dev_size) {}

    Var forward(Tape& tape, const EncodedExample& ex, bool train, std::mt19937&) override {
        if (train) return tape.constant(Tensor::row({0.5, 0.5}));
        const std::size_t pass = std::min(eval_calls_ / dev_size_, accuracies_.size() - 1);
        const std::size_t call = eval_calls_ % dev_size_;
        ++eval_calls_;
        const bool correct =
            static_cast<double>(call) < accuracies_[pass] * static_cast<double>(dev_size_);
        const int predicted = correct ? ex.label : 1 - ex.label;
        return tape.constant(predicted == 1 ? Tensor::row({0.1, 0.9}) : Tensor::row({0.9, 0.1}));
    }
    std::vector<Parameter*> parameters() override { return {}; }
    std::vector<Tensor> snapshot() const override { return {}; }
    void restore(const std::vector<Tensor>&) override {}

private:
    std::vector<double> accuracies_;
    std::size_t dev_size_;
    std::size_t eval_calls_ = 0;
};

std::vector<EncodedExample> tiny_examples(int n, int label_period = 2) {
    std::vector<EncodedExample> out;
    for (int i = 0; i < n; ++i) {
        EncodedExample ex;
        ex.label = (i % label_period == 0) ? 1 : 0;
        ex.ids = {2, 3, 0, 0};
        ex.mask = {1, 1, 0, 0};
        ex.tags = {3, 0};
        ex.bucket = Bucket::Easy;
        out.push_back(ex);
    }
    return out;
}

// A linearly separable toy task: positives carry the marker token "good",
// negatives carry "bad".
struct SeparableTask {
    SubwordVocab vocab = SubwordVocab::train({"this query is good ?", "this query is bad"}, 40);
    PosTagger tagger;
    std::vector<EncodedExample> train;

    explicit SeparableTask(int n) {
        std::vector<LabeledExample> examples;
        for (int i = 0; i < n; ++i) {
            QueryRecord rec;
            const bool positive = i % 2 == 0;
            rec.text = positive ? "this query is good ?" : "this query is bad";
            rec.p = positive ? 1.0 : 0.0;
            examples.push_back({rec, positive ? 1 : 0, Bucket::Easy});
        }
        train = encode_dataset(examples, vocab, tagger, 8, 6);
    }

    std::unique_ptr<FusedClassifier> make_model(unsigned seed) const {
        EncoderConfig enc;
        enc.layers = 1;
        enc.heads = 2;
        enc.dim = 16;
        enc.ff = 32;
        enc.max_len = 8;
        enc.vocab_size = vocab.size();
        PosLstmConfig pos;
        pos.emb = 8;
        pos.hidden = 8;
        pos.proj = 8;
        pos.max_len = 6;
        FusionConfig fuse;
        fuse.hidden = 16;
        return std::make_unique<FusedClassifier>(enc, pos, fuse, 0.1, seed);
    }

    TrainConfig config() const {
        TrainConfig cfg;
        cfg.batch_size = 10;
        cfg.epochs_per_phase = 10;
        cfg.patience = 5;
        cfg.lr = 5e-3;
        cfg.dropout = 0.1;
        cfg.seed = 3;
        return cfg;
    }
};

}  // namespace

TEST_CASE("metrics: perfect, hand-computed confusion, and all-negative cases") {
    Metrics perfect = compute_metrics({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.f1 == 1.0);

    // TP=2 FP=1 FN=1 TN=1 -> precision=recall=F1=2/3
    Metrics confusion = compute_metrics({1, 1, 1, 0, 0}, {1, 1, 0, 1, 0});
    CHECK(confusion.tp == 2);
    CHECK(confusion.fp == 1);
    CHECK(confusion.fn == 1);
    CHECK(confusion.tn == 1);
    CHECK(confusion.precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(confusion.recall == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(confusion.f1 == doctest::Approx(2.0 / 3).epsilon(1e-12));

    Metrics allneg = compute_metrics({0, 0, 0, 0}, {1, 1, 0, 0});
    CHECK(allneg.f1 == 0.0);
    CHECK(allneg.accuracy == 0.5);  // the negative proportion
}

TEST_CASE("aggregate_mean reproduces the reported per-run averages") {
    auto with_acc = [](double acc, double f1) {
        Metrics m;
        m.accuracy = acc;
        m.f1 = f1;
        return m;
    };
    // five per-run accuracies and F1 scores; their means are 83.93 and 83.0
    const std::vector<Metrics> runs = {
        with_acc(0.837, 0.828), with_acc(0.8385, 0.8297), with_acc(0.841, 0.8307),
        with_acc(0.8397, 0.8311), with_acc(0.8403, 0.8305)};
    const Metrics mean = aggregate_mean(runs);
    CHECK(mean.accuracy == doctest::Approx(0.8393).epsilon(1e-12));
    CHECK(mean.f1 == doctest::Approx(0.830).epsilon(1e-9));

    const Metrics single = aggregate_mean({with_acc(0.7, 0.6)});
    CHECK(single.accuracy == 0.7);
    CHECK(single.f1 == 0.6);
}

TEST_CASE("early stopping: strictly decreasing dev accuracy stops after epoch 2") {
    ScriptedClassifier model({0.9, 0.8, 0.7, 0.6, 0.5}, 10);
    const auto train = tiny_examples(20);
    const auto dev = tiny_examples(10);
    TrainConfig cfg;
    cfg.patience = 1;
    cfg.epochs_per_phase = 10;
    cfg.batch_size = 5;
    const TrainHistory history =
        train_curriculum(model, no_curriculum_plan(20), train, dev, cfg);
    REQUIRE(history.epochs.size() == 2);
    CHECK(history.epochs[0].dev_accuracy == doctest::Approx(0.9));
    CHECK(history.epochs[1].dev_accuracy == doctest::Approx(0.8));
    CHECK(history.best_dev_accuracy == doctest::Approx(0.9));
    CHECK(history.best_epoch_index == 0);
}

TEST_CASE("lr=0 with zero weight decay leaves parameters bit-identical") {
    SeparableTask task(20);
    auto model = task.make_model(5);
    const std::vector<Tensor> before = model->snapshot();
    TrainConfig cfg = task.config();
    cfg.lr = 0.0;
    cfg.weight_decay = 0.0;
    cfg.dropout = 0.0;
    cfg.epochs_per_phase = 2;
    train_curriculum(*model, no_curriculum_plan(20), task.train, task.train, cfg);
    const std::vector<Tensor> after = model->snapshot();
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].data == after[i].data);
}

TEST_CASE("a linearly separable task reaches full training accuracy within 10 epochs") {
    SeparableTask task(100);
    auto model = task.make_model(7);
    const TrainHistory history = train_curriculum(*model, no_curriculum_plan(100), task.train,
                                                  task.train, task.config());
    const Metrics final_train = evaluate(*model, task.train);
    CHECK(final_train.accuracy == 1.0);
    CHECK(history.epochs.size() <= 10);
}

TEST_CASE("strategy none matches a hand-built single-phase plan exactly") {
    SeparableTask task(30);
    TrainConfig cfg = task.config();
    cfg.epochs_per_phase = 3;

    auto model_a = task.make_model(11);
    const TrainHistory ha =
        train_curriculum(*model_a, no_curriculum_plan(30), task.train, task.train, cfg);

    CurriculumPlan manual;
    manual.strategy = Strategy::OnePass;
    manual.phases.emplace_back();
    for (int i = 0; i < 30; ++i) manual.phases.back().push_back(i);
    auto model_b = task.make_model(11);
    const TrainHistory hb = train_curriculum(*model_b, manual, task.train, task.train, cfg);

    REQUIRE(ha.epochs.size() == hb.epochs.size());
    for (std::size_t i = 0; i < ha.epochs.size(); ++i) {
        CHECK(ha.epochs[i].train_loss == hb.epochs[i].train_loss);  // identical trajectories
        CHECK(ha.epochs[i].dev_accuracy == hb.epochs[i].dev_accuracy);
    }
    const auto sa = model_a->snapshot();
    const auto sb = model_b->snapshot();
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i].data == sb[i].data);
}

TEST_CASE("identical config and seed give bit-identical histories") {
    SeparableTask task(40);
    TrainConfig cfg = task.config();
    cfg.epochs_per_phase = 3;
    cfg.dropout = 0.3;  // exercise the dropout rng path too
    auto run = [&] {
        auto model = task.make_model(13);
        return train_curriculum(*model, no_curriculum_plan(40), task.train, task.train, cfg);
    };
    const TrainHistory a = run();
    const TrainHistory b = run();
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        CHECK(a.epochs[i].train_loss == b.epochs[i].train_loss);
        CHECK(a.epochs[i].dev_accuracy == b.epochs[i].dev_accuracy);
        CHECK(a.epochs[i].dev_f1 == b.epochs[i].dev_f1);
    }
    CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("per-epoch example sweeps follow the plan sizes") {
    // one pass: each epoch within a phase touches exactly the phase's
    // examples; across phases the union is the whole set
    SeparableTask task(24);
    for (int i = 0; i < 24; ++i) {
        task.train[static_cast<std::size_t>(i)].bucket =
            i < 6 ? Bucket::Hard : (i < 16 ? Bucket::Easy : Bucket::Medium);
    }
    TrainConfig cfg = task.config();
    cfg.epochs_per_phase = 2;
    cfg.patience = 5;
    cfg.strategy = Strategy::OnePass;
    const CurriculumPlan plan = build_plan(cfg, task.train);
    REQUIRE(plan.phases.size() == 3);
    CHECK(plan.phases[0].size() == 6);   // hard first
    CHECK(plan.phases[1].size() == 10);  // then easy
    CHECK(plan.phases[2].size() == 8);   // then medium
    std::size_t union_size = 0;
    for (const auto& ph : plan.phases) union_size += ph.size();
    CHECK(union_size == task.train.size());

    auto model = task.make_model(17);
    const TrainHistory history = train_curriculum(*model, plan, task.train, task.train, cfg);
    for (const EpochRecord& r : history.epochs) {
        CHECK(r.examples_seen == static_cast<int>(plan.phases[static_cast<std::size_t>(r.phase)].size()));
    }

    // baby steps sweep sizes accumulate: with reference bucket totals the
    // per-phase sweeps are 7962, 17011, and 21591 examples
    CHECK(7962 + 9049 == 17011);
    CHECK(17011 + 4580 == 21591);
}

TEST_CASE("optimizer state persists across phases by default and can be reset") {
    SeparableTask task(20);
    for (int i = 0; i < 20; ++i) {
        task.train[static_cast<std::size_t>(i)].bucket = i < 10 ? Bucket::Easy : Bucket::Hard;
    }
    TrainConfig cfg = task.config();
    cfg.epochs_per_phase = 2;
    cfg.batch_size = 10;
    cfg.strategy = Strategy::OnePass;
    cfg.ordering = {Bucket::Hard, Bucket::Easy};
    const CurriculumPlan plan = build_plan(cfg, task.train);

    auto model = task.make_model(19);
    train_curriculum(*model, plan, task.train, task.train, cfg);
    // 2 phases x 2 epochs x 1 batch of 10 each
    CHECK(model->parameters().front()->step == 4);

    cfg.reset_optimizer_per_phase = true;
    auto model2 = task.make_model(19);
    train_curriculum(*model2, plan, task.train, task.train, cfg);
    CHECK(model2->parameters().front()->step == 2);  // counter restarted per phase
}

TEST_CASE("early stopping never returns a model below the best dev snapshot") {
    SeparableTask task(60);
    auto model = task.make_model(23);
    TrainConfig cfg = task.config();
    cfg.epochs_per_phase = 6;
    const TrainHistory history =
        train_curriculum(*model, no_curriculum_plan(60), task.train, task.train, cfg);
    const Metrics final_dev = evaluate(*model, task.train);
    CHECK(final_dev.accuracy == doctest::Approx(history.best_dev_accuracy));
    double best = -1;
    for (const EpochRecord& r : history.epochs) best = std::max(best, r.dev_accuracy);
    CHECK(history.best_dev_accuracy == doctest::Approx(best));
}

TEST_CASE("exploding learning rate aborts with diagnostics") {
    SeparableTask task(20);
    auto model = task.make_model(29);
    TrainConfig cfg = task.config();
    cfg.lr = 1e18;
    cfg.epochs_per_phase = 10;
    CHECK_THROWS_WITH_AS(
        train_curriculum(*model, no_curriculum_plan(20), task.train, task.train, cfg),
        doctest::Contains("lr="), std::runtime_error);
}

TEST_CASE("run_seeds: k=1 mean equals the single run, parallel equals serial") {
    SeparableTask task(30);
    TrainConfig cfg = task.config();
    cfg.epochs_per_phase = 2;
    const CurriculumPlan plan = no_curriculum_plan(30);
    auto make = [&](unsigned seed) -> std::unique_ptr<Classifier> {
        return task.make_model(seed);
    };

    const AggregateReport single =
        run_seeds(make, plan, task.train, task.train, task.train, cfg, 1, false);
    REQUIRE(single.runs.size() == 1);
    CHECK(single.mean.accuracy == single.runs[0].test.accuracy);

    const AggregateReport serial =
        run_seeds(make, plan, task.train, task.train, task.train, cfg, 3, false);
    const AggregateReport parallel =
        run_seeds(make, plan, task.train, task.train, task.train, cfg, 3, true);
    REQUIRE(serial.runs.size() == 3);
    REQUIRE(parallel.runs.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(serial.runs[static_cast<std::size_t>(i)].seed == cfg.seed + static_cast<unsigned>(i));
        CHECK(serial.runs[static_cast<std::size_t>(i)].test.accuracy ==
              parallel.runs[static_cast<std::size_t>(i)].test.accuracy);
        CHECK(serial.runs[static_cast<std::size_t>(i)].history.to_csv() ==
              parallel.runs[static_cast<std::size_t>(i)].history.to_csv());
    }
    CHECK(serial.mean.accuracy == parallel.mean.accuracy);
}

TEST_CASE("config validation rejects bad settings") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.patience = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    SeparableTask task(10);
    auto model = task.make_model(1);
    CurriculumPlan empty;
    CHECK_THROWS_AS(train_curriculum(*model, empty, task.train, task.train, task.config()),
                    ConfigError);
}
