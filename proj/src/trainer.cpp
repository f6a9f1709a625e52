#include "qwf/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <sstream>
#include <thread>

namespace qwf {

std::vector<EncodedExample> encode_dataset(const std::vector<LabeledExample>& examples,
                                           const SubwordVocab& vocab, const PosTagger& tagger,
                                           int enc_max_len, int pos_max_len) {
    std::vector<EncodedExample> out;
    out.reserve(examples.size());
    for (const LabeledExample& ex : examples) {
        EncodedExample e;
        e.label = ex.label;
        e.p = ex.record.p;
        e.bucket = ex.bucket;
        e.text = ex.record.text;
        TokenizedQuery q = encode(ex.record.text, vocab, enc_max_len);
        e.ids = std::move(q.ids);
        e.mask = std::move(q.mask);
        e.tags = ex.record.pretags.empty()
                     ? pos_tag(ex.record.text, tagger, pos_max_len).ids
                     : tags_from_names(ex.record.pretags, pos_max_len).ids;
        out.push_back(std::move(e));
    }
    return out;
}

FusedClassifier::FusedClassifier(EncoderConfig enc, PosLstmConfig pos, FusionConfig fuse,
                                 double dropout, unsigned init_seed)
    : dropout_(dropout) {
    std::mt19937 rng(init_seed);
    params_ = std::make_unique<ModelParams>(enc, pos, fuse, rng);
}

Var FusedClassifier::forward(Tape& tape, const EncodedExample& ex, bool train,
                             std::mt19937& rng) {
    EncoderTrace trace = encoder_forward(tape, *params_, ex.ids, ex.mask);
    Var pos_repr = pos_forward(tape, *params_, ex.tags);
    return fuse_classify(tape, *params_, trace.cls, pos_repr, dropout_, train, rng);
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs_per_phase < 1) throw ConfigError("epochs_per_phase must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0,1)");
    if (lr < 0) throw ConfigError("learning rate must be >= 0");
    if (runs < 1) throw ConfigError("runs must be >= 1");
}

namespace {

std::string format_double(double v) {
    std::array<char, 40> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf.data(), ptr);
}

}  // namespace

std::string TrainHistory::to_csv() const {
    std::ostringstream out;
    out << "run,phase,epoch,loss,dev_acc,dev_f1\n";
    for (const EpochRecord& r : epochs) {
        out << r.run << ',' << r.phase << ',' << r.epoch << ',' << format_double(r.train_loss)
            << ',' << format_double(r.dev_accuracy) << ',' << format_double(r.dev_f1) << '\n';
    }
    return out.str();
}

Metrics evaluate(Classifier& model, const std::vector<EncodedExample>& examples) {
    if (examples.empty()) throw ConfigError("evaluate: empty example set");
    std::vector<int> preds, labels;
    preds.reserve(examples.size());
    labels.reserve(examples.size());
    std::mt19937 rng(0);  // unused: dropout is identity in evaluation
    for (const EncodedExample& ex : examples) {
        Tape tape(/*grad_enabled=*/false);
        Var o = model.forward(tape, ex, /*train=*/false, rng);
        const Tensor& dist = tape.value(o);
        int best = 0;
        for (std::size_t c = 1; c < dist.numel(); ++c) {
            if (dist[c] > dist[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        }
        preds.push_back(best);
        labels.push_back(ex.label);
    }
    return compute_metrics(preds, labels);
}

namespace {

struct TrainState {
    std::mt19937 shuffle_rng;
    double best_dev_accuracy = -1;
    int best_epoch_index = -1;
    std::vector<Tensor> best_snapshot;
    long epoch_counter = 0;  // across phases, for dropout stream derivation
    TrainHistory history;
};

void train_phase(Classifier& model, const std::vector<int>& phase_indices,
                 const std::vector<EncodedExample>& train,
                 const std::vector<EncodedExample>& dev, const TrainConfig& cfg,
                 TrainState& state, int phase_id, int run_index) {
    if (phase_indices.empty()) throw ConfigError("training phase has no examples");
    std::vector<Parameter*> params = model.parameters();
    if (cfg.reset_optimizer_per_phase) {
        for (Parameter* p : params) {
            p->moment1.fill(0);
            p->moment2.fill(0);
            p->step = 0;
        }
    }

    std::vector<int> order = phase_indices;
    int no_improve = 0;
    for (int epoch = 0; epoch < cfg.epochs_per_phase; ++epoch) {
        std::shuffle(order.begin(), order.end(), state.shuffle_rng);
        double loss_sum = 0;
        std::size_t batch_index = 0;
        for (std::size_t off = 0; off < order.size(); off += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t nb =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - off);
            for (Parameter* p : params) p->zero_grad();
            for (std::size_t bi = 0; bi < nb; ++bi) {
                const int idx = order[off + bi];
                const EncodedExample& ex = train[static_cast<std::size_t>(idx)];
                std::mt19937 dropout_rng(static_cast<std::mt19937::result_type>(
                    mix_seed(cfg.seed, static_cast<std::uint64_t>(state.epoch_counter),
                             static_cast<std::uint64_t>(idx))));
                try {
                    Tape tape;
                    Var o = model.forward(tape, ex, /*train=*/true, dropout_rng);
                    Var loss = tape.cross_entropy(o, ex.label);
                    loss_sum += static_cast<double>(tape.value(loss)[0]);
                    tape.backward(tape.scale(loss, static_cast<Scalar>(1.0 / static_cast<double>(nb))));
                } catch (const ShapeError&) {
                    throw;
                } catch (const ConfigError&) {
                    throw;
                } catch (const std::runtime_error& e) {
                    throw std::runtime_error(
                        "non-finite loss in run " + std::to_string(run_index) + " phase " +
                        std::to_string(phase_id) + " epoch " + std::to_string(epoch) + " batch " +
                        std::to_string(batch_index) + " (lr=" + format_double(cfg.lr) +
                        "): " + e.what());
                }
            }
            try {
                adamw_step(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);
            } catch (const ShapeError&) {
                throw;
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("optimizer abort in run " + std::to_string(run_index) +
                                         " phase " + std::to_string(phase_id) + " epoch " +
                                         std::to_string(epoch) + " batch " +
                                         std::to_string(batch_index) +
                                         " (lr=" + format_double(cfg.lr) + "): " + e.what());
            }
            ++batch_index;
        }

        const Metrics dev_metrics = evaluate(model, dev);
        EpochRecord rec;
        rec.run = run_index;
        rec.phase = phase_id;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.dev_accuracy = dev_metrics.accuracy;
        rec.dev_f1 = dev_metrics.f1;
        rec.examples_seen = static_cast<int>(order.size());
        state.history.epochs.push_back(rec);
        ++state.epoch_counter;

        if (dev_metrics.accuracy > state.best_dev_accuracy) {
            state.best_dev_accuracy = dev_metrics.accuracy;
            state.best_epoch_index = static_cast<int>(state.history.epochs.size()) - 1;
            state.best_snapshot = model.snapshot();
            no_improve = 0;
        } else {
            ++no_improve;
            if (no_improve >= cfg.patience) break;
        }
    }
}

}  // namespace

TrainHistory train_curriculum(Classifier& model, const CurriculumPlan& plan,
                              const std::vector<EncodedExample>& train,
                              const std::vector<EncodedExample>& dev, const TrainConfig& config,
                              int run_index) {
    config.validate();
    if (plan.phases.empty()) throw ConfigError("curriculum plan is empty");
    if (dev.empty()) throw ConfigError("dev set is empty");
    for (const auto& phase : plan.phases) {
        for (int idx : phase) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= train.size()) {
                throw ConfigError("plan index " + std::to_string(idx) +
                                  " outside the training set");
            }
        }
    }

    TrainState state;
    state.shuffle_rng.seed(config.seed);
    state.best_snapshot = model.snapshot();
    for (std::size_t phase = 0; phase < plan.phases.size(); ++phase) {
        train_phase(model, plan.phases[phase], train, dev, config, state,
                    static_cast<int>(phase), run_index);
    }
    model.restore(state.best_snapshot);
    state.history.best_dev_accuracy = state.best_dev_accuracy;
    state.history.best_epoch_index = state.best_epoch_index;
    return state.history;
}

CurriculumPlan build_plan(const TrainConfig& config, const std::vector<EncodedExample>& train) {
    if (config.strategy == Strategy::None) {
        return no_curriculum_plan(static_cast<int>(train.size()));
    }
    BucketedIndices bucketed;
    for (std::size_t i = 0; i < train.size(); ++i) {
        bucketed[train[i].bucket].push_back(static_cast<int>(i));
    }
    const std::vector<Bucket> ordering =
        config.ordering.empty() ? default_ordering(config.strategy) : config.ordering;
    return config.strategy == Strategy::OnePass ? one_pass_plan(bucketed, ordering)
                                                : baby_steps_plan(bucketed, ordering);
}

AggregateReport run_seeds(const std::function<std::unique_ptr<Classifier>(unsigned)>& make_model,
                          const CurriculumPlan& plan, const std::vector<EncodedExample>& train,
                          const std::vector<EncodedExample>& dev,
                          const std::vector<EncodedExample>& test, const TrainConfig& config,
                          int k, bool parallel) {
    if (k < 1) throw ConfigError("run_seeds: k must be >= 1");
    AggregateReport report;
    report.runs.resize(static_cast<std::size_t>(k));

    auto one_run = [&](int i) {
        TrainConfig run_cfg = config;
        run_cfg.seed = config.seed + static_cast<unsigned>(i);
        std::unique_ptr<Classifier> model = make_model(run_cfg.seed);
        SeedRunResult result;
        result.seed = run_cfg.seed;
        result.history = train_curriculum(*model, plan, train, dev, run_cfg, i);
        result.test = evaluate(*model, test);
        result.model = std::move(model);
        report.runs[static_cast<std::size_t>(i)] = std::move(result);
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (!parallel || k == 1 || hw == 1) {
        for (int i = 0; i < k; ++i) one_run(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        const unsigned n_workers = std::min<unsigned>(hw, static_cast<unsigned>(k));
        std::vector<std::exception_ptr> errors(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (int i = next.fetch_add(1); i < k; i = next.fetch_add(1)) one_run(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }

    std::vector<Metrics> all;
    all.reserve(report.runs.size());
    for (const SeedRunResult& r : report.runs) all.push_back(r.test);
    report.mean = aggregate_mean(all);
    return report;
}

}  // namespace qwf
