// qwf: train, evaluate, and inspect the query well-formedness classifier.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qwf/baselines.hpp"
#include "qwf/checkpoint.hpp"
#include "qwf/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct LoadedData {
    qwf::DatasetSplits splits;
};

qwf::DatasetSplits load_splits(const qwf::RunConfig& cfg) {
    if (const auto synth = qwf::parse_synth_spec(cfg.train_path)) {
        return qwf::synth_dataset(synth->seed, synth->n, cfg.threshold, cfg.train.buckets);
    }
    qwf::DatasetSplits splits;
    splits.train = qwf::label(qwf::load_tsv(cfg.train_path), cfg.threshold, cfg.train.buckets);
    splits.dev = qwf::label(qwf::load_tsv(cfg.dev_path), cfg.threshold, cfg.train.buckets);
    splits.test = qwf::label(qwf::load_tsv(cfg.test_path), cfg.threshold, cfg.train.buckets);
    return splits;
}

std::vector<std::string> texts_of(const std::vector<qwf::LabeledExample>& xs) {
    std::vector<std::string> out;
    out.reserve(xs.size());
    for (const auto& ex : xs) out.push_back(ex.record.text);
    return out;
}

json metrics_to_json(const qwf::Metrics& m) {
    return json{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
                {"f1", m.f1},             {"macro_f1", m.macro_f1},   {"tp", m.tp},
                {"fp", m.fp},             {"fn", m.fn},               {"tn", m.tn}};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw qwf::DataError("cannot write " + path.string());
    out << content;
}

int cmd_train(const qwf::RunConfig& cfg) {
    cfg.validate();
    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    qwf::DatasetSplits splits = load_splits(cfg);
    if (splits.train.empty() || splits.dev.empty() || splits.test.empty()) {
        throw qwf::ConfigError("train/dev/test must all be non-empty");
    }

    const qwf::SubwordVocab vocab = qwf::SubwordVocab::train(texts_of(splits.train), cfg.vocab_size);
    const qwf::PosTagger tagger;

    qwf::EncoderConfig enc = cfg.encoder;
    enc.vocab_size = vocab.size();
    qwf::RunConfig resolved = cfg;
    resolved.encoder = enc;
    const std::string resolved_text = resolved.to_json_text();
    std::cout << "resolved config:\n" << resolved_text;
    write_file(out_dir / "config.json", resolved_text);

    const auto train = qwf::encode_dataset(splits.train, vocab, tagger, enc.max_len, cfg.pos.max_len);
    const auto dev = qwf::encode_dataset(splits.dev, vocab, tagger, enc.max_len, cfg.pos.max_len);
    const auto test = qwf::encode_dataset(splits.test, vocab, tagger, enc.max_len, cfg.pos.max_len);

    const qwf::CurriculumPlan plan = qwf::build_plan(cfg.train, train);
    std::cout << "plan: strategy=" << qwf::strategy_name(plan.strategy);
    for (std::size_t i = 0; i < plan.phases.size(); ++i) {
        std::cout << " phase" << i + 1 << "=";
        if (i < plan.ordering.size()) std::cout << qwf::bucket_name(plan.ordering[i]) << ":";
        std::cout << plan.phases[i].size();
    }
    std::cout << "\n";

    auto make_model = [&](unsigned seed) -> std::unique_ptr<qwf::Classifier> {
        return std::make_unique<qwf::FusedClassifier>(enc, cfg.pos, cfg.fusion,
                                                      cfg.train.dropout, seed);
    };
    const qwf::AggregateReport report = qwf::run_seeds(
        make_model, plan, train, dev, test, cfg.train, cfg.train.runs, cfg.parallel_runs);

    std::string history_csv = "run,phase,epoch,loss,dev_acc,dev_f1\n";
    for (const qwf::SeedRunResult& r : report.runs) {
        const std::string csv = r.history.to_csv();
        history_csv += csv.substr(csv.find('\n') + 1);  // drop per-run header
    }
    write_file(out_dir / "history.csv", history_csv);

    json jm;
    jm["runs"] = json::array();
    std::size_t best_run = 0;
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const qwf::SeedRunResult& r = report.runs[i];
        json jr = metrics_to_json(r.test);
        jr["seed"] = r.seed;
        jr["best_dev_accuracy"] = r.history.best_dev_accuracy;
        jm["runs"].push_back(std::move(jr));
        if (r.history.best_dev_accuracy >
            report.runs[best_run].history.best_dev_accuracy) {
            best_run = i;
        }
    }
    jm["mean"] = metrics_to_json(report.mean);
    jm["checkpoint_seed"] = report.runs[best_run].seed;
    write_file(out_dir / "metrics.json", jm.dump(2) + "\n");

    // checkpoint the best-on-dev run's model (already restored to its best
    // snapshot by the trainer)
    auto* best_model = dynamic_cast<qwf::FusedClassifier*>(report.runs[best_run].model.get());
    if (best_model == nullptr) throw std::logic_error("trained model has the wrong type");
    qwf::save_checkpoint(out_dir / "model.ckpt", *best_model, vocab, cfg.threshold);

    std::cout << "mean test accuracy " << report.mean.accuracy << ", F1 " << report.mean.f1
              << " over " << report.runs.size() << " run(s)\n";
    std::cout << "outputs in " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path) {
    qwf::LoadedCheckpoint ckpt = qwf::load_checkpoint(ckpt_path);
    std::vector<qwf::LabeledExample> examples;
    if (const auto synth = qwf::parse_synth_spec(data_path)) {
        examples = qwf::synth_dataset(synth->seed, synth->n, ckpt.threshold).test;
    } else {
        examples = qwf::label(qwf::load_tsv(data_path), ckpt.threshold);
    }
    if (examples.empty()) throw qwf::DataError("no examples in " + data_path);
    const qwf::PosTagger tagger;
    const auto encoded =
        qwf::encode_dataset(examples, ckpt.vocab, tagger,
                            ckpt.model->params().encoder_config().max_len,
                            ckpt.model->params().pos_config().max_len);
    const qwf::Metrics m = qwf::evaluate(*ckpt.model, encoded);
    std::cout << metrics_to_json(m).dump(2) << "\n";
    return kExitOk;
}

int cmd_predict(const std::string& ckpt_path, const std::string& query) {
    qwf::LoadedCheckpoint ckpt = qwf::load_checkpoint(ckpt_path);
    const qwf::PosTagger tagger;
    qwf::LabeledExample ex;
    ex.record.text = query;
    const auto encoded =
        qwf::encode_dataset({ex}, ckpt.vocab, tagger,
                            ckpt.model->params().encoder_config().max_len,
                            ckpt.model->params().pos_config().max_len);
    qwf::Tape tape(false);
    std::mt19937 rng(0);
    qwf::Var o = ckpt.model->forward(tape, encoded[0], false, rng);
    const qwf::Tensor& dist = tape.value(o);
    const double p_wf = dist.at(0, 1);
    std::cout << (p_wf > dist.at(0, 0) ? "well-formed" : "poorly-formed") << "\t" << p_wf << "\n";
    return kExitOk;
}

int cmd_buckets(const std::string& data_path, const std::string& buckets_json,
                double threshold) {
    qwf::BucketSpec spec = qwf::BucketSpec::defaults();
    if (!buckets_json.empty()) {
        json j;
        try {
            j = json::parse(buckets_json);
        } catch (const json::exception& e) {
            throw qwf::ConfigError(std::string("--buckets is not valid JSON: ") + e.what());
        }
        spec = qwf::BucketSpec::from_map(j.get<std::map<std::string, std::string>>());
    }
    std::vector<qwf::QueryRecord> records;
    std::vector<qwf::LabeledExample> labeled;
    if (const auto synth = qwf::parse_synth_spec(data_path)) {
        const auto splits = qwf::synth_dataset(synth->seed, synth->n, threshold, spec);
        labeled = splits.train;
        labeled.insert(labeled.end(), splits.dev.begin(), splits.dev.end());
        labeled.insert(labeled.end(), splits.test.begin(), splits.test.end());
    } else {
        records = qwf::load_tsv(data_path);
        labeled = qwf::label(records, threshold, spec);
    }
    std::cout << qwf::bucket_stats(labeled).to_csv();
    return kExitOk;
}

int cmd_attn(const std::string& ckpt_path, const std::string& query, int layer, int head,
             const std::string& out_dir, int topk) {
    qwf::LoadedCheckpoint ckpt = qwf::load_checkpoint(ckpt_path);
    const qwf::EncoderConfig& enc = ckpt.model->params().encoder_config();
    if (layer >= enc.layers) {
        throw qwf::ConfigError("--layer " + std::to_string(layer) + " out of range; model has " +
                               std::to_string(enc.layers) + " layers");
    }
    if (head >= enc.heads) {
        throw qwf::ConfigError("--head " + std::to_string(head) + " out of range; model has " +
                               std::to_string(enc.heads) + " heads");
    }

    const qwf::TokenizedQuery tq = qwf::encode(query, ckpt.vocab, enc.max_len);
    const auto maps = qwf::attention_maps(ckpt.model->params(), tq.ids, tq.mask);

    std::vector<std::string> tokens;
    tokens.reserve(tq.ids.size());
    for (int id : tq.ids) tokens.push_back(ckpt.vocab.token(id));
    int real = 0;
    for (int m : tq.mask) real += m;

    const fs::path dir = out_dir.empty() ? fs::path("attn") : fs::path(out_dir);
    fs::create_directories(dir);
    int written = 0;
    for (int l = 0; l < enc.layers; ++l) {
        if (layer >= 0 && l != layer) continue;
        for (int h = 0; h < enc.heads; ++h) {
            if (head >= 0 && h != head) continue;
            const qwf::Tensor& w = maps[static_cast<std::size_t>(l)][static_cast<std::size_t>(h)];
            json j;
            j["layer"] = l;
            j["head"] = h;
            j["tokens"] = tokens;
            json rows = json::array();
            for (int i = 0; i < w.rows(); ++i) {
                json row = json::array();
                for (int c = 0; c < w.cols(); ++c) row.push_back(w.at(i, c));
                rows.push_back(std::move(row));
            }
            j["weights"] = std::move(rows);
            const fs::path file =
                dir / ("L" + std::to_string(l) + "H" + std::to_string(h) + ".json");
            write_file(file, j.dump() + "\n");
            ++written;

            // top attended pairs over real tokens
            std::vector<std::tuple<double, int, int>> pairs;
            for (int i = 0; i < real; ++i)
                for (int c = 0; c < real; ++c)
                    pairs.emplace_back(w.at(i, c), i, c);
            std::sort(pairs.begin(), pairs.end(),
                      [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
            std::cout << "layer " << l << " head " << h << " top pairs:\n";
            for (int k = 0; k < topk && k < static_cast<int>(pairs.size()); ++k) {
                const auto& [weight, qi, ki] = pairs[static_cast<std::size_t>(k)];
                std::cout << "  " << tokens[static_cast<std::size_t>(qi)] << " -> "
                          << tokens[static_cast<std::size_t>(ki)] << "  " << weight << "\n";
            }
        }
    }
    std::cout << written << " attention matrices written to " << dir.string() << "\n";
    return kExitOk;
}

int cmd_baseline(const std::string& which, const qwf::RunConfig& cfg,
                 const std::string& families) {
    cfg.validate();
    const qwf::DatasetSplits splits = load_splits(cfg);
    if (splits.test.empty()) throw qwf::ConfigError("baseline needs a non-empty test set");
    qwf::Metrics m;
    if (which == "qword") {
        m = qwf::question_word_classify(splits.test);
    } else if (which == "majority") {
        m = qwf::majority_class_classify(splits.test);
    } else if (which == "bilstm") {
        if (splits.train.empty() || splits.dev.empty()) {
            throw qwf::ConfigError("bilstm baseline needs train and dev data");
        }
        m = qwf::word_bilstm_baseline(splits, qwf::BiLstmConfig{}, cfg.train);
    } else if (which == "ngram") {
        if (splits.train.empty() || splits.dev.empty()) {
            throw qwf::ConfigError("ngram baseline needs train and dev data");
        }
        qwf::NgramFeatureSpec spec;
        spec.use_words = families.find('w') != std::string::npos;
        spec.use_chars = families.find('c') != std::string::npos;
        spec.use_pos = families.find('p') != std::string::npos;
        m = qwf::ngram_ffnn_baseline(splits, spec, cfg.train);
    } else {
        throw qwf::ConfigError("unknown baseline '" + which +
                               "' (want qword|majority|bilstm|ngram)");
    }
    json j = metrics_to_json(m);
    j["baseline"] = which;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"query well-formedness classifier with curriculum training"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train the fused classifier");
    std::string config_path, train_path, dev_path, test_path, out_dir, strategy, ordering,
        buckets_json;
    int epochs = -1, batch = -1, runs = -1, vocab_size = -1, patience = -1;
    double lr = -1, dropout = -1, weight_decay = -1, threshold = -1;
    long seed = -1;
    bool no_parallel = false, reset_optimizer = false;
    train->add_option("--config", config_path, "JSON config file");
    train->add_option("--train", train_path, "train TSV or synth:<seed>:<n>");
    train->add_option("--dev", dev_path, "dev TSV");
    train->add_option("--test", test_path, "test TSV");
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--strategy", strategy, "none|onepass|babysteps");
    train->add_option("--ordering", ordering, "comma list, e.g. hard,easy,medium");
    train->add_option("--buckets", buckets_json, "bucket spec JSON map");
    train->add_option("--epochs", epochs, "epochs per phase");
    train->add_option("--batch", batch, "batch size");
    train->add_option("--runs", runs, "number of seeds");
    train->add_option("--vocab-size", vocab_size, "subword vocabulary size");
    train->add_option("--patience", patience, "early stopping patience");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--dropout", dropout, "dropout on the fused vector");
    train->add_option("--weight-decay", weight_decay, "AdamW weight decay");
    train->add_option("--threshold", threshold, "well-formedness threshold");
    train->add_option("--seed", seed, "base RNG seed");
    train->add_flag("--no-parallel", no_parallel, "run seeds serially");
    train->add_flag("--reset-optimizer", reset_optimizer, "reset optimizer state per phase");

    // eval / predict
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a data file");
    std::string ckpt_path, data_path, query;
    eval->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    eval->add_option("--data", data_path, "TSV or synth:<seed>:<n>")->required();

    auto* predict = app.add_subcommand("predict", "classify one query");
    predict->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    predict->add_option("--query", query, "query text")->required();

    // buckets
    auto* buckets = app.add_subcommand("buckets", "per-bucket positive/negative/total counts");
    buckets->add_option("--data", data_path, "TSV or synth:<seed>:<n>")->required();
    buckets->add_option("--buckets", buckets_json, "bucket spec JSON map");
    double buckets_threshold = qwf::kDefaultThreshold;
    buckets->add_option("--threshold", buckets_threshold, "well-formedness threshold");

    // attn
    auto* attn = app.add_subcommand("attn", "dump attention matrices for a query");
    int layer = -1, head = -1, topk = 5;
    attn->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    attn->add_option("--query", query, "query text")->required();
    attn->add_option("--layer", layer, "layer index (default: all)");
    attn->add_option("--head", head, "head index (default: all)");
    attn->add_option("--out", out_dir, "output directory (default: attn/)");
    attn->add_option("--topk", topk, "pairs to print per head");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "run a comparison system");
    std::string which, families = "wcp";
    baseline->add_option("--which", which, "qword|majority|bilstm|ngram")->required();
    baseline->add_option("--train", train_path, "train TSV or synth:<seed>:<n>");
    baseline->add_option("--dev", dev_path, "dev TSV");
    baseline->add_option("--test", test_path, "test TSV");
    baseline->add_option("--families", families, "ngram families, subset of wcp");
    baseline->add_option("--lr", lr, "learning rate");
    baseline->add_option("--epochs", epochs, "training epochs");
    baseline->add_option("--batch", batch, "batch size");
    baseline->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        qwf::RunConfig cfg;
        if (!config_path.empty()) cfg = qwf::RunConfig::from_json_file(config_path);
        if (!train_path.empty()) cfg.train_path = train_path;
        if (!dev_path.empty()) cfg.dev_path = dev_path;
        if (!test_path.empty()) cfg.test_path = test_path;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!strategy.empty()) cfg.train.strategy = qwf::parse_strategy(strategy);
        if (!ordering.empty()) {
            cfg.train.ordering.clear();
            std::string cur;
            for (char c : ordering + ",") {
                if (c == ',') {
                    if (!cur.empty()) cfg.train.ordering.push_back(qwf::parse_bucket(cur));
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
        }
        if (!buckets_json.empty() && train->parsed()) {
            cfg.train.buckets = qwf::BucketSpec::from_map(
                json::parse(buckets_json).get<std::map<std::string, std::string>>());
        }
        if (epochs >= 0) cfg.train.epochs_per_phase = epochs;
        if (batch >= 0) cfg.train.batch_size = batch;
        if (runs >= 0) cfg.train.runs = runs;
        if (vocab_size >= 0) cfg.vocab_size = vocab_size;
        if (patience >= 0) cfg.train.patience = patience;
        if (lr >= 0) cfg.train.lr = lr;
        if (dropout >= 0) cfg.train.dropout = dropout;
        if (weight_decay >= 0) cfg.train.weight_decay = weight_decay;
        if (threshold >= 0) cfg.threshold = threshold;
        if (seed >= 0) cfg.train.seed = static_cast<unsigned>(seed);
        if (no_parallel) cfg.parallel_runs = false;
        if (reset_optimizer) cfg.train.reset_optimizer_per_phase = true;

        if (train->parsed()) return cmd_train(cfg);
        if (eval->parsed()) return cmd_eval(ckpt_path, data_path);
        if (predict->parsed()) return cmd_predict(ckpt_path, query);
        if (buckets->parsed()) return cmd_buckets(data_path, buckets_json, buckets_threshold);
        if (attn->parsed()) return cmd_attn(ckpt_path, query, layer, head, out_dir, topk);
        if (baseline->parsed()) return cmd_baseline(which, cfg, families);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const qwf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
