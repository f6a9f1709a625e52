#include "qwf/run_config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace qwf {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (allowed.count(key) == 0) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read_into(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
    }
}

}  // namespace

std::optional<SynthSpec> parse_synth_spec(const std::string& path) {
    if (path.rfind("synth:", 0) != 0) return std::nullopt;
    const std::string rest = path.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("synthetic data spec must be synth:<seed>:<n>, got '" + path + "'");
    }
    SynthSpec spec;
    try {
        spec.seed = static_cast<unsigned>(std::stoul(rest.substr(0, colon)));
        spec.n = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("synthetic data spec must be synth:<seed>:<n>, got '" + path + "'");
    }
    return spec;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(j,
                        {"train", "dev", "test", "out", "vocab_size", "threshold",
                         "parallel_runs", "encoder", "pos", "fusion", "train_cfg", "strategy",
                         "ordering", "buckets"},
                        "config");

    RunConfig cfg;
    read_into(j, "train", cfg.train_path, "config");
    read_into(j, "dev", cfg.dev_path, "config");
    read_into(j, "test", cfg.test_path, "config");
    read_into(j, "out", cfg.out_dir, "config");
    read_into(j, "vocab_size", cfg.vocab_size, "config");
    read_into(j, "threshold", cfg.threshold, "config");
    read_into(j, "parallel_runs", cfg.parallel_runs, "config");

    if (j.contains("encoder")) {
        const json& je = j.at("encoder");
        reject_unknown_keys(je, {"layers", "heads", "dim", "ff", "max_len", "vocab_size"},
                            "config.encoder");
        read_into(je, "layers", cfg.encoder.layers, "config.encoder");
        read_into(je, "heads", cfg.encoder.heads, "config.encoder");
        read_into(je, "dim", cfg.encoder.dim, "config.encoder");
        read_into(je, "ff", cfg.encoder.ff, "config.encoder");
        read_into(je, "max_len", cfg.encoder.max_len, "config.encoder");
        read_into(je, "vocab_size", cfg.encoder.vocab_size, "config.encoder");
    }
    cfg.encoder.vocab_size = 0;  // always derived from the trained vocabulary
    if (j.contains("pos")) {
        const json& jp = j.at("pos");
        reject_unknown_keys(jp, {"emb", "hidden", "proj", "max_len"}, "config.pos");
        read_into(jp, "emb", cfg.pos.emb, "config.pos");
        read_into(jp, "hidden", cfg.pos.hidden, "config.pos");
        read_into(jp, "proj", cfg.pos.proj, "config.pos");
        read_into(jp, "max_len", cfg.pos.max_len, "config.pos");
    }
    if (j.contains("fusion")) {
        const json& jf = j.at("fusion");
        reject_unknown_keys(jf, {"hidden"}, "config.fusion");
        read_into(jf, "hidden", cfg.fusion.hidden, "config.fusion");
    }
    if (j.contains("train_cfg")) {
        const json& jt = j.at("train_cfg");
        reject_unknown_keys(jt,
                            {"batch", "epochs", "patience", "dropout", "lr", "beta1", "beta2",
                             "eps", "weight_decay", "seed", "runs", "reset_optimizer_per_phase"},
                            "config.train_cfg");
        read_into(jt, "batch", cfg.train.batch_size, "config.train_cfg");
        read_into(jt, "epochs", cfg.train.epochs_per_phase, "config.train_cfg");
        read_into(jt, "patience", cfg.train.patience, "config.train_cfg");
        read_into(jt, "dropout", cfg.train.dropout, "config.train_cfg");
        read_into(jt, "lr", cfg.train.lr, "config.train_cfg");
        read_into(jt, "beta1", cfg.train.beta1, "config.train_cfg");
        read_into(jt, "beta2", cfg.train.beta2, "config.train_cfg");
        read_into(jt, "eps", cfg.train.adam_eps, "config.train_cfg");
        read_into(jt, "weight_decay", cfg.train.weight_decay, "config.train_cfg");
        read_into(jt, "seed", cfg.train.seed, "config.train_cfg");
        read_into(jt, "runs", cfg.train.runs, "config.train_cfg");
        read_into(jt, "reset_optimizer_per_phase", cfg.train.reset_optimizer_per_phase,
                  "config.train_cfg");
    }
    if (j.contains("strategy")) {
        cfg.train.strategy = parse_strategy(j.at("strategy").get<std::string>());
    }
    if (j.contains("ordering")) {
        cfg.train.ordering.clear();
        for (const auto& name : j.at("ordering")) {
            cfg.train.ordering.push_back(parse_bucket(name.get<std::string>()));
        }
    }
    if (j.contains("buckets")) {
        std::map<std::string, std::string> m;
        try {
            m = j.at("buckets").get<std::map<std::string, std::string>>();
        } catch (const json::exception&) {
            throw ConfigError("config.buckets must map grid probabilities to bucket names");
        }
        cfg.train.buckets = BucketSpec::from_map(m);
    }
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string RunConfig::to_json_text() const {
    json j;
    j["train"] = train_path;
    j["dev"] = dev_path;
    j["test"] = test_path;
    j["out"] = out_dir;
    j["vocab_size"] = vocab_size;
    j["threshold"] = threshold;
    j["parallel_runs"] = parallel_runs;
    j["encoder"] = {{"layers", encoder.layers}, {"heads", encoder.heads}, {"dim", encoder.dim},
                    {"ff", encoder.ff},         {"max_len", encoder.max_len},
                    {"vocab_size", encoder.vocab_size}};
    j["pos"] = {{"emb", pos.emb},
                {"hidden", pos.hidden},
                {"proj", pos.proj},
                {"max_len", pos.max_len}};
    j["fusion"] = {{"hidden", fusion.hidden}};
    j["train_cfg"] = {{"batch", train.batch_size},
                      {"epochs", train.epochs_per_phase},
                      {"patience", train.patience},
                      {"dropout", train.dropout},
                      {"lr", train.lr},
                      {"beta1", train.beta1},
                      {"beta2", train.beta2},
                      {"eps", train.adam_eps},
                      {"weight_decay", train.weight_decay},
                      {"seed", train.seed},
                      {"runs", train.runs},
                      {"reset_optimizer_per_phase", train.reset_optimizer_per_phase}};
    j["strategy"] = strategy_name(train.strategy);
    json ordering = json::array();
    for (Bucket b : train.ordering.empty() && train.strategy != Strategy::None
                        ? default_ordering(train.strategy)
                        : train.ordering) {
        ordering.push_back(bucket_name(b));
    }
    j["ordering"] = std::move(ordering);
    j["buckets"] = train.buckets.to_map();
    return j.dump(2) + "\n";
}

void RunConfig::validate() const {
    train.validate();
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("threshold must lie in (0,1)");
    }
    if (vocab_size < 4) throw ConfigError("vocab_size must be at least 4");
    if (train_path.empty()) throw ConfigError("no training data given (--train)");
    const auto synth = parse_synth_spec(train_path);
    if (synth) {
        if (!dev_path.empty() || !test_path.empty()) {
            throw ConfigError("synthetic data provides its own dev/test splits; "
                              "leave --dev/--test empty");
        }
        return;
    }
    for (const auto& [label, path] : {std::pair<const char*, const std::string&>{"train", train_path},
                                      {"dev", dev_path},
                                      {"test", test_path}}) {
        if (path.empty()) {
            throw ConfigError(std::string("missing ") + label + " data path");
        }
        if (!std::filesystem::exists(path)) {
            throw ConfigError(std::string(label) + " file not found: " + path);
        }
    }
}

}  // namespace qwf
