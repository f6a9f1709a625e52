#include "qwf/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace qwf {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "qwf-checkpoint";
constexpr int kVersion = 1;

json config_to_json(const EncoderConfig& c) {
    return json{{"layers", c.layers}, {"heads", c.heads},     {"dim", c.dim},
                {"ff", c.ff},         {"max_len", c.max_len}, {"vocab_size", c.vocab_size}};
}

json config_to_json(const PosLstmConfig& c) {
    return json{{"tag_vocab", c.tag_vocab}, {"emb", c.emb},         {"hidden", c.hidden},
                {"proj", c.proj},           {"max_len", c.max_len}};
}

json config_to_json(const FusionConfig& c) {
    return json{{"hidden", c.hidden}, {"classes", c.classes}};
}

template <typename T>
T get_field(const json& j, const char* key) {
    if (!j.contains(key)) throw CheckpointError(std::string("checkpoint missing field ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw CheckpointError(std::string("checkpoint field ") + key + " has the wrong type");
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, FusedClassifier& model,
                     const SubwordVocab& vocab, double threshold) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["threshold"] = threshold;
    j["dropout"] = model.dropout_rate();
    ModelParams& params = model.params();
    j["encoder"] = config_to_json(params.encoder_config());
    j["pos"] = config_to_json(params.pos_config());
    j["fusion"] = config_to_json(params.fusion_config());
    j["vocab"] = vocab.tokens();
    json tensors = json::object();
    for (const std::string& name : params.names()) {
        const Parameter& p = params.get(name);
        tensors[name] = json{{"shape", p.value.shape}, {"data", p.value.data}};
    }
    j["params"] = std::move(tensors);

    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    out << j.dump();
    out << "\n";
    if (!out) throw CheckpointError("failed while writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CheckpointError("corrupted checkpoint " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || get_field<std::string>(j, "format") != kFormat) {
        throw CheckpointError(path.string() + " is not a checkpoint file");
    }
    if (get_field<int>(j, "version") != kVersion) {
        throw CheckpointError("unsupported checkpoint version in " + path.string());
    }

    const json& je = j.at("encoder");
    EncoderConfig enc;
    enc.layers = get_field<int>(je, "layers");
    enc.heads = get_field<int>(je, "heads");
    enc.dim = get_field<int>(je, "dim");
    enc.ff = get_field<int>(je, "ff");
    enc.max_len = get_field<int>(je, "max_len");
    enc.vocab_size = get_field<int>(je, "vocab_size");

    const json& jp = j.at("pos");
    PosLstmConfig pos;
    pos.tag_vocab = get_field<int>(jp, "tag_vocab");
    pos.emb = get_field<int>(jp, "emb");
    pos.hidden = get_field<int>(jp, "hidden");
    pos.proj = get_field<int>(jp, "proj");
    pos.max_len = get_field<int>(jp, "max_len");

    const json& jf = j.at("fusion");
    FusionConfig fuse;
    fuse.hidden = get_field<int>(jf, "hidden");
    fuse.classes = get_field<int>(jf, "classes");

    LoadedCheckpoint loaded;
    loaded.threshold = get_field<double>(j, "threshold");
    const double dropout = get_field<double>(j, "dropout");
    try {
        loaded.model = std::make_unique<FusedClassifier>(enc, pos, fuse, dropout, 0);
        loaded.vocab = SubwordVocab::from_tokens(get_field<std::vector<std::string>>(j, "vocab"));
    } catch (const std::exception& e) {
        throw CheckpointError("invalid checkpoint configs in " + path.string() + ": " + e.what());
    }
    if (loaded.vocab.size() != enc.vocab_size) {
        throw CheckpointError("checkpoint vocabulary has " + std::to_string(loaded.vocab.size()) +
                              " tokens but the encoder config says " +
                              std::to_string(enc.vocab_size));
    }

    ModelParams& params = loaded.model->params();
    const json& tensors = j.at("params");
    for (const std::string& name : params.names()) {
        if (!tensors.contains(name)) {
            throw CheckpointError("checkpoint missing parameter '" + name + "'");
        }
        const json& jt = tensors.at(name);
        Parameter& p = params.get(name);
        const auto shape = get_field<std::vector<int>>(jt, "shape");
        if (shape != p.value.shape) {
            Tensor probe;
            probe.shape = shape;
            throw CheckpointError("parameter '" + name + "' shape mismatch: config wants " +
                                  p.value.shape_str() + ", checkpoint has " + probe.shape_str());
        }
        const auto data = get_field<std::vector<Scalar>>(jt, "data");
        if (data.size() != p.value.numel()) {
            throw CheckpointError("parameter '" + name + "' data length " +
                                  std::to_string(data.size()) + " does not match shape " +
                                  p.value.shape_str());
        }
        p.value.data = data;
    }
    return loaded;
}

}  // namespace qwf
