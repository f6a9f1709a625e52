#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qwf/model.hpp"
#include "qwf/trainer.hpp"

namespace qwf {

// `synth:<seed>:<n>` in a data path selects the generator.
struct SynthSpec {
    unsigned seed = 0;
    int n = 0;
};
std::optional<SynthSpec> parse_synth_spec(const std::string& path);

// Everything a training run needs; JSON file plus command-line overrides,
// flags win. Unknown keys are rejected so typos cannot silently fall back to
// defaults.
struct RunConfig {
    std::string train_path;
    std::string dev_path;
    std::string test_path;
    std::string out_dir = "runs/out";
    int vocab_size = 512;
    double threshold = kDefaultThreshold;
    bool parallel_runs = true;
    EncoderConfig encoder;    // vocab_size 0 = derive from the trained vocabulary
    PosLstmConfig pos;
    FusionConfig fusion;
    TrainConfig train;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_json_file(const std::filesystem::path& path);
    std::string to_json_text() const;  // resolved config, defaults included

    // training-time checks: data paths present, dimensions valid
    void validate() const;
};

}  // namespace qwf
