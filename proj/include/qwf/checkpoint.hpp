#pragma once

#include <filesystem>
#include <memory>

#include "qwf/tokenizer.hpp"
#include "qwf/trainer.hpp"

namespace qwf {

// Versioned JSON checkpoint: model configs, subword vocabulary, and all
// parameter tensors by name.
void save_checkpoint(const std::filesystem::path& path, FusedClassifier& model,
                     const SubwordVocab& vocab, double threshold = kDefaultThreshold);

struct LoadedCheckpoint {
    std::unique_ptr<FusedClassifier> model;
    SubwordVocab vocab;
    double threshold = kDefaultThreshold;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qwf
