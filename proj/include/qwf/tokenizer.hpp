#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qwf/common.hpp"

namespace qwf {

// Subword vocabulary with greedy longest-match encoding. Word-internal
// pieces carry the "##" continuation marker. Training builds the vocabulary
// by iterative pair merges on the corpus, most frequent pair first (ties
// broken lexicographically so training is deterministic).
class SubwordVocab {
public:
    static constexpr const char* kPad = "[PAD]";
    static constexpr const char* kUnk = "[UNK]";
    static constexpr const char* kCls = "[CLS]";

    static SubwordVocab train(const std::vector<std::string>& corpus, int vocab_size);
    static SubwordVocab from_tokens(std::vector<std::string> tokens);

    // One token per line, line number = id.
    void save(const std::filesystem::path& path) const;
    static SubwordVocab load(const std::filesystem::path& path);

    int id(const std::string& token) const;  // -1 if absent
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    int pad_id() const { return pad_id_; }
    int unk_id() const { return unk_id_; }
    int cls_id() const { return cls_id_; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Greedy longest-match split of a single lowercased word. Falls back to
    // single characters, then [UNK] for characters never seen in training.
    std::vector<int> encode_word(const std::string& word) const;

    // Inverse of encode_word for fully known words: joins pieces, stripping
    // continuation markers.
    std::string decode(const std::vector<int>& piece_ids) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
    int pad_id_ = 0, unk_id_ = 1, cls_id_ = 2;

    void index_tokens();
};

// [CLS] + subword pieces, truncated to max_len, padded with [PAD].
// mask[i] = 1 over [CLS] and real pieces, 0 over padding.
struct TokenizedQuery {
    std::vector<int> ids;
    std::vector<int> mask;
};

TokenizedQuery encode(const std::string& text, const SubwordVocab& vocab, int max_len = 44);

}  // namespace qwf
