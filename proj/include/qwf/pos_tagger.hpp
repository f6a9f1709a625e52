#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "qwf/common.hpp"

namespace qwf {

// Penn Treebank tag inventory (45 tags) plus PAD and UNK.
namespace tags {
constexpr int kPad = 0;
constexpr int kUnk = 1;
const std::vector<std::string>& names();
int count();
int id(const std::string& name);  // UNK for unrecognized names
}  // namespace tags

// POS ids for one query, padded/truncated to a fixed length. The length is a
// function of whitespace tokens only, never of subword segmentation.
struct TagSequence {
    std::vector<int> ids;
    int source_token_count = 0;
};

// Deterministic lexicon + suffix-rule tagger over the Penn Treebank tagset.
//
// Rule table, applied per whitespace token in this order:
//   1. punctuation  ( ? ! .  -> "."   , -> ","   : ; -> ":"  etc. )
//   2. lexicon lookup of the lowercased token (built-in table, extendable
//      via load_lexicon)
//   3. numeric tokens -> CD
//   4. unknown capitalized tokens -> NNP
//   5. suffix rules (ing -> VBG, ed -> VBD, ly -> RB, est -> JJS, er -> JJR,
//      tion/sion/ment/ness/ity/ship -> NN, ous/ful/ive/able/ible/ic -> JJ,
//      s -> NNS)
//   6. default -> NN
class PosTagger {
public:
    PosTagger();

    // `word<TAB>tag` per line; entries override the built-in lexicon.
    void load_lexicon(const std::filesystem::path& path);

    // One tag id per whitespace token, untruncated.
    std::vector<int> tag(const std::string& text) const;

    int tag_word(const std::string& raw_token) const;

private:
    std::unordered_map<std::string, int> lexicon_;
};

TagSequence pos_tag(const std::string& text, const PosTagger& tagger, int pos_max_len = 20);

// Pre-tagged route: space-separated tag names (TSV column 3) mapped onto the
// same tag inventory; unknown names become UNK.
TagSequence tags_from_names(const std::vector<std::string>& names, int pos_max_len = 20);

}  // namespace qwf
