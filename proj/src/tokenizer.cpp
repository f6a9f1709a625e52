#include "qwf/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace qwf {

namespace {

constexpr const char* kMarker = "##";

bool has_marker(const std::string& s) { return s.rfind(kMarker, 0) == 0; }

std::string strip_marker(const std::string& s) { return has_marker(s) ? s.substr(2) : s; }

}  // namespace

void SubwordVocab::index_tokens() {
    ids_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
            throw DataError("duplicate token in vocabulary: '" + tokens_[i] + "'");
        }
    }
    auto find_special = [&](const char* tok) {
        auto it = ids_.find(tok);
        if (it == ids_.end()) throw DataError(std::string("vocabulary missing special ") + tok);
        return it->second;
    };
    pad_id_ = find_special(kPad);
    unk_id_ = find_special(kUnk);
    cls_id_ = find_special(kCls);
}

SubwordVocab SubwordVocab::from_tokens(std::vector<std::string> tokens) {
    SubwordVocab v;
    v.tokens_ = std::move(tokens);
    v.index_tokens();
    return v;
}

SubwordVocab SubwordVocab::train(const std::vector<std::string>& corpus, int vocab_size) {
    if (corpus.empty()) throw DataError("cannot train a subword vocabulary on an empty corpus");

    // word -> frequency, in first-seen order for determinism
    std::map<std::string, long> freq;
    for (const std::string& line : corpus) {
        for (const std::string& tok : whitespace_tokens(to_lower(line))) ++freq[tok];
    }
    if (freq.empty()) throw DataError("corpus contains no tokens");

    // split each distinct word into symbols: first char plain, rest marked
    struct WordEntry {
        std::vector<std::string> symbols;
        long count;
    };
    std::vector<WordEntry> words;
    words.reserve(freq.size());
    std::set<std::string> alphabet;
    for (const auto& [word, count] : freq) {
        WordEntry e;
        e.count = count;
        for (std::size_t i = 0; i < word.size(); ++i) {
            std::string sym = (i == 0) ? std::string(1, word[i])
                                       : std::string(kMarker) + word[i];
            alphabet.insert(sym);
            e.symbols.push_back(std::move(sym));
        }
        words.push_back(std::move(e));
    }

    std::vector<std::string> tokens{kPad, kUnk, kCls};
    const int base = static_cast<int>(tokens.size() + alphabet.size());
    if (vocab_size < base) {
        throw ConfigError("vocab_size " + std::to_string(vocab_size) + " too small; need at least " +
                          std::to_string(base) + " for specials plus characters");
    }
    tokens.insert(tokens.end(), alphabet.begin(), alphabet.end());

    while (static_cast<int>(tokens.size()) < vocab_size) {
        // count adjacent pairs; ordered map keeps tie-breaking deterministic
        std::map<std::pair<std::string, std::string>, long> pairs;
        for (const WordEntry& w : words) {
            for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
                pairs[{w.symbols[i], w.symbols[i + 1]}] += w.count;
            }
        }
        if (pairs.empty()) break;
        auto best = pairs.begin();
        for (auto it = pairs.begin(); it != pairs.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        const std::string merged = best->first.first + strip_marker(best->first.second);
        tokens.push_back(merged);
        for (WordEntry& w : words) {
            std::vector<std::string> out;
            out.reserve(w.symbols.size());
            for (std::size_t i = 0; i < w.symbols.size(); ++i) {
                if (i + 1 < w.symbols.size() && w.symbols[i] == best->first.first &&
                    w.symbols[i + 1] == best->first.second) {
                    out.push_back(merged);
                    ++i;
                } else {
                    out.push_back(w.symbols[i]);
                }
            }
            w.symbols = std::move(out);
        }
    }
    return from_tokens(std::move(tokens));
}

void SubwordVocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vocabulary file " + path.string());
    for (const std::string& t : tokens_) out << t << "\n";
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read vocabulary file " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        tokens.push_back(line);
    }
    return from_tokens(std::move(tokens));
}

int SubwordVocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? -1 : it->second;
}

const std::string& SubwordVocab::token(int id) const {
    if (id < 0 || id >= size()) throw DataError("token id " + std::to_string(id) + " out of range");
    return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> SubwordVocab::encode_word(const std::string& word) const {
    std::vector<int> out;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        int match = -1;
        while (end > start) {
            std::string piece = word.substr(start, end - start);
            if (start > 0) piece = std::string(kMarker) + piece;
            const int pid = id(piece);
            if (pid >= 0) {
                match = pid;
                break;
            }
            --end;
        }
        if (match >= 0) {
            out.push_back(match);
            start = end;
        } else {
            out.push_back(unk_id_);  // character unseen in training
            ++start;
        }
    }
    return out;
}

std::string SubwordVocab::decode(const std::vector<int>& piece_ids) const {
    std::string out;
    for (int pid : piece_ids) out += strip_marker(token(pid));
    return out;
}

TokenizedQuery encode(const std::string& text, const SubwordVocab& vocab, int max_len) {
    if (max_len < 1) throw ConfigError("encoder max_len must be >= 1");
    TokenizedQuery q;
    q.ids.reserve(static_cast<std::size_t>(max_len));
    q.ids.push_back(vocab.cls_id());
    for (const std::string& word : whitespace_tokens(to_lower(text))) {
        if (static_cast<int>(q.ids.size()) >= max_len) break;
        for (int pid : vocab.encode_word(word)) {
            q.ids.push_back(pid);
            if (static_cast<int>(q.ids.size()) >= max_len) break;
        }
    }
    q.mask.assign(q.ids.size(), 1);
    q.ids.resize(static_cast<std::size_t>(max_len), vocab.pad_id());
    q.mask.resize(static_cast<std::size_t>(max_len), 0);
    return q;
}

}  // namespace qwf
