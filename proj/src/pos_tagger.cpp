#include "qwf/pos_tagger.hpp"

#include <array>
#include <cctype>
#include <fstream>

namespace qwf {

namespace tags {

const std::vector<std::string>& names() {
    static const std::vector<std::string> kNames = {
        "[PAD]", "[UNK]",
        "#",  "$",  "''", "(",  ")",  ",",  ".",  ":",   "``",  "CC",  "CD",  "DT",
        "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN",  "NNP", "NNPS", "NNS",
        "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",  "SYM", "TO",  "UH",
        "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB"};
    return kNames;
}

int count() { return static_cast<int>(names().size()); }

int id(const std::string& name) {
    static const auto index = [] {
        std::unordered_map<std::string, int> m;
        const auto& n = names();
        for (std::size_t i = 0; i < n.size(); ++i) m[n[i]] = static_cast<int>(i);
        return m;
    }();
    auto it = index.find(name);
    return it == index.end() ? kUnk : it->second;
}

}  // namespace tags

namespace {

int t(const char* name) { return tags::id(name); }

// Compact closed-class lexicon; open-class words are handled by the suffix
// rules and the NN default.
const std::vector<std::pair<const char*, const char*>>& builtin_lexicon() {
    static const std::vector<std::pair<const char*, const char*>> kLex = {
        // interrogatives
        {"what", "WP"}, {"who", "WP"}, {"whom", "WP"}, {"whose", "WP$"}, {"which", "WDT"},
        {"when", "WRB"}, {"where", "WRB"}, {"why", "WRB"}, {"how", "WRB"},
        // auxiliaries and modals
        {"is", "VBZ"}, {"are", "VBP"}, {"was", "VBD"}, {"were", "VBD"}, {"am", "VBP"},
        {"be", "VB"}, {"been", "VBN"}, {"being", "VBG"},
        {"do", "VBP"}, {"does", "VBZ"}, {"did", "VBD"}, {"done", "VBN"},
        {"have", "VBP"}, {"has", "VBZ"}, {"had", "VBD"},
        {"can", "MD"}, {"could", "MD"}, {"will", "MD"}, {"would", "MD"}, {"shall", "MD"},
        {"should", "MD"}, {"may", "MD"}, {"might", "MD"}, {"must", "MD"},
        // determiners
        {"the", "DT"}, {"a", "DT"}, {"an", "DT"}, {"this", "DT"}, {"that", "DT"},
        {"these", "DT"}, {"those", "DT"}, {"some", "DT"}, {"any", "DT"}, {"no", "DT"},
        {"every", "DT"}, {"each", "DT"}, {"another", "DT"}, {"all", "PDT"}, {"both", "PDT"},
        // pronouns
        {"i", "PRP"}, {"you", "PRP"}, {"he", "PRP"}, {"she", "PRP"}, {"it", "PRP"},
        {"we", "PRP"}, {"they", "PRP"}, {"me", "PRP"}, {"him", "PRP"}, {"them", "PRP"},
        {"us", "PRP"}, {"my", "PRP$"}, {"your", "PRP$"}, {"his", "PRP$"}, {"her", "PRP$"},
        {"its", "PRP$"}, {"our", "PRP$"}, {"their", "PRP$"},
        // prepositions
        {"of", "IN"}, {"in", "IN"}, {"on", "IN"}, {"at", "IN"}, {"by", "IN"}, {"for", "IN"},
        {"with", "IN"}, {"from", "IN"}, {"about", "IN"}, {"into", "IN"}, {"over", "IN"},
        {"under", "IN"}, {"between", "IN"}, {"after", "IN"}, {"before", "IN"},
        {"during", "IN"}, {"without", "IN"}, {"through", "IN"}, {"against", "IN"},
        {"if", "IN"}, {"than", "IN"}, {"as", "IN"},
        // conjunctions, particles, misc
        {"and", "CC"}, {"or", "CC"}, {"but", "CC"}, {"nor", "CC"},
        {"to", "TO"}, {"not", "RB"}, {"n't", "RB"}, {"there", "EX"},
        {"up", "RP"}, {"out", "RP"}, {"off", "RP"}, {"down", "RP"},
        {"yes", "UH"}, {"please", "UH"},
        // frequent adverbs / adjectives whose suffixes would mislead
        {"very", "RB"}, {"so", "RB"}, {"too", "RB"}, {"now", "RB"}, {"here", "RB"},
        {"never", "RB"}, {"always", "RB"}, {"often", "RB"}, {"also", "RB"},
        {"more", "JJR"}, {"most", "JJS"}, {"less", "JJR"}, {"least", "JJS"},
        {"good", "JJ"}, {"bad", "JJ"}, {"big", "JJ"}, {"small", "JJ"}, {"new", "JJ"},
        {"old", "JJ"}, {"easy", "JJ"}, {"hard", "JJ"}, {"long", "JJ"}, {"high", "JJ"},
        {"low", "JJ"}, {"many", "JJ"}, {"much", "JJ"}, {"few", "JJ"}, {"other", "JJ"},
        {"same", "JJ"}, {"own", "JJ"}, {"best", "JJS"}, {"worst", "JJS"},
        // frequent verbs (non-3sg present as the query-initial reading)
        {"run", "VBP"}, {"go", "VBP"}, {"get", "VBP"}, {"make", "VBP"}, {"take", "VBP"},
        {"find", "VBP"}, {"use", "VBP"}, {"eat", "VBP"}, {"know", "VBP"}, {"see", "VBP"},
        {"come", "VBP"}, {"work", "VBP"}, {"live", "VBP"}, {"mean", "VBP"}, {"cost", "VBP"},
        {"weigh", "VBP"}, {"spell", "VB"}, {"say", "VBP"}, {"think", "VBP"},
        // frequent irregular nouns
        {"people", "NNS"}, {"children", "NNS"}, {"men", "NNS"}, {"women", "NNS"},
        {"feet", "NNS"}, {"teeth", "NNS"}, {"mice", "NNS"}, {"geese", "NNS"},
    };
    return kLex;
}

bool is_number(const std::string& s) {
    bool digit = false;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit = true;
        } else if (c != '.' && c != ',' && c != '-' && c != '/' && c != '%' && c != '$') {
            return false;
        }
    }
    return digit;
}

bool ends_with(const std::string& s, const char* suffix) {
    const std::size_t n = std::char_traits<char>::length(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace

PosTagger::PosTagger() {
    for (const auto& [word, tag] : builtin_lexicon()) lexicon_[word] = t(tag);
}

void PosTagger::load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read lexicon file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("lexicon " + path.string() + " line " + std::to_string(lineno) +
                            ": expected word<TAB>tag");
        }
        lexicon_[to_lower(trim(line.substr(0, tab)))] = tags::id(trim(line.substr(tab + 1)));
    }
}

int PosTagger::tag_word(const std::string& raw) const {
    if (raw.empty()) return tags::kUnk;

    // punctuation
    if (raw == "?" || raw == "." || raw == "!") return t(".");
    if (raw == ",") return t(",");
    if (raw == ":" || raw == ";") return t(":");
    if (raw == "(") return t("(");
    if (raw == ")") return t(")");
    if (raw == "``" || raw == "\"") return t("``");
    if (raw == "''") return t("''");
    if (raw == "$") return t("$");
    if (raw == "#") return t("#");
    if (raw == "'s") return t("POS");
    bool alnum = false;
    for (char c : raw) alnum = alnum || std::isalnum(static_cast<unsigned char>(c));
    if (!alnum) return t("SYM");

    const std::string w = to_lower(raw);
    if (auto it = lexicon_.find(w); it != lexicon_.end()) return it->second;
    if (is_number(w)) return t("CD");
    if (std::isupper(static_cast<unsigned char>(raw[0]))) return t("NNP");

    if (w.size() > 4 && ends_with(w, "ing")) return t("VBG");
    if (w.size() > 3 && ends_with(w, "ed")) return t("VBD");
    if (w.size() > 3 && ends_with(w, "ly")) return t("RB");
    if (w.size() > 4 && ends_with(w, "est")) return t("JJS");
    if (w.size() > 4 && ends_with(w, "er")) return t("JJR");
    if (ends_with(w, "tion") || ends_with(w, "sion") || ends_with(w, "ment") ||
        ends_with(w, "ness") || ends_with(w, "ity") || ends_with(w, "ship")) {
        return t("NN");
    }
    if (ends_with(w, "ous") || ends_with(w, "ful") || ends_with(w, "ive") ||
        ends_with(w, "able") || ends_with(w, "ible") || (w.size() > 4 && ends_with(w, "ic"))) {
        return t("JJ");
    }
    if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
        !ends_with(w, "is")) {
        return t("NNS");
    }
    return t("NN");
}

std::vector<int> PosTagger::tag(const std::string& text) const {
    std::vector<int> out;
    for (const std::string& tok : whitespace_tokens(text)) out.push_back(tag_word(tok));
    return out;
}

TagSequence pos_tag(const std::string& text, const PosTagger& tagger, int pos_max_len) {
    if (pos_max_len < 1) throw ConfigError("pos_max_len must be >= 1");
    TagSequence seq;
    seq.ids = tagger.tag(text);
    seq.source_token_count = static_cast<int>(seq.ids.size());
    seq.ids.resize(static_cast<std::size_t>(pos_max_len), tags::kPad);  // pads or truncates
    return seq;
}

TagSequence tags_from_names(const std::vector<std::string>& names, int pos_max_len) {
    if (pos_max_len < 1) throw ConfigError("pos_max_len must be >= 1");
    TagSequence seq;
    seq.source_token_count = static_cast<int>(names.size());
    for (const std::string& n : names) seq.ids.push_back(tags::id(n));
    seq.ids.resize(static_cast<std::size_t>(pos_max_len), tags::kPad);
    return seq;
}

}  // namespace qwf
