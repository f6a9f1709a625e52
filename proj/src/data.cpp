#include "qwf/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace qwf {

std::vector<QueryRecord> load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read data file " + path.string());
    std::vector<QueryRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        const std::string where = path.string() + " line " + std::to_string(lineno);
        if (cols.size() < 2 || cols.size() > 3) {
            throw DataError(where + ": expected query<TAB>probability[<TAB>tags], got " +
                            std::to_string(cols.size()) + " columns");
        }
        QueryRecord rec;
        rec.text = trim(cols[0]);
        if (rec.text.empty()) throw DataError(where + ": empty query text");
        const std::string pstr = trim(cols[1]);
        try {
            std::size_t used = 0;
            rec.p = std::stod(pstr, &used);
            if (used != pstr.size()) throw std::invalid_argument(pstr);
        } catch (const std::exception&) {
            throw DataError(where + ": probability '" + pstr + "' is not a number");
        }
        if (!(rec.p >= 0.0 && rec.p <= 1.0)) {
            throw DataError(where + ": probability " + pstr + " outside [0,1]");
        }
        if (cols.size() == 3) rec.pretags = whitespace_tokens(cols[2]);
        out.push_back(std::move(rec));
    }
    if (out.empty()) {
        std::cerr << "[qwf] warning: " << path.string() << " contains no records\n";
    }
    return out;
}

namespace {

std::string format_prob(double p) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), p);
    if (ec != std::errc()) throw DataError("cannot format probability");
    return std::string(buf.data(), ptr);
}

}  // namespace

void write_tsv(const std::vector<QueryRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write data file " + path.string());
    for (const QueryRecord& rec : records) {
        out << rec.text << '\t' << format_prob(rec.p);
        if (!rec.pretags.empty()) {
            out << '\t';
            for (std::size_t i = 0; i < rec.pretags.size(); ++i) {
                if (i) out << ' ';
                out << rec.pretags[i];
            }
        }
        out << '\n';
    }
}

std::vector<LabeledExample> label(const std::vector<QueryRecord>& records, double threshold,
                                  const BucketSpec& spec) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("threshold must lie in (0,1), got " + std::to_string(threshold));
    }
    std::vector<LabeledExample> out;
    out.reserve(records.size());
    for (const QueryRecord& rec : records) {
        LabeledExample ex;
        ex.record = rec;
        ex.label = rec.p >= threshold ? kWellFormed : kPoorlyFormed;
        ex.bucket = assign_bucket(rec.p, spec);
        out.push_back(std::move(ex));
    }
    return out;
}

namespace {

// ---- synthetic corpus -------------------------------------------------

const std::vector<std::vector<std::string>>& template_bank() {
    // every template starts with an interrogative head and ends with "?"
    // slot markers: N noun, P place, A adjective, L animal (plural), U unit,
    // F food, V verb, X person-noun
    static const std::vector<std::vector<std::string>> kTemplates = {
        {"what", "is", "the", "N", "of", "P", "?"},
        {"what", "is", "the", "A", "N", "in", "P", "?"},
        {"how", "many", "U", "are", "in", "a", "U", "?"},
        {"how", "do", "you", "spell", "N", "?"},
        {"where", "can", "i", "find", "F", "in", "P", "?"},
        {"who", "is", "the", "X", "of", "P", "?"},
        {"what", "is", "the", "A", "L", "in", "the", "world", "?"},
        {"how", "much", "does", "a", "L", "weigh", "?"},
        {"why", "do", "L", "V", "?"},
        {"which", "P", "city", "has", "the", "A", "N", "?"},
        {"can", "L", "V", "F", "?"},
        {"is", "the", "N", "of", "P", "A", "?"},
        {"how", "far", "is", "P", "from", "P", "?"},
        {"what", "does", "N", "mean", "?"},
        {"when", "did", "the", "N", "of", "P", "change", "?"},
        {"does", "a", "L", "V", "F", "?"},
    };
    return kTemplates;
}

const std::vector<std::string>& bank(char slot) {
    static const std::vector<std::string> nouns = {
        "population", "capital",  "currency",  "temperature", "distance", "history",
        "language",   "climate",  "economy",   "culture",     "anthem",   "flag",
        "area",       "timezone", "elevation", "coastline",   "border",   "government"};
    static const std::vector<std::string> places = {
        "france", "japan",   "brazil", "canada", "egypt",  "india",  "texas", "london",
        "paris",  "tokyo",   "africa", "europe", "norway", "mexico", "china", "peru",
        "spain",  "germany", "kenya",  "chile"};
    static const std::vector<std::string> adjectives = {
        "largest", "smallest", "fastest", "oldest",   "tallest", "deepest",
        "longest", "easiest",  "richest", "coldest",  "warmest", "busiest"};
    static const std::vector<std::string> animals = {
        "dogs", "cats", "sharks", "whales", "eagles", "spiders",
        "horses", "camels", "pandas", "otters", "falcons", "turtles"};
    static const std::vector<std::string> units = {
        "miles", "kilometers", "pounds", "grams", "liters", "ounces", "meters", "acres"};
    static const std::vector<std::string> foods = {
        "potatoes", "apples", "rice", "bread", "cheese", "mangoes", "carrots", "beans"};
    static const std::vector<std::string> verbs = {
        "swim", "migrate", "hibernate", "hunt", "bark", "climb", "dig", "jump"};
    static const std::vector<std::string> persons = {
        "president", "inventor", "founder", "mayor", "architect", "composer"};
    switch (slot) {
        case 'N': return nouns;
        case 'P': return places;
        case 'A': return adjectives;
        case 'L': return animals;
        case 'U': return units;
        case 'F': return foods;
        case 'V': return verbs;
        case 'X': return persons;
    }
    throw DataError("unknown template slot");
}

const std::set<std::string>& head_words() {
    static const std::set<std::string> kHeads = {"what", "how",  "where", "who", "why",
                                                 "which", "when", "can",   "is",  "does",
                                                 "do",    "many", "much",  "far"};
    return kHeads;
}

std::vector<std::string> realize_template(std::mt19937& rng) {
    const auto& templates = template_bank();
    std::uniform_int_distribution<std::size_t> pick_t(0, templates.size() - 1);
    std::vector<std::string> tokens;
    for (const std::string& slot : templates[pick_t(rng)]) {
        if (slot.size() == 1 && std::isupper(static_cast<unsigned char>(slot[0]))) {
            const auto& words = bank(slot[0]);
            std::uniform_int_distribution<std::size_t> pick_w(0, words.size() - 1);
            tokens.push_back(words[pick_w(rng)]);
        } else {
            tokens.push_back(slot);
        }
    }
    return tokens;
}

// one character operation: double, drop, or swap-adjacent
std::string misspell(const std::string& word, std::mt19937& rng) {
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_int_distribution<std::size_t> pos(0, word.size() - 2);
    std::string w = word;
    const std::size_t i = pos(rng);
    switch (op(rng)) {
        case 0: w.insert(i, 1, w[i]); break;
        case 1: w.erase(i, 1); break;
        default: std::swap(w[i], w[i + 1]); break;
    }
    return w == word ? word + word.back() : w;
}

void misspell_some(std::vector<std::string>& tokens, int count, std::mt19937& rng) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i].size() >= 4 && tokens[i] != "?") eligible.push_back(i);
    }
    std::shuffle(eligible.begin(), eligible.end(), rng);
    for (int c = 0; c < count && c < static_cast<int>(eligible.size()); ++c) {
        tokens[eligible[static_cast<std::size_t>(c)]] =
            misspell(tokens[eligible[static_cast<std::size_t>(c)]], rng);
    }
}

void drop_head(std::vector<std::string>& tokens) {
    int dropped = 0;
    while (!tokens.empty() && dropped < 2 && head_words().count(tokens.front())) {
        tokens.erase(tokens.begin());
        ++dropped;
    }
}

// permute everything before the trailing "?", keeping the result visibly
// scrambled: different from the original and not starting with a head word
void shuffle_interior(std::vector<std::string>& tokens, std::mt19937& rng) {
    if (tokens.size() < 3) return;
    const std::size_t end = tokens.back() == "?" ? tokens.size() - 1 : tokens.size();
    const std::vector<std::string> original(tokens.begin(), tokens.begin() + end);
    for (int attempt = 0; attempt < 32; ++attempt) {
        std::shuffle(tokens.begin(), tokens.begin() + end, rng);
        if (!std::equal(tokens.begin(), tokens.begin() + end, original.begin()) &&
            head_words().count(tokens.front()) == 0) {
            return;
        }
    }
    for (std::size_t i = 1; i < end; ++i) {
        if (head_words().count(tokens[i]) == 0) {
            std::swap(tokens[0], tokens[i]);
            return;
        }
    }
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

enum class Severity { Clean10, Clean08, Mild06, Mild04, Moderate02, Severe00 };

QueryRecord generate_example(Severity sev, std::mt19937& rng) {
    std::vector<std::string> tokens = realize_template(rng);
    QueryRecord rec;
    switch (sev) {
        case Severity::Clean10:
            rec.p = 1.0;
            break;
        case Severity::Clean08:
            rec.p = 0.8;
            break;
        case Severity::Mild06:
            tokens.pop_back();  // drop "?"
            rec.p = 0.6;
            break;
        case Severity::Mild04:
            tokens.pop_back();
            rec.p = 0.4;
            break;
        case Severity::Moderate02: {
            std::uniform_int_distribution<int> subtype(0, 3);
            switch (subtype(rng)) {
                case 0:
                case 1: drop_head(tokens); break;
                case 2: misspell_some(tokens, 2, rng); break;
                default:
                    drop_head(tokens);
                    misspell_some(tokens, 1, rng);
                    break;
            }
            rec.p = 0.2;
            break;
        }
        case Severity::Severe00:
            shuffle_interior(tokens, rng);
            rec.p = 0.0;
            break;
    }
    rec.text = join(tokens);
    return rec;
}

}  // namespace

DatasetSplits synth_dataset(unsigned seed, int n, double threshold, const BucketSpec& spec) {
    if (n < 10) throw ConfigError("synthetic dataset needs n >= 10, got " + std::to_string(n));

    // exact category counts, largest remainder rounding
    const std::vector<std::pair<Severity, double>> fractions = {
        {Severity::Clean10, 0.44}, {Severity::Clean08, 0.04}, {Severity::Mild06, 0.03},
        {Severity::Mild04, 0.03},  {Severity::Moderate02, 0.22}, {Severity::Severe00, 0.24}};
    std::vector<Severity> categories;
    categories.reserve(static_cast<std::size_t>(n));
    {
        std::vector<std::pair<double, std::size_t>> remainders;
        int assigned = 0;
        for (std::size_t i = 0; i < fractions.size(); ++i) {
            const double exact = fractions[i].second * n;
            const int whole = static_cast<int>(exact);
            for (int c = 0; c < whole; ++c) categories.push_back(fractions[i].first);
            assigned += whole;
            remainders.push_back({exact - whole, i});
        }
        std::sort(remainders.begin(), remainders.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        for (int extra = 0; assigned + extra < n; ++extra) {
            categories.push_back(fractions[remainders[static_cast<std::size_t>(extra) %
                                                      remainders.size()].second].first);
        }
    }

    std::mt19937 rng(seed);
    std::vector<QueryRecord> records;
    records.reserve(categories.size());
    for (Severity sev : categories) records.push_back(generate_example(sev, rng));
    std::shuffle(records.begin(), records.end(), rng);

    std::vector<LabeledExample> labeled = label(records, threshold, spec);
    const int n_train = (n * 70) / 100;
    const int n_dev = (n * 15) / 100;
    DatasetSplits splits;
    splits.train.assign(labeled.begin(), labeled.begin() + n_train);
    splits.dev.assign(labeled.begin() + n_train, labeled.begin() + n_train + n_dev);
    splits.test.assign(labeled.begin() + n_train + n_dev, labeled.end());
    return splits;
}

BucketCounts& BucketStats::of(Bucket b) {
    switch (b) {
        case Bucket::Hard: return rows[0];
        case Bucket::Medium: return rows[1];
        case Bucket::Easy: return rows[2];
    }
    throw DataError("bad bucket");
}

const BucketCounts& BucketStats::of(Bucket b) const {
    return const_cast<BucketStats*>(this)->of(b);
}

long BucketStats::total() const {
    long t = 0;
    for (const auto& r : rows) t += r.total();
    return t;
}

std::string BucketStats::to_csv() const {
    std::ostringstream out;
    out << "bucket,positive,negative,total\n";
    const Bucket order[3] = {Bucket::Hard, Bucket::Medium, Bucket::Easy};
    for (Bucket b : order) {
        const BucketCounts& c = of(b);
        out << bucket_name(b) << ',' << c.positive << ',' << c.negative << ',' << c.total()
            << '\n';
    }
    return out.str();
}

BucketStats bucket_stats(const std::vector<LabeledExample>& labeled) {
    BucketStats stats;
    for (const LabeledExample& ex : labeled) {
        if (ex.label == kWellFormed) {
            ++stats.of(ex.bucket).positive;
        } else {
            ++stats.of(ex.bucket).negative;
        }
    }
    return stats;
}

BucketedIndices bucketize(const std::vector<LabeledExample>& labeled) {
    BucketedIndices out;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        out[labeled[i].bucket].push_back(static_cast<int>(i));
    }
    return out;
}

}  // namespace qwf
