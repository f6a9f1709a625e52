#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "qwf/data.hpp"

using namespace qwf;

namespace {
std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}
}  // namespace

TEST_CASE("load_tsv parses queries, probabilities, and optional tags") {
    const auto path = temp_file("qwf_data_ok.tsv");
    {
        std::ofstream out(path);
        out << "how far is boston ?\t1.0\n";
        out << "\n";
        out << "1961 penney worth ?\t0.0\n";
        out << "dogs run\t0.4\tNNS VBP\n";
    }
    const auto records = load_tsv(path);
    REQUIRE(records.size() == 3);
    CHECK(records[0].text == "how far is boston ?");
    CHECK(records[0].p == 1.0);
    CHECK(records[1].p == 0.0);
    CHECK(records[2].pretags == std::vector<std::string>{"NNS", "VBP"});
    std::filesystem::remove(path);
}

TEST_CASE("load_tsv rejects malformed lines with their line number") {
    const auto path = temp_file("qwf_data_bad.tsv");
    {
        std::ofstream out(path);
        out << "fine query ?\t0.8\n";
        out << "bad probability\t1.5\n";
    }
    CHECK_THROWS_WITH_AS(load_tsv(path), doctest::Contains("line 2"), DataError);
    std::filesystem::remove(path);

    const auto path2 = temp_file("qwf_data_bad2.tsv");
    {
        std::ofstream out(path2);
        out << "no probability column\n";
    }
    CHECK_THROWS_WITH_AS(load_tsv(path2), doctest::Contains("line 1"), DataError);
    std::filesystem::remove(path2);

    const auto path3 = temp_file("qwf_data_bad3.tsv");
    {
        std::ofstream out(path3);
        out << "query\tnot_a_number\n";
    }
    CHECK_THROWS_AS(load_tsv(path3), DataError);
    std::filesystem::remove(path3);
}

TEST_CASE("empty file loads as an empty list") {
    const auto path = temp_file("qwf_data_empty.tsv");
    { std::ofstream out(path); }
    CHECK(load_tsv(path).empty());
    std::filesystem::remove(path);
}

TEST_CASE("write then load is the identity on records") {
    std::vector<QueryRecord> records{
        {"how far is boston ?", 1.0, {}},
        {"what is turkey population ?", 0.2, {}},
        {"dogs run", 0.4, {"NNS", "VBP"}},
        {"odd probability", 0.35, {}},
    };
    const auto path = temp_file("qwf_data_roundtrip.tsv");
    write_tsv(records, path);
    const auto loaded = load_tsv(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(loaded[i] == records[i]);
    std::filesystem::remove(path);
}

TEST_CASE("labeling: inclusive threshold at 0.8") {
    std::vector<QueryRecord> records{{"a ?", 1.0, {}}, {"b ?", 0.8, {}}, {"c", 0.0, {}},
                                     {"d", 0.6, {}}};
    const auto labeled = label(records);
    CHECK(labeled[0].label == kWellFormed);
    CHECK(labeled[1].label == kWellFormed);  // boundary is inclusive
    CHECK(labeled[2].label == kPoorlyFormed);
    CHECK(labeled[3].label == kPoorlyFormed);
    CHECK(labeled[0].bucket == Bucket::Easy);
    CHECK(labeled[1].bucket == Bucket::Hard);

    CHECK_THROWS_AS(label(records, 0.0), ConfigError);
    CHECK_THROWS_AS(label(records, 1.0), ConfigError);
}

TEST_CASE("labeling is monotone in p") {
    const double grid[6] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int previous = kPoorlyFormed;
    for (double p : grid) {
        const auto labeled = label({{"q", p, {}}});
        CHECK(labeled[0].label >= previous);  // raising p never flips positive -> negative
        previous = labeled[0].label;
    }
}

TEST_CASE("synthetic dataset is seed-deterministic") {
    const DatasetSplits a = synth_dataset(7, 200);
    const DatasetSplits b = synth_dataset(7, 200);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].record == b.train[i].record);
    }
    const DatasetSplits c = synth_dataset(8, 200);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        any_diff = any_diff || !(a.train[i].record == c.train[i].record);
    }
    CHECK(any_diff);
}

TEST_CASE("synthetic dataset: split sizes, balance, and corruption contract") {
    const int n = 2000;
    const DatasetSplits s = synth_dataset(3, n);
    CHECK(s.train.size() == 1400);
    CHECK(s.dev.size() == 300);
    CHECK(s.test.size() == 300);

    long positive = 0, total = 0;
    auto scan = [&](const std::vector<LabeledExample>& xs) {
        for (const auto& ex : xs) {
            ++total;
            if (ex.label == kWellFormed) ++positive;
            if (ex.record.p < 0.8) {
                // corrupted examples never reach the well-formed probabilities
                CHECK(ex.label == kPoorlyFormed);
            }
            CHECK(!ex.record.text.empty());
        }
    };
    scan(s.train);
    scan(s.dev);
    scan(s.test);
    CHECK(total == n);
    const double pos_rate = static_cast<double>(positive) / total;
    CHECK(pos_rate >= 0.45);
    CHECK(pos_rate <= 0.55);

    CHECK_THROWS_AS(synth_dataset(1, 5), ConfigError);
}

TEST_CASE("synthetic corruption severities carry the intended probabilities") {
    const DatasetSplits s = synth_dataset(11, 1500);
    std::set<double> seen;
    for (const auto& ex : s.train) seen.insert(ex.record.p);
    // all six grid probabilities are populated
    for (double p : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) CHECK(seen.count(p) == 1);
    // clean queries end with the question mark; mild ones dropped it
    for (const auto& ex : s.train) {
        const bool ends_q = ex.record.text.size() >= 2 &&
                            ex.record.text.substr(ex.record.text.size() - 2) == " ?";
        if (ex.record.p >= 0.8) CHECK(ends_q);
        if (ex.record.p == 0.6 || ex.record.p == 0.4) CHECK(!ends_q);
    }
}

TEST_CASE("bucket stats mirror the reference table layout") {
    std::vector<QueryRecord> records;
    // hard: 3 positive (0.8), 2 negative (0.4/0.6)
    records.push_back({"h1 ?", 0.8, {}});
    records.push_back({"h2 ?", 0.8, {}});
    records.push_back({"h3 ?", 0.8, {}});
    records.push_back({"h4", 0.4, {}});
    records.push_back({"h5", 0.6, {}});
    // medium: 1 negative
    records.push_back({"m1", 0.2, {}});
    // easy: 2 positive, 1 negative
    records.push_back({"e1 ?", 1.0, {}});
    records.push_back({"e2 ?", 1.0, {}});
    records.push_back({"e3", 0.0, {}});

    const BucketStats stats = bucket_stats(label(records));
    CHECK(stats.of(Bucket::Hard).positive == 3);
    CHECK(stats.of(Bucket::Hard).negative == 2);
    CHECK(stats.of(Bucket::Hard).total() == 5);
    CHECK(stats.of(Bucket::Medium).positive == 0);
    CHECK(stats.of(Bucket::Medium).negative == 1);
    CHECK(stats.of(Bucket::Easy).total() == 3);
    CHECK(stats.total() == static_cast<long>(records.size()));

    const std::string csv = stats.to_csv();
    CHECK(csv.find("bucket,positive,negative,total") == 0);
    CHECK(csv.find("hard,3,2,5") != std::string::npos);
    CHECK(csv.find("medium,0,1,1") != std::string::npos);
    CHECK(csv.find("easy,2,1,3") != std::string::npos);
}

TEST_CASE("an all-easy set leaves medium and hard rows at zero") {
    std::vector<QueryRecord> records{{"a ?", 1.0, {}}, {"b", 0.0, {}}, {"c ?", 1.0, {}}};
    const BucketStats stats = bucket_stats(label(records));
    CHECK(stats.of(Bucket::Medium).total() == 0);
    CHECK(stats.of(Bucket::Hard).total() == 0);
    CHECK(stats.of(Bucket::Easy).total() == 3);
}

TEST_CASE("bucketize groups indices by bucket in dataset order") {
    std::vector<QueryRecord> records{{"a ?", 1.0, {}}, {"b", 0.2, {}}, {"c ?", 0.8, {}},
                                     {"d", 0.0, {}},   {"e", 0.2, {}}};
    const BucketedIndices b = bucketize(label(records));
    CHECK(b.at(Bucket::Easy) == std::vector<int>{0, 3});
    CHECK(b.at(Bucket::Medium) == std::vector<int>{1, 4});
    CHECK(b.at(Bucket::Hard) == std::vector<int>{2});
}
