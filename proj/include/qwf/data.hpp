#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "qwf/curriculum.hpp"

namespace qwf {

// Raw query plus its annotator well-formedness probability. pretags, when
// nonempty, carry externally supplied POS tags (TSV column 3).
struct QueryRecord {
    std::string text;
    double p = 0.0;
    std::vector<std::string> pretags;

    bool operator==(const QueryRecord& o) const {
        return text == o.text && p == o.p && pretags == o.pretags;
    }
};

constexpr double kDefaultThreshold = 0.8;
constexpr int kPoorlyFormed = 0;
constexpr int kWellFormed = 1;

struct LabeledExample {
    QueryRecord record;
    int label = kPoorlyFormed;  // well-formed iff p >= threshold (inclusive)
    Bucket bucket = Bucket::Easy;
};

struct DatasetSplits {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> dev;
    std::vector<LabeledExample> test;
};

// `query<TAB>probability` with an optional third column of space-separated
// POS tags; blank lines skipped. Malformed lines report their line number.
std::vector<QueryRecord> load_tsv(const std::filesystem::path& path);
void write_tsv(const std::vector<QueryRecord>& records, const std::filesystem::path& path);

std::vector<LabeledExample> label(const std::vector<QueryRecord>& records,
                                  double threshold = kDefaultThreshold,
                                  const BucketSpec& spec = BucketSpec::defaults());

// Seed-deterministic synthetic corpus: templated interrogatives (well-formed,
// p in {0.8, 1.0}) and corrupted variants (dropped question marks, dropped
// interrogative heads, injected misspellings, token shuffles) with p in
// {0.0,...,0.6} graded by corruption severity. 70/15/15 split.
DatasetSplits synth_dataset(unsigned seed, int n, double threshold = kDefaultThreshold,
                            const BucketSpec& spec = BucketSpec::defaults());

struct BucketCounts {
    long positive = 0;
    long negative = 0;
    long total() const { return positive + negative; }
};

struct BucketStats {
    // ordered Hard, Medium, Easy to mirror the reference table layout
    std::array<BucketCounts, 3> rows;

    BucketCounts& of(Bucket b);
    const BucketCounts& of(Bucket b) const;
    long total() const;
    std::string to_csv() const;  // bucket,positive,negative,total
};

BucketStats bucket_stats(const std::vector<LabeledExample>& labeled);

BucketedIndices bucketize(const std::vector<LabeledExample>& labeled);

}  // namespace qwf
