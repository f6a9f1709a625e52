#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qwf/common.hpp"

namespace qwf {

enum class Bucket { Easy, Medium, Hard };

const char* bucket_name(Bucket b);
Bucket parse_bucket(const std::string& name);

// Maps annotator probabilities on the 0.2 grid to difficulty buckets.
// Probabilities off the grid fall back to the nearest grid point.
// Default: Easy = {0.0, 1.0}, Medium = {0.2}, Hard = {0.4, 0.6, 0.8} —
// distance-to-threshold difficulty with the threshold at 0.8.
class BucketSpec {
public:
    static BucketSpec defaults();
    // keys "0.0".."1.0" on the grid, values easy|medium|hard
    static BucketSpec from_map(const std::map<std::string, std::string>& m);
    std::map<std::string, std::string> to_map() const;

    void set(double grid_value, Bucket b);
    Bucket assign(double p) const;

private:
    std::array<std::optional<Bucket>, 6> grid_;  // index = round(p * 5)
};

Bucket assign_bucket(double p, const BucketSpec& spec);

enum class Strategy { None, OnePass, BabySteps };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

// Ordered training phases over example indices.
//   OnePass:   phases are pairwise disjoint; their union is the full set.
//   BabySteps: phases form a strict inclusion chain ending at the full set.
struct CurriculumPlan {
    Strategy strategy = Strategy::None;
    std::vector<Bucket> ordering;
    std::vector<std::vector<int>> phases;
};

using BucketedIndices = std::map<Bucket, std::vector<int>>;

// Default One Pass ordering: Hard, Easy, Medium. Default Baby Steps
// ordering: Easy, Medium, Hard.
std::vector<Bucket> default_ordering(Strategy s);

CurriculumPlan one_pass_plan(const BucketedIndices& bucketed, const std::vector<Bucket>& ordering);
CurriculumPlan baby_steps_plan(const BucketedIndices& bucketed,
                               const std::vector<Bucket>& ordering);
CurriculumPlan no_curriculum_plan(int n_examples);

}  // namespace qwf
