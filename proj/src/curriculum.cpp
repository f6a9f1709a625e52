#include "qwf/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

namespace qwf {

const char* bucket_name(Bucket b) {
    switch (b) {
        case Bucket::Easy: return "easy";
        case Bucket::Medium: return "medium";
        case Bucket::Hard: return "hard";
    }
    return "?";
}

Bucket parse_bucket(const std::string& name) {
    const std::string n = to_lower(trim(name));
    if (n == "easy") return Bucket::Easy;
    if (n == "medium") return Bucket::Medium;
    if (n == "hard") return Bucket::Hard;
    throw ConfigError("unknown bucket '" + name + "' (want easy|medium|hard)");
}

BucketSpec BucketSpec::defaults() {
    BucketSpec s;
    s.set(0.0, Bucket::Easy);
    s.set(0.2, Bucket::Medium);
    s.set(0.4, Bucket::Hard);
    s.set(0.6, Bucket::Hard);
    s.set(0.8, Bucket::Hard);
    s.set(1.0, Bucket::Easy);
    return s;
}

void BucketSpec::set(double grid_value, Bucket b) {
    const double scaled = grid_value * 5.0;
    const long idx = std::lround(scaled);
    if (idx < 0 || idx > 5 || std::abs(scaled - static_cast<double>(idx)) > 1e-9) {
        throw ConfigError("bucket spec key " + std::to_string(grid_value) +
                          " is not on the 0.2 probability grid");
    }
    grid_[static_cast<std::size_t>(idx)] = b;
}

BucketSpec BucketSpec::from_map(const std::map<std::string, std::string>& m) {
    if (m.empty()) throw ConfigError("bucket spec map is empty");
    BucketSpec s;
    for (const auto& [key, val] : m) {
        double p = 0;
        try {
            p = std::stod(key);
        } catch (const std::exception&) {
            throw ConfigError("bucket spec key '" + key + "' is not a probability");
        }
        s.set(p, parse_bucket(val));
    }
    return s;
}

std::map<std::string, std::string> BucketSpec::to_map() const {
    static const char* keys[6] = {"0.0", "0.2", "0.4", "0.6", "0.8", "1.0"};
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < 6; ++i) {
        if (grid_[i]) out[keys[i]] = bucket_name(*grid_[i]);
    }
    return out;
}

Bucket BucketSpec::assign(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DataError("probability " + std::to_string(p) + " outside [0,1]");
    }
    // nearest grid point; ties resolve downward
    long idx = std::lround(p * 5.0);
    if (idx > 5) idx = 5;
    const auto& slot = grid_[static_cast<std::size_t>(idx)];
    if (!slot) {
        throw ConfigError("bucket spec does not cover probability " + std::to_string(p) +
                          " (grid point " + std::to_string(static_cast<double>(idx) / 5.0) + ")");
    }
    return *slot;
}

Bucket assign_bucket(double p, const BucketSpec& spec) { return spec.assign(p); }

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::None: return "none";
        case Strategy::OnePass: return "onepass";
        case Strategy::BabySteps: return "babysteps";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name) {
    const std::string n = to_lower(trim(name));
    if (n == "none") return Strategy::None;
    if (n == "onepass" || n == "one-pass" || n == "one_pass") return Strategy::OnePass;
    if (n == "babysteps" || n == "baby-steps" || n == "baby_steps") return Strategy::BabySteps;
    throw ConfigError("unknown strategy '" + name + "' (want none|onepass|babysteps)");
}

std::vector<Bucket> default_ordering(Strategy s) {
    if (s == Strategy::OnePass) return {Bucket::Hard, Bucket::Easy, Bucket::Medium};
    return {Bucket::Easy, Bucket::Medium, Bucket::Hard};
}

namespace {

void check_ordering(const BucketedIndices& bucketed, const std::vector<Bucket>& ordering) {
    std::set<Bucket> seen;
    for (Bucket b : ordering) {
        if (!seen.insert(b).second) {
            throw ConfigError(std::string("duplicate bucket '") + bucket_name(b) +
                              "' in curriculum ordering");
        }
    }
    for (const auto& [bucket, indices] : bucketed) {
        if (!indices.empty() && seen.count(bucket) == 0) {
            throw ConfigError(std::string("bucket '") + bucket_name(bucket) +
                              "' has examples but is missing from the ordering");
        }
    }
}

}  // namespace

CurriculumPlan one_pass_plan(const BucketedIndices& bucketed, const std::vector<Bucket>& ordering) {
    check_ordering(bucketed, ordering);
    CurriculumPlan plan;
    plan.strategy = Strategy::OnePass;
    plan.ordering = ordering;
    for (Bucket b : ordering) {
        auto it = bucketed.find(b);
        if (it == bucketed.end() || it->second.empty()) {
            std::cerr << "[qwf] warning: bucket '" << bucket_name(b)
                      << "' is empty; dropping its phase\n";
            continue;
        }
        plan.phases.push_back(it->second);
    }
    if (plan.phases.empty()) throw ConfigError("curriculum plan has no non-empty phases");
    return plan;
}

CurriculumPlan baby_steps_plan(const BucketedIndices& bucketed,
                               const std::vector<Bucket>& ordering) {
    check_ordering(bucketed, ordering);
    CurriculumPlan plan;
    plan.strategy = Strategy::BabySteps;
    plan.ordering = ordering;
    std::vector<int> cumulative;
    for (Bucket b : ordering) {
        auto it = bucketed.find(b);
        if (it == bucketed.end() || it->second.empty()) {
            std::cerr << "[qwf] warning: bucket '" << bucket_name(b)
                      << "' is empty; dropping its phase\n";
            continue;
        }
        cumulative.insert(cumulative.end(), it->second.begin(), it->second.end());
        std::sort(cumulative.begin(), cumulative.end());  // keep dataset order within a phase
        plan.phases.push_back(cumulative);
    }
    if (plan.phases.empty()) throw ConfigError("curriculum plan has no non-empty phases");
    return plan;
}

CurriculumPlan no_curriculum_plan(int n_examples) {
    if (n_examples <= 0) throw ConfigError("cannot build a plan for an empty training set");
    CurriculumPlan plan;
    plan.strategy = Strategy::None;
    plan.phases.emplace_back();
    plan.phases.back().reserve(static_cast<std::size_t>(n_examples));
    for (int i = 0; i < n_examples; ++i) plan.phases.back().push_back(i);
    return plan;
}

}  // namespace qwf
