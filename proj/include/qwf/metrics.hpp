#pragma once

#include <vector>

#include "qwf/common.hpp"

namespace qwf {

// Binary classification metrics; the positive class is "well-formed".
// macro_f1 averages the F1 of both classes.
struct Metrics {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double macro_f1 = 0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
};

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels);

// Component-wise mean across runs.
Metrics aggregate_mean(const std::vector<Metrics>& runs);

}  // namespace qwf
