#include "qwf/metrics.hpp"

namespace qwf {

namespace {
double safe_div(double num, double den) { return den == 0 ? 0.0 : num / den; }

double f1_of(double precision, double recall) {
    return (precision + recall) == 0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}
}  // namespace

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw DataError("compute_metrics: " + std::to_string(predictions.size()) +
                        " predictions vs " + std::to_string(labels.size()) + " labels");
    }
    Metrics m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred = predictions[i] != 0;
        const bool truth = labels[i] != 0;
        if (pred && truth) ++m.tp;
        if (pred && !truth) ++m.fp;
        if (!pred && truth) ++m.fn;
        if (!pred && !truth) ++m.tn;
    }
    const double n = static_cast<double>(predictions.size());
    m.accuracy = (static_cast<double>(m.tp) + static_cast<double>(m.tn)) / n;
    m.precision = safe_div(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
    m.recall = safe_div(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
    m.f1 = f1_of(m.precision, m.recall);
    const double neg_precision = safe_div(static_cast<double>(m.tn), static_cast<double>(m.tn + m.fn));
    const double neg_recall = safe_div(static_cast<double>(m.tn), static_cast<double>(m.tn + m.fp));
    m.macro_f1 = 0.5 * (m.f1 + f1_of(neg_precision, neg_recall));
    return m;
}

Metrics aggregate_mean(const std::vector<Metrics>& runs) {
    if (runs.empty()) throw DataError("aggregate_mean: no runs");
    Metrics mean;
    for (const Metrics& r : runs) {
        mean.accuracy += r.accuracy;
        mean.precision += r.precision;
        mean.recall += r.recall;
        mean.f1 += r.f1;
        mean.macro_f1 += r.macro_f1;
        mean.tp += r.tp;
        mean.fp += r.fp;
        mean.fn += r.fn;
        mean.tn += r.tn;
    }
    const double k = static_cast<double>(runs.size());
    mean.accuracy /= k;
    mean.precision /= k;
    mean.recall /= k;
    mean.f1 /= k;
    mean.macro_f1 /= k;
    return mean;
}

}  // namespace qwf
