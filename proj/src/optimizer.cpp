#include "qwf/optimizer.hpp"

#include <cmath>

namespace qwf {

void adamw_step(const std::vector<Parameter*>& params, double lr, double beta1, double beta2,
                double eps, double weight_decay) {
    if (params.empty()) return;
    const long step0 = params.front()->step;
    for (const Parameter* p : params) {
        if (p->step != step0) {
            throw ShapeError("optimizer step counter mismatch: '" + p->name + "' at " +
                             std::to_string(p->step) + ", '" + params.front()->name + "' at " +
                             std::to_string(step0));
        }
        if (!p->gradient.all_finite()) {
            throw std::runtime_error("non-finite gradient in parameter '" + p->name +
                                     "'; aborting optimizer step " + std::to_string(step0 + 1));
        }
    }

    for (Parameter* p : params) {
        p->step += 1;
        const double t = static_cast<double>(p->step);
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        Scalar* w = p->value.data.data();
        const Scalar* g = p->gradient.data.data();
        Scalar* m = p->moment1.data.data();
        Scalar* v = p->moment2.data.data();
        const std::size_t n = p->value.numel();
        for (std::size_t i = 0; i < n; ++i) {
            // decay is decoupled from the adaptive update
            w[i] -= static_cast<Scalar>(lr * weight_decay) * w[i];
            m[i] = static_cast<Scalar>(beta1) * m[i] + static_cast<Scalar>(1.0 - beta1) * g[i];
            v[i] = static_cast<Scalar>(beta2) * v[i] +
                   static_cast<Scalar>(1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= static_cast<Scalar>(lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

}  // namespace qwf
