#pragma once

#include <string>
#include <vector>

#include "qwf/tensor.hpp"

namespace qwf {

// A learnable weight with its gradient and AdamW state.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor gradient;
    Tensor moment1;
    Tensor moment2;
    long step = 0;

    Parameter(std::string n, Tensor init)
        : name(std::move(n)),
          value(std::move(init)),
          gradient(Tensor::zeros(value.shape)),
          moment1(Tensor::zeros(value.shape)),
          moment2(Tensor::zeros(value.shape)) {}

    void zero_grad() { gradient.fill(0); }
};

// Decoupled weight decay AdamW with bias correction. All parameters in one
// call must share the same step counter; a non-finite gradient aborts the
// whole step before any parameter is touched.
void adamw_step(const std::vector<Parameter*>& params, double lr, double beta1, double beta2,
                double eps, double weight_decay);

}  // namespace qwf
