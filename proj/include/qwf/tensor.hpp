#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "qwf/common.hpp"

namespace qwf {

// Dense row-major tensor. Rank 1 and 2 are the only shapes the model needs;
// higher ranks are supported by the element-wise paths.
struct Tensor {
    std::vector<int> shape;
    std::vector<Scalar> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, Scalar v);
    static Tensor scalar(Scalar v);
    static Tensor row(std::vector<Scalar> v);
    static Tensor matrix(int r, int c, std::vector<Scalar> v);

    int ndim() const { return static_cast<int>(shape.size()); }
    std::size_t numel() const { return data.size(); }
    int dim(int i) const;

    // 2D accessors; throw on rank mismatch.
    int rows() const;
    int cols() const;
    Scalar& at(int i, int j);
    Scalar at(int i, int j) const;

    Scalar& operator[](std::size_t i) { return data[i]; }
    Scalar operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
    void fill(Scalar v);

    std::string shape_str() const;  // e.g. "[3x4]"
};

}  // namespace qwf
