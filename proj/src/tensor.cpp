#include "qwf/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace qwf {

namespace {
std::size_t checked_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw ShapeError("negative dimension in tensor shape");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), data(checked_numel(shape), Scalar{0}) {}

Tensor Tensor::full(std::vector<int> s, Scalar v) {
    Tensor t(std::move(s));
    t.fill(v);
    return t;
}

Tensor Tensor::scalar(Scalar v) { return full({1}, v); }

Tensor Tensor::row(std::vector<Scalar> v) {
    Tensor t;
    t.shape = {static_cast<int>(v.size())};
    t.data = std::move(v);
    return t;
}

Tensor Tensor::matrix(int r, int c, std::vector<Scalar> v) {
    if (static_cast<std::size_t>(r) * static_cast<std::size_t>(c) != v.size()) {
        throw ShapeError("matrix data length does not match " + std::to_string(r) + "x" +
                         std::to_string(c));
    }
    Tensor t;
    t.shape = {r, c};
    t.data = std::move(v);
    return t;
}

int Tensor::dim(int i) const {
    if (i < 0 || i >= ndim()) throw ShapeError("dimension index out of range");
    return shape[static_cast<std::size_t>(i)];
}

int Tensor::rows() const {
    if (ndim() != 2) throw ShapeError("rows() on tensor of shape " + shape_str());
    return shape[0];
}

int Tensor::cols() const {
    if (ndim() != 2) throw ShapeError("cols() on tensor of shape " + shape_str());
    return shape[1];
}

Scalar& Tensor::at(int i, int j) {
    return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) +
                static_cast<std::size_t>(j)];
}

Scalar Tensor::at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) +
                static_cast<std::size_t>(j)];
}

bool Tensor::all_finite() const {
    for (Scalar v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(Scalar v) { std::fill(data.begin(), data.end(), v); }

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (int i = 0; i < ndim(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[static_cast<std::size_t>(i)]);
    }
    s += "]";
    return s;
}

}  // namespace qwf
