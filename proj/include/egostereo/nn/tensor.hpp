#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <vector>

#include "egostereo/errors.hpp"

namespace egostereo::nn {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MatMap = Eigen::Map<MatRM<S>>;
template <class S>
using ConstMatMap = Eigen::Map<const MatRM<S>>;
template <class S>
using VecX = Eigen::Vector<S, Eigen::Dynamic>;

// Dense n-d array in C order backed by a flat Eigen vector. All the nn code
// views slices of it through Eigen maps, so there is no per-element virtual
// anything anywhere.
template <class S>
struct Tensor {
  std::vector<int> shape;
  VecX<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> shp)
      : shape(std::move(shp)), data(VecX<S>::Zero(count(shape))) {}

  static std::int64_t count(const std::vector<int>& shp) {
    std::int64_t n = 1;
    for (int d : shp) {
      if (d < 0) throw ShapeError("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> shp) { return Tensor(std::move(shp)); }

  static Tensor full(std::vector<int> shp, S v) {
    Tensor t(std::move(shp));
    t.data.setConstant(v);
    return t;
  }

  static Tensor scalar(S v) { return full({1}, v); }

  static Tensor from(std::vector<int> shp, std::initializer_list<S> vals) {
    Tensor t(std::move(shp));
    if (static_cast<std::int64_t>(vals.size()) != t.size()) {
      throw ShapeError("Tensor::from: value count mismatch");
    }
    std::int64_t i = 0;
    for (S v : vals) t.data[i++] = v;
    return t;
  }

  std::int64_t size() const { return data.size(); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(i); }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  // 2-d row-major view. rows*cols must cover the whole tensor.
  MatMap<S> mat(Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != size()) {
      throw ShapeError("Tensor::mat: element count mismatch");
    }
    return MatMap<S>(data.data(), rows, cols);
  }
  ConstMatMap<S> mat(Eigen::Index rows, Eigen::Index cols) const {
    if (rows * cols != size()) {
      throw ShapeError("Tensor::mat: element count mismatch");
    }
    return ConstMatMap<S>(data.data(), rows, cols);
  }

  // Canonical matrix view: last dimension = columns.
  MatMap<S> mat2d() {
    if (ndim() < 1) throw ShapeError("Tensor::mat2d: rank 0");
    const Eigen::Index cols = shape.back();
    return mat(cols == 0 ? 0 : size() / cols, cols);
  }
  ConstMatMap<S> mat2d() const {
    if (ndim() < 1) throw ShapeError("Tensor::mat2d: rank 0");
    const Eigen::Index cols = shape.back();
    return mat(cols == 0 ? 0 : size() / cols, cols);
  }

  template <class T>
  Tensor<T> cast() const {
    Tensor<T> out;
    out.shape = shape;
    out.data = data.template cast<T>();
    return out;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      os << (i ? "," : "") << shape[i];
    }
    os << ")";
    return os.str();
  }
};

template <class S>
void check_same_shape(const Tensor<S>& a, const Tensor<S>& b,
                      const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

}  // namespace egostereo::nn
