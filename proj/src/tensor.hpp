#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace sandhi {

// Dense row-major tensor of 64-bit reals, rank 1 or 2 in practice.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<size_t> shape) : shape_(std::move(shape)) {
    size_t n = 1;
    for (size_t d : shape_) {
      if (d == 0) fail(ErrorKind::invalid_argument, "tensor dimensions must be positive");
      n *= d;
    }
    values_.assign(n, 0.0);
  }

  static Tensor vec(size_t n) { return Tensor({n}); }
  static Tensor mat(size_t rows, size_t cols) { return Tensor({rows, cols}); }

  bool defined() const { return !shape_.empty(); }
  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return values_.size(); }
  size_t dim(size_t i) const { return shape_[i]; }
  size_t rows() const { return shape_[0]; }
  size_t cols() const { return shape_[1]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](size_t i) { return values_[i]; }
  double operator[](size_t i) const { return values_[i]; }
  double& at(size_t r, size_t c) { return values_[r * shape_[1] + c]; }
  double at(size_t r, size_t c) const { return values_[r * shape_[1] + c]; }
  double* row(size_t r) { return values_.data() + r * shape_[1]; }
  const double* row(size_t r) const { return values_.data() + r * shape_[1]; }

  void fill(double v) { values_.assign(values_.size(), v); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && values_ == other.values_;
  }

 private:
  std::vector<size_t> shape_;
  std::vector<double> values_;
};

inline void require_shape(const Tensor& t, std::initializer_list<size_t> shape,
                          const std::string& what) {
  if (!std::equal(shape.begin(), shape.end(), t.shape().begin(), t.shape().end())) {
    fail(ErrorKind::invalid_argument, what + ": shape mismatch");
  }
}

}  // namespace sandhi
