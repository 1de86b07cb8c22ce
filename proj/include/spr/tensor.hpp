#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spr/error.hpp"

namespace spr {

// Dense row-major tensor of rank 1..4, f32 storage. Reductions accumulate in
// f64. No broadcasting, no views; operations that need a different shape copy.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    validate_dims();
    data_.assign(element_count(), 0.0f);
  }

  Tensor(std::vector<int> dims, std::vector<float> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    validate_dims();
    if (data_.size() != element_count()) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match dims product " +
                           std::to_string(element_count()));
    }
  }

  static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }

  static Tensor full(std::vector<int> dims, float value) {
    Tensor t(std::move(dims));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_.at(static_cast<size_t>(i)); }
  const std::vector<int>& dims() const { return dims_; }
  size_t size() const { return data_.size(); }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  float operator[](size_t i) const { return data_[i]; }
  float& operator[](size_t i) { return data_[i]; }

  float operator()(int i) const { return data_[static_cast<size_t>(i)]; }
  float& operator()(int i) { return data_[static_cast<size_t>(i)]; }
  float operator()(int i, int j) const { return data_[idx2(i, j)]; }
  float& operator()(int i, int j) { return data_[idx2(i, j)]; }
  float operator()(int i, int j, int k) const { return data_[idx3(i, j, k)]; }
  float& operator()(int i, int j, int k) { return data_[idx3(i, j, k)]; }
  float operator()(int i, int j, int k, int l) const { return data_[idx4(i, j, k, l)]; }
  float& operator()(int i, int j, int k, int l) { return data_[idx4(i, j, k, l)]; }

  // Same data, new extents; product must match.
  Tensor reshaped(std::vector<int> new_dims) const {
    Tensor out(std::move(new_dims), data_);
    return out;
  }

  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](float v) { return std::isfinite(v); });
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < dims_.size(); ++i) os << (i ? "x" : "") << dims_[i];
    os << "]";
    return os.str();
  }

 private:
  size_t idx2(int i, int j) const {
    return static_cast<size_t>(i) * dims_[1] + j;
  }
  size_t idx3(int i, int j, int k) const {
    return (static_cast<size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  size_t idx4(int i, int j, int k, int l) const {
    return ((static_cast<size_t>(i) * dims_[1] + j) * dims_[2] + k) * dims_[3] + l;
  }

  size_t element_count() const {
    size_t n = 1;
    for (int d : dims_) n *= static_cast<size_t>(d);
    return n;
  }

  void validate_dims() const {
    if (dims_.empty() || dims_.size() > 4) {
      throw DimensionError("tensor rank must be 1..4, got " +
                           std::to_string(dims_.size()));
    }
    for (int d : dims_) {
      if (d < 1) throw DimensionError("tensor extent must be >= 1, got " + std::to_string(d));
    }
  }

  std::vector<int> dims_;
  std::vector<float> data_;
};

inline void require_rank(const Tensor& t, int rank, const char* who) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(who) + ": expected rank " + std::to_string(rank) +
                         " tensor, got " + t.shape_str());
  }
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(who) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
  }
}

// Row-wise softmax of an N x C matrix. Max is subtracted per row before
// exponentiation so large-magnitude logits do not overflow.
inline Tensor softmax_rows(const Tensor& m) {
  require_rank(m, 2, "softmax_rows");
  const int n = m.dim(0), c = m.dim(1);
  Tensor out({n, c});
  for (int i = 0; i < n; ++i) {
    float mx = m(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, m(i, j));
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      const float e = std::exp(m(i, j) - mx);
      out(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < c; ++j) {
      out(i, j) = static_cast<float>(out(i, j) / sum);
    }
  }
  return out;
}

// Mean of `channel` over pixels where `mask` is 1. Returns nullopt when the
// mask selects nothing; never NaN.
inline std::optional<float> masked_mean(const Tensor& channel, const Tensor& mask) {
  require_same_shape(channel, mask, "masked_mean");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < channel.size(); ++i) {
    num += static_cast<double>(channel[i]) * mask[i];
    den += mask[i];
  }
  if (den == 0.0) return std::nullopt;
  return static_cast<float>(num / den);
}

// Outer product v^T v of a 1 x K (or length-K) vector: result[i][j] = v[i]*v[j].
inline Tensor outer(const Tensor& v) {
  if (!(v.rank() == 1 || (v.rank() == 2 && v.dim(0) == 1))) {
    throw DimensionError("outer: expected 1xK vector, got " + v.shape_str());
  }
  const int k = static_cast<int>(v.size());
  Tensor out({k, k});
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      out(i, j) = v[static_cast<size_t>(i)] * v[static_cast<size_t>(j)];
    }
  }
  return out;
}

}  // namespace spr
