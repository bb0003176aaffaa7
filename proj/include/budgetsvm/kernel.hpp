#pragma once

// Sparse vectors and the Gaussian kernel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "budgetsvm/errors.hpp"

namespace budgetsvm {

using FeatureIndex = std::uint32_t;

struct Entry {
  FeatureIndex index;
  double value;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Immutable sparse vector: entries strictly increasing by index, no stored
/// zeros, squared norm cached at construction.
class SparseVector {
 public:
  SparseVector() = default;

  /// Throws std::invalid_argument unless indices are strictly increasing.
  /// Zero values are dropped.
  explicit SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
    for (std::size_t k = 1; k < entries_.size(); ++k) {
      if (entries_[k].index <= entries_[k - 1].index) {
        throw std::invalid_argument("SparseVector: indices must be strictly increasing");
      }
    }
    recompute_norm();
  }

  SparseVector(std::initializer_list<Entry> entries)
      : SparseVector(std::vector<Entry>(entries)) {}

  /// Builds from dense coordinates; coordinate k gets feature index k + 1.
  static SparseVector from_dense(std::span<const double> dense) {
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < dense.size(); ++k) {
      if (dense[k] != 0.0) entries.push_back({static_cast<FeatureIndex>(k + 1), dense[k]});
    }
    return SparseVector(std::move(entries));
  }

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double norm_sq() const noexcept { return norm_sq_; }

  /// Largest stored index, 0 for the zero vector.
  FeatureIndex max_index() const noexcept {
    return entries_.empty() ? 0 : entries_.back().index;
  }

  double operator[](FeatureIndex index) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, FeatureIndex i) { return e.index < i; });
    return (it != entries_.end() && it->index == index) ? it->value : 0.0;
  }

  friend bool operator==(const SparseVector& a, const SparseVector& b) {
    return a.entries_ == b.entries_;
  }

 private:
  void recompute_norm() noexcept {
    norm_sq_ = 0.0;
    for (const auto& e : entries_) norm_sq_ += e.value * e.value;
  }

  std::vector<Entry> entries_;
  double norm_sq_ = 0.0;
};

inline double dot(const SparseVector& a, const SparseVector& b) noexcept {
  auto ea = a.entries();
  auto eb = b.entries();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].index == eb[j].index) {
      sum += ea[i].value * eb[j].value;
      ++i;
      ++j;
    } else if (ea[i].index < eb[j].index) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

inline double squared_distance(const SparseVector& a, const SparseVector& b) noexcept {
  return std::max(0.0, a.norm_sq() + b.norm_sq() - 2.0 * dot(a, b));
}

inline double gaussian_kernel(const SparseVector& a, const SparseVector& b, double gamma) noexcept {
  return std::exp(-gamma * squared_distance(a, b));
}

/// h*a + (1-h)*b over the index union.
inline SparseVector line_point(const SparseVector& a, const SparseVector& b, double h) {
  auto ea = a.entries();
  auto eb = b.entries();
  const double g = 1.0 - h;
  std::vector<Entry> out;
  out.reserve(ea.size() + eb.size());
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].index < eb[j].index)) {
      out.push_back({ea[i].index, h * ea[i].value});
      ++i;
    } else if (i == ea.size() || eb[j].index < ea[i].index) {
      out.push_back({eb[j].index, g * eb[j].value});
      ++j;
    } else {
      out.push_back({ea[i].index, h * ea[i].value + g * eb[j].value});
      ++i;
      ++j;
    }
  }
  return SparseVector(std::move(out));
}

/// Relative threshold below which a weight sum counts as zero.
inline constexpr double kDenomEpsilon = 1e-10;

/// True when |sum(weights)| <= kDenomEpsilon * max|weight|.
inline bool degenerate_weights(std::span<const double> weights) noexcept {
  double sum = 0.0, largest = 0.0;
  for (double w : weights) {
    sum += w;
    largest = std::max(largest, std::abs(w));
  }
  return std::abs(sum) <= kDenomEpsilon * largest;
}

/// sum_i w_i x_i / sum_i w_i. Throws DegenerateWeights when the weight sum
/// vanishes (see degenerate_weights).
inline SparseVector weighted_mean(std::span<const SparseVector* const> points,
                                  std::span<const double> weights) {
  if (points.size() != weights.size() || points.empty()) {
    throw std::invalid_argument("weighted_mean: points and weights must be nonempty and aligned");
  }
  if (degenerate_weights(weights)) {
    throw DegenerateWeights("weighted_mean: weights sum to (numerically) zero");
  }
  double total = 0.0;
  for (double w : weights) total += w;

  std::vector<Entry> acc;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (const auto& e : points[p]->entries()) acc.push_back({e.index, weights[p] * e.value});
  }
  std::stable_sort(acc.begin(), acc.end(),
                   [](const Entry& x, const Entry& y) { return x.index < y.index; });
  std::vector<Entry> merged;
  for (const auto& e : acc) {
    if (!merged.empty() && merged.back().index == e.index) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  for (auto& e : merged) e.value /= total;
  return SparseVector(std::move(merged));
}

inline SparseVector weighted_mean(std::span<const SparseVector> points,
                                  std::span<const double> weights) {
  std::vector<const SparseVector*> ptrs;
  ptrs.reserve(points.size());
  for (const auto& p : points) ptrs.push_back(&p);
  return weighted_mean(std::span<const SparseVector* const>(ptrs), weights);
}

}  // namespace budgetsvm
