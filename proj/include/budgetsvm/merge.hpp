#pragma once

// Budget maintenance: removal, binary merging along the connecting line,
// multi-merge as a cascade of binary merges, and multi-merge by gradient
// descent on the merged center.
//
// All coefficients handled here are effective (scale-multiplied) values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "budgetsvm/config.hpp"
#include "budgetsvm/errors.hpp"
#include "budgetsvm/golden_section.hpp"
#include "budgetsvm/kernel.hpp"
#include "budgetsvm/model.hpp"

namespace budgetsvm {

// ---------------------------------------------------------------------------
// Binary merge
//
// Merging (x_i, a_i) and (x_j, a_j) into a_z phi(z) with z = h x_i + (1-h) x_j.
// With c = gamma ||x_i - x_j||^2 the optimal a_z for fixed h is
//   f(h) = a_i exp(-c (1-h)^2) + a_j exp(-c h^2)
// and the degradation is ||a_i phi_i + a_j phi_j||^2 - f(h)^2, so the best h
// maximizes f(h)^2.

struct BinaryMerge {
  double h;
  double alpha_z;
  double degradation_sq;
};

struct MergeCandidate {
  std::size_t partner;
  double h;
  double alpha_z;
  double degradation_sq;
};

inline double objective_along_line(double alpha_i, double alpha_j, double d_sq, double gamma,
                                   double h) noexcept {
  return alpha_i * std::exp(-gamma * (1.0 - h) * (1.0 - h) * d_sq) +
         alpha_j * std::exp(-gamma * h * h * d_sq);
}

namespace detail {

inline double line_slope(double ai, double aj, double c, double h) noexcept {
  const double u = 1.0 - h;
  return 2.0 * c * (ai * u * std::exp(-c * u * u) - aj * h * std::exp(-c * h * h));
}

inline double line_curvature(double ai, double aj, double c, double h) noexcept {
  const double u = 1.0 - h;
  return ai * (4.0 * c * c * u * u - 2.0 * c) * std::exp(-c * u * u) +
         aj * (4.0 * c * c * h * h - 2.0 * c) * std::exp(-c * h * h);
}

/// ||a_i phi_i + a_j phi_j - f(h) phi(z_h)||^2 written with expm1 so that
/// nearly coincident points do not lose all digits to cancellation.
inline double line_degradation(double ai, double aj, double c, double h) noexcept {
  const double u = 1.0 - h;
  const double keep_i = -std::expm1(-2.0 * c * u * u);            // 1 - k(x_i, z)^2
  const double keep_j = -std::expm1(-2.0 * c * h * h);            // 1 - k(x_j, z)^2
  const double cross = -std::exp(-c) * std::expm1(2.0 * c * h * u);  // k_ij - k_iz k_jz
  return std::max(0.0, ai * ai * keep_i + aj * aj * keep_j + 2.0 * ai * aj * cross);
}

}  // namespace detail

/// Best merge of (x_i, alpha_i) with (x_j, alpha_j) at squared distance d_sq.
///
/// The global maximum of f^2 lies on the half of the bracket nearer the point
/// with the larger |alpha| (f(h)^2 >= f(1-h)^2 there), and f^2 is unimodal on
/// that half, so golden section runs on [0.5, 1] (same signs) or [0.5, 2]
/// (opposite signs), mirrored when |alpha_j| > |alpha_i|. The endpoints
/// h = 0 and h = 1 are always compared, and the winner is refined with
/// safeguarded Newton steps on f.
inline BinaryMerge golden_section_merge(double alpha_i, double alpha_j, double d_sq, double gamma,
                                        const GoldenSectionOptions& opts = {}) {
  if (!(d_sq > 0.0)) return {0.5, alpha_i + alpha_j, 0.0};
  const double c = gamma * d_sq;
  auto f = [&](double h) { return objective_along_line(alpha_i, alpha_j, d_sq, gamma, h); };
  auto f_sq = [&](double h) {
    const double v = f(h);
    return v * v;
  };

  const bool same_sign = (alpha_i > 0.0) == (alpha_j > 0.0);
  const bool i_dominant = std::abs(alpha_i) >= std::abs(alpha_j);
  double lo, hi;
  if (i_dominant) {
    lo = 0.5;
    hi = same_sign ? 1.0 : 2.0;
  } else {
    lo = same_sign ? 0.0 : -1.0;
    hi = 0.5;
  }

  auto gs = golden_section_maximize(f_sq, lo, hi, opts.tolerance, opts.max_iterations);
  double best_h = gs.x;
  double best = gs.value;
  for (double h : {0.0, 1.0}) {
    if (const double v = f_sq(h); v > best) {
      best = v;
      best_h = h;
    }
  }

  // The maximizer of f^2 maximizes sign * f, which is locally concave there.
  const double sign = (i_dominant ? alpha_i : alpha_j) > 0.0 ? 1.0 : -1.0;
  double h = best_h;
  for (int k = 0; k < 20; ++k) {
    const double slope = sign * detail::line_slope(alpha_i, alpha_j, c, h);
    const double curv = sign * detail::line_curvature(alpha_i, alpha_j, c, h);
    if (!(curv < 0.0)) break;
    const double next = std::clamp(h - slope / curv, lo, hi);
    if (next == h) break;
    const double v = f_sq(next);
    if (!(v >= best)) break;
    best = v;
    best_h = next;
    h = next;
  }
  return {best_h, f(best_h), detail::line_degradation(alpha_i, alpha_j, c, best_h)};
}

// ---------------------------------------------------------------------------
// Partner selection

/// Index of the SV with the smallest |alpha|; ties go to the smaller index.
inline std::size_t select_first(const BudgetedModel& model) {
  if (model.empty()) throw InsufficientSVs("select_first: model has no support vectors");
  std::size_t best = 0;
  for (std::size_t j = 1; j < model.size(); ++j) {
    if (std::abs(model.sv(j).alpha) < std::abs(model.sv(best).alpha)) best = j;
  }
  return best;
}

inline MergeCandidate evaluate_partner(const BudgetedModel& model, std::size_t i, std::size_t j,
                                       const GoldenSectionOptions& opts) {
  const double d_sq = squared_distance(model.sv(i).center, model.sv(j).center);
  const auto m = golden_section_merge(model.effective_alpha(i), model.effective_alpha(j), d_sq,
                                      model.gamma(), opts);
  return {j, m.h, m.alpha_z, m.degradation_sq};
}

/// Single best merge partner for SV i by a linear scan (classic BSGD).
inline MergeCandidate best_partner(const BudgetedModel& model, std::size_t i,
                                   const GoldenSectionOptions& opts = {}) {
  if (model.size() < 2) throw InsufficientSVs("best_partner: need at least 2 support vectors");
  std::optional<MergeCandidate> best;
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (j == i) continue;
    auto cand = evaluate_partner(model, i, j, opts);
    if (!best || cand.degradation_sq < best->degradation_sq) best = cand;
  }
  return *best;
}

/// The M-1 partners of SV i with the smallest pairwise degradation, sorted
/// ascending (ties by index).
inline std::vector<MergeCandidate> rank_partners(const BudgetedModel& model, std::size_t i,
                                                 std::size_t mergees,
                                                 const GoldenSectionOptions& opts = {}) {
  if (mergees < 2 || model.size() < mergees) {
    throw InsufficientSVs("rank_partners: fewer support vectors than mergees");
  }
  std::vector<MergeCandidate> all;
  all.reserve(model.size() - 1);
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (j != i) all.push_back(evaluate_partner(model, i, j, opts));
  }
  const auto keep = static_cast<std::ptrdiff_t>(mergees - 1);
  std::partial_sort(all.begin(), all.begin() + keep, all.end(),
                    [](const MergeCandidate& a, const MergeCandidate& b) {
                      if (a.degradation_sq != b.degradation_sq) return a.degradation_sq < b.degradation_sq;
                      return a.partner < b.partner;
                    });
  all.resize(mergees - 1);
  return all;
}

// ---------------------------------------------------------------------------
// Multi-merge

struct MergedPoint {
  SparseVector z;
  double alpha_z = 0.0;
};

/// Folds the partners into SV i one binary merge at a time, in the given
/// (ascending degradation) order.
inline MergedPoint mm_bsgd_merge(const BudgetedModel& model, std::size_t i,
                                 std::span<const MergeCandidate> candidates,
                                 const GoldenSectionOptions& opts = {}) {
  SparseVector z = model.sv(i).center;
  double alpha_z = model.effective_alpha(i);
  for (const auto& cand : candidates) {
    const auto& xj = model.sv(cand.partner).center;
    const double aj = model.effective_alpha(cand.partner);
    const auto m = golden_section_merge(alpha_z, aj, squared_distance(z, xj), model.gamma(), opts);
    z = line_point(z, xj, m.h);
    alpha_z = m.alpha_z;
  }
  return {std::move(z), alpha_z};
}

/// ||sum_i a_i phi(x_i) - a_z phi(z)||^2 evaluated through kernel values.
inline double mm_gd_objective(std::span<const SparseVector* const> centers,
                              std::span<const double> alphas, const SparseVector& z,
                              double alpha_z, double gamma) {
  double gram = 0.0;
  double cross = 0.0;
  for (std::size_t a = 0; a < centers.size(); ++a) {
    gram += alphas[a] * alphas[a];
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      gram += 2.0 * alphas[a] * alphas[b] * gaussian_kernel(*centers[a], *centers[b], gamma);
    }
    cross += alphas[a] * gaussian_kernel(*centers[a], z, gamma);
  }
  return gram - 2.0 * alpha_z * cross + alpha_z * alpha_z;
}

/// The merge objective restricted to the coordinates spanned by the mergees,
/// stored densely. The Gram part is computed once.
class MultiMergeProblem {
 public:
  MultiMergeProblem(std::span<const SparseVector* const> centers, std::span<const double> alphas,
                    double gamma, const SparseVector* extra = nullptr)
      : alphas_(alphas.begin(), alphas.end()), gamma_(gamma) {
    for (const auto* c : centers) {
      for (const auto& e : c->entries()) dims_.push_back(e.index);
    }
    if (extra != nullptr) {
      for (const auto& e : extra->entries()) dims_.push_back(e.index);
    }
    std::sort(dims_.begin(), dims_.end());
    dims_.erase(std::unique(dims_.begin(), dims_.end()), dims_.end());

    coords_.reserve(centers.size() * dims_.size());
    for (const auto* c : centers) {
      auto x = compact(*c);
      coords_.insert(coords_.end(), x.begin(), x.end());
    }
    gram_ = 0.0;
    for (std::size_t a = 0; a < size(); ++a) {
      gram_ += alphas_[a] * alphas_[a];
      for (std::size_t b = a + 1; b < size(); ++b) {
        gram_ += 2.0 * alphas_[a] * alphas_[b] * std::exp(-gamma_ * dist_sq(point(a), point(b)));
      }
    }
  }

  std::size_t size() const noexcept { return alphas_.size(); }
  std::size_t dim() const noexcept { return dims_.size(); }
  double gram() const noexcept { return gram_; }
  std::span<const double> point(std::size_t a) const {
    return {coords_.data() + a * dims_.size(), dims_.size()};
  }

  std::vector<double> compact(const SparseVector& v) const {
    std::vector<double> out(dims_.size(), 0.0);
    std::size_t k = 0;
    for (const auto& e : v.entries()) {
      while (k < dims_.size() && dims_[k] < e.index) ++k;
      if (k == dims_.size() || dims_[k] != e.index) {
        throw std::invalid_argument("MultiMergeProblem: vector leaves the merge subspace");
      }
      out[k] = e.value;
    }
    return out;
  }

  SparseVector sparse(std::span<const double> z) const {
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (z[k] != 0.0) entries.push_back({dims_[k], z[k]});
    }
    return SparseVector(std::move(entries));
  }

  /// sum_i a_i k(x_i, z)
  double projection(std::span<const double> z) const {
    double s = 0.0;
    for (std::size_t a = 0; a < size(); ++a) s += alphas_[a] * std::exp(-gamma_ * dist_sq(point(a), z));
    return s;
  }

  double objective(std::span<const double> z, double alpha_z) const {
    return gram_ - 2.0 * alpha_z * projection(z) + alpha_z * alpha_z;
  }

  /// Closed-form minimizer over alpha_z for fixed z.
  double optimal_alpha(std::span<const double> z) const { return projection(z); }

  /// grad_z = -4 gamma alpha_z sum_i a_i k(x_i, z) (x_i - z)
  void gradient(std::span<const double> z, double alpha_z, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < size(); ++a) {
      const auto x = point(a);
      const double w = alphas_[a] * std::exp(-gamma_ * dist_sq(x, z));
      for (std::size_t k = 0; k < dim(); ++k) out[k] += w * (x[k] - z[k]);
    }
    const double factor = -4.0 * gamma_ * alpha_z;
    for (auto& g : out) g *= factor;
  }

 private:
  static double dist_sq(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return s;
  }

  std::vector<FeatureIndex> dims_;
  std::vector<double> coords_;  // size() x dim(), row-major
  std::vector<double> alphas_;
  double gamma_;
  double gram_;
};

struct GradientMerge {
  SparseVector z;
  double alpha_z;
  std::vector<double> objective_trace;  // f before the first step, then after each step
  int iterations;
};

/// Gradient descent on the merged center with alpha_z re-optimized after
/// every step. Starts from the alpha-weighted mean (alpha_z = sum alpha)
/// unless a start point is given. Step sizes backtrack from 1 by halving
/// until f decreases. Throws DegenerateWeights when the alphas sum to zero
/// and no start point is given.
inline GradientMerge mm_gd_merge(std::span<const SparseVector* const> centers,
                                 std::span<const double> alphas, double gamma,
                                 const GradientDescentOptions& opts = {},
                                 const MergedPoint* start = nullptr) {
  if (centers.empty() || centers.size() != alphas.size()) {
    throw std::invalid_argument("mm_gd_merge: centers and alphas must be nonempty and aligned");
  }
  SparseVector z0;
  double alpha_z;
  if (start != nullptr) {
    z0 = start->z;
    alpha_z = start->alpha_z;
  } else {
    z0 = weighted_mean(centers, alphas);  // throws DegenerateWeights
    alpha_z = std::accumulate(alphas.begin(), alphas.end(), 0.0);
  }

  const MultiMergeProblem problem(centers, alphas, gamma, &z0);
  auto z = problem.compact(z0);
  std::vector<double> grad(problem.dim()), trial(problem.dim());
  double f = problem.objective(z, alpha_z);
  std::vector<double> trace{f};
  int it = 0;
  while (it < opts.max_iterations) {
    problem.gradient(z, alpha_z, grad);
    if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) {
      // z is stationary but the coefficient may still be off
      const double alpha_opt = problem.optimal_alpha(z);
      if (const double fa = problem.objective(z, alpha_opt); fa < f) {
        alpha_z = alpha_opt;
        f = fa;
        trace.push_back(f);
      }
      break;
    }
    ++it;

    double eta = 1.0;
    bool moved = false;
    double f_moved = f;
    for (int k = 0; k < opts.max_halvings; ++k, eta *= 0.5) {
      for (std::size_t d = 0; d < z.size(); ++d) trial[d] = z[d] - eta * grad[d];
      const double ft = problem.objective(trial, alpha_z);
      if (ft < f) {
        moved = true;
        f_moved = ft;
        break;
      }
    }
    if (moved) z.swap(trial);

    const double alpha_opt = problem.optimal_alpha(z);
    double f_next = f_moved;
    if (const double fa = problem.objective(z, alpha_opt); fa <= f_moved) {
      alpha_z = alpha_opt;
      f_next = fa;
    }
    trace.push_back(f_next);
    const bool converged = std::abs(f - f_next) <= opts.epsilon * std::max(1.0, f);
    f = f_next;
    if (converged || !moved) break;
  }
  return {problem.sparse(z), alpha_z, std::move(trace), it};
}

// Model-level wrapper: merges SV i with the given candidates.
inline GradientMerge mm_gd_merge(const BudgetedModel& model, std::size_t i,
                                 std::span<const MergeCandidate> candidates,
                                 const GradientDescentOptions& opts = {},
                                 const MergedPoint* start = nullptr) {
  std::vector<const SparseVector*> centers{&model.sv(i).center};
  std::vector<double> alphas{model.effective_alpha(i)};
  for (const auto& c : candidates) {
    centers.push_back(&model.sv(c.partner).center);
    alphas.push_back(model.effective_alpha(c.partner));
  }
  return mm_gd_merge(centers, alphas, model.gamma(), opts, start);
}

// ---------------------------------------------------------------------------
// Maintenance dispatch

/// Removes the smallest-|alpha| SV; returns its squared effective alpha.
inline double remove_smallest(BudgetedModel& model) {
  const auto i = select_first(model);
  const double a = model.effective_alpha(i);
  model.remove(i);
  return a * a;
}

struct MaintenanceResult {
  double degradation_sq = 0.0;     // realized ||Delta||^2
  std::size_t removed = 0;         // net SV count reduction
  bool used_gradient = false;      // mm-gd path taken
  bool fell_back = false;          // mm-gd fell back to the cascade
  std::vector<double> objective_trace;  // mm-gd f sequence
};

/// Restores the budget after an insertion: |svs| = B + 1 on entry.
inline MaintenanceResult budget_maintain(BudgetedModel& model, const TrainConfig& cfg) {
  MaintenanceResult out;
  if (cfg.strategy == Strategy::Removal) {
    if (model.empty()) throw InsufficientSVs("budget_maintain: model is empty");
    out.degradation_sq = remove_smallest(model);
    out.removed = 1;
    return out;
  }
  if (model.size() < cfg.mergees) {
    throw InsufficientSVs("budget_maintain: fewer support vectors than mergees");
  }

  const auto i = select_first(model);
  std::vector<MergeCandidate> partners;
  MergedPoint merged;
  switch (cfg.strategy) {
    case Strategy::Merge: {
      const auto best = best_partner(model, i, cfg.golden);
      merged = {line_point(model.sv(i).center, model.sv(best.partner).center, best.h), best.alpha_z};
      partners = {best};
      break;
    }
    case Strategy::MmBsgd:
      partners = rank_partners(model, i, cfg.mergees, cfg.golden);
      merged = mm_bsgd_merge(model, i, partners, cfg.golden);
      break;
    case Strategy::MmGd: {
      partners = rank_partners(model, i, cfg.mergees, cfg.golden);
      std::optional<GradientMerge> gd;
      if (cfg.gd_refine) {
        const auto cascade = mm_bsgd_merge(model, i, partners, cfg.golden);
        gd = mm_gd_merge(model, i, partners, cfg.gd, &cascade);
      } else {
        try {
          gd = mm_gd_merge(model, i, partners, cfg.gd);
        } catch (const DegenerateWeights&) {
          out.fell_back = true;
        }
      }
      if (gd) {
        out.used_gradient = true;
        out.objective_trace = std::move(gd->objective_trace);
        merged = {std::move(gd->z), gd->alpha_z};
      } else {
        merged = mm_bsgd_merge(model, i, partners, cfg.golden);
      }
      break;
    }
    case Strategy::Removal:
      break;
  }

  std::vector<std::size_t> removed{i};
  std::vector<const SparseVector*> centers{&model.sv(i).center};
  std::vector<double> alphas{model.effective_alpha(i)};
  for (const auto& p : partners) {
    removed.push_back(p.partner);
    centers.push_back(&model.sv(p.partner).center);
    alphas.push_back(model.effective_alpha(p.partner));
  }
  out.degradation_sq =
      std::max(0.0, mm_gd_objective(centers, alphas, merged.z, merged.alpha_z, model.gamma()));
  const auto before = model.size();
  model.replace(std::move(removed), std::move(merged.z), merged.alpha_z);
  out.removed = before - model.size();
  return out;
}

}  // namespace budgetsvm
