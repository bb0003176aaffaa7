#pragma once

// Budgeted kernel expansion w = scale * sum_j alpha_j phi(center_j).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "budgetsvm/data.hpp"
#include "budgetsvm/errors.hpp"
#include "budgetsvm/kernel.hpp"

namespace budgetsvm {

struct SupportVector {
  SparseVector center;
  double alpha;  // stored coefficient; effective value is scale * alpha
};

class BudgetedModel {
 public:
  /// Scale values below this are folded into the stored alphas.
  static constexpr double kScaleFloor = 1e-100;

  BudgetedModel(std::size_t budget, double gamma) : budget_(budget), gamma_(gamma) {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  }

  std::size_t budget() const noexcept { return budget_; }
  double gamma() const noexcept { return gamma_; }
  double scale() const noexcept { return scale_; }
  double bias() const noexcept { return 0.0; }
  std::size_t size() const noexcept { return svs_.size(); }
  bool empty() const noexcept { return svs_.empty(); }

  const std::vector<SupportVector>& support_vectors() const noexcept { return svs_; }
  const SupportVector& sv(std::size_t j) const { return svs_[j]; }
  double effective_alpha(std::size_t j) const { return scale_ * svs_[j].alpha; }

  /// scale * sum_j alpha_j k(center_j, x) + b.
  double margin(const SparseVector& x) const noexcept {
    double sum = 0.0;
    for (const auto& sv : svs_) sum += sv.alpha * gaussian_kernel(sv.center, x, gamma_);
    return scale_ * sum + bias();
  }

  /// Sign of the margin; a margin of exactly 0 predicts +1.
  int predict(const SparseVector& x) const noexcept { return margin(x) >= 0.0 ? 1 : -1; }

  /// Appends an SV whose effective coefficient is `alpha_effective`.
  void add_sv(SparseVector x, double alpha_effective) {
    if (alpha_effective == 0.0) throw ZeroCoefficient("add_sv: coefficient must be nonzero");
    svs_.push_back({std::move(x), alpha_effective / scale_});
    check_capacity();
  }

  /// Multiplies all effective coefficients by `factor` in O(1).
  void rescale(double factor) {
    assert(factor > 0.0);
    scale_ *= factor;
    if (scale_ < kScaleFloor) fold_scale();
  }

  /// Drops every SV and resets the scale (the exact effect of a zero factor).
  void clear() noexcept {
    svs_.clear();
    scale_ = 1.0;
  }

  void remove(std::size_t j) { svs_.erase(svs_.begin() + static_cast<std::ptrdiff_t>(j)); }

  /// Removes the listed SVs (any order, no duplicates) and appends `z` with
  /// effective coefficient `alpha_z_effective`; a zero coefficient is pruned.
  void replace(std::vector<std::size_t> indices, SparseVector z, double alpha_z_effective) {
    std::sort(indices.begin(), indices.end(), std::greater<>());
    for (auto j : indices) remove(j);
    if (alpha_z_effective != 0.0) svs_.push_back({std::move(z), alpha_z_effective / scale_});
    check_capacity();
  }

  /// Moves the global scale into the stored coefficients.
  void fold_scale() noexcept {
    for (auto& sv : svs_) sv.alpha *= scale_;
    scale_ = 1.0;
  }

  /// ||w||^2 via the full Gram double sum; O(|svs|^2), diagnostics only.
  double weight_norm_sq() const noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < svs_.size(); ++i) {
      sum += svs_[i].alpha * svs_[i].alpha;
      for (std::size_t j = i + 1; j < svs_.size(); ++j) {
        sum += 2.0 * svs_[i].alpha * svs_[j].alpha *
               gaussian_kernel(svs_[i].center, svs_[j].center, gamma_);
      }
    }
    return scale_ * scale_ * sum;
  }

 private:
  void check_capacity() const {
    assert(svs_.size() <= budget_ + 1 && "budget exceeded outside maintenance");
  }

  std::vector<SupportVector> svs_;
  std::size_t budget_;
  double gamma_;
  double scale_ = 1.0;
};

inline double hinge_loss(int y, double margin) noexcept { return std::max(0.0, 1.0 - y * margin); }

/// lambda/2 ||w||^2 + mean hinge loss over `ds`.
inline double primal_objective(const BudgetedModel& model, const Dataset& ds, double lambda) {
  double loss = 0.0;
  for (std::size_t k = 0; k < ds.size(); ++k) loss += hinge_loss(ds.labels[k], model.margin(ds.points[k]));
  return 0.5 * lambda * model.weight_norm_sq() + loss / static_cast<double>(ds.size());
}

// Model file:
//   budgetsvm v1 gamma=<g> bias=<b> B=<B>
//   <effective_alpha> <idx>:<val> ...      (one line per SV)
// Reals are written with 17 significant digits so a load/save cycle is exact.

inline void save_model(std::ostream& out, const BudgetedModel& model) {
  out << "budgetsvm v1 gamma=" << detail::format_real(model.gamma())
      << " bias=" << detail::format_real(model.bias()) << " B=" << model.budget() << '\n';
  for (std::size_t j = 0; j < model.size(); ++j) {
    out << detail::format_real(model.effective_alpha(j));
    for (const auto& e : model.sv(j).center.entries()) {
      out << ' ' << e.index << ':' << detail::format_real(e.value);
    }
    out << '\n';
  }
}

inline std::string model_to_string(const BudgetedModel& model) {
  std::ostringstream out;
  save_model(out, model);
  return out.str();
}

inline BudgetedModel load_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("model file is empty");
  std::istringstream hs(header);
  std::string magic, version, gamma_tok, bias_tok, budget_tok, extra;
  hs >> magic >> version >> gamma_tok >> bias_tok >> budget_tok;
  if (magic != "budgetsvm" || version != "v1" || hs.fail() || (hs >> extra)) {
    throw FormatError("bad model header: '" + header + "'");
  }
  auto field = [&header](const std::string& tok, std::string_view key) {
    if (tok.rfind(key, 0) != 0) throw FormatError("bad model header: '" + header + "'");
    return std::string_view(tok).substr(key.size());
  };
  double gamma, bias;
  if (!detail::parse_real(field(gamma_tok, "gamma="), gamma) || !(gamma > 0.0)) {
    throw FormatError("bad gamma in model header");
  }
  if (!detail::parse_real(field(bias_tok, "bias="), bias)) throw FormatError("bad bias in model header");
  if (bias != 0.0) throw FormatError("only bias=0 models are supported");
  std::size_t budget = 0;
  {
    auto b = field(budget_tok, "B=");
    auto [ptr, ec] = std::from_chars(b.data(), b.data() + b.size(), budget);
    if (ec != std::errc{} || ptr != b.data() + b.size()) throw FormatError("bad budget in model header");
  }

  BudgetedModel model(budget, gamma);
  std::string line;
  std::size_t line_no = 1;
  std::vector<std::pair<SparseVector, double>> svs;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    // The coefficient plays the role of the label in svmlight syntax.
    std::istringstream ls(line);
    std::string alpha_tok;
    ls >> alpha_tok;
    double alpha;
    if (!detail::parse_real(alpha_tok, alpha) || alpha == 0.0) {
      throw FormatError("line " + std::to_string(line_no) + ": bad coefficient '" + alpha_tok + "'");
    }
    std::vector<Entry> entries;
    std::string tok;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      FeatureIndex index;
      double value;
      if (colon == std::string::npos ||
          !detail::parse_index(std::string_view(tok).substr(0, colon), index) ||
          !detail::parse_real(std::string_view(tok).substr(colon + 1), value) ||
          (!entries.empty() && index <= entries.back().index)) {
        throw FormatError("line " + std::to_string(line_no) + ": bad entry '" + tok + "'");
      }
      entries.push_back({index, value});
    }
    svs.emplace_back(SparseVector(std::move(entries)), alpha);
  }
  if (in.bad()) throw IoError("read error while loading model");
  if (svs.size() > budget + 1) throw FormatError("model holds more SVs than its budget allows");
  for (auto& [center, alpha] : svs) model.add_sv(std::move(center), alpha);
  return model;
}

inline BudgetedModel model_from_string(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

}  // namespace budgetsvm
