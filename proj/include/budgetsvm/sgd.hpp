#pragma once

// Budgeted stochastic gradient descent on the primal SVM objective
//   P(w) = lambda/2 ||w||^2 + 1/n sum_i max(0, 1 - y_i <w, phi(x_i)>)
// with w kept as a budgeted kernel expansion.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>

#include "budgetsvm/config.hpp"
#include "budgetsvm/data.hpp"
#include "budgetsvm/diagnostics.hpp"
#include "budgetsvm/merge.hpp"
#include "budgetsvm/model.hpp"

namespace budgetsvm {

inline double learning_rate(std::uint64_t t, double lambda, Schedule schedule = Schedule::Pegasos,
                            double offset = 0.0) {
  const double tt = static_cast<double>(t) + (schedule == Schedule::Shifted ? offset : 0.0);
  return 1.0 / (lambda * tt);
}

struct StepOutcome {
  bool margin_violated = false;
  bool sv_added = false;
  bool maintenance_triggered = false;
  double eta = 0.0;
  std::optional<double> degradation_sq;
  std::optional<MaintenanceResult> maintenance;
  double maintenance_seconds = 0.0;
};

/// One SGD step on (x, y) at global step t >= 1.
///
/// The margin is evaluated on the model before this step's shrink; the
/// coefficients are then scaled by 1 - lambda eta_t and, on a margin
/// violation, x joins with effective coefficient eta_t y. Budget
/// maintenance runs when the model holds B + 1 SVs.
inline StepOutcome sgd_step(BudgetedModel& model, const SparseVector& x, int y, std::uint64_t t,
                            double lambda, const TrainConfig& cfg) {
  StepOutcome out;
  out.eta = learning_rate(t, lambda, cfg.schedule, cfg.schedule_offset);
  const double m = model.margin(x);

  const double shrink = 1.0 - lambda * out.eta;
  if (shrink > 0.0) {
    model.rescale(shrink);
  } else {
    // eta_1 = 1/lambda shrinks the expansion to exactly zero.
    model.clear();
  }

  if (y * m < 1.0) {
    out.margin_violated = true;
    model.add_sv(x, out.eta * y);
    out.sv_added = true;
    if (model.size() > model.budget()) {
      out.maintenance_triggered = true;
      const auto begin = std::chrono::steady_clock::now();
      out.maintenance = budget_maintain(model, cfg);
      out.maintenance_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
      out.degradation_sq = out.maintenance->degradation_sq;
    }
  }
  return out;
}

/// Receives every step of a training run; the default ignores them.
struct NullObserver {
  void operator()(std::uint64_t, const StepOutcome&, const BudgetedModel&) const noexcept {}
};

struct TrainResult {
  BudgetedModel model;
  RunReport report;
};

/// Runs `epochs` passes over `data`, reshuffled per epoch, with a global step
/// counter. `test` (optional) fills report.test_accuracy. Deterministic in
/// cfg.seed.
template <class Observer = NullObserver>
TrainResult train(const Dataset& data, const TrainConfig& cfg, const Dataset* test = nullptr,
                  Observer&& observer = {}) {
  cfg.validate();
  if (data.empty()) throw ConfigError("train: empty dataset");
  const double lambda = cfg.resolve_lambda(data.size());

  TrainResult result{BudgetedModel(cfg.budget, cfg.gamma), {}};
  auto& model = result.model;
  auto& report = result.report;
  report.strategy = cfg.strategy;
  report.budget = cfg.budget;
  report.mergees = cfg.strategy == Strategy::Removal ? 1 : cfg.mergees;
  report.lambda = lambda;
  report.C = cfg.C.value_or(0.0);
  report.gamma = cfg.gamma;
  report.epochs = cfg.epochs;
  report.seed = cfg.seed;
  report.n_train = data.size();

  Stopwatch total;
  double merge_seconds = 0.0;
  total.start();
  std::uint64_t t = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (const auto k : shuffled_indices(data.size(), epoch, cfg.seed)) {
      ++t;
      const auto step = sgd_step(model, data.points[k], data.labels[k], t, lambda, cfg);
      if (step.sv_added) ++report.sv_insertions;
      if (step.maintenance) {
        ++report.maintenance_calls;
        if (step.maintenance->fell_back) ++report.gd_fallbacks;
        merge_seconds += step.maintenance_seconds;
        log_maintenance(report, *step.degradation_sq, step.eta);
      }
      observer(t, step, model);
    }
  }
  total.stop();

  report.steps = t;
  report.total_train_seconds = total.seconds();
  report.merge_seconds = std::min(merge_seconds, report.total_train_seconds);
  report.avg_gradient_error = average_gradient_error(report.gradient_error_log, t);
  report.final_sv_count = model.size();
  if (test != nullptr && !test->empty()) report.test_accuracy = evaluate_accuracy(model, *test);
  return result;
}

}  // namespace budgetsvm
