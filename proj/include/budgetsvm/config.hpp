#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "budgetsvm/errors.hpp"

namespace budgetsvm {

enum class Strategy {
  Merge,    // classic BSGD: merge the smallest-|alpha| SV with its best partner
  MmBsgd,   // multi-merge as a cascade of binary merges
  MmGd,     // multi-merge by gradient descent on the merged center
  Removal,  // drop the smallest-|alpha| SV
};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Merge: return "merge";
    case Strategy::MmBsgd: return "mm-bsgd";
    case Strategy::MmGd: return "mm-gd";
    case Strategy::Removal: return "removal";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  if (name == "merge") return Strategy::Merge;
  if (name == "mm-bsgd") return Strategy::MmBsgd;
  if (name == "mm-gd") return Strategy::MmGd;
  if (name == "removal") return Strategy::Removal;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

/// Learning-rate schedules of the form 1 / (lambda * (t + offset)).
enum class Schedule {
  Pegasos,  // eta_t = 1 / (lambda t)
  Shifted,  // eta_t = 1 / (lambda (t + offset))
};

inline std::string_view to_string(Schedule s) {
  return s == Schedule::Pegasos ? "pegasos" : "shifted";
}

inline Schedule parse_schedule(std::string_view name) {
  if (name == "pegasos") return Schedule::Pegasos;
  if (name == "shifted") return Schedule::Shifted;
  throw ConfigError("unknown schedule '" + std::string(name) + "'");
}

struct GoldenSectionOptions {
  double tolerance = 1e-3;  // stop once the bracket is this narrow
  int max_iterations = 200;
};

struct GradientDescentOptions {
  double epsilon = 1e-6;  // relative improvement threshold
  int max_iterations = 100;
  int max_halvings = 60;  // backtracking limit per iteration
};

struct TrainConfig {
  std::optional<double> lambda;
  std::optional<double> C;  // lambda = 1 / (n C) when given instead of lambda
  double gamma = 1.0;
  std::size_t budget = 100;
  std::size_t mergees = 2;
  Strategy strategy = Strategy::Merge;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  Schedule schedule = Schedule::Pegasos;
  double schedule_offset = 0.0;
  GoldenSectionOptions golden;
  GradientDescentOptions gd;
  bool gd_refine = false;  // mm-gd starts from the cascade result

  /// Throws ConfigError on violated invariants.
  void validate() const {
    if (lambda.has_value() == C.has_value()) {
      throw ConfigError("exactly one of lambda and C must be given");
    }
    if (lambda && !(*lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (C && !(*C > 0.0)) throw ConfigError("C must be positive");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (budget < 2) throw ConfigError("budget must be at least 2");
    if (mergees < 2) throw ConfigError("mergees must be at least 2");
    if (mergees > budget) throw ConfigError("mergees must not exceed the budget");
    if (strategy == Strategy::Merge && mergees != 2) {
      throw ConfigError("strategy 'merge' merges exactly 2 SVs; use mm-bsgd or mm-gd for M > 2");
    }
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (schedule_offset < 0.0) throw ConfigError("schedule offset must be nonnegative");
    if (!(golden.tolerance > 0.0) || golden.max_iterations < 1) {
      throw ConfigError("invalid golden section options");
    }
    if (!(gd.epsilon > 0.0) || gd.max_iterations < 0 || gd.max_halvings < 1) {
      throw ConfigError("invalid gradient descent options");
    }
  }

  /// SVs removed per maintenance event.
  std::size_t reduction() const noexcept {
    return strategy == Strategy::Removal ? 1 : mergees - 1;
  }

  double resolve_lambda(std::size_t n) const {
    if (lambda) return *lambda;
    return 1.0 / (static_cast<double>(n) * *C);
  }
};

struct Preset {
  std::string_view name;
  double C;
  double gamma;
};

/// Tuned (C, gamma) per benchmark dataset.
inline constexpr Preset kPresets[] = {
    {"phishing", 8.0, 8.0},
    {"web", 8.0, 0.03},
    {"adult", 32.0, 0.008},
    {"ijcnn", 32.0, 2.0},
    {"skin", 8.0, 0.03},
};

inline Preset preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  throw UnknownPreset("unknown preset '" + std::string(name) + "'");
}

}  // namespace budgetsvm
