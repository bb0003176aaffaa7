#pragma once

// Run reports: timing breakdown, degradation and gradient-error logs,
// accuracy, and their CSV / JSON / text renderings.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "budgetsvm/config.hpp"
#include "budgetsvm/data.hpp"
#include "budgetsvm/errors.hpp"
#include "budgetsvm/model.hpp"

namespace budgetsvm {

/// Accumulating monotonic stopwatch.
class Stopwatch {
 public:
  using Clock = std::chrono::steady_clock;

  void start() noexcept { begin_ = Clock::now(); }
  void stop() noexcept { total_ += Clock::now() - begin_; }
  double seconds() const noexcept { return std::chrono::duration<double>(total_).count(); }

 private:
  Clock::time_point begin_{};
  Clock::duration total_{};
};

struct RunReport {
  // config echo
  std::string dataset;
  Strategy strategy = Strategy::Merge;
  std::size_t budget = 0;
  std::size_t mergees = 0;
  double lambda = 0.0;
  double C = 0.0;  // 0 when lambda was given directly
  double gamma = 0.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;

  // counters
  std::uint64_t steps = 0;
  std::uint64_t sv_insertions = 0;
  std::uint64_t maintenance_calls = 0;
  std::uint64_t gd_fallbacks = 0;
  std::size_t final_sv_count = 0;

  // timing
  double total_train_seconds = 0.0;
  double merge_seconds = 0.0;

  // per maintenance event: ||Delta||^2 and ||E_t|| = ||Delta|| / eta_t
  std::vector<double> degradation_log;
  std::vector<double> gradient_error_log;
  double avg_gradient_error = 0.0;  // sum of gradient_error_log over all steps

  double test_accuracy = std::numeric_limits<double>::quiet_NaN();

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Records one maintenance event.
inline void log_maintenance(RunReport& report, double degradation_sq, double eta) {
  report.degradation_log.push_back(degradation_sq);
  report.gradient_error_log.push_back(std::sqrt(degradation_sq) / eta);
}

/// Average gradient error over all N steps; steps without maintenance have
/// zero gradient error.
inline double average_gradient_error(const std::vector<double>& gradient_errors,
                                     std::uint64_t steps) {
  if (steps == 0) return 0.0;
  const double sum = std::accumulate(gradient_errors.begin(), gradient_errors.end(), 0.0);
  return sum / static_cast<double>(steps);
}

/// Share of the training time spent in budget maintenance.
inline double merge_fraction(const RunReport& r) {
  if (r.total_train_seconds <= 0.0) return 0.0;
  return std::clamp(r.merge_seconds / r.total_train_seconds, 0.0, 1.0);
}

/// U = 2/lambda for lambda <= 4, else 1/sqrt(lambda).
inline double regret_radius(double lambda) {
  return lambda <= 4.0 ? 2.0 / lambda : 1.0 / std::sqrt(lambda);
}

/// Right-hand side of the BSGD regret bound
///   (lambda U + 2)^2 (ln N + 1) / (2 lambda N) + 2 U E_bar.
inline double theorem1_bound(double avg_gradient_error, double lambda, std::uint64_t n) {
  const double u = regret_radius(lambda);
  const double nn = static_cast<double>(n);
  const double a = lambda * u + 2.0;
  return a * a * (std::log(nn) + 1.0) / (2.0 * lambda * nn) + 2.0 * u * avg_gradient_error;
}

inline double theorem1_bound(const RunReport& r, double lambda, std::uint64_t n) {
  return theorem1_bound(r.avg_gradient_error, lambda, n);
}

/// True when every logged gradient error obeys the bound's ||E_t|| <= 1.
inline bool gradient_errors_bounded(const RunReport& r) {
  return std::all_of(r.gradient_error_log.begin(), r.gradient_error_log.end(),
                     [](double e) { return e <= 1.0; });
}

struct Confusion {
  std::size_t true_pos = 0, false_pos = 0, true_neg = 0, false_neg = 0;

  std::size_t total() const noexcept { return true_pos + false_pos + true_neg + false_neg; }
  double accuracy() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(true_pos + true_neg) / static_cast<double>(total());
  }
};

inline Confusion confusion(const BudgetedModel& model, const Dataset& ds) {
  Confusion c;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const int p = model.predict(ds.points[k]);
    if (ds.labels[k] > 0) {
      (p > 0 ? c.true_pos : c.false_neg)++;
    } else {
      (p > 0 ? c.false_pos : c.true_neg)++;
    }
  }
  return c;
}

inline double evaluate_accuracy(const BudgetedModel& model, const Dataset& ds) {
  if (ds.empty()) throw ConfigError("evaluate_accuracy: empty dataset");
  return confusion(model, ds).accuracy();
}

// ---------------------------------------------------------------------------
// CSV: one header line, one flat row per run. Column order is fixed.

inline constexpr std::array<std::string_view, 21> kReportColumns = {
    "dataset",        "strategy",           "B",
    "M",              "lambda",             "C",
    "gamma",          "epochs",             "seed",
    "n_train",        "steps",              "sv_insertions",
    "maintenance_calls", "gd_fallbacks",    "final_sv_count",
    "total_train_seconds", "merge_seconds", "merge_fraction",
    "avg_gradient_error", "max_gradient_error", "test_accuracy",
};

/// Columns that depend on wall-clock time.
inline bool is_timing_column(std::string_view name) {
  return name == "total_train_seconds" || name == "merge_seconds" || name == "merge_fraction";
}

inline std::string report_csv_header() {
  std::string out;
  for (std::size_t k = 0; k < kReportColumns.size(); ++k) {
    if (k) out += ',';
    out += kReportColumns[k];
  }
  return out;
}

inline std::vector<std::string> report_csv_fields(const RunReport& r) {
  const double max_e = r.gradient_error_log.empty()
                           ? 0.0
                           : *std::max_element(r.gradient_error_log.begin(), r.gradient_error_log.end());
  using detail::format_real;
  return {r.dataset,
          std::string(to_string(r.strategy)),
          std::to_string(r.budget),
          std::to_string(r.mergees),
          format_real(r.lambda),
          format_real(r.C),
          format_real(r.gamma),
          std::to_string(r.epochs),
          std::to_string(r.seed),
          std::to_string(r.n_train),
          std::to_string(r.steps),
          std::to_string(r.sv_insertions),
          std::to_string(r.maintenance_calls),
          std::to_string(r.gd_fallbacks),
          std::to_string(r.final_sv_count),
          format_real(r.total_train_seconds),
          format_real(r.merge_seconds),
          format_real(merge_fraction(r)),
          format_real(r.avg_gradient_error),
          format_real(max_e),
          format_real(r.test_accuracy)};
}

inline std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += fields[k];
  }
  return out;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string report_csv_row(const RunReport& r) { return join_csv(report_csv_fields(r)); }

/// Scalar fields of a report from a CSV row (logs are not part of the row).
inline RunReport report_from_csv_row(std::string_view line) {
  const auto f = split_csv(line);
  if (f.size() != kReportColumns.size()) throw FormatError("report row has wrong column count");
  auto real = [&](std::size_t k) {
    double v;
    auto [ptr, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
    if (ec != std::errc{} || ptr != f[k].data() + f[k].size()) throw FormatError("bad number in report row");
    return v;
  };
  auto count = [&](std::size_t k) {
    std::uint64_t v;
    auto [ptr, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
    if (ec != std::errc{} || ptr != f[k].data() + f[k].size()) throw FormatError("bad count in report row");
    return v;
  };
  RunReport r;
  r.dataset = f[0];
  r.strategy = parse_strategy(f[1]);
  r.budget = count(2);
  r.mergees = count(3);
  r.lambda = real(4);
  r.C = real(5);
  r.gamma = real(6);
  r.epochs = count(7);
  r.seed = count(8);
  r.n_train = count(9);
  r.steps = count(10);
  r.sv_insertions = count(11);
  r.maintenance_calls = count(12);
  r.gd_fallbacks = count(13);
  r.final_sv_count = count(14);
  r.total_train_seconds = real(15);
  r.merge_seconds = real(16);
  r.avg_gradient_error = real(18);
  r.test_accuracy = real(20);
  return r;
}

// ---------------------------------------------------------------------------
// JSON: the full report including the per-event logs.

inline nlohmann::json report_to_json(const RunReport& r) {
  return {
      {"dataset", r.dataset},
      {"strategy", std::string(to_string(r.strategy))},
      {"B", r.budget},
      {"M", r.mergees},
      {"lambda", r.lambda},
      {"C", r.C},
      {"gamma", r.gamma},
      {"epochs", r.epochs},
      {"seed", r.seed},
      {"n_train", r.n_train},
      {"steps", r.steps},
      {"sv_insertions", r.sv_insertions},
      {"maintenance_calls", r.maintenance_calls},
      {"gd_fallbacks", r.gd_fallbacks},
      {"final_sv_count", r.final_sv_count},
      {"total_train_seconds", r.total_train_seconds},
      {"merge_seconds", r.merge_seconds},
      {"degradation_log", r.degradation_log},
      {"gradient_error_log", r.gradient_error_log},
      {"avg_gradient_error", r.avg_gradient_error},
      // JSON has no NaN; a missing accuracy is null.
      {"test_accuracy", std::isnan(r.test_accuracy) ? nlohmann::json(nullptr) : nlohmann::json(r.test_accuracy)},
  };
}

inline RunReport report_from_json(const nlohmann::json& j) {
  try {
    RunReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.strategy = parse_strategy(j.at("strategy").get<std::string>());
    r.budget = j.at("B").get<std::size_t>();
    r.mergees = j.at("M").get<std::size_t>();
    r.lambda = j.at("lambda").get<double>();
    r.C = j.at("C").get<double>();
    r.gamma = j.at("gamma").get<double>();
    r.epochs = j.at("epochs").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_train = j.at("n_train").get<std::size_t>();
    r.steps = j.at("steps").get<std::uint64_t>();
    r.sv_insertions = j.at("sv_insertions").get<std::uint64_t>();
    r.maintenance_calls = j.at("maintenance_calls").get<std::uint64_t>();
    r.gd_fallbacks = j.at("gd_fallbacks").get<std::uint64_t>();
    r.final_sv_count = j.at("final_sv_count").get<std::size_t>();
    r.total_train_seconds = j.at("total_train_seconds").get<double>();
    r.merge_seconds = j.at("merge_seconds").get<double>();
    r.degradation_log = j.at("degradation_log").get<std::vector<double>>();
    r.gradient_error_log = j.at("gradient_error_log").get<std::vector<double>>();
    r.avg_gradient_error = j.at("avg_gradient_error").get<double>();
    const auto& acc = j.at("test_accuracy");
    r.test_accuracy = acc.is_null() ? std::numeric_limits<double>::quiet_NaN() : acc.get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad report JSON: ") + e.what());
  }
}

inline void print_report(std::ostream& out, const RunReport& r) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  out << "dataset            " << r.dataset << '\n'
      << "strategy           " << to_string(r.strategy) << "  B=" << r.budget << "  M=" << r.mergees << '\n'
      << "lambda             " << std::scientific << r.lambda << std::fixed;
  if (r.C > 0.0) out << "  (C=" << r.C << ")";
  out << "  gamma=" << r.gamma << '\n'
      << "epochs / seed      " << r.epochs << " / " << r.seed << '\n'
      << "steps              " << r.steps << "  (n=" << r.n_train << ")\n"
      << "sv insertions      " << r.sv_insertions << '\n'
      << "maintenance calls  " << r.maintenance_calls;
  if (r.gd_fallbacks) out << "  (" << r.gd_fallbacks << " gd fallbacks)";
  out << '\n'
      << "final SVs          " << r.final_sv_count << '\n'
      << "train time         " << r.total_train_seconds << " s  (merging " << r.merge_seconds
      << " s, " << 100.0 * merge_fraction(r) << "%)\n"
      << "avg gradient error " << std::scientific << r.avg_gradient_error << std::fixed << '\n';
  if (!std::isnan(r.test_accuracy)) out << "test accuracy      " << 100.0 * r.test_accuracy << "%\n";
  out.flags(flags);
}

}  // namespace budgetsvm
