// budgetsvm: train, evaluate and sweep budgeted kernel SVMs.
//
//   budgetsvm train --data adult.train.gz --test adult.test.gz --preset adult
//                   --budget 500 --mergees 3 --strategy mm-bsgd
//   budgetsvm eval  --model m.txt --data adult.test.gz
//   budgetsvm sweep --data ... --budgets 100,500 --mergees 2,3,5 --out sweep.csv
//
// Exit codes: 0 success, 1 bad arguments / data / config, 2 I/O failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "budgetsvm/budgetsvm.hpp"

namespace fs = std::filesystem;
using namespace budgetsvm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

std::string resolve_data_path(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("BUDGETSVM_DATA_DIR"); dir != nullptr && *dir != '\0') {
    return (fs::path(dir) / path).string();
  }
  return path;
}

std::string dataset_name_from(const std::string& path) {
  auto p = fs::path(path);
  if (p.extension() == ".gz") p = p.stem();
  return p.filename().string();
}

// Flags shared by `train` and `sweep`.
struct DataOptions {
  std::string train_path;
  std::string test_path;
  std::optional<double> split_fraction;
  std::uint64_t split_seed = 1;
  bool scale01 = false;
  std::string dataset_name;

  void add_to(CLI::App& app) {
    app.add_option("--data", train_path, "training data (svmlight, optionally gzipped)")->required();
    app.add_option("--test", test_path, "test data; without it use --split");
    app.add_option("--split", split_fraction, "train fraction when no --test is given");
    app.add_option("--split-seed", split_seed, "seed of the train/test split");
    app.add_flag("--scale01", scale01, "min-max scale features to [0,1] (fitted on train)");
    app.add_option("--dataset-name", dataset_name, "name recorded in reports");
  }

  std::pair<Dataset, std::optional<Dataset>> load() const {
    Dataset train = load_svmlight(resolve_data_path(train_path));
    std::optional<Dataset> test;
    if (!test_path.empty()) {
      test = load_svmlight(resolve_data_path(test_path));
    } else if (split_fraction) {
      auto [a, b] = split(train, *split_fraction, split_seed);
      train = std::move(a);
      test = std::move(b);
    }
    if (scale01) {
      const MinMaxScaler scaler(train);
      train = scaler.transform(train);
      if (test) test = scaler.transform(*test);
    }
    return {std::move(train), std::move(test)};
  }
};

struct HyperOptions {
  std::string preset;
  std::optional<double> C;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::size_t epochs = 1;
  std::string schedule = "pegasos";
  double schedule_offset = 0.0;
  double gs_tol = GoldenSectionOptions{}.tolerance;
  int gs_max_iter = GoldenSectionOptions{}.max_iterations;
  double gd_eps = GradientDescentOptions{}.epsilon;
  int gd_max_iter = GradientDescentOptions{}.max_iterations;
  bool gd_refine = false;

  void add_to(CLI::App& app) {
    app.add_option("--preset", preset, "phishing | web | adult | ijcnn | skin (sets C and gamma)");
    auto* c = app.add_option("--C", C, "regularization constant; lambda = 1/(n C)");
    app.add_option("--lambda", lambda, "regularization parameter")->excludes(c);
    app.add_option("--gamma", gamma, "Gaussian kernel bandwidth");
    app.add_option("--epochs", epochs, "passes over the data")->capture_default_str();
    app.add_option("--schedule", schedule, "learning rate: pegasos | shifted")->capture_default_str();
    app.add_option("--schedule-offset", schedule_offset, "t offset of the shifted schedule");
    app.add_option("--gs-tol", gs_tol, "golden section bracket tolerance")->capture_default_str();
    app.add_option("--gs-max-iter", gs_max_iter, "golden section iteration cap")->capture_default_str();
    app.add_option("--gd-eps", gd_eps, "mm-gd relative improvement threshold")->capture_default_str();
    app.add_option("--gd-max-iter", gd_max_iter, "mm-gd iteration cap")->capture_default_str();
    app.add_flag("--gd-refine", gd_refine, "mm-gd starts from the cascaded merge result");
  }

  TrainConfig base_config() const {
    TrainConfig cfg;
    if (!preset.empty()) {
      const auto p = budgetsvm::preset(preset);
      cfg.C = p.C;
      cfg.gamma = p.gamma;
    }
    if (C) cfg.C = *C;
    if (lambda) {
      cfg.lambda = *lambda;
      cfg.C.reset();
    }
    if (gamma) cfg.gamma = *gamma;
    if (!cfg.C && !cfg.lambda) throw ConfigError("one of --C, --lambda or --preset is required");
    if (preset.empty() && !gamma) throw ConfigError("--gamma (or --preset) is required");
    cfg.epochs = epochs;
    cfg.schedule = parse_schedule(schedule);
    cfg.schedule_offset = schedule_offset;
    cfg.golden = {gs_tol, gs_max_iter};
    cfg.gd.epsilon = gd_eps;
    cfg.gd.max_iterations = gd_max_iter;
    cfg.gd_refine = gd_refine;
    return cfg;
  }
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write '" + path + "'");
}

template <class Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------

struct TrainCommand {
  DataOptions data;
  HyperOptions hyper;
  std::size_t budget = 500;
  std::size_t mergees = 2;
  std::string strategy = "mm-bsgd";
  std::uint64_t seed = 1;
  std::string model_out;
  std::string report_out;
  std::string report_json;

  void attach(CLI::App& app) {
    data.add_to(app);
    hyper.add_to(app);
    app.add_option("--budget", budget, "maximal number of support vectors B")->capture_default_str();
    app.add_option("--mergees", mergees, "support vectors merged per maintenance M")->capture_default_str();
    app.add_option("--strategy", strategy, "merge | mm-bsgd | mm-gd | removal")->capture_default_str();
    app.add_option("--seed", seed, "root seed of the data order")->capture_default_str();
    app.add_option("--model-out", model_out, "write the trained model here");
    app.add_option("--report-out", report_out, "write the run report (CSV) here");
    app.add_option("--report-json", report_json, "write the full report with logs (JSON) here");
  }

  int run() const {
    TrainConfig cfg = hyper.base_config();
    cfg.budget = budget;
    cfg.mergees = mergees;
    cfg.strategy = parse_strategy(strategy);
    cfg.seed = seed;
    cfg.validate();

    auto [train_set, test_set] = data.load();
    auto result = budgetsvm::train(train_set, cfg, test_set ? &*test_set : nullptr);
    result.report.dataset = !data.dataset_name.empty() ? data.dataset_name
                            : !hyper.preset.empty()   ? hyper.preset
                                                      : dataset_name_from(data.train_path);
    print_report(std::cout, result.report);
    if (!model_out.empty()) write_text_file(model_out, model_to_string(result.model));
    if (!report_out.empty()) {
      write_text_file(report_out, report_csv_header() + '\n' + report_csv_row(result.report) + '\n');
    }
    if (!report_json.empty()) write_text_file(report_json, report_to_json(result.report).dump(2) + '\n');
    return 0;
  }
};

struct EvalCommand {
  std::string model_path;
  std::string data_path;

  void attach(CLI::App& app) {
    app.add_option("--model", model_path, "model file written by `train`")->required();
    app.add_option("--data", data_path, "labelled data (svmlight)")->required();
  }

  int run() const {
    std::ifstream in(model_path);
    if (!in) throw IoError("cannot open '" + model_path + "'");
    const auto model = load_model(in);
    const auto ds = load_svmlight(resolve_data_path(data_path));
    const auto c = confusion(model, ds);
    std::cout << "support vectors " << model.size() << '\n'
              << "accuracy        " << detail::format_real(c.accuracy()) << '\n'
              << "confusion       tp=" << c.true_pos << " fp=" << c.false_pos
              << " tn=" << c.true_neg << " fn=" << c.false_neg << '\n';
    return 0;
  }
};

// Sweep CSV schema; one row per (dataset, B, M, strategy, seed).
constexpr const char* kSweepHeader =
    "dataset,B,M,strategy,seed,accuracy,total_seconds,merge_fraction,avg_gradient_error,final_sv_count";

struct SweepCommand {
  DataOptions data;
  HyperOptions hyper;
  std::vector<std::size_t> budgets;
  std::vector<std::size_t> mergees;
  std::vector<std::string> strategies{"mm-bsgd"};
  std::size_t repetitions = 1;
  std::uint64_t seed = 1;
  std::string out_path;
  unsigned jobs = 1;

  void attach(CLI::App& app) {
    data.add_to(app);
    hyper.add_to(app);
    app.add_option("--budgets", budgets, "budget values B")->delimiter(',')->required();
    app.add_option("--mergees", mergees, "mergee counts M")->delimiter(',')->required();
    app.add_option("--strategies", strategies, "strategies to run")->delimiter(',')->capture_default_str();
    app.add_option("--repetitions", repetitions, "seeds per cell: seed, seed+1, ...")->capture_default_str();
    app.add_option("--seed", seed, "first seed")->capture_default_str();
    app.add_option("--out", out_path, "CSV file (appended, resumable)")->required();
    app.add_option("--jobs", jobs, "parallel runs (timing columns become unreliable)")->capture_default_str();
  }

  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string, std::uint64_t>;

  static std::set<Key> existing_rows(const std::string& path) {
    std::set<Key> keys;
    std::ifstream in(path);
    if (!in) return keys;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        if (line != kSweepHeader) throw FormatError("'" + path + "' is not a sweep CSV");
        continue;
      }
      const auto f = split_csv(line);
      if (f.size() != 10) continue;  // torn row from an interrupted run
      try {
        keys.emplace(f[0], std::stoul(f[1]), std::stoul(f[2]), f[3], std::stoull(f[4]));
      } catch (const std::exception&) {
      }
    }
    return keys;
  }

  int run() const {
    if (repetitions < 1) throw ConfigError("--repetitions must be at least 1");
    const TrainConfig base = hyper.base_config();
    auto [train_set, test_set] = data.load();
    if (!test_set) std::cerr << "note: no --test or --split given; accuracy is measured on the training data\n";
    const Dataset& eval_set = test_set ? *test_set : train_set;
    const std::string name = !data.dataset_name.empty() ? data.dataset_name
                             : !hyper.preset.empty()   ? hyper.preset
                                                       : dataset_name_from(data.train_path);

    struct Job {
      TrainConfig cfg;
      Key key;
    };
    std::vector<Job> todo;
    const auto done = existing_rows(out_path);
    for (const auto& s : strategies) {
      const auto strat = parse_strategy(s);
      for (auto b : budgets) {
        for (auto m : mergees) {
          if (strat == Strategy::Merge && m != 2) continue;
          if (strat == Strategy::Removal && m != mergees.front()) continue;
          for (std::size_t r = 0; r < repetitions; ++r) {
            TrainConfig cfg = base;
            cfg.budget = b;
            cfg.mergees = strat == Strategy::Removal ? 2 : m;
            cfg.strategy = strat;
            cfg.seed = seed + r;
            cfg.validate();
            Key key{name, b, strat == Strategy::Removal ? 1 : m, std::string(to_string(strat)), cfg.seed};
            if (!done.contains(key)) todo.push_back({cfg, key});
          }
        }
      }
    }

    const bool fresh = !fs::exists(out_path) || fs::file_size(out_path) == 0;
    std::ofstream out(out_path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open '" + out_path + "'");
    if (fresh) out << kSweepHeader << '\n' << std::flush;

    std::mutex mu;
    auto run_one = [&](const Job& job) {
      auto result = budgetsvm::train(train_set, job.cfg, &eval_set);
      const auto& r = result.report;
      const auto& [ds, b, m, strat, sd] = job.key;
      const std::string row = join_csv({ds, std::to_string(b), std::to_string(m), strat, std::to_string(sd),
                                        detail::format_real(r.test_accuracy),
                                        detail::format_real(r.total_train_seconds),
                                        detail::format_real(merge_fraction(r)),
                                        detail::format_real(r.avg_gradient_error),
                                        std::to_string(r.final_sv_count)});
      std::lock_guard lock(mu);
      out << row << '\n' << std::flush;
      if (!out) throw IoError("cannot write '" + out_path + "'");
      std::cerr << row << '\n';
    };

    if (jobs <= 1) {
      for (const auto& job : todo) run_one(job);
    } else {
      std::cerr << "warning: --jobs " << jobs << " runs trainings concurrently; timing columns are unreliable\n";
      std::size_t next = 0;
      std::exception_ptr failure;
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
          while (true) {
            std::size_t k;
            {
              std::lock_guard lock(mu);
              if (failure || next == todo.size()) return;
              k = next++;
            }
            try {
              run_one(todo[k]);
            } catch (...) {
              std::lock_guard lock(mu);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      if (failure) std::rethrow_exception(failure);
    }
    std::cerr << todo.size() << " runs completed, " << done.size() << " already present\n";
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted kernel SVM training with multi-merge budget maintenance"};
  app.require_subcommand(1);

  TrainCommand train_cmd;
  EvalCommand eval_cmd;
  SweepCommand sweep_cmd;
  auto* train_app = app.add_subcommand("train", "train one model and report");
  train_cmd.attach(*train_app);
  auto* eval_app = app.add_subcommand("eval", "evaluate a saved model");
  eval_cmd.attach(*eval_app);
  auto* sweep_app = app.add_subcommand("sweep", "run a B x M x strategy x seed grid into a CSV");
  sweep_cmd.attach(*sweep_app);
  auto* presets_app = app.add_subcommand("presets", "list the (C, gamma) presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kExitUsage;
  }

  if (train_app->parsed()) return guarded([&] { return train_cmd.run(); });
  if (eval_app->parsed()) return guarded([&] { return eval_cmd.run(); });
  if (sweep_app->parsed()) return guarded([&] { return sweep_cmd.run(); });
  if (presets_app->parsed()) {
    for (const auto& p : kPresets) {
      std::cout << p.name << " C=" << detail::format_real(p.C) << " gamma=" << detail::format_real(p.gamma) << '\n';
    }
    return 0;
  }
  return kExitUsage;
}
