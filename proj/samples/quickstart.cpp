// Trains a budgeted SVM on two noisy concentric rings and prints the report.

#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "budgetsvm/budgetsvm.hpp"

int main() {
  using namespace budgetsvm;

  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  auto ring = [&](double radius, int label, std::size_t n, Dataset& out) {
    for (std::size_t k = 0; k < n; ++k) {
      const double a = angle(rng);
      const double xs[] = {radius * std::cos(a) + noise(rng), radius * std::sin(a) + noise(rng)};
      out.push_back(SparseVector::from_dense(xs), label);
    }
  };
  Dataset train_set, test_set;
  ring(1.0, +1, 2000, train_set);
  ring(2.0, -1, 2000, train_set);
  ring(1.0, +1, 500, test_set);
  ring(2.0, -1, 500, test_set);

  TrainConfig cfg;
  cfg.lambda = 1e-4;
  cfg.gamma = 2.0;
  cfg.budget = 50;
  cfg.mergees = 3;
  cfg.strategy = Strategy::MmBsgd;
  cfg.epochs = 2;

  auto [model, report] = train(train_set, cfg, &test_set);
  report.dataset = "rings";
  print_report(std::cout, report);
}
