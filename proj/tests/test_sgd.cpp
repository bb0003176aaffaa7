#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "budgetsvm/sgd.hpp"
#include "synthetic.hpp"

using namespace budgetsvm;

namespace {

TrainConfig config(double lambda, std::size_t budget, Strategy s = Strategy::Merge, std::size_t m = 2) {
  TrainConfig cfg;
  cfg.lambda = lambda;
  cfg.gamma = 0.5;
  cfg.budget = budget;
  cfg.mergees = m;
  cfg.strategy = s;
  return cfg;
}

}  // namespace

TEST(LearningRate, Examples) {
  EXPECT_EQ(learning_rate(1, 0.5), 2.0);
  EXPECT_EQ(learning_rate(10, 1.0), 0.1);
  EXPECT_EQ(learning_rate(10, 1.0, Schedule::Shifted, 10.0), 0.05);
}

TEST(SgdStep, FirstStepAddsScaledLabel) {
  BudgetedModel m(5, 1.0);
  const auto cfg = config(0.25, 5);
  const SparseVector x{{1, 1.0}};
  const auto out = sgd_step(m, x, -1, 1, 0.25, cfg);
  EXPECT_TRUE(out.margin_violated);
  EXPECT_TRUE(out.sv_added);
  EXPECT_FALSE(out.maintenance_triggered);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.effective_alpha(0), -4.0);
}

TEST(SgdStep, SatisfiedMarginOnlyShrinks) {
  BudgetedModel m(5, 1.0);
  const SparseVector x{{1, 1.0}};
  m.add_sv(x, 3.0);
  const auto out = sgd_step(m, x, 1, 4, 0.5, config(0.5, 5));
  EXPECT_FALSE(out.margin_violated);
  EXPECT_FALSE(out.sv_added);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m.effective_alpha(0), 3.0 * (1.0 - 0.25));
}

TEST(SgdStep, MarginUsesPreShrinkModel) {
  // margin 1.2 before the shrink, 0.6 after: no violation
  BudgetedModel m(5, 1.0);
  const SparseVector x{{1, 1.0}};
  m.add_sv(x, 1.2);
  EXPECT_FALSE(sgd_step(m, x, 1, 2, 1.0, config(1.0, 5)).margin_violated);
}

TEST(SgdStep, FullBudgetTriggersMaintenance) {
  for (auto s : {Strategy::Merge, Strategy::MmBsgd, Strategy::MmGd, Strategy::Removal}) {
    const std::size_t mergees = s == Strategy::Merge || s == Strategy::Removal ? 2 : 3;
    const auto cfg = config(0.01, 4, s, mergees);
    BudgetedModel m(4, 0.5);
    for (int k = 0; k < 4; ++k) m.add_sv(SparseVector{{1, double(k)}}, -0.01);
    const auto out = sgd_step(m, SparseVector{{2, 5.0}}, 1, 50, 0.01, cfg);
    EXPECT_TRUE(out.maintenance_triggered);
    EXPECT_TRUE(out.sv_added);
    ASSERT_TRUE(out.degradation_sq.has_value());
    EXPECT_GE(*out.degradation_sq, 0.0);
    EXPECT_EQ(m.size(), 5 - cfg.reduction());
  }
}

TEST(Train, SinglePointSingleStep) {
  Dataset ds;
  ds.push_back(SparseVector{{1, 1.0}}, 1);
  const auto r = train(ds, config(0.1, 2));
  EXPECT_EQ(r.report.steps, 1u);
  EXPECT_LE(r.model.size(), 1u);
}

TEST(Train, RejectsInvalidConfig) {
  const auto ds = synthetic::blobs(20, 1);
  auto cfg = config(0.1, 4);
  cfg.C = 1.0;
  EXPECT_THROW(train(ds, cfg), ConfigError);
  cfg = config(0.1, 4, Strategy::MmBsgd, 5);
  EXPECT_THROW(train(ds, cfg), ConfigError);
  cfg = config(0.1, 4, Strategy::Merge, 3);
  EXPECT_THROW(train(ds, cfg), ConfigError);
  cfg = config(0.1, 1);
  EXPECT_THROW(train(ds, cfg), ConfigError);
  EXPECT_THROW(train(Dataset{}, config(0.1, 4)), ConfigError);
}

TEST(Train, LambdaFromC) {
  const auto ds = synthetic::blobs(40, 2);
  auto cfg = config(0.1, 10);
  cfg.lambda.reset();
  cfg.C = 5.0;
  const auto r = train(ds, cfg);
  EXPECT_DOUBLE_EQ(r.report.lambda, 1.0 / 200.0);
  EXPECT_EQ(r.report.C, 5.0);
}

TEST(Train, SameSeedSameModel) {
  const auto ds = synthetic::blobs(300, 3);
  for (auto s : {Strategy::Merge, Strategy::MmBsgd, Strategy::MmGd, Strategy::Removal}) {
    auto cfg = config(0.01, 15, s, s == Strategy::MmBsgd || s == Strategy::MmGd ? 4 : 2);
    cfg.epochs = 2;
    cfg.seed = 77;
    const auto a = train(ds, cfg), b = train(ds, cfg);
    EXPECT_EQ(model_to_string(a.model), model_to_string(b.model));
    EXPECT_EQ(a.report.degradation_log, b.report.degradation_log);
    cfg.seed = 78;
    EXPECT_NE(model_to_string(train(ds, cfg).model), model_to_string(a.model));
  }
}

TEST(Train, GlobalStepCounterAndBudgetTrace) {
  const auto ds = synthetic::blobs(200, 4, 0.5);
  for (auto s : {Strategy::Merge, Strategy::MmBsgd, Strategy::MmGd, Strategy::Removal}) {
    auto cfg = config(0.002, 12, s, s == Strategy::MmBsgd || s == Strategy::MmGd ? 5 : 2);
    cfg.epochs = 3;
    std::uint64_t last = 0;
    std::uint64_t violations = 0;
    const auto r = train(ds, cfg, nullptr, [&](std::uint64_t t, const StepOutcome& step,
                                               const BudgetedModel& m) {
      EXPECT_EQ(t, last + 1);
      last = t;
      if (step.sv_added) ++violations;
      if (step.maintenance_triggered) {
        EXPECT_TRUE(step.sv_added);
        // a merged SV whose coefficient comes out exactly zero is pruned too
        EXPECT_LE(m.size(), cfg.budget + 1 - cfg.reduction()) << to_string(s) << " t=" << t;
        EXPECT_GE(m.size() + 1, cfg.budget + 1 - cfg.reduction()) << to_string(s) << " t=" << t;
      }
      EXPECT_LE(m.size(), cfg.budget);
    });
    EXPECT_EQ(last, 600u);
    EXPECT_EQ(r.report.steps, 600u);
    EXPECT_EQ(r.report.sv_insertions, violations);
    EXPECT_EQ(r.report.degradation_log.size(), r.report.maintenance_calls);
    ASSERT_GT(r.report.maintenance_calls, 0u);
  }
}

// Each maintenance removes exactly M-1 SVs, so the call count follows from
// the insertions, up to the SVs dropped when the first step clears the model.
TEST(Train, MaintenanceCountFollowsInsertions) {
  const auto ds = synthetic::blobs(400, 5, 1.2);
  for (std::size_t m : {2u, 3u, 5u, 8u}) {
    auto cfg = config(0.001, 20, Strategy::MmBsgd, m);
    const auto r = train(ds, cfg);
    const double v = static_cast<double>(r.report.sv_insertions);
    const double expect = std::max(0.0, std::ceil((v - 20.0) / static_cast<double>(m - 1)));
    EXPECT_NEAR(static_cast<double>(r.report.maintenance_calls), expect, 1.0) << "M=" << m;
  }
}

TEST(Train, ConvergesOnSmallSeparableProblem) {
  const auto ds = synthetic::blobs(20, 6);
  // every step may insert, so only B >= n * epochs guarantees no maintenance
  auto cfg = config(0.05, 20 * 5000);
  cfg.gamma = 0.5;
  cfg.epochs = 50;
  const auto short_run = train(ds, cfg);
  cfg.epochs = 5000;
  const auto long_run = train(ds, cfg);
  EXPECT_EQ(short_run.report.maintenance_calls, 0u);
  EXPECT_EQ(long_run.report.maintenance_calls, 0u);
  const double p_short = primal_objective(short_run.model, ds, 0.05);
  const double p_long = primal_objective(long_run.model, ds, 0.05);
  EXPECT_LE(std::abs(p_short - p_long), 0.05 * p_long) << p_short << " vs " << p_long;
}

TEST(Train, ReportFields) {
  const auto ds = synthetic::blobs(100, 8);
  const auto test = synthetic::blobs(100, 9);
  auto cfg = config(0.01, 10, Strategy::MmGd, 3);
  const auto r = train(ds, cfg, &test);
  EXPECT_EQ(r.report.n_train, 100u);
  EXPECT_EQ(r.report.final_sv_count, r.model.size());
  EXPECT_LE(r.report.merge_seconds, r.report.total_train_seconds);
  EXPECT_DOUBLE_EQ(r.report.test_accuracy, evaluate_accuracy(r.model, test));
  double sum = 0.0;
  for (double e : r.report.gradient_error_log) sum += e;
  EXPECT_DOUBLE_EQ(r.report.avg_gradient_error, sum / 100.0);
}
