#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "budgetsvm/model.hpp"
#include "oracle.hpp"

using namespace budgetsvm;

namespace {

const SparseVector kOrigin{};
const SparseVector kUnitX{{1, 1.0}};
const SparseVector kUnitY{{2, 1.0}};

}  // namespace

TEST(Margin, Examples) {
  BudgetedModel empty(10, 1.0);
  EXPECT_EQ(empty.margin(kUnitX), 0.0);

  BudgetedModel one(10, 0.3);
  one.add_sv(kUnitX, 2.0);
  EXPECT_EQ(one.margin(kUnitX), 2.0);

  BudgetedModel two(10, 1.0);
  two.add_sv(kUnitX, 1.0);
  two.add_sv(SparseVector{{1, -1.0}}, -1.0);
  EXPECT_EQ(two.margin(kOrigin), 0.0);
}

TEST(Predict, TieBreaksPositive) {
  BudgetedModel m(10, 1.0);
  EXPECT_EQ(m.predict(kUnitX), 1);
  m.add_sv(kOrigin, 0.3);
  EXPECT_EQ(m.predict(kOrigin), 1);
  m.add_sv(kOrigin, -0.6);
  EXPECT_EQ(m.predict(kOrigin), -1);
}

TEST(AddSv, Examples) {
  BudgetedModel m(10, 1.0);
  m.add_sv(kUnitY, 0.7);
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m.margin(kUnitY), 0.7);
  m.add_sv(kUnitY, -0.7);
  EXPECT_EQ(m.margin(kUnitY), 0.0);

  BudgetedModel s(10, 1.0);
  s.rescale(0.5);
  s.add_sv(kUnitX, 1.0);
  EXPECT_EQ(s.sv(0).alpha, 2.0);
  EXPECT_EQ(s.effective_alpha(0), 1.0);
  EXPECT_THROW(s.add_sv(kUnitX, 0.0), ZeroCoefficient);
}

TEST(Rescale, Examples) {
  BudgetedModel m(10, 1.0);
  m.add_sv(kUnitX, 3.0);
  m.add_sv(kUnitY, -1.0);
  m.rescale(1.0);
  EXPECT_EQ(m.effective_alpha(0), 3.0);
  m.rescale(0.9);
  m.rescale(0.9);
  EXPECT_NEAR(m.effective_alpha(0), 3.0 * 0.81, 1e-15);
  EXPECT_NEAR(m.effective_alpha(1), -0.81, 1e-15);
}

TEST(Rescale, TinyScaleIsFolded) {
  BudgetedModel m(10, 1.0);
  m.add_sv(kUnitX, 1.0);
  for (int k = 0; k < 4; ++k) m.rescale(1e-30);
  EXPECT_GE(m.scale(), BudgetedModel::kScaleFloor);
  EXPECT_NEAR(m.effective_alpha(0), 1e-120, 1e-132);
}

TEST(WeightNormSq, Examples) {
  BudgetedModel m(10, 1.0);
  EXPECT_EQ(m.weight_norm_sq(), 0.0);
  m.add_sv(kUnitX, 3.0);
  EXPECT_EQ(m.weight_norm_sq(), 9.0);
  BudgetedModel twin(10, 1.0);
  twin.add_sv(kUnitX, 1.0);
  twin.add_sv(kUnitX, 1.0);
  EXPECT_EQ(twin.weight_norm_sq(), 4.0);
}

TEST(WeightNormSq, MatchesGramOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-2.0, 2.0);
  BudgetedModel m(20, 0.2);
  std::vector<oracle::Dense> xs;
  std::vector<double> alphas;
  for (int k = 0; k < 12; ++k) {
    xs.push_back(oracle::random_dense(rng, 6, 0.7));
    alphas.push_back(a(rng));
    m.add_sv(oracle::to_sparse(xs.back()), alphas.back());
  }
  m.rescale(0.37);
  for (auto& v : alphas) v *= 0.37;
  const oracle::Dense zero(6, 0.0);
  const double want = oracle::gram_degradation(xs, alphas, zero, 0.0, 0.2);
  EXPECT_NEAR(m.weight_norm_sq(), want, 1e-12 * want);
}

TEST(PrimalObjective, Examples) {
  Dataset ds;
  ds.push_back(kUnitX, 1);
  ds.push_back(kUnitY, -1);
  BudgetedModel empty(10, 1.0);
  EXPECT_EQ(primal_objective(empty, ds, 0.1), 1.0);

  // margins well above 1: only the regularizer remains
  BudgetedModel big(10, 1.0);
  big.add_sv(kUnitX, 50.0);
  big.add_sv(kUnitY, -50.0);
  EXPECT_DOUBLE_EQ(primal_objective(big, ds, 0.1), 0.05 * big.weight_norm_sq());

  EXPECT_EQ(hinge_loss(1, 0.25), 0.75);
  EXPECT_EQ(hinge_loss(-1, 0.25), 1.25);
  EXPECT_EQ(hinge_loss(1, 3.0), 0.0);
}

TEST(LazyScaling, MatchesEagerModel) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), shrink(0.5, 1.0);
  std::bernoulli_distribution add(0.4);
  BudgetedModel lazy(500, 0.5);
  std::vector<oracle::Dense> xs;
  std::vector<double> eager;
  for (int step = 0; step < 400; ++step) {
    if (add(rng)) {
      xs.push_back(oracle::random_dense(rng, 5, 0.8));
      eager.push_back(coef(rng));
      lazy.add_sv(oracle::to_sparse(xs.back()), eager.back());
    } else {
      const double f = shrink(rng);
      lazy.rescale(f);
      for (auto& e : eager) e *= f;
    }
    if (step % 20 == 0 && !xs.empty()) {
      const auto q = oracle::random_dense(rng, 5, 0.8);
      double want = 0.0;
      for (std::size_t j = 0; j < xs.size(); ++j) want += eager[j] * oracle::dense_kernel(xs[j], q, 0.5);
      const double got = lazy.margin(oracle::to_sparse(q));
      EXPECT_NEAR(got, want, 1e-10 * std::max(std::abs(want), 1e-300) + 1e-300);
    }
  }
}

TEST(Predict, InvariantUnderRescale) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), factor(1e-3, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    BudgetedModel m(20, 1.0);
    for (int k = 0; k < 8; ++k) m.add_sv(oracle::to_sparse(oracle::random_dense(rng, 3, 0.9)), coef(rng));
    const auto q = oracle::to_sparse(oracle::random_dense(rng, 3, 0.9));
    const int before = m.predict(q);
    m.rescale(factor(rng));
    EXPECT_EQ(m.predict(q), before);
  }
}

TEST(Replace, SplicesAndPrunesZero) {
  BudgetedModel m(10, 1.0);
  m.add_sv(kUnitX, 1.0);
  m.add_sv(kUnitY, 2.0);
  m.add_sv(kOrigin, 3.0);
  m.rescale(0.5);
  m.replace({0, 2}, SparseVector{{1, 0.5}}, 4.0);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.sv(0).center, kUnitY);
  EXPECT_EQ(m.effective_alpha(0), 1.0);
  EXPECT_EQ(m.effective_alpha(1), 4.0);
  m.replace({1}, kOrigin, 0.0);
  EXPECT_EQ(m.size(), 1u);
}

TEST(ModelFile, RoundTripsExactly) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  BudgetedModel m(30, 0.0123456789);
  for (int k = 0; k < 25; ++k) m.add_sv(oracle::to_sparse(oracle::random_dense(rng, 10)), coef(rng) / 3.0);
  m.rescale(0.123);
  const auto text = model_to_string(m);
  const auto back = model_from_string(text);
  EXPECT_EQ(model_to_string(back), text);
  EXPECT_EQ(back.gamma(), m.gamma());
  EXPECT_EQ(back.budget(), m.budget());
  ASSERT_EQ(back.size(), m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    EXPECT_EQ(back.effective_alpha(j), m.effective_alpha(j));
    EXPECT_EQ(back.sv(j).center, m.sv(j).center);
  }
}

TEST(ModelFile, HeaderFormat) {
  BudgetedModel m(7, 0.5);
  m.add_sv(SparseVector{{2, 1.5}}, -0.25);
  EXPECT_EQ(model_to_string(m), "budgetsvm v1 gamma=0.5 bias=0 B=7\n-0.25 2:1.5\n");
  EXPECT_EQ(model_from_string("budgetsvm v1 gamma=0.5 bias=0 B=7\n").size(), 0u);
}

TEST(ModelFile, MalformedInputThrows) {
  EXPECT_THROW(model_from_string(""), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v2 gamma=1 bias=0 B=3\n"), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v1 gamma=-1 bias=0 B=3\n"), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v1 gamma=1 bias=0 B=x\n"), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v1 gamma=1 bias=0 B=3\n1 2:1 1:1\n"), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v1 gamma=1 bias=0 B=3\n0 1:1\n"), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v1 gamma=1 bias=0 B=3\nabc 1:1\n"), FormatError);
  EXPECT_THROW(model_from_string("budgetsvm v1 gamma=1 bias=0 B=1\n1 1:1\n1 2:1\n1 3:1\n"), FormatError);
}
