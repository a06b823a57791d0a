#include <gtest/gtest.h>

#include "support.hpp"

using namespace aanimpute;
using testing_support::curve_rows;

namespace {

struct IdentityNet {
  std::size_t n;
  std::size_t n_inputs() const { return n; }
  std::vector<double> forward(std::span<const double> x) const { return {x.begin(), x.end()}; }
};

struct ConstantNet {
  std::vector<double> c;
  std::size_t n_inputs() const { return c.size(); }
  std::vector<double> forward(std::span<const double>) const { return c; }
};

ImputationTask task_with_unknown(std::vector<double> record, std::initializer_list<std::size_t> unknown) {
  std::vector<bool> mask(record.size(), true);
  for (auto u : unknown) mask[u] = false;
  return ImputationTask(record, mask, record);
}

}  // namespace

TEST(Objective, IdentityNetGivesZeroEverywhere) {
  const IdentityNet net{4};
  const auto task = task_with_unknown({0.1, 0.2, 0.3, 0.4}, {1, 3});
  const MissingDataObjective obj(net, task);
  EXPECT_EQ(obj.dimension(), 2u);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{rng.uniform(), rng.uniform()};
    EXPECT_EQ(obj.evaluate(x), 0.0);
    EXPECT_EQ(obj.evaluate_negated(x), 0.0);
  }
}

TEST(Objective, ConstantNetMinimizerIsTheConstant) {
  const ConstantNet net{{0.2, 0.65, 0.9, 0.4}};
  const auto task = task_with_unknown({0.5, 0.0, 0.1, 0.3}, {1});
  const MissingDataObjective obj(net, task);
  const double known = (0.5 - 0.2) * (0.5 - 0.2) + (0.1 - 0.9) * (0.1 - 0.9) + (0.3 - 0.4) * (0.3 - 0.4);
  EXPECT_NEAR(obj.evaluate(std::vector<double>{0.65}), known, 1e-15);
  double best_x = -1, best = 1e9;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    const double v = obj.evaluate(std::vector<double>{x});
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  EXPECT_NEAR(best_x, 0.65, 1e-4);
  EXPECT_NEAR(best, known, 1e-8);

  // negation preserves the location of the optimum
  double arg_max = -1, top = -1e9;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    const double v = obj.evaluate_negated(std::vector<double>{x});
    if (v > top) {
      top = v;
      arg_max = x;
    }
  }
  EXPECT_EQ(arg_max, best_x);
}

TEST(Objective, TrainedNetAgreesWithIndependentRecomputationOnAGrid) {
  TrainConfig cfg;
  cfg.rng_seed = 4;
  cfg.max_iterations = 200;
  const auto net = train(curve_rows(150, 3), 2, cfg).net;
  const auto task = task_with_unknown({0.3, 0.3, 0.7, 0.09}, {2});
  const MissingDataObjective obj(net, task);
  for (int i = 0; i <= 1000; ++i) {
    const double u = i / 1000.0;
    std::vector<double> x{0.3, 0.3, u, 0.09};
    const auto y = net.forward(x);
    double e = 0.0;
    for (std::size_t k = 0; k < 4; ++k) e += (x[k] - y[k]) * (x[k] - y[k]);
    ASSERT_NEAR(obj.evaluate(std::vector<double>{u}), e, 1e-12);
  }
}

TEST(Objective, IsNonNegativeAndNegationIsExact) {
  const auto net = Autoencoder::initialized(6, 3, 21);
  const auto task = task_with_unknown({0.1, 0.5, 0.2, 0.8, 0.4, 0.6}, {0, 4});
  const MissingDataObjective obj(net, task);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> x{rng.uniform(), rng.uniform()};
    const double v = obj.evaluate(x);
    EXPECT_GE(v, 0.0);
    EXPECT_EQ(obj.evaluate_negated(x), -v);
    EXPECT_EQ(evaluate_negated(obj, x), -v);
  }
}

TEST(Objective, SentinelValueIsNeverRead) {
  const auto net = Autoencoder::initialized(5, 2, 8);
  auto task = task_with_unknown({0.1, 0.5, 0.2, 0.8, 0.4}, {2, 3});
  const std::vector<double> x{0.33, 0.71};
  const double before = MissingDataObjective(net, task).evaluate(x);
  for (double s : {-1e6, 0.0, 1.0, 42.0}) {
    task.set_sentinel(s);
    EXPECT_EQ(MissingDataObjective(net, task).evaluate(x), before);
  }
}

TEST(Objective, RejectsBadCandidates) {
  const auto net = Autoencoder::initialized(4, 2, 1);
  const auto task = task_with_unknown({0.1, 0.2, 0.3, 0.4}, {0});
  const MissingDataObjective obj(net, task);
  EXPECT_THROW(obj.evaluate(std::vector<double>{1.5}), DomainError);
  EXPECT_THROW(obj.evaluate(std::vector<double>{0.1, 0.2}), DimensionError);
  const auto wide = task_with_unknown({0.1, 0.2, 0.3, 0.4, 0.5}, {0});
  EXPECT_THROW(MissingDataObjective(net, wide), DimensionError);
}

TEST(Impute, ScattersIntoUnknownSlots) {
  const IdentityNet net{5};
  const auto task = task_with_unknown({0.1, 0.2, 0.3, 0.4, 0.5}, {3});
  const MissingDataObjective obj(net, task);
  OptimizerResult res;
  res.best_point = {0.42};
  const auto full = impute(obj, res);
  EXPECT_EQ(full, (std::vector<double>{0.1, 0.2, 0.3, 0.42, 0.5}));
}

TEST(Impute, TwoUnknownsKeepIndexOrderAndKnownsAreUntouched) {
  const IdentityNet net{5};
  const auto task = task_with_unknown({0.1, 0.2, 0.3, 0.4, 0.5}, {4, 1});
  const MissingDataObjective obj(net, task);
  const std::vector<double> point{0.77, 0.66};
  const auto full = impute(obj, point);
  EXPECT_EQ(full[1], 0.77);
  EXPECT_EQ(full[4], 0.66);
  for (auto k : task.known_indices()) EXPECT_EQ(full[k], task.record()[k]);
  // gather(scatter(p)) == p
  std::vector<double> gathered;
  for (auto u : task.unknown_indices()) gathered.push_back(full[u]);
  EXPECT_EQ(gathered, point);
}
