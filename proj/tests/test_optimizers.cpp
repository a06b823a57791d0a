#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace aanimpute;
using namespace testing_support;

namespace {

OptimizerResult run_tag(const FnObjective& f, const std::string& tag, std::uint64_t seed) {
  return run(f, tag, OptimizerSettings{}, seed);
}

const std::vector<std::string> kAll{"ga", "sa", "pso", "ns"};

}  // namespace

TEST(Ga, DecodesChromosomeEndpoints) {
  const std::vector<std::uint8_t> zeros(16, 0), ones(16, 1);
  EXPECT_EQ(decode_chromosome(zeros, 16)[0], 0.0);
  EXPECT_EQ(decode_chromosome(ones, 16)[0], 1.0);
  std::vector<std::uint8_t> two(8, 0);
  two[0] = 1;  // MSB of the first variable
  two[7] = 1;  // LSB of the second
  const auto x = decode_chromosome(two, 4);
  EXPECT_DOUBLE_EQ(x[0], 8.0 / 15.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0 / 15.0);
  EXPECT_THROW(decode_chromosome(two, 3), DimensionError);
}

TEST(Ga, FitnessArgmaxIsObjectiveArgmin) {
  const auto f = rippled_2d();
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t arg_min = 0, arg_max = 0;
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < 40; ++i) {
      const std::vector<double> x{rng.uniform(), rng.uniform()};
      const double v = f.evaluate(x), fit = evaluate_negated(f, x);
      if (v < lo) lo = v, arg_min = i;
      if (fit > hi) hi = fit, arg_max = i;
    }
    EXPECT_EQ(arg_min, arg_max);
  }
}

TEST(AllOptimizers, FindTheParabolaMinimum) {
  const auto f = parabola();
  for (const auto& tag : kAll) {
    const double tol = tag == "ns" ? 0.05 : 0.02;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto res = run_tag(f, tag, derive_seed(seed, tag));
      EXPECT_NEAR(res.best_point[0], 0.3, tol) << tag << " seed " << seed;
    }
  }
}

TEST(AllOptimizers, ReachTwoDimensionalGridOptimum) {
  TrainConfig tc;
  tc.rng_seed = 2;
  tc.max_iterations = 200;
  const auto net = train(curve_rows(150, 9), 2, tc).net;
  const ImputationTask task({0.35, 0.5, 0.65, 0.5}, {true, false, true, false});
  const MissingDataObjective mdo(net, task);
  const FnObjective autoenc{2, [&](std::span<const double> x) { return mdo.evaluate(x); }};

  for (const auto& [name, f] : {std::pair{"bowl", bowl_2d()}, std::pair{"rippled", rippled_2d()}}) {
    const double grid = grid_2d(f, 200).value;
    for (const std::string tag : {"ga", "sa", "pso"}) {
      int hits = 0;
      for (std::uint64_t seed = 1; seed <= 20; ++seed)
        if (near_grid(run_tag(f, tag, derive_seed(seed, tag)).best_value, grid)) ++hits;
      EXPECT_GE(hits, 18) << tag << " on " << name;
    }
  }

  // The imputation objective bottoms out near 4.5e-5, where 5% is far below
  // what a fixed-step search resolves, so its check is absolute.
  const double grid = grid_2d(autoenc, 200).value;
  for (const std::string tag : {"ga", "sa", "pso"}) {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
      if (run_tag(autoenc, tag, derive_seed(seed, tag)).best_value <= grid + 1e-4) ++hits;
    EXPECT_GE(hits, 18) << tag << " on autoencoder";
  }
}

TEST(Sa, ZeroTemperatureIsStrictDescent) {
  SaConfig cfg;
  cfg.initial_temperature = 1e-12;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cfg.seed = seed;
    std::vector<double> accepted;
    const auto f = rippled_2d();
    minimize_sa(f, cfg, [&](double e) { accepted.push_back(e); });
    ASSERT_FALSE(accepted.empty());
    for (std::size_t i = 1; i < accepted.size(); ++i) EXPECT_LE(accepted[i], accepted[i - 1]);
  }
}

TEST(Sa, EscapesTheShallowWell) {
  const auto f = double_well();
  const auto grid = grid_1d(f, 10001);
  ASSERT_GT(grid.at[0], 0.7);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SaConfig cfg;
    cfg.seed = derive_seed(seed, "sa-bimodal");
    const auto res = minimize_sa(f, cfg);
    if (near_grid(res.best_value, grid.value)) ++hits;
  }
  EXPECT_GE(hits, 27);
}

TEST(Sa, AutoTemperatureFallsBackOnFlatObjective) {
  const FnObjective flat{1, [](std::span<const double>) { return 3.0; }};
  SaConfig cfg;
  const auto res = minimize_sa(flat, cfg);
  EXPECT_EQ(res.best_value, 3.0);
  EXPECT_EQ(res.evaluations, cfg.expected_evaluations());
}

TEST(Pso, ParticleAtOptimumWithZeroVelocityStays) {
  std::vector<double> x{0.3}, v{0.0};
  const std::vector<double> best{0.3};
  Rng rng(1);
  PsoConfig cfg;
  for (int i = 0; i < 100; ++i) {
    pso_move(x, v, best, best, cfg, rng);
    EXPECT_EQ(x[0], 0.3);
    EXPECT_EQ(v[0], 0.0);
  }
}

TEST(Pso, VelocityIsClamped) {
  std::vector<double> x{0.0, 1.0}, v{0.0, 0.0};
  const std::vector<double> pbest{1.0, 0.0}, gbest{1.0, 0.0};
  Rng rng(5);
  PsoConfig cfg;
  pso_move(x, v, pbest, gbest, cfg, rng);
  EXPECT_LE(std::abs(v[0]), cfg.v_max);
  EXPECT_LE(std::abs(v[1]), cfg.v_max);
  EXPECT_GE(x[0], 0.0);
  EXPECT_LE(x[1], 1.0);
}

TEST(Ns, DetectorSetSizeIsConstant) {
  NsConfig cfg;
  std::size_t calls = 0;
  const auto f = parabola();
  minimize_ns(f, cfg, [&](std::size_t gen, std::size_t size) {
    EXPECT_EQ(size, cfg.detectors);
    EXPECT_EQ(gen, ++calls);
  });
  EXPECT_EQ(calls, cfg.generations);
}

TEST(Ns, BoundedByExhaustiveGrid) {
  // minimizer 0.3 lies on the grid, so the grid minimum is the true minimum
  const FnObjective f{1, [](std::span<const double> x) { return 0.1 + std::abs(x[0] - 0.3) + 0.2 * x[0] * x[0]; }};
  const auto grid = grid_1d(f, 100001);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    NsConfig cfg;
    cfg.seed = seed;
    const auto res = minimize_ns(f, cfg);
    EXPECT_GE(res.best_value, grid.value);
    EXPECT_LE(res.best_value, grid.max);
  }
}

TEST(AllOptimizers, ContractProperties) {
  const FnObjective f{3, [](std::span<const double> x) {
                        return std::pow(x[0] - 0.2, 2) + std::pow(x[1] - 0.9, 2) + 0.5 * std::sin(5 * x[2]) + 1;
                      }};
  OptimizerSettings s;
  for (const auto& tag : kAll) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto res = run(f, tag, s, seed);
      ASSERT_EQ(res.best_point.size(), 3u);
      for (double v : res.best_point) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_EQ(res.best_value, f.evaluate(res.best_point)) << tag;
      ASSERT_FALSE(res.trace.empty());
      for (std::size_t i = 1; i < res.trace.size(); ++i)
        EXPECT_LE(res.trace[i].best_value, res.trace[i - 1].best_value) << tag;
      EXPECT_EQ(res.trace.back().best_value, res.best_value);
      EXPECT_EQ(res, run(f, tag, s, seed)) << tag << " is not deterministic";
    }
  }
}

TEST(AllOptimizers, EvaluationCountsMatchTheBudgetFormulas) {
  const auto f = rippled_2d();
  OptimizerSettings s;
  s.ga.population = 20;
  s.ga.elitism = 3;
  s.ga.generations = 7;
  s.sa.temperature_steps = 9;
  s.sa.moves_per_step = 4;
  s.pso.swarm = 6;
  s.pso.iterations = 11;
  s.ns.detectors = 10;
  s.ns.generations = 5;
  EXPECT_EQ(run(f, "ga", s, 1).evaluations, 20u + 7u * 17u);
  EXPECT_EQ(s.ga.expected_evaluations(), 20u + 7u * 17u);
  EXPECT_EQ(run(f, "sa", s, 1).evaluations, 1u + 100u + 9u * 4u);
  s.sa.initial_temperature = 0.5;
  EXPECT_EQ(run(f, "sa", s, 1).evaluations, 1u + 9u * 4u);
  EXPECT_EQ(s.sa.expected_evaluations(), 1u + 9u * 4u);
  EXPECT_EQ(run(f, "pso", s, 1).evaluations, 6u * 12u);
  EXPECT_EQ(run(f, "ns", s, 1).evaluations, 10u + 5u * 5u);

  const OptimizerSettings defaults;
  EXPECT_EQ(run(f, "ga", defaults, 2).evaluations, defaults.ga.expected_evaluations());
  EXPECT_EQ(run(f, "sa", defaults, 2).evaluations, defaults.sa.expected_evaluations());
  EXPECT_EQ(run(f, "pso", defaults, 2).evaluations, defaults.pso.expected_evaluations());
  EXPECT_EQ(run(f, "ns", defaults, 2).evaluations, defaults.ns.expected_evaluations());
}

TEST(Dispatch, TagsAndErrors) {
  EXPECT_EQ(parse_algorithm("ga"), Algorithm::ga);
  EXPECT_EQ(to_string(Algorithm::pso), "pso");
  EXPECT_THROW(parse_algorithm("rf"), DomainError);
  const auto f = parabola();
  EXPECT_THROW(run(f, "rf", OptimizerSettings{}, 1), DomainError);
  GaConfig ga;
  ga.elitism = ga.population;
  EXPECT_THROW(minimize_ga(f, ga), DomainError);
  const auto direct = [&] {
    GaConfig g;
    g.seed = 99;
    return minimize_ga(f, g);
  }();
  EXPECT_EQ(direct, run(f, "ga", OptimizerSettings{}, 99));
}
