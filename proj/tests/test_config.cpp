#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace aanimpute;

namespace {

ExperimentConfig parse(const std::string& text, const std::filesystem::path& base = {}) {
  std::istringstream in(text);
  return parse_config(in, base);
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndSections) {
  const auto cfg = parse(
      "# experiment\n"
      "dataset = data.csv   # relative to the config\n"
      "missing_column = 24\n"
      "task = classification\n"
      "hidden_size = 12\n"
      "methods = rf, ga\n"
      "ga.population = 30\n"
      "sa.initial_temperature = 0.25\n"
      "pso.v_max = 0.5\n"
      "ns.detectors = 40\n"
      "rf.mtry = 3\n"
      "master_seed = 99\n"
      "comparison.test = pooled\n"
      "normalization = train\n"
      "columns.kinds = numeric, binary\n"
      "header = false\n",
      "/base");
  EXPECT_EQ(cfg.dataset_path, "/base/data.csv");
  EXPECT_EQ(cfg.missing_column, "24");
  EXPECT_EQ(cfg.task_kind, TaskKind::classification);
  EXPECT_EQ(cfg.hidden_size, 12u);
  EXPECT_EQ(cfg.methods, (std::vector<std::string>{"ga", "rf"}));
  EXPECT_EQ(cfg.optimizers.ga.population, 30u);
  EXPECT_EQ(cfg.optimizers.sa.initial_temperature, 0.25);
  EXPECT_EQ(cfg.optimizers.pso.v_max, 0.5);
  EXPECT_EQ(cfg.optimizers.ns.detectors, 40u);
  EXPECT_EQ(cfg.forest.mtry, 3u);
  EXPECT_EQ(cfg.master_seed, 99u);
  EXPECT_EQ(cfg.comparison_test, TTestKind::pooled);
  EXPECT_EQ(cfg.normalization, NormalizationScope::train);
  EXPECT_EQ(cfg.column_kinds, (std::vector<ColumnKind>{ColumnKind::numeric, ColumnKind::binary}));
  EXPECT_FALSE(cfg.header);
}

TEST(Config, DefaultsMatchTheDocumentedValues) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.methods, (std::vector<std::string>{"ga", "sa", "pso", "rf", "ns"}));
  EXPECT_FALSE(cfg.hidden_size.has_value());
  EXPECT_EQ(cfg.train.max_iterations, 500u);
  EXPECT_EQ(cfg.train.gradient_tolerance, 1e-6);
  EXPECT_EQ(cfg.optimizers.ga.population, 50u);
  EXPECT_EQ(cfg.optimizers.ga.bits_per_variable, 16u);
  EXPECT_EQ(cfg.optimizers.ga.tournament_size, 2u);
  EXPECT_EQ(cfg.optimizers.sa.cooling_factor, 0.95);
  EXPECT_EQ(cfg.optimizers.sa.temperature_steps, 100u);
  EXPECT_EQ(cfg.optimizers.sa.moves_per_step, 20u);
  EXPECT_EQ(cfg.optimizers.sa.neighbor_sigma, 0.1);
  EXPECT_EQ(cfg.optimizers.pso.swarm, 30u);
  EXPECT_EQ(cfg.optimizers.pso.v_max, 0.25);
  EXPECT_EQ(cfg.optimizers.ns.detectors, 50u);
  EXPECT_EQ(cfg.forest.n_trees, 100u);
  EXPECT_EQ(cfg.forest.min_leaf, 5u);
  EXPECT_EQ(cfg.normalization, NormalizationScope::full);
  EXPECT_EQ(cfg.comparison_test, TTestKind::welch);
}

TEST(Config, UnknownKeysAreErrors) {
  try {
    parse("dataset = x.csv\nga.populaton = 30\n");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("ga.populaton"), std::string::npos) << msg;
  }
}

TEST(Config, RejectsMalformedLinesAndValues) {
  EXPECT_THROW(parse("dataset x.csv\n"), ConfigError);
  EXPECT_THROW(parse("dataset = a\ndataset = b\n"), ConfigError);
  EXPECT_THROW(parse("ga.population = many\n"), ConfigError);
  EXPECT_THROW(parse("methods = ga, svm\n"), ConfigError);
  EXPECT_THROW(parse("task = regression\n"), ConfigError);
  EXPECT_THROW(parse("columns.kinds = numeric, text\n"), ConfigError);
  EXPECT_THROW(parse("header = maybe\n"), ConfigError);
}

TEST(Config, ValidateCatchesMissingAndInconsistentSettings) {
  ExperimentConfig cfg;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.dataset_path = "x.csv";
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.missing_column = "3";
  EXPECT_NO_THROW(validate(cfg));
  cfg.methods.clear();
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.methods = {"ga"};
  cfg.optimizers.sa.cooling_factor = 1.5;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.optimizers.sa.cooling_factor = 0.9;
  cfg.column_names = {"a", "b"};
  cfg.column_kinds = {ColumnKind::numeric};
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Config, ResolvedSettingsRoundTrip) {
  auto cfg = parse("dataset = /d.csv\nmissing_column = 2\nmethods = sa, ns\nga.generations = 7\n");
  const auto echo = resolved_settings(cfg, 1, 4);
  ExperimentConfig back;
  for (const auto& [k, v] : echo) apply_setting(back, k, v);
  EXPECT_EQ(resolved_settings(back, 1, 4), echo);
  const auto has = [&](const std::string& k, const std::string& v) {
    return std::find(echo.begin(), echo.end(), std::pair{k, v}) != echo.end();
  };
  EXPECT_TRUE(has("rf.mtry", "2"));
  EXPECT_TRUE(has("ga.mutation_prob", "0.0625"));
  EXPECT_TRUE(has("sa.initial_temperature", "auto"));
  EXPECT_TRUE(has("methods", "sa,ns"));
  for (const auto& [k, v] : echo) {
    EXPECT_NE(k, "threads");
    EXPECT_NE(k, "output_dir");
  }
}

TEST(Config, LoadsFromFileRelativeToItsDirectory) {
  const auto dir = testing_support::scratch_dir("config");
  std::filesystem::create_directories(dir / "sub");
  testing_support::write_text(dir / "sub" / "e.conf", "dataset = ../d.csv\nmissing_column = 0\n");
  const auto cfg = load_config((dir / "sub" / "e.conf").string());
  EXPECT_EQ(std::filesystem::path(cfg.dataset_path), (dir / "d.csv").lexically_normal());
  EXPECT_THROW(load_config((dir / "missing.conf").string()), ConfigError);
}

TEST(Config, BundledConfigsParse) {
  for (const char* name : {"german_credit", "heart", "forestfires", "forestfires_surrogate", "smoke"}) {
    const auto cfg = load_config(std::string(AANIMPUTE_DATA_DIR) + "/../configs/" + name + ".conf");
    EXPECT_NO_THROW(validate(cfg)) << name;
  }
}
