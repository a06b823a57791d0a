#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "aanimpute/config.hpp"
#include "aanimpute/data.hpp"
#include "aanimpute/forest.hpp"
#include "aanimpute/metrics.hpp"
#include "aanimpute/network.hpp"
#include "aanimpute/objective.hpp"
#include "aanimpute/optimizers.hpp"
#include "aanimpute/parallel.hpp"
#include "aanimpute/rng.hpp"
#include "aanimpute/text.hpp"
#include "aanimpute/version.hpp"

namespace aanimpute {

struct MethodOutcome {
  std::string method;
  std::vector<double> imputed;  // normalized units, one per task
  std::size_t evaluations = 0;  // objective evaluations summed over tasks (0 for rf)
  PredictionScores scores;
  std::optional<PredictionScores> scores_original;  // absent for a constant target column
  std::optional<RocCurve> roc;
  std::vector<double> squared_errors;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<ColumnSpec> columns;
  std::size_t row_count = 0;
  std::size_t target_column = 0;
  SplitCounts split;
  std::size_t hidden_size = 0;
  std::optional<HiddenSizeSelection> selection;
  std::optional<Autoencoder> model;
  double train_loss = 0.0;
  std::size_t train_iterations = 0;
  std::string train_stop_reason;
  std::vector<std::size_t> task_rows;
  std::vector<double> truth;  // normalized target values of the test rows
  std::vector<MethodOutcome> methods;
  std::optional<ComparisonMatrix> comparison;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
  std::string failed_stage;
  std::string failure;

  bool failed() const { return !failed_stage.empty(); }
  TaskKind task_kind() const {
    for (const auto& [k, v] : settings)
      if (k == "task") return v == "classification" ? TaskKind::classification : TaskKind::prediction;
    return TaskKind::prediction;
  }
};

/// Thrown by run_experiment; carries the stage that failed and every result
/// completed before it. `input_error` marks configuration or data problems.
class ExperimentFailure : public std::runtime_error {
 public:
  ExperimentFailure(std::string stage, const std::string& message, ExperimentReport partial, bool input_error)
      : std::runtime_error(stage + ": " + message),
        stage_(std::move(stage)),
        partial_(std::move(partial)),
        input_error_(input_error) {}

  const std::string& stage() const { return stage_; }
  const ExperimentReport& partial() const { return partial_; }
  bool input_error() const { return input_error_; }

 private:
  std::string stage_;
  ExperimentReport partial_;
  bool input_error_;
};

/// Seed for one (method, task) cell; independent of which other methods run.
inline std::uint64_t cell_seed(std::uint64_t master, std::string_view method, std::size_t task) {
  return derive_seed(master, method, task);
}

inline std::uint64_t network_seed(std::uint64_t master) { return derive_seed(master, "network"); }
inline std::uint64_t forest_seed(std::uint64_t master) { return derive_seed(master, "rf"); }

/// Resolves an index or a column name to a 0-based column index.
inline std::size_t resolve_column(const std::string& spec, const std::vector<ColumnSpec>& columns) {
  const bool numeric = !spec.empty() && std::all_of(spec.begin(), spec.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (numeric) {
    const auto idx = std::stoul(spec);
    if (idx >= columns.size())
      throw ConfigError("missing_column " + spec + " out of range (" + std::to_string(columns.size()) + " columns)");
    return idx;
  }
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].name == spec) return c;
  throw ConfigError("missing_column '" + spec + "' names no column");
}

/// Dataset as the experiment sees it: loaded, split, normalized.
inline Dataset prepare_dataset(const ExperimentConfig& cfg) {
  auto ds = split(load_csv(cfg.dataset_path, cfg.column_hints(), CsvOptions{cfg.header}));
  return normalize(std::move(ds), cfg.normalization);
}

using ProgressSink = std::function<void(const std::string&)>;

/// load -> normalize -> split -> (hidden-size search) -> train -> impute the
/// test column with each optimizer -> random forest -> score -> compare.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressSink& progress = {}) {
  using clock = std::chrono::steady_clock;
  ExperimentReport report;
  report.settings = resolved_settings(cfg);
  std::string stage = "config";
  bool input_stage = true;
  auto note = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  auto timed = [&](const std::string& name, auto&& body) {
    stage = name;
    const auto t0 = clock::now();
    body();
    report.timings.emplace_back(name, std::chrono::duration<double>(clock::now() - t0).count());
  };

  try {
    validate(cfg);
    Dataset ds;
    std::vector<ImputationTask> tasks;
    timed("load", [&] {
      ds = prepare_dataset(cfg);
      report.columns = ds.columns;
      report.row_count = ds.row_count();
      report.split = split_counts(ds.row_count());
      report.target_column = resolve_column(cfg.missing_column, ds.columns);
      report.settings = resolved_settings(cfg, 1, ds.column_count() - 1);
      note("loaded " + std::to_string(ds.row_count()) + " rows x " + std::to_string(ds.column_count()) + " columns");
    });
    timed("tasks", [&] {
      tasks = make_tasks(ds, {report.target_column});
      for (const auto& t : tasks) {
        report.task_rows.push_back(t.row_index());
        report.truth.push_back((*t.true_values())[report.target_column]);
      }
      if (cfg.task_kind == TaskKind::classification) {
        for (Eigen::Index r = 0; r < ds.rows.rows(); ++r) {
          const double v = ds.rows(r, static_cast<Eigen::Index>(report.target_column));
          if (v != 0.0 && v != 1.0)
            throw ConfigError("classification target '" + ds.columns[report.target_column].name +
                              "' must take exactly two values");
        }
      }
    });
    input_stage = false;

    const RowMatrix train_rows = ds.rows_with(SplitLabel::train);
    TrainConfig train_cfg = cfg.train;
    train_cfg.rng_seed = network_seed(cfg.master_seed);

    const bool needs_network = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](auto& m) { return m != "rf"; });
    if (needs_network) {
      if (cfg.hidden_size) {
        report.hidden_size = *cfg.hidden_size;
      } else {
        timed("hidden_size", [&] {
          report.selection = select_hidden_size(train_rows, ds.rows_with(SplitLabel::validation), train_cfg, cfg.threads);
          report.hidden_size = report.selection->hidden;
          note("selected hidden size " + std::to_string(report.hidden_size));
        });
      }
      timed("train", [&] {
        auto trained = train(train_rows, report.hidden_size, train_cfg);
        report.train_loss = trained.final_loss;
        report.train_iterations = trained.iterations;
        report.train_stop_reason = trained.stop_reason;
        report.model = std::move(trained.net);
        note("trained autoencoder, loss " + format_double(report.train_loss));
      });
    }

    std::vector<std::string> optimizers;
    for (const auto& m : cfg.methods)
      if (m != "rf") optimizers.push_back(m);
    std::vector<std::vector<OptimizerResult>> results(optimizers.size(), std::vector<OptimizerResult>(tasks.size()));
    if (!optimizers.empty()) {
      timed("impute", [&] {
        const auto& net = *report.model;
        parallel_for(optimizers.size() * tasks.size(), cfg.threads, [&](std::size_t cell) {
          const std::size_t m = cell / tasks.size(), t = cell % tasks.size();
          const MissingDataObjective objective(net, tasks[t]);
          results[m][t] = run(objective, optimizers[m], cfg.optimizers, cell_seed(cfg.master_seed, optimizers[m], t));
        });
      });
    }

    std::optional<Forest> forest;
    if (cfg.uses("rf")) {
      timed("forest", [&] {
        ForestConfig fc = cfg.forest;
        fc.seed = forest_seed(cfg.master_seed);
        fc.threads = cfg.threads;
        forest = fit(train_rows, report.target_column, fc,
                     cfg.task_kind == TaskKind::classification ? TargetKind::binary : TargetKind::regression);
      });
    }

    timed("score", [&] {
      const auto& target_spec = ds.columns[report.target_column];
      for (const auto& method : cfg.methods) {
        MethodOutcome out;
        out.method = method;
        if (method == "rf") {
          for (const auto& t : tasks) out.imputed.push_back(predict(*forest, t.record()));
        } else {
          const auto m = static_cast<std::size_t>(std::find(optimizers.begin(), optimizers.end(), method) - optimizers.begin());
          for (const auto& r : results[m]) {
            out.imputed.push_back(r.best_point.front());
            out.evaluations += r.evaluations;
          }
        }
        out.scores = prediction_scores(report.truth, out.imputed);
        if (!target_spec.degenerate()) {
          std::vector<double> a, p;
          for (std::size_t i = 0; i < out.imputed.size(); ++i) {
            a.push_back(denormalize(report.truth[i], target_spec));
            p.push_back(denormalize(out.imputed[i], target_spec));
          }
          out.scores_original = prediction_scores(a, p);
        }
        for (std::size_t i = 0; i < out.imputed.size(); ++i)
          out.squared_errors.push_back((report.truth[i] - out.imputed[i]) * (report.truth[i] - out.imputed[i]));
        if (cfg.task_kind == TaskKind::classification) {
          std::vector<int> labels;
          for (double v : report.truth) labels.push_back(v == 1.0 ? 1 : 0);
          out.roc = roc_curve(out.imputed, labels);
        }
        report.methods.push_back(std::move(out));
      }
    });

    if (report.methods.size() >= 2) {
      timed("compare", [&] {
        std::vector<std::pair<std::string, std::vector<double>>> samples;
        for (const auto& m : report.methods) samples.emplace_back(m.method, m.squared_errors);
        report.comparison = comparison_matrix(samples, cfg.comparison_test);
      });
    }
  } catch (const std::exception& e) {
    report.failed_stage = stage;
    report.failure = e.what();
    const bool input = input_stage || dynamic_cast<const ConfigError*>(&e) != nullptr;
    throw ExperimentFailure(stage, e.what(), std::move(report), input);
  }
  return report;
}

// ------------------------------------------------------------------ emission

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson scores_json(const PredictionScores& s) {
  ojson j;
  j["mse"] = s.mse;
  j["rmse"] = s.rmse;
  j["mae"] = s.mae;
  j["r"] = s.pearson_r ? ojson(*s.pearson_r) : ojson(nullptr);
  return j;
}

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : "undefined"; }

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// metrics.csv rows for one method, in emission order.
inline std::vector<std::pair<std::string, std::string>> metric_cells(const MethodOutcome& m) {
  std::vector<std::pair<std::string, std::string>> cells{
      {"mse", format_double(m.scores.mse)},
      {"rmse", format_double(m.scores.rmse)},
      {"mae", format_double(m.scores.mae)},
      {"r", detail::optional_cell(m.scores.pearson_r)},
  };
  if (m.scores_original) {
    cells.emplace_back("mse_original", format_double(m.scores_original->mse));
    cells.emplace_back("rmse_original", format_double(m.scores_original->rmse));
    cells.emplace_back("mae_original", format_double(m.scores_original->mae));
    cells.emplace_back("r_original", detail::optional_cell(m.scores_original->pearson_r));
  }
  if (m.roc) cells.emplace_back("auc", format_double(m.roc->auc));
  return cells;
}

/// Files that must be byte-identical across reruns of the same config.
/// timings.json is written alongside but excluded (wall-clock values).
inline std::vector<std::string> deterministic_report_files(const ExperimentReport& report) {
  std::vector<std::string> files{"report.json", "metrics.csv", "normalization.csv"};
  if (report.model) files.push_back("model.txt");
  if (report.comparison) files.push_back("pvalues.csv");
  for (const auto& m : report.methods) {
    files.push_back("imputed_" + m.method + ".csv");
    if (m.roc) files.push_back("roc_" + m.method + ".csv");
  }
  return files;
}

inline std::string report_json(const ExperimentReport& report) {
  using detail::ojson;
  ojson j;
  j["toolkit"] = "aanimpute";
  j["version"] = kVersion;
  j["status"] = report.failed() ? "failed" : "complete";
  if (report.failed()) j["failure"] = {{"stage", report.failed_stage}, {"message", report.failure}};
  ojson config = ojson::object();
  for (const auto& [k, v] : report.settings) config[k] = v;
  j["config"] = config;

  ojson columns = ojson::array();
  for (const auto& c : report.columns)
    columns.push_back({{"name", c.name},
                       {"kind", std::string(to_string(c.kind))},
                       {"min", c.observed_min},
                       {"max", c.observed_max},
                       {"degenerate", c.degenerate()}});
  j["dataset"] = {{"rows", report.row_count},
                  {"columns", columns},
                  {"target_column", report.target_column},
                  {"target_name", report.target_column < report.columns.size() ? report.columns[report.target_column].name : ""},
                  {"split", {{"train", report.split.train}, {"validation", report.split.validation}, {"test", report.split.test}}},
                  {"tasks", report.task_rows.size()}};

  if (report.model) {
    ojson net;
    net["hidden_size"] = report.hidden_size;
    net["hidden_size_source"] = report.selection ? "search" : "config";
    net["activations"] = {{"hidden", "tanh"}, {"output", "logistic"}};
    net["trainer"] = "scaled conjugate gradient";
    net["train_loss"] = report.train_loss;
    net["iterations"] = report.train_iterations;
    net["stop_reason"] = report.train_stop_reason;
    if (report.selection) {
      ojson cands = ojson::array();
      for (const auto& c : report.selection->candidates) {
        ojson cj;
        cj["hidden"] = c.hidden;
        cj["validation_loss"] = c.validation_loss ? ojson(*c.validation_loss) : ojson(nullptr);
        cj["train_loss"] = c.train_loss;
        if (!c.error.empty()) cj["error"] = c.error;
        cands.push_back(cj);
      }
      net["selection"] = cands;
    }
    j["network"] = net;
  }

  ojson methods = ojson::object();
  for (const auto& m : report.methods) {
    ojson mj;
    mj["metrics"] = detail::scores_json(m.scores);
    mj["metrics_original"] = m.scores_original ? detail::scores_json(*m.scores_original) : ojson(nullptr);
    if (m.roc) mj["auc"] = m.roc->auc;
    if (m.method != "rf") mj["evaluations"] = m.evaluations;
    methods[m.method] = mj;
  }
  j["methods"] = methods;

  if (report.comparison) {
    ojson pairs = ojson::array();
    for (const auto& p : report.comparison->pairs)
      pairs.push_back({{"pair", p.label},
                       {"p_value", p.test.p_value},
                       {"p_2dp", format_2dp(p.test.p_value)},
                       {"t", p.test.t_statistic},
                       {"df", p.test.degrees_of_freedom}});
    std::string test;
    for (const auto& [k, v] : report.settings)
      if (k == "comparison.test") test = v;
    j["comparison"] = {{"test", test},
                       {"sample", "per-record squared error between imputed and true value, normalized units"},
                       {"pairs", pairs}};
  }

  j["notes"] = {
      {"units", "metrics are in normalized [0,1] units; *_original metrics are in file units"},
      {"mae", "mean absolute error, (1/N) sum |x - xhat|"},
      {"roc_scores", "imputed normalized class values (optimizers) and mean tree scores (rf) are the ROC scores"},
      {"hard_label_threshold", 0.5},
      {"rf_role", "rf predicts the missing column from the known columns directly"},
  };
  return j.dump(2) + "\n";
}

/// Writes the report directory. Re-emitting the same report yields the same bytes.
inline void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw std::runtime_error("cannot create report directory '" + dir.string() + "'");

  detail::write_file(dir / "report.json", report_json(report));

  std::ostringstream metrics;
  metrics << "method,metric,value\n";
  for (const auto& m : report.methods)
    for (const auto& [name, value] : metric_cells(m)) metrics << m.method << ',' << name << ',' << value << '\n';
  detail::write_file(dir / "metrics.csv", metrics.str());

  std::ostringstream norm;
  write_normalization_csv(norm, report.columns);
  detail::write_file(dir / "normalization.csv", norm.str());

  if (report.model) {
    std::ostringstream model;
    save_model(model, *report.model);
    detail::write_file(dir / "model.txt", model.str());
  }
  if (report.comparison) {
    std::ostringstream pv;
    write_comparison_csv(pv, *report.comparison);
    detail::write_file(dir / "pvalues.csv", pv.str());
  }
  const ColumnSpec* target = report.target_column < report.columns.size() ? &report.columns[report.target_column] : nullptr;
  for (const auto& m : report.methods) {
    std::ostringstream imp;
    imp << "row,true_value,imputed_value,true_original,imputed_original\n";
    for (std::size_t i = 0; i < m.imputed.size(); ++i) {
      imp << report.task_rows[i] << ',' << format_double(report.truth[i]) << ',' << format_double(m.imputed[i]) << ','
          << format_double(denormalize(report.truth[i], *target)) << ','
          << format_double(denormalize(m.imputed[i], *target)) << '\n';
    }
    detail::write_file(dir / ("imputed_" + m.method + ".csv"), imp.str());
    if (m.roc) {
      std::ostringstream roc;
      write_roc_csv(roc, *m.roc);
      detail::write_file(dir / ("roc_" + m.method + ".csv"), roc.str());
    }
  }

  detail::ojson timings = detail::ojson::object();
  for (const auto& [k, v] : report.timings) timings[k] = v;
  detail::write_file(dir / "timings.json", timings.dump(2) + "\n");

  const auto marker = dir / "FAILED";
  if (report.failed())
    detail::write_file(marker, report.failed_stage + ": " + report.failure + "\n");
  else
    std::filesystem::remove(marker, ec);
}

// ------------------------------------------------------------- verification

struct VerifyResult {
  bool passed = true;
  std::vector<std::string> lines;  // one per check, prefixed PASS/FAIL

  void check(bool ok, const std::string& what) {
    lines.push_back((ok ? "PASS " : "FAIL ") + what);
    passed = passed && ok;
  }
};

namespace detail {

inline std::vector<std::vector<std::string>> read_csv_cells(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto f : split_fields(line, ',')) row.emplace_back(trim(f));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

}  // namespace detail

/// Recomputes every metric, ROC curve and p-value from the imputed_*.csv files
/// and checks them against what the report directory claims. The dataset named
/// in report.json is reloaded to confirm the true values and row ids.
inline VerifyResult verify_report(const std::filesystem::path& dir) {
  VerifyResult res;
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    res.check(false, "report directory '" + dir.string() + "' exists");
    return res;
  }

  nlohmann::json j;
  try {
    std::ifstream in(dir / "report.json");
    if (!in) throw std::runtime_error("missing");
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    res.check(false, "report.json readable (" + std::string(e.what()) + ")");
    return res;
  }
  if (j.value("status", "") != "complete") res.check(false, "report status is complete");

  ExperimentConfig cfg;
  try {
    for (auto it = j.at("config").begin(); it != j.at("config").end(); ++it)
      apply_setting(cfg, it.key(), it.value().get<std::string>());
  } catch (const std::exception& e) {
    res.check(false, "report.json config echo parses (" + std::string(e.what()) + ")");
    return res;
  }
  const bool classification = cfg.task_kind == TaskKind::classification;

  // inventory
  std::vector<std::string> expected{"report.json", "metrics.csv", "normalization.csv"};
  if (cfg.uses("ga") || cfg.uses("sa") || cfg.uses("pso") || cfg.uses("ns")) expected.push_back("model.txt");
  if (cfg.methods.size() >= 2) expected.push_back("pvalues.csv");
  for (const auto& m : cfg.methods) {
    expected.push_back("imputed_" + m + ".csv");
    if (classification) expected.push_back("roc_" + m + ".csv");
  }
  std::vector<std::string> missing;
  for (const auto& f : expected)
    if (!fs::is_regular_file(dir / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string inventory;
    for (const auto& f : expected) inventory += "\n  " + f + (fs::is_regular_file(dir / f) ? "  present" : "  MISSING");
    res.check(false, "inventory complete:" + inventory);
    return res;
  }
  res.check(true, "inventory complete (" + std::to_string(expected.size()) + " files)");

  // dataset ground truth
  std::optional<Dataset> ds;
  std::size_t target = 0;
  try {
    ds = prepare_dataset(cfg);
    target = resolve_column(cfg.missing_column, ds->columns);
  } catch (const std::exception& e) {
    res.check(false, "dataset reloads (" + std::string(e.what()) + ")");
  }

  std::map<std::string, std::map<std::string, std::string>> claimed;
  for (const auto& row : detail::read_csv_cells(dir / "metrics.csv")) {
    if (row.size() != 3 || row[0] == "method") continue;
    claimed[row[0]][row[1]] = row[2];
  }

  std::vector<std::pair<std::string, std::vector<double>>> samples;
  std::vector<std::size_t> reference_rows;
  std::vector<double> reference_truth;
  for (const auto& method : cfg.methods) {
    const auto file = "imputed_" + method + ".csv";
    const auto rows = detail::read_csv_cells(dir / file);
    MethodOutcome out;
    out.method = method;
    std::vector<std::size_t> ids;
    std::vector<double> truth, truth_orig, imputed_orig;
    bool parsed = rows.size() >= 2;
    for (std::size_t i = 1; i < rows.size() && parsed; ++i) {
      if (rows[i].size() != 5) {
        parsed = false;
        break;
      }
      std::vector<double> v;
      for (const auto& c : rows[i]) {
        const auto d = detail::to_double(c);
        if (!d) parsed = false;
        v.push_back(d.value_or(0.0));
      }
      ids.push_back(static_cast<std::size_t>(v[0]));
      truth.push_back(v[1]);
      out.imputed.push_back(v[2]);
      truth_orig.push_back(v[3]);
      imputed_orig.push_back(v[4]);
    }
    res.check(parsed, file + " parses");
    if (!parsed) continue;

    const bool in_box = std::all_of(out.imputed.begin(), out.imputed.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    res.check(in_box, file + ": imputed values lie in [0, 1]");

    if (reference_rows.empty()) {
      reference_rows = ids;
      reference_truth = truth;
    } else {
      res.check(ids == reference_rows && truth == reference_truth, file + ": rows and true values match the other methods");
    }
    if (ds) {
      bool truth_ok = true, units_ok = true;
      const auto& spec = ds->columns[target];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const bool in_test = ids[i] < ds->row_count() && ds->split[ids[i]] == SplitLabel::test;
        truth_ok = truth_ok && in_test && ds->rows(static_cast<Eigen::Index>(ids[i]), static_cast<Eigen::Index>(target)) == truth[i];
        units_ok = units_ok && detail::close(denormalize(truth[i], spec), truth_orig[i], 1e-9 * std::max(1.0, std::abs(truth_orig[i]))) &&
                   detail::close(denormalize(out.imputed[i], spec), imputed_orig[i], 1e-9 * std::max(1.0, std::abs(imputed_orig[i])));
      }
      res.check(truth_ok && ids.size() == split_counts(ds->row_count()).test,
                file + ": true values match the dataset's test rows");
      res.check(units_ok, file + ": original-unit columns match denormalized values");
      if (!spec.degenerate()) out.scores_original = prediction_scores(truth_orig, imputed_orig);
    }

    out.scores = prediction_scores(truth, out.imputed);
    if (classification) {
      std::vector<int> labels;
      for (double v : truth) labels.push_back(v == 1.0 ? 1 : 0);
      try {
        out.roc = roc_curve(out.imputed, labels);
      } catch (const std::exception& e) {
        res.check(false, method + ": ROC recomputes (" + std::string(e.what()) + ")");
      }
    }
    for (std::size_t i = 0; i < truth.size(); ++i)
      out.squared_errors.push_back((truth[i] - out.imputed[i]) * (truth[i] - out.imputed[i]));
    samples.emplace_back(method, out.squared_errors);

    const auto recomputed = metric_cells(out);
    auto& file_cells = claimed[method];
    for (const auto& [name, value] : recomputed) {
      const auto it = file_cells.find(name);
      if (it == file_cells.end()) {
        res.check(false, "metrics.csv " + method + "/" + name + " present");
        continue;
      }
      const auto want = detail::to_double(value), got = detail::to_double(it->second);
      const bool ok = (want && got) ? detail::close(*want, *got) : value == it->second;
      res.check(ok, "metrics.csv " + method + "/" + name + (ok ? "" : ": recomputed " + value + ", file has " + it->second));
      file_cells.erase(it);
    }
    for (const auto& [name, value] : file_cells) res.check(false, "metrics.csv " + method + "/" + name + " has no recomputable source");
    claimed.erase(method);

    if (out.roc) {
      const auto rows_roc = detail::read_csv_cells(dir / ("roc_" + method + ".csv"));
      bool ok = rows_roc.size() == out.roc->points.size() + 1;
      for (std::size_t i = 0; ok && i < out.roc->points.size(); ++i) {
        const auto& r = rows_roc[i + 1];
        const auto f = r.size() == 2 ? detail::to_double(r[0]) : std::nullopt;
        const auto t = r.size() == 2 ? detail::to_double(r[1]) : std::nullopt;
        ok = f && t && detail::close(*f, out.roc->points[i].fpr) && detail::close(*t, out.roc->points[i].tpr);
      }
      res.check(ok, "roc_" + method + ".csv matches the recomputed curve");
    }
  }
  for (const auto& [method, _] : claimed) res.check(false, "metrics.csv rows for unconfigured method '" + method + "'");

  if (samples.size() >= 2 && samples.size() == cfg.methods.size()) {
    try {
      const auto cm = comparison_matrix(samples, cfg.comparison_test);
      const auto rows = detail::read_csv_cells(dir / "pvalues.csv");
      bool ok = rows.size() == cm.pairs.size() + 1;
      for (std::size_t i = 0; i < cm.pairs.size(); ++i) {
        const bool row_ok = ok && rows[i + 1].size() == 3 && rows[i + 1][0] == cm.pairs[i].label &&
                            detail::to_double(rows[i + 1][1]) &&
                            detail::close(*detail::to_double(rows[i + 1][1]), cm.pairs[i].test.p_value) &&
                            rows[i + 1][2] == format_2dp(cm.pairs[i].test.p_value);
        if (!row_ok) {
          res.check(false, "pvalues.csv " + cm.pairs[i].label + " matches recomputed p = " + format_double(cm.pairs[i].test.p_value));
          ok = false;
        }
      }
      if (ok) res.check(true, "pvalues.csv matches recomputed pairwise tests (" + std::to_string(cm.pairs.size()) + " pairs)");
    } catch (const std::exception& e) {
      res.check(false, "pairwise tests recompute (" + std::string(e.what()) + ")");
    }
  }

  if (fs::is_regular_file(dir / "model.txt")) {
    try {
      const auto net = load_model((dir / "model.txt").string());
      res.check(ds && net.n_inputs() == ds->column_count(), "model.txt loads with matching input width");
    } catch (const std::exception& e) {
      res.check(false, "model.txt loads (" + std::string(e.what()) + ")");
    }
  }
  return res;
}

}  // namespace aanimpute
