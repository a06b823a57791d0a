// aanimpute command-line front end: run, verify, inspect-model.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aanimpute.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kRuntimeError = 2;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string output;
  bool quiet = false;
  std::optional<std::size_t> threads;
};

int cmd_run(const std::string& config_path, const GlobalFlags& flags) {
  using namespace aanimpute;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (flags.seed) cfg.master_seed = *flags.seed;
    if (!flags.output.empty()) cfg.output_dir = flags.output;
    if (flags.threads) cfg.threads = *flags.threads;
    if (cfg.output_dir.empty()) cfg.output_dir = "report";
    validate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }

  const ProgressSink progress = [&](const std::string& msg) {
    if (!flags.quiet) std::cerr << msg << '\n';
  };
  try {
    const auto report = run_experiment(cfg, progress);
    emit_report(report, cfg.output_dir);
    if (!flags.quiet) {
      for (const auto& m : report.methods) {
        std::cout << m.method << ": mse=" << format_double(m.scores.mse) << " mae=" << format_double(m.scores.mae);
        if (m.roc) std::cout << " auc=" << format_double(m.roc->auc);
        std::cout << '\n';
      }
      std::cout << "report written to " << cfg.output_dir << '\n';
    }
    return kOk;
  } catch (const ExperimentFailure& f) {
    std::cerr << "error: " << f.what() << '\n';
    if (f.input_error()) return kInputError;
    try {
      emit_report(f.partial(), cfg.output_dir);
      std::cerr << "partial results written to " << cfg.output_dir << '\n';
    } catch (const std::exception& e) {
      std::cerr << "error: could not persist partial results: " << e.what() << '\n';
    }
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_verify(const std::string& dir, const GlobalFlags& flags) {
  const auto res = aanimpute::verify_report(dir);
  for (const auto& line : res.lines)
    if (!flags.quiet || line.rfind("FAIL", 0) == 0) std::cout << line << '\n';
  std::cout << (res.passed ? "verify: PASS" : "verify: FAIL") << '\n';
  return res.passed ? kOk : kInputError;
}

int cmd_inspect(const std::string& file, const GlobalFlags& flags) {
  using namespace aanimpute;
  try {
    const auto net = load_model(file);
    const auto params = net.parameters();
    double max_abs = 0.0, sq = 0.0;
    for (double p : params) {
      max_abs = std::max(max_abs, std::abs(p));
      sq += p * p;
    }
    std::cout << "inputs      " << net.n_inputs() << '\n'
              << "hidden      " << net.n_hidden() << '\n'
              << "outputs     " << net.n_outputs() << '\n'
              << "parameters  " << net.parameter_count() << '\n'
              << "finite      " << (net.all_finite() ? "yes" : "no") << '\n';
    if (!flags.quiet) {
      std::cout << "max |w|     " << format_double(max_abs) << '\n'
                << "l2 norm     " << format_double(std::sqrt(sq)) << '\n'
                << "activations tanh hidden, logistic output\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missing-value imputation with an autoassociative network and stochastic optimizers"};
  app.set_version_flag("--version", std::string(aanimpute::kVersion));
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Override master_seed from the config")->group("Global");
  app.add_option("--output", flags.output, "Report directory (overrides output_dir)")->group("Global");
  app.add_flag("--quiet", flags.quiet, "Only print errors and essential results")->group("Global");
  app.add_option("--threads", flags.threads, "Worker threads (results do not depend on it)")->group("Global");

  std::string config_path, report_dir, model_file;
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->fallthrough();
  auto* verify = app.add_subcommand("verify", "Recompute and check every number in a report directory");
  verify->add_option("dir", report_dir, "Report directory")->required();
  verify->fallthrough();
  auto* inspect = app.add_subcommand("inspect-model", "Summarize an exported model file");
  inspect->add_option("file", model_file, "Model file")->required();
  inspect->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*run) return cmd_run(config_path, flags);
  if (*verify) return cmd_verify(report_dir, flags);
  return cmd_inspect(model_file, flags);
}
