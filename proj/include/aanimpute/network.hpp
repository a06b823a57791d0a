#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aanimpute/data.hpp"
#include "aanimpute/errors.hpp"
#include "aanimpute/parallel.hpp"
#include "aanimpute/rng.hpp"
#include "aanimpute/text.hpp"

namespace aanimpute {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Single-hidden-layer auto-associative network: tanh hidden units and
/// logistic outputs, so reconstructions land in (0, 1) like the scaled data.
///
/// Parameters flatten in this order (the persisted file uses it too):
///   first-layer weights, row-major (hidden unit j, input i)
///   first-layer biases (j)
///   second-layer weights, row-major (output k, hidden unit j)
///   second-layer biases (k)
class Autoencoder {
 public:
  Autoencoder(std::size_t n_inputs, std::size_t n_hidden)
      : w1_(Eigen::MatrixXd::Zero(as_index(n_hidden), as_index(n_inputs))),
        b1_(Eigen::VectorXd::Zero(as_index(n_hidden))),
        w2_(Eigen::MatrixXd::Zero(as_index(n_inputs), as_index(n_hidden))),
        b2_(Eigen::VectorXd::Zero(as_index(n_inputs))) {
    if (n_inputs == 0 || n_hidden == 0) throw DomainError("autoencoder needs non-empty layers");
  }

  /// Uniform weights in +-1/sqrt(fan_in), drawn in flattening order.
  static Autoencoder initialized(std::size_t n_inputs, std::size_t n_hidden, std::uint64_t seed) {
    Autoencoder net(n_inputs, n_hidden);
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(n_inputs));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(n_hidden));
    std::vector<double> p(net.parameter_count());
    const std::size_t first = n_hidden * n_inputs + n_hidden;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i < first ? rng.uniform(-r1, r1) : rng.uniform(-r2, r2);
    net.set_parameters(p);
    return net;
  }

  std::size_t n_inputs() const { return static_cast<std::size_t>(w1_.cols()); }
  std::size_t n_outputs() const { return n_inputs(); }
  std::size_t n_hidden() const { return static_cast<std::size_t>(w1_.rows()); }
  std::size_t parameter_count() const { return 2 * n_hidden() * n_inputs() + n_hidden() + n_inputs(); }

  Eigen::MatrixXd& first_layer_weights() { return w1_; }
  Eigen::VectorXd& first_layer_biases() { return b1_; }
  Eigen::MatrixXd& second_layer_weights() { return w2_; }
  Eigen::VectorXd& second_layer_biases() { return b2_; }
  const Eigen::MatrixXd& first_layer_weights() const { return w1_; }
  const Eigen::VectorXd& first_layer_biases() const { return b1_; }
  const Eigen::MatrixXd& second_layer_weights() const { return w2_; }
  const Eigen::VectorXd& second_layer_biases() const { return b2_; }

  std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (Eigen::Index j = 0; j < w1_.rows(); ++j)
      for (Eigen::Index i = 0; i < w1_.cols(); ++i) p.push_back(w1_(j, i));
    for (Eigen::Index j = 0; j < b1_.size(); ++j) p.push_back(b1_(j));
    for (Eigen::Index k = 0; k < w2_.rows(); ++k)
      for (Eigen::Index j = 0; j < w2_.cols(); ++j) p.push_back(w2_(k, j));
    for (Eigen::Index k = 0; k < b2_.size(); ++k) p.push_back(b2_(k));
    return p;
  }

  void set_parameters(std::span<const double> p) {
    if (p.size() != parameter_count())
      throw DimensionError("expected " + std::to_string(parameter_count()) + " parameters, got " +
                           std::to_string(p.size()));
    std::size_t at = 0;
    for (Eigen::Index j = 0; j < w1_.rows(); ++j)
      for (Eigen::Index i = 0; i < w1_.cols(); ++i) w1_(j, i) = p[at++];
    for (Eigen::Index j = 0; j < b1_.size(); ++j) b1_(j) = p[at++];
    for (Eigen::Index k = 0; k < w2_.rows(); ++k)
      for (Eigen::Index j = 0; j < w2_.cols(); ++j) w2_(k, j) = p[at++];
    for (Eigen::Index k = 0; k < b2_.size(); ++k) b2_(k) = p[at++];
  }

  bool all_finite() const {
    return w1_.allFinite() && b1_.allFinite() && w2_.allFinite() && b2_.allFinite();
  }

  std::vector<double> forward(std::span<const double> x) const {
    if (x.size() != n_inputs())
      throw DimensionError("forward: expected input of length " + std::to_string(n_inputs()) +
                           ", got " + std::to_string(x.size()));
    const Eigen::Map<const Eigen::VectorXd> in(x.data(), as_index(x.size()));
    const Eigen::VectorXd hidden = (w1_ * in + b1_).array().tanh().matrix();
    const Eigen::VectorXd pre = w2_ * hidden + b2_;
    std::vector<double> y(n_outputs());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = logistic(pre(as_index(k)));
    return y;
  }

 private:
  static Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;
  Eigen::VectorXd b2_;
};

inline std::vector<double> forward(const Autoencoder& net, std::span<const double> x) {
  return net.forward(x);
}

namespace detail {

inline void check_rows(const Autoencoder& net, const RowMatrix& rows) {
  if (rows.rows() == 0) throw DomainError("reconstruction loss over an empty row set");
  if (static_cast<std::size_t>(rows.cols()) != net.n_inputs())
    throw DimensionError("rows have " + std::to_string(rows.cols()) + " columns, network expects " +
                         std::to_string(net.n_inputs()));
}

/// Batched loss; fills the flattened gradient when `grad` is non-null.
inline double loss_and_gradient(const Autoencoder& net, const RowMatrix& x, std::vector<double>* grad) {
  check_rows(net, x);
  const double inv_rows = 1.0 / static_cast<double>(x.rows());
  const Eigen::MatrixXd hidden =
      ((x * net.first_layer_weights().transpose()).rowwise() + net.first_layer_biases().transpose())
          .array()
          .tanh()
          .matrix();
  Eigen::MatrixXd out =
      (hidden * net.second_layer_weights().transpose()).rowwise() + net.second_layer_biases().transpose();
  out = out.unaryExpr([](double z) { return logistic(z); });
  const Eigen::MatrixXd err = out - x;
  const double loss = err.squaredNorm() * inv_rows;
  if (grad == nullptr) return loss;

  // d loss / d output pre-activation
  const Eigen::MatrixXd d_out =
      (2.0 * inv_rows * err.array() * out.array() * (1.0 - out.array())).matrix();
  const Eigen::MatrixXd g_w2 = d_out.transpose() * hidden;
  const Eigen::VectorXd g_b2 = d_out.colwise().sum().transpose();
  const Eigen::MatrixXd d_hidden =
      ((d_out * net.second_layer_weights()).array() * (1.0 - hidden.array().square())).matrix();
  const Eigen::MatrixXd g_w1 = d_hidden.transpose() * x;
  const Eigen::VectorXd g_b1 = d_hidden.colwise().sum().transpose();

  grad->clear();
  grad->reserve(net.parameter_count());
  for (Eigen::Index j = 0; j < g_w1.rows(); ++j)
    for (Eigen::Index i = 0; i < g_w1.cols(); ++i) grad->push_back(g_w1(j, i));
  for (Eigen::Index j = 0; j < g_b1.size(); ++j) grad->push_back(g_b1(j));
  for (Eigen::Index k = 0; k < g_w2.rows(); ++k)
    for (Eigen::Index j = 0; j < g_w2.cols(); ++j) grad->push_back(g_w2(k, j));
  for (Eigen::Index k = 0; k < g_b2.size(); ++k) grad->push_back(g_b2(k));
  return loss;
}

}  // namespace detail

/// Mean over rows of the summed squared reconstruction error.
inline double reconstruction_loss(const Autoencoder& net, const RowMatrix& rows) {
  return detail::loss_and_gradient(net, rows, nullptr);
}

/// Back-propagated gradient of reconstruction_loss, in flattening order.
inline std::vector<double> gradient(const Autoencoder& net, const RowMatrix& rows) {
  std::vector<double> g;
  detail::loss_and_gradient(net, rows, &g);
  return g;
}

struct TrainConfig {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double objective_tolerance = 1e-12;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
    if (!(gradient_tolerance > 0) || !(objective_tolerance > 0))
      throw DomainError("training tolerances must be positive");
  }
};

struct TrainResult {
  Autoencoder net;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t iterations = 0;
  /// Loss after every accepted step, starting with the initial loss.
  std::vector<double> accepted_losses;
  std::string stop_reason;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// Scaled conjugate gradient (Moller) on the reconstruction loss.
///
/// Steps are accepted only when the comparison parameter is non-negative,
/// i.e. the loss did not rise, so accepted losses are monotone.
inline TrainResult train_from(Autoencoder net, const RowMatrix& rows, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_rows(net, rows);
  constexpr double sigma0 = 1e-4;
  constexpr double lambda_min = 1e-15;
  constexpr double lambda_max = 1e100;

  const std::size_t np = net.parameter_count();
  std::vector<double> w = net.parameters();
  Autoencoder probe = net;
  auto eval = [&](const std::vector<double>& params, std::vector<double>* g) {
    probe.set_parameters(params);
    const double f = detail::loss_and_gradient(probe, rows, g);
    if (!std::isfinite(f)) throw TrainingError("non-finite reconstruction loss during training");
    return f;
  };

  std::vector<double> g_new;
  double f_old = eval(w, &g_new);
  TrainResult result{net, f_old, f_old, 0, {f_old}, "max_iterations"};
  std::vector<double> g_old = g_new;
  std::vector<double> dir(np);
  for (std::size_t i = 0; i < np; ++i) dir[i] = -g_new[i];

  if (detail::inf_norm(g_new) < cfg.gradient_tolerance) {
    result.stop_reason = "gradient_tolerance";
    return result;
  }

  double lambda = 1e-6;
  bool success = true;
  std::size_t n_success = 0;
  double mu = 0.0, kappa = 0.0, theta = 0.0;
  std::vector<double> w_trial(np), g_plus;

  std::size_t iter = 0;
  while (iter < cfg.max_iterations) {
    ++iter;
    if (success) {
      mu = detail::dot(dir, g_new);
      if (mu >= 0.0) {
        for (std::size_t i = 0; i < np; ++i) dir[i] = -g_new[i];
        mu = detail::dot(dir, g_new);
      }
      kappa = detail::dot(dir, dir);
      if (kappa < std::numeric_limits<double>::epsilon()) {
        result.stop_reason = "zero_direction";
        break;
      }
      const double sigma = sigma0 / std::sqrt(kappa);
      for (std::size_t i = 0; i < np; ++i) w_trial[i] = w[i] + sigma * dir[i];
      eval(w_trial, &g_plus);
      theta = 0.0;
      for (std::size_t i = 0; i < np; ++i) theta += dir[i] * (g_plus[i] - g_new[i]);
      theta /= sigma;
    }

    // scale the curvature estimate until it is positive definite
    double delta = theta + lambda * kappa;
    if (delta <= 0.0) {
      delta = lambda * kappa;
      lambda -= theta / kappa;
    }
    const double alpha = -mu / delta;
    for (std::size_t i = 0; i < np; ++i) w_trial[i] = w[i] + alpha * dir[i];
    const double f_new = eval(w_trial, nullptr);
    const double comparison = 2.0 * (f_new - f_old) / (alpha * mu);

    if (comparison >= 0.0) {
      success = true;
      ++n_success;
      w = w_trial;
      const double decrease = f_old - f_new;
      f_old = f_new;
      result.accepted_losses.push_back(f_new);
      g_old = g_new;
      eval(w, &g_new);
      if (detail::inf_norm(g_new) < cfg.gradient_tolerance) {
        result.stop_reason = "gradient_tolerance";
        break;
      }
      if (decrease < cfg.objective_tolerance) {
        result.stop_reason = "objective_tolerance";
        break;
      }
    } else {
      success = false;
    }

    if (comparison < 0.25) lambda = std::min(4.0 * lambda, lambda_max);
    if (comparison > 0.75) lambda = std::max(0.5 * lambda, lambda_min);

    if (n_success == np) {
      for (std::size_t i = 0; i < np; ++i) dir[i] = -g_new[i];
      n_success = 0;
    } else if (success) {
      double gamma = 0.0;
      for (std::size_t i = 0; i < np; ++i) gamma += (g_old[i] - g_new[i]) * g_new[i];
      gamma /= mu;
      for (std::size_t i = 0; i < np; ++i) dir[i] = gamma * dir[i] - g_new[i];
    }
  }

  net.set_parameters(w);
  result.net = std::move(net);
  result.final_loss = f_old;
  result.iterations = iter;
  return result;
}

/// Initializes from cfg.rng_seed and trains; the hidden layer must be a
/// bottleneck (2 <= n_hidden <= n - 1).
inline TrainResult train(const RowMatrix& rows, std::size_t n_hidden, const TrainConfig& cfg) {
  if (rows.rows() == 0) throw DomainError("cannot train on an empty row set");
  const auto n = static_cast<std::size_t>(rows.cols());
  if (n_hidden < 2 || n_hidden + 1 > n)
    throw DomainError("hidden size " + std::to_string(n_hidden) + " outside [2, " +
                      std::to_string(n > 0 ? n - 1 : 0) + "]");
  return train_from(Autoencoder::initialized(n, n_hidden, cfg.rng_seed), rows, cfg);
}

struct HiddenSizeCandidate {
  std::size_t hidden = 0;
  std::optional<double> validation_loss;  // empty when training aborted
  double train_loss = 0.0;
  std::string error;
};

struct HiddenSizeSelection {
  std::size_t hidden = 0;
  std::vector<HiddenSizeCandidate> candidates;
};

/// Seed used for candidate h during the hidden-size search.
inline std::uint64_t hidden_search_seed(std::uint64_t base, std::size_t hidden) {
  return derive_seed(base, "hidden-size", hidden);
}

/// Candidate with the lowest validation loss; ties go to the smaller h.
/// Candidates without a validation loss (failed training) are skipped.
inline std::size_t best_hidden_size(const std::vector<HiddenSizeCandidate>& candidates) {
  const HiddenSizeCandidate* best = nullptr;
  for (const auto& cand : candidates) {
    if (!cand.validation_loss) continue;
    if (!best || *cand.validation_loss < *best->validation_loss ||
        (*cand.validation_loss == *best->validation_loss && cand.hidden < best->hidden))
      best = &cand;
  }
  if (!best) throw TrainingError("hidden-size search: every candidate failed to train");
  return best->hidden;
}

/// Trains one network per h in [2, n-1] and returns the size with the lowest
/// validation loss (ties go to the smaller h). Candidates that throw
/// TrainingError are skipped and reported.
inline HiddenSizeSelection select_hidden_size(const RowMatrix& train_rows, const RowMatrix& val_rows,
                                              const TrainConfig& cfg,
                                              std::size_t threads = default_thread_count()) {
  const auto n = static_cast<std::size_t>(train_rows.cols());
  if (n < 3) throw DomainError("hidden-size search needs at least 3 columns");
  if (static_cast<std::size_t>(val_rows.cols()) != n) throw DimensionError("validation width mismatch");

  HiddenSizeSelection sel;
  sel.candidates.resize(n - 2);
  parallel_for(n - 2, threads, [&](std::size_t i) {
    auto& cand = sel.candidates[i];
    cand.hidden = i + 2;
    TrainConfig local = cfg;
    local.rng_seed = hidden_search_seed(cfg.rng_seed, cand.hidden);
    try {
      const auto trained = train(train_rows, cand.hidden, local);
      cand.train_loss = trained.final_loss;
      cand.validation_loss = reconstruction_loss(trained.net, val_rows);
    } catch (const TrainingError& e) {
      cand.error = e.what();
    }
  });

  sel.hidden = best_hidden_size(sel.candidates);
  return sel;
}

/// Text model file: a comment line, "n_inputs n_hidden", then one parameter
/// per line in flattening order with 17 significant digits.
inline void save_model(std::ostream& out, const Autoencoder& net) {
  out << "# autoencoder tanh/logistic: W1 (row-major), b1, W2 (row-major), b2\n";
  out << net.n_inputs() << ' ' << net.n_hidden() << '\n';
  for (double p : net.parameters()) out << format_double(p) << '\n';
}

inline Autoencoder load_model(std::istream& in) {
  std::string line;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls{std::string(t)};
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.size() < 2) throw ParseError("model file: missing header");
  std::size_t n_inputs = 0, n_hidden = 0;
  try {
    n_inputs = std::stoul(tokens[0]);
    n_hidden = std::stoul(tokens[1]);
  } catch (const std::exception&) {
    throw ParseError("model file: malformed header");
  }
  Autoencoder net(n_inputs, n_hidden);
  if (tokens.size() - 2 != net.parameter_count())
    throw ParseError("model file: expected " + std::to_string(net.parameter_count()) +
                     " parameters, found " + std::to_string(tokens.size() - 2));
  std::vector<double> p(net.parameter_count());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = detail::parse_cell(tokens[i + 2], i + 3, 1);
  net.set_parameters(p);
  return net;
}

inline void save_model(const std::string& path, const Autoencoder& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
  save_model(out, net);
}

inline Autoencoder load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace aanimpute
