#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aanimpute/errors.hpp"
#include "aanimpute/text.hpp"

namespace aanimpute {

struct PredictionScores {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> pearson_r;  // empty when either vector is constant
};

/// MSE, RMSE, mean absolute error and sample Pearson correlation.
inline PredictionScores prediction_scores(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw DimensionError("prediction_scores: " + std::to_string(actual.size()) + " actual vs " +
                         std::to_string(predicted.size()) + " predicted values");
  if (actual.empty()) throw DomainError("prediction_scores: no values");
  const auto n = static_cast<double>(actual.size());
  double sq = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    sq += d * d;
    ab += std::abs(d);
  }
  PredictionScores s;
  s.mse = sq / n;
  s.rmse = std::sqrt(s.mse);
  s.mae = ab / n;

  const double ma = std::accumulate(actual.begin(), actual.end(), 0.0) / n;
  const double mp = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double da = actual[i] - ma, dp = predicted[i] - mp;
    sxy += da * dp;
    sxx += da * da;
    syy += dp * dp;
  }
  if (sxx > 0.0 && syy > 0.0) s.pearson_r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return s;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;   // (0,0) first, (1,1) last
  std::vector<double> thresholds;  // score cut for each point; +inf for (0,0)
  double auc = 0.0;
};

/// ROC over every distinct score (descending); a record is called positive
/// when its score is >= the threshold. AUC is the trapezoidal area, which
/// equals the probability that a positive outscores a negative, ties counted
/// as one half.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_curve: scores and labels differ in length");
  std::size_t positives = 0, negatives = 0;
  for (int l : labels) {
    if (l == 1)
      ++positives;
    else if (l == 0)
      ++negatives;
    else
      throw DomainError("roc_curve: labels must be 0 or 1");
  }
  if (positives == 0) throw DomainError("roc_curve: no positive (label 1) records");
  if (negatives == 0) throw DomainError("roc_curve: no negative (label 0) records");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0;
  const auto P = static_cast<double>(positives), N = static_cast<double>(negatives);
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp)++;
    // integer counts keep the area exact up to the final division
    area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    roc.points.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P});
    roc.thresholds.push_back(s);
  }
  roc.auc = area / (2.0 * P * N);
  return roc;
}

inline void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "fpr,tpr\n";
  for (const auto& p : roc.points) out << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
}

// ------------------------------------------------------------ t distribution

namespace detail {

/// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw DomainError("degrees of freedom must be positive");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  return std::clamp(regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
};

enum class TTestKind { welch, pooled };

namespace detail {

struct SampleMoments {
  double n, mean, var;
};

inline SampleMoments moments(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {n, mean, ss / (n - 1.0)};
}

}  // namespace detail

/// Two-sample t-test, two-tailed. Welch's unequal-variance form by default.
///
/// Two constant samples with the same mean give t = 0, p = 1; two constant
/// samples with different means have no defined statistic and throw.
inline TTestResult t_test(std::span<const double> a, std::span<const double> b, TTestKind kind = TTestKind::welch) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("t-test needs at least two values per sample");
  const auto ma = detail::moments(a), mb = detail::moments(b);
  const double diff = ma.mean - mb.mean;
  TTestResult r;
  if (kind == TTestKind::welch) {
    const double va = ma.var / ma.n, vb = mb.var / mb.n;
    const double se2 = va + vb;
    if (se2 == 0.0) {
      if (diff != 0.0) throw DomainError("t-test: both samples constant with different means");
      return {0.0, ma.n + mb.n - 2.0, 1.0};
    }
    r.t_statistic = diff / std::sqrt(se2);
    r.degrees_of_freedom = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  } else {
    r.degrees_of_freedom = ma.n + mb.n - 2.0;
    const double pooled = ((ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var) / r.degrees_of_freedom;
    const double se2 = pooled * (1.0 / ma.n + 1.0 / mb.n);
    if (se2 == 0.0) {
      if (diff != 0.0) throw DomainError("t-test: both samples constant with different means");
      return {0.0, r.degrees_of_freedom, 1.0};
    }
    r.t_statistic = diff / std::sqrt(se2);
  }
  r.p_value = student_t_two_tailed(r.t_statistic, r.degrees_of_freedom);
  return r;
}

inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  return t_test(a, b, TTestKind::welch);
}

struct PairComparison {
  std::size_t first = 0;
  std::size_t second = 0;
  std::string label;  // e.g. "GA-SA"
  TTestResult test;
};

struct ComparisonMatrix {
  std::vector<std::string> methods;
  std::vector<std::vector<double>> p_values;  // symmetric, unit diagonal
  std::vector<PairComparison> pairs;          // i < j, row-major order
};

inline std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

/// Pairwise t-tests over every unordered method pair, in the given method order.
inline ComparisonMatrix comparison_matrix(const std::vector<std::pair<std::string, std::vector<double>>>& per_method,
                                          TTestKind kind = TTestKind::welch) {
  if (per_method.size() < 2) throw DomainError("comparison needs at least two methods");
  ComparisonMatrix cm;
  const std::size_t k = per_method.size();
  cm.p_values.assign(k, std::vector<double>(k, 1.0));
  for (const auto& [name, _] : per_method) cm.methods.push_back(name);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto res = t_test(per_method[i].second, per_method[j].second, kind);
      cm.p_values[i][j] = cm.p_values[j][i] = res.p_value;
      cm.pairs.push_back({i, j, upper(cm.methods[i]) + "-" + upper(cm.methods[j]), res});
    }
  }
  return cm;
}

/// "PAIR,P" rows: label, full-precision p, two-decimal display value.
inline void write_comparison_csv(std::ostream& out, const ComparisonMatrix& cm) {
  out << "pair,p_value,p_2dp\n";
  for (const auto& p : cm.pairs)
    out << p.label << ',' << format_double(p.test.p_value) << ',' << format_2dp(p.test.p_value) << '\n';
}

}  // namespace aanimpute
