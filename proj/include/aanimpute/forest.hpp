#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aanimpute/data.hpp"
#include "aanimpute/errors.hpp"
#include "aanimpute/parallel.hpp"
#include "aanimpute/rng.hpp"

namespace aanimpute {

struct CartNode {
  static constexpr std::uint32_t kNone = UINT32_MAX;

  std::size_t feature = 0;
  double threshold = 0.0;
  std::uint32_t left = kNone;   // x[feature] <= threshold
  std::uint32_t right = kNone;  // x[feature] > threshold
  double prediction = 0.0;      // leaves only: mean of the node's targets
  std::size_t samples = 0;

  bool is_leaf() const { return left == kNone; }
  friend bool operator==(const CartNode&, const CartNode&) = default;
};

/// Regression tree in an arena; node 0 is the root.
class CartTree {
 public:
  std::vector<CartNode> nodes;

  /// `row` is a full-width record; the target slot is never consulted.
  double predict(std::span<const double> row) const {
    std::uint32_t at = 0;
    while (!nodes[at].is_leaf()) {
      const auto& n = nodes[at];
      at = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[at].prediction;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](auto& n) { return n.is_leaf(); }));
  }

  friend bool operator==(const CartTree&, const CartTree&) = default;
};

struct TreeSettings {
  std::size_t mtry = 1;
  std::size_t min_leaf = 1;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const RowMatrix& rows, std::size_t target, std::span<const std::size_t> predictors,
              const TreeSettings& settings, Rng& rng)
      : rows_(rows), target_(target), predictors_(predictors.begin(), predictors.end()), settings_(settings), rng_(rng) {}

  CartTree build(std::vector<std::size_t> sample) {
    grow(std::move(sample));
    return std::move(tree_);
  }

 private:
  double x(std::size_t r, std::size_t c) const {
    return rows_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  double y(std::size_t r) const { return x(r, target_); }

  std::uint32_t grow(std::vector<std::size_t> sample) {
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = sample.size();
    double sum = 0.0;
    bool constant = true;
    for (auto r : sample) {
      sum += y(r);
      constant = constant && y(r) == y(sample.front());
    }
    tree_.nodes[id].samples = n;
    tree_.nodes[id].prediction = constant ? y(sample.front()) : sum / static_cast<double>(n);
    if (constant || n < 2 * settings_.min_leaf) return id;

    // mtry predictors without replacement (partial Fisher-Yates), scanned in
    // ascending column order so ties resolve to the lower index
    std::vector<std::size_t> pool = predictors_;
    for (std::size_t i = 0; i < settings_.mtry; ++i)
      std::swap(pool[i], pool[i + rng_.below(pool.size() - i)]);
    std::vector<std::size_t> features(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(settings_.mtry));
    std::sort(features.begin(), features.end());

    // Gains within `tie` of each other are equal: the same partition reached
    // through two columns can differ in the last bits, and the earlier
    // (lower column, lower threshold) candidate must win.
    const double parent = sum * sum / static_cast<double>(n);
    const double tie = 1e-12 * std::max(1.0, std::abs(parent));
    double best_gain = parent;
    std::optional<std::size_t> best_feature;
    double best_threshold = 0.0;
    std::vector<std::size_t> order = sample;
    for (auto f : features) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a, f) < x(b, f); });
      double left_sum = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += y(order[k - 1]);
        if (k < settings_.min_leaf || n - k < settings_.min_leaf) continue;
        const double lo = x(order[k - 1], f), hi = x(order[k], f);
        if (!(lo < hi)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(k) +
                            right_sum * right_sum / static_cast<double>(n - k);
        if (gain > best_gain + tie) {
          best_gain = gain;
          best_feature = f;
          best_threshold = lo + 0.5 * (hi - lo);
        }
      }
    }
    if (!best_feature) return id;

    std::vector<std::size_t> left, right;
    for (auto r : sample) (x(r, *best_feature) <= best_threshold ? left : right).push_back(r);
    const auto l = grow(std::move(left));
    const auto r = grow(std::move(right));
    auto& node = tree_.nodes[id];
    node.feature = *best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const RowMatrix& rows_;
  std::size_t target_;
  std::vector<std::size_t> predictors_;
  TreeSettings settings_;
  Rng& rng_;
  CartTree tree_;
};

}  // namespace detail

/// Grows one CART regression tree on the rows listed in `sample` (duplicates
/// allowed). Splits maximize the reduction of the target's squared error over
/// midpoints between consecutive distinct feature values.
inline CartTree grow_tree(const RowMatrix& rows, std::size_t target, std::span<const std::size_t> predictors,
                          std::vector<std::size_t> sample, const TreeSettings& settings, Rng& rng) {
  if (sample.empty()) throw DomainError("cannot grow a tree on zero rows");
  if (settings.mtry < 1 || settings.mtry > predictors.size()) throw DomainError("mtry outside [1, d]");
  if (settings.min_leaf < 1) throw DomainError("min_leaf must be >= 1");
  return detail::TreeBuilder(rows, target, predictors, settings, rng).build(std::move(sample));
}

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> mtry;  // default floor(sqrt(d))
  std::size_t min_leaf = 5;
  std::uint64_t seed = 1;
  bool bootstrap = true;  // false only in tests: every tree sees the full training set
  std::size_t threads = 1;

  std::size_t mtry_for(std::size_t d) const {
    return mtry.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))))));
  }
};

enum class TargetKind { regression, binary };

struct Forest {
  std::vector<CartTree> trees;
  ForestConfig config;
  std::size_t target_column = 0;
  TargetKind kind = TargetKind::regression;
};

inline std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t tree) {
  return derive_seed(forest_seed, "tree", tree);
}

/// Bagged ensemble of CART trees predicting `target_column` from every other column.
inline Forest fit(const RowMatrix& train_rows, std::size_t target_column, const ForestConfig& cfg,
                  TargetKind kind = TargetKind::regression) {
  const auto n_cols = static_cast<std::size_t>(train_rows.cols());
  const auto n_rows = static_cast<std::size_t>(train_rows.rows());
  if (target_column >= n_cols) throw DomainError("target column out of range");
  if (n_cols < 2) throw DomainError("need at least one predictor column");
  if (cfg.n_trees < 1) throw DomainError("rf.n_trees must be >= 1");
  if (cfg.min_leaf < 1) throw DomainError("rf.min_leaf must be >= 1");
  if (n_rows < 2 * cfg.min_leaf)
    throw DomainError("random forest needs at least " + std::to_string(2 * cfg.min_leaf) + " training rows, got " +
                      std::to_string(n_rows));
  const std::size_t d = n_cols - 1;
  const std::size_t mtry = cfg.mtry_for(d);
  if (mtry < 1 || mtry > d) throw DomainError("rf.mtry must lie in [1, " + std::to_string(d) + "]");
  if (kind == TargetKind::binary) {
    for (Eigen::Index r = 0; r < train_rows.rows(); ++r) {
      const double v = train_rows(r, static_cast<Eigen::Index>(target_column));
      if (v != 0.0 && v != 1.0) throw DomainError("classification target must be coded 0/1");
    }
  }

  std::vector<std::size_t> predictors;
  for (std::size_t c = 0; c < n_cols; ++c)
    if (c != target_column) predictors.push_back(c);

  Forest forest;
  forest.config = cfg;
  forest.config.mtry = mtry;
  forest.target_column = target_column;
  forest.kind = kind;
  forest.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
    Rng rng(tree_seed(cfg.seed, t));
    std::vector<std::size_t> sample(n_rows);
    if (cfg.bootstrap)
      for (auto& s : sample) s = rng.below(n_rows);
    else
      std::iota(sample.begin(), sample.end(), 0);
    forest.trees[t] = grow_tree(train_rows, target_column, predictors, std::move(sample), {mtry, cfg.min_leaf}, rng);
  });
  return forest;
}

/// Mean of the per-tree leaf values. `row` is a full-width record.
/// A running mean keeps agreeing trees exact (c, c, ..., c averages to c).
inline double predict(const Forest& forest, std::span<const double> row) {
  double mean = 0.0;
  for (std::size_t t = 0; t < forest.trees.size(); ++t)
    mean += (forest.trees[t].predict(row) - mean) / static_cast<double>(t + 1);
  return mean;
}

struct Classification {
  int label = 0;
  double score = 0.0;
};

/// Thresholded mean score; a score equal to the threshold is class 1.
inline Classification classify_score(double score, double threshold = 0.5) {
  return {score >= threshold ? 1 : 0, score};
}

inline Classification classify(const Forest& forest, std::span<const double> row, double threshold = 0.5) {
  if (forest.kind != TargetKind::binary) throw DomainError("forest was not fitted on a binary target");
  return classify_score(predict(forest, row), threshold);
}

}  // namespace aanimpute
