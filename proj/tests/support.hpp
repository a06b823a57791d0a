#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aanimpute.hpp"

namespace testing_support {

using aanimpute::RowMatrix;

/// Objective over [0,1]^m backed by a plain function.
struct FnObjective {
  std::size_t m = 1;
  std::function<double(std::span<const double>)> f;

  std::size_t dimension() const { return m; }
  double evaluate(std::span<const double> x) const { return f(x); }
};

struct GridMin {
  double value = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::vector<double> at;
};

/// Exhaustive scan of a 1-D objective over `points` equally spaced samples of [0,1].
inline GridMin grid_1d(const FnObjective& obj, std::size_t points) {
  GridMin g;
  for (std::size_t i = 0; i < points; ++i) {
    const double x[] = {static_cast<double>(i) / static_cast<double>(points - 1)};
    const double v = obj.evaluate(x);
    if (v < g.value) {
      g.value = v;
      g.at = {x[0]};
    }
    g.max = std::max(g.max, v);
  }
  return g;
}

inline GridMin grid_2d(const FnObjective& obj, std::size_t points) {
  GridMin g;
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = 0; j < points; ++j) {
      const double x[] = {static_cast<double>(i) / static_cast<double>(points - 1),
                          static_cast<double>(j) / static_cast<double>(points - 1)};
      const double v = obj.evaluate(x);
      if (v < g.value) {
        g.value = v;
        g.at = {x[0], x[1]};
      }
      g.max = std::max(g.max, v);
    }
  }
  return g;
}

/// Rows on the curve t -> (t, t, 1 - t, t^2), t uniform on [0,1].
inline RowMatrix curve_rows(std::size_t n, std::uint64_t seed) {
  aanimpute::Rng rng(seed);
  RowMatrix rows(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double t = rng.uniform();
    rows.row(r) << t, t, 1.0 - t, t * t;
  }
  return rows;
}

inline RowMatrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  aanimpute::Rng rng(seed);
  RowMatrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c) rows(r, c) = rng.uniform();
  return rows;
}

/// Fresh directory under the system temp dir, emptied if it exists.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("aanimpute_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing_support
