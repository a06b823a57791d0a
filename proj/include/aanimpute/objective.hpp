#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aanimpute/data.hpp"
#include "aanimpute/errors.hpp"

namespace aanimpute {

/// Anything that maps an n-vector to its n-vector reconstruction.
template <class M>
concept Reconstructor = requires(const M& m, std::span<const double> x) {
  { m.n_inputs() } -> std::convertible_to<std::size_t>;
  { m.forward(x) } -> std::convertible_to<std::vector<double>>;
};

/// A scalar function over [0,1]^m, the shape every minimizer consumes.
template <class F>
concept BoxObjective = requires(const F& f, std::span<const double> x) {
  { f.dimension() } -> std::convertible_to<std::size_t>;
  { f.evaluate(x) } -> std::convertible_to<double>;
};

/// Squared reconstruction error of a record whose unknown slots are filled
/// with the candidate. The sum runs over every output component, known and
/// unknown alike, since moving the unknown inputs shifts all reconstructions.
///
/// Holds references: the model and task must outlive the objective.
template <Reconstructor Model>
class MissingDataObjective {
 public:
  MissingDataObjective(const Model& net, const ImputationTask& task) : net_(&net), task_(&task) {
    if (net.n_inputs() != task.size())
      throw DimensionError("task width " + std::to_string(task.size()) + " does not match model input " +
                           std::to_string(net.n_inputs()));
  }

  std::size_t dimension() const { return task_->unknown_indices().size(); }
  const ImputationTask& task() const { return *task_; }
  const Model& model() const { return *net_; }

  /// The record with `candidate` scattered into the unknown slots.
  std::vector<double> complete(std::span<const double> candidate) const {
    const auto unknown = task_->unknown_indices();
    if (candidate.size() != unknown.size())
      throw DimensionError("candidate length " + std::to_string(candidate.size()) + ", expected " +
                           std::to_string(unknown.size()));
    std::vector<double> x(task_->record().begin(), task_->record().end());
    for (std::size_t j = 0; j < unknown.size(); ++j) {
      const double v = candidate[j];
      if (!(v >= 0.0 && v <= 1.0))
        throw DomainError("candidate component " + std::to_string(j) + " = " + std::to_string(v) +
                          " outside [0, 1]");
      x[unknown[j]] = v;
    }
    return x;
  }

  double evaluate(std::span<const double> candidate) const {
    const auto x = complete(candidate);
    const auto y = net_->forward(x);
    double e = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) e += (x[k] - y[k]) * (x[k] - y[k]);
    return e;
  }

  /// Fitness for maximizing searches; exactly -evaluate.
  double evaluate_negated(std::span<const double> candidate) const { return -evaluate(candidate); }

 private:
  const Model* net_;
  const ImputationTask* task_;
};

/// Negated objective for any BoxObjective (the GA maximizes this).
template <BoxObjective F>
double evaluate_negated(const F& f, std::span<const double> x) {
  return -f.evaluate(x);
}

/// The task's record with `best_point` in the unknown slots; known slots are copied.
template <Reconstructor Model>
std::vector<double> impute(const MissingDataObjective<Model>& obj, std::span<const double> best_point) {
  return obj.complete(best_point);
}

}  // namespace aanimpute
