// Trains a small autoencoder on points of a curve in 4-D, hides one
// coordinate of a held-out point and recovers it with each optimizer.

#include <cmath>
#include <iostream>

#include "aanimpute.hpp"

int main() {
  using namespace aanimpute;

  Rng rng(7);
  RowMatrix rows(300, 4);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double t = rng.uniform();
    rows.row(r) << t, 0.5 * t + 0.25, 1.0 - t, t * t;
  }

  TrainConfig cfg;
  cfg.rng_seed = 11;
  const auto trained = train(rows, 2, cfg);
  std::cout << "trained 4-2-4 network: loss " << format_double(trained.final_loss) << " after "
            << trained.iterations << " iterations (" << trained.stop_reason << ")\n";

  const double t = 0.62;
  const std::vector<double> truth{t, 0.5 * t + 0.25, 1.0 - t, t * t};
  const ImputationTask task(truth, {true, true, false, true}, truth);
  const MissingDataObjective objective(trained.net, task);

  OptimizerSettings settings;
  for (const auto* tag : {"ga", "sa", "pso", "ns"}) {
    const auto res = run(objective, tag, settings, derive_seed(2024, tag));
    std::cout << tag << ": x3 = " << format_double(res.best_point[0]) << " (true " << format_double(truth[2])
              << "), error " << format_double(res.best_value) << ", " << res.evaluations << " evaluations\n";
  }
}
