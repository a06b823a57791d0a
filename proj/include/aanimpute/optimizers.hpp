#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aanimpute/errors.hpp"
#include "aanimpute/objective.hpp"
#include "aanimpute/rng.hpp"

namespace aanimpute {

struct TracePoint {
  std::size_t iteration = 0;
  double best_value = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct OptimizerResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::vector<TracePoint> trace;

  friend bool operator==(const OptimizerResult&, const OptimizerResult&) = default;
};

template <Reconstructor Model>
std::vector<double> impute(const MissingDataObjective<Model>& obj, const OptimizerResult& result) {
  return obj.complete(result.best_point);
}

namespace detail {

/// Counts evaluations and remembers the best point seen.
template <BoxObjective F>
class Tracker {
 public:
  explicit Tracker(const F& f) : f_(f) {}

  double operator()(std::span<const double> x) {
    const double v = f_.evaluate(x);
    ++count_;
    if (best_point_.empty() || v < best_value_) {
      best_value_ = v;
      best_point_.assign(x.begin(), x.end());
    }
    return v;
  }

  void mark(std::size_t iteration) { trace_.push_back({iteration, best_value_}); }
  double best() const { return best_value_; }

  OptimizerResult finish() && {
    return {std::move(best_point_), best_value_, count_, std::move(trace_)};
  }

 private:
  const F& f_;
  std::size_t count_ = 0;
  double best_value_ = 0.0;
  std::vector<double> best_point_;
  std::vector<TracePoint> trace_;
};

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace detail

// ---------------------------------------------------------------- genetic

struct GaConfig {
  std::size_t population = 50;
  std::size_t bits_per_variable = 16;
  double crossover_prob = 0.9;
  std::optional<double> mutation_prob;  // default 1 / (bits * m)
  std::size_t tournament_size = 2;
  std::size_t elitism = 1;
  std::size_t generations = 100;
  std::uint64_t seed = 1;

  void validate() const {
    if (population < 2) throw DomainError("ga.population must be >= 2");
    if (bits_per_variable < 1 || bits_per_variable > 32) throw DomainError("ga.bits_per_variable must be in [1, 32]");
    detail::check_probability(crossover_prob, "ga.crossover_prob");
    if (mutation_prob) detail::check_probability(*mutation_prob, "ga.mutation_prob");
    if (tournament_size < 1) throw DomainError("ga.tournament_size must be >= 1");
    if (elitism >= population) throw DomainError("ga.elitism must be < ga.population");
  }

  double mutation_for(std::size_t m) const {
    return mutation_prob.value_or(1.0 / static_cast<double>(bits_per_variable * m));
  }

  /// Elites are carried over with their cached fitness, so only the
  /// population - elitism offspring are evaluated each generation.
  std::size_t expected_evaluations() const { return population + generations * (population - elitism); }
};

using Chromosome = std::vector<std::uint8_t>;

/// Fixed-point decoding: each variable is `bits` bits, most significant
/// first, read as integer / (2^bits - 1).
inline std::vector<double> decode_chromosome(std::span<const std::uint8_t> genes, std::size_t bits) {
  if (bits == 0 || genes.size() % bits != 0) throw DimensionError("chromosome length is not a multiple of bits");
  const double scale = static_cast<double>((std::uint64_t{1} << bits) - 1);
  std::vector<double> x(genes.size() / bits);
  for (std::size_t v = 0; v < x.size(); ++v) {
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < bits; ++b) word = (word << 1) | (genes[v * bits + b] & 1u);
    x[v] = static_cast<double>(word) / scale;
  }
  return x;
}

/// Generational GA maximizing the negated objective: tournament selection,
/// single-point crossover, bit-flip mutation and elitism.
template <BoxObjective F>
OptimizerResult minimize_ga(const F& obj, const GaConfig& cfg) {
  cfg.validate();
  const std::size_t m = obj.dimension();
  const std::size_t length = m * cfg.bits_per_variable;
  const double p_mut = cfg.mutation_for(m);
  Rng rng(cfg.seed);
  detail::Tracker track(obj);

  std::vector<Chromosome> pop(cfg.population, Chromosome(length));
  std::vector<double> fitness(cfg.population);
  for (auto& c : pop)
    for (auto& g : c) g = rng.bernoulli(0.5) ? 1 : 0;
  for (std::size_t i = 0; i < pop.size(); ++i)
    fitness[i] = -track(decode_chromosome(pop[i], cfg.bits_per_variable));
  track.mark(0);

  auto tournament = [&]() -> std::size_t {
    std::size_t winner = rng.below(cfg.population);
    for (std::size_t t = 1; t < cfg.tournament_size; ++t) {
      const std::size_t challenger = rng.below(cfg.population);
      if (fitness[challenger] > fitness[winner] ||
          (fitness[challenger] == fitness[winner] && challenger < winner))
        winner = challenger;
    }
    return winner;
  };

  std::vector<std::size_t> order(cfg.population);
  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fitness[a] > fitness[b]; });

    std::vector<Chromosome> next;
    std::vector<double> next_fitness;
    next.reserve(cfg.population);
    next_fitness.reserve(cfg.population);
    for (std::size_t e = 0; e < cfg.elitism; ++e) {
      next.push_back(pop[order[e]]);
      next_fitness.push_back(fitness[order[e]]);
    }
    while (next.size() < cfg.population) {
      Chromosome a = pop[tournament()];
      Chromosome b = pop[tournament()];
      if (length > 1 && rng.bernoulli(cfg.crossover_prob)) {
        const std::size_t cut = 1 + rng.below(length - 1);
        std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(cut), a.end(),
                         b.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto* child : {&a, &b})
        for (auto& g : *child)
          if (rng.bernoulli(p_mut)) g ^= 1u;
      for (auto* child : {&a, &b}) {
        if (next.size() == cfg.population) break;
        next_fitness.push_back(-track(decode_chromosome(*child, cfg.bits_per_variable)));
        next.push_back(std::move(*child));
      }
    }
    pop = std::move(next);
    fitness = std::move(next_fitness);
    track.mark(gen);
  }
  return std::move(track).finish();
}

// ------------------------------------------------------ simulated annealing

struct SaConfig {
  std::optional<double> initial_temperature;  // auto-calibrated when empty
  double cooling_factor = 0.95;
  std::size_t temperature_steps = 100;
  std::size_t moves_per_step = 20;
  double neighbor_sigma = 0.1;
  std::uint64_t seed = 1;

  static constexpr std::size_t probe_moves = 100;
  static constexpr double target_acceptance = 0.8;

  void validate() const {
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) throw DomainError("sa.cooling_factor must lie in (0, 1)");
    if (!(neighbor_sigma > 0.0)) throw DomainError("sa.neighbor_sigma must be > 0");
    if (initial_temperature && !(*initial_temperature > 0.0))
      throw DomainError("sa.initial_temperature must be > 0");
  }

  std::size_t expected_evaluations() const {
    return 1 + (initial_temperature ? 0 : probe_moves) + temperature_steps * moves_per_step;
  }
};

namespace detail {

inline std::vector<double> gaussian_neighbor(std::span<const double> x, double sigma, Rng& rng) {
  std::vector<double> y(x.begin(), x.end());
  for (auto& v : y) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
  return y;
}

}  // namespace detail

/// Metropolis search with geometric cooling.
///
/// The automatic start temperature uses probe moves around the start point:
/// T0 = mean(uphill delta) / -ln(0.8), so a typical uphill probe is accepted
/// with probability 0.8. `on_accept`, when set, sees the objective value after
/// every accepted move.
template <BoxObjective F>
OptimizerResult minimize_sa(const F& obj, const SaConfig& cfg,
                            const std::function<void(double)>& on_accept = {}) {
  cfg.validate();
  const std::size_t m = obj.dimension();
  Rng rng(cfg.seed);
  detail::Tracker track(obj);

  std::vector<double> x(m);
  for (auto& v : x) v = rng.uniform();
  double e = track(x);

  double temperature = 0.0;
  if (cfg.initial_temperature) {
    temperature = *cfg.initial_temperature;
  } else {
    double uphill = 0.0, any = 0.0;
    std::size_t n_uphill = 0, n_any = 0;
    for (std::size_t p = 0; p < SaConfig::probe_moves; ++p) {
      const double delta = track(detail::gaussian_neighbor(x, cfg.neighbor_sigma, rng)) - e;
      if (delta > 0.0) {
        uphill += delta;
        ++n_uphill;
      }
      if (delta != 0.0) {
        any += std::abs(delta);
        ++n_any;
      }
    }
    const double scale = n_uphill > 0 ? uphill / static_cast<double>(n_uphill)
                         : n_any > 0  ? any / static_cast<double>(n_any)
                                      : 0.0;
    temperature = scale > 0.0 ? scale / -std::log(SaConfig::target_acceptance) : 1e-12;
  }
  track.mark(0);

  for (std::size_t step = 1; step <= cfg.temperature_steps; ++step) {
    for (std::size_t move = 0; move < cfg.moves_per_step; ++move) {
      auto y = detail::gaussian_neighbor(x, cfg.neighbor_sigma, rng);
      const double ey = track(y);
      const double delta = ey - e;
      if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temperature)) {
        x = std::move(y);
        e = ey;
        if (on_accept) on_accept(e);
      }
    }
    temperature *= cfg.cooling_factor;
    track.mark(step);
  }
  return std::move(track).finish();
}

// ------------------------------------------------------------ particle swarm

struct PsoConfig {
  std::size_t swarm = 30;
  double phi1 = 2.0;
  double phi2 = 2.0;
  double v_max = 0.25;
  std::size_t iterations = 100;
  std::uint64_t seed = 1;

  void validate() const {
    if (swarm < 2) throw DomainError("pso.swarm must be >= 2");
    if (!(phi1 > 0.0) || !(phi2 > 0.0)) throw DomainError("pso.phi1 and pso.phi2 must be > 0");
    if (!(v_max > 0.0)) throw DomainError("pso.v_max must be > 0");
  }

  std::size_t expected_evaluations() const { return swarm * (iterations + 1); }
};

/// One velocity/position update for a single particle:
///   v <- v + U(0,phi1) * (p_i - x) + U(0,phi2) * (p_g - x), |v| <= v_max
///   x <- clamp(x + v, 0, 1)
/// Draws two uniforms per dimension, in dimension order.
inline void pso_move(std::span<double> x, std::span<double> v, std::span<const double> personal_best,
                     std::span<const double> global_best, const PsoConfig& cfg, Rng& rng) {
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double r1 = rng.uniform(0.0, cfg.phi1);
    const double r2 = rng.uniform(0.0, cfg.phi2);
    v[d] += r1 * (personal_best[d] - x[d]) + r2 * (global_best[d] - x[d]);
    v[d] = std::clamp(v[d], -cfg.v_max, cfg.v_max);
    x[d] = std::clamp(x[d] + v[d], 0.0, 1.0);
  }
}

/// Global-best PSO without inertia. All particles move, then all are
/// evaluated, then personal and global bests are refreshed.
template <BoxObjective F>
OptimizerResult minimize_pso(const F& obj, const PsoConfig& cfg) {
  cfg.validate();
  const std::size_t m = obj.dimension();
  Rng rng(cfg.seed);
  detail::Tracker track(obj);

  std::vector<std::vector<double>> x(cfg.swarm, std::vector<double>(m)), v = x;
  for (std::size_t i = 0; i < cfg.swarm; ++i) {
    for (auto& c : x[i]) c = rng.uniform();
    for (auto& c : v[i]) c = rng.uniform(-cfg.v_max, cfg.v_max);
  }
  auto pbest = x;
  std::vector<double> pbest_value(cfg.swarm);
  for (std::size_t i = 0; i < cfg.swarm; ++i) pbest_value[i] = track(x[i]);
  auto gbest_index = [&] {
    return static_cast<std::size_t>(std::min_element(pbest_value.begin(), pbest_value.end()) - pbest_value.begin());
  };
  std::vector<double> gbest = pbest[gbest_index()];
  track.mark(0);

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    for (std::size_t i = 0; i < cfg.swarm; ++i) pso_move(x[i], v[i], pbest[i], gbest, cfg, rng);
    for (std::size_t i = 0; i < cfg.swarm; ++i) {
      const double value = track(x[i]);
      if (value < pbest_value[i]) {
        pbest_value[i] = value;
        pbest[i] = x[i];
      }
    }
    gbest = pbest[gbest_index()];
    track.mark(it);
  }
  return std::move(track).finish();
}

// --------------------------------------------------------- negative selection

struct NsConfig {
  std::size_t detectors = 50;
  std::size_t generations = 100;
  std::uint64_t seed = 1;

  void validate() const {
    if (detectors < 2) throw DomainError("ns.detectors must be >= 2");
  }

  /// Exact when detector values are distinct: each generation replaces the
  /// floor(D/2) detectors strictly above the median.
  std::size_t expected_evaluations() const { return detectors + generations * (detectors / 2); }
};

/// Negative selection used as a minimizer.
///
/// Each generation the detectors whose objective lies strictly above the set
/// median are treated as self-matching, eliminated and replaced by fresh
/// uniform detectors; the set size never changes. `on_generation` receives
/// (generation, detector count) after each maturation round.
template <BoxObjective F>
OptimizerResult minimize_ns(const F& obj, const NsConfig& cfg,
                            const std::function<void(std::size_t, std::size_t)>& on_generation = {}) {
  cfg.validate();
  const std::size_t m = obj.dimension();
  Rng rng(cfg.seed);
  detail::Tracker track(obj);

  auto fresh = [&] {
    std::vector<double> p(m);
    for (auto& c : p) c = rng.uniform();
    return p;
  };
  std::vector<std::vector<double>> detectors(cfg.detectors);
  std::vector<double> values(cfg.detectors);
  for (std::size_t i = 0; i < cfg.detectors; ++i) {
    detectors[i] = fresh();
    values[i] = track(detectors[i]);
  }
  track.mark(0);

  std::vector<double> sorted;
  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    for (std::size_t i = 0; i < cfg.detectors; ++i) {
      if (values[i] > median) {
        detectors[i] = fresh();
        values[i] = track(detectors[i]);
      }
    }
    if (on_generation) on_generation(gen, detectors.size());
    track.mark(gen);
  }
  return std::move(track).finish();
}

// ----------------------------------------------------------------- dispatch

enum class Algorithm { ga, sa, pso, ns };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ga: return "ga";
    case Algorithm::sa: return "sa";
    case Algorithm::pso: return "pso";
    case Algorithm::ns: return "ns";
  }
  return "ga";
}

inline Algorithm parse_algorithm(std::string_view tag) {
  if (tag == "ga") return Algorithm::ga;
  if (tag == "sa") return Algorithm::sa;
  if (tag == "pso") return Algorithm::pso;
  if (tag == "ns") return Algorithm::ns;
  throw DomainError("unknown optimizer '" + std::string(tag) + "' (expected ga, sa, pso or ns)");
}

struct OptimizerSettings {
  GaConfig ga;
  SaConfig sa;
  PsoConfig pso;
  NsConfig ns;
};

/// Runs `algorithm` with its settings and `seed` substituted for the configured one.
template <BoxObjective F>
OptimizerResult run(const F& obj, Algorithm algorithm, const OptimizerSettings& settings, std::uint64_t seed) {
  switch (algorithm) {
    case Algorithm::ga: {
      auto cfg = settings.ga;
      cfg.seed = seed;
      return minimize_ga(obj, cfg);
    }
    case Algorithm::sa: {
      auto cfg = settings.sa;
      cfg.seed = seed;
      return minimize_sa(obj, cfg);
    }
    case Algorithm::pso: {
      auto cfg = settings.pso;
      cfg.seed = seed;
      return minimize_pso(obj, cfg);
    }
    case Algorithm::ns: {
      auto cfg = settings.ns;
      cfg.seed = seed;
      return minimize_ns(obj, cfg);
    }
  }
  throw DomainError("unhandled optimizer");
}

template <BoxObjective F>
OptimizerResult run(const F& obj, std::string_view tag, const OptimizerSettings& settings, std::uint64_t seed) {
  return run(obj, parse_algorithm(tag), settings, seed);
}

}  // namespace aanimpute
