#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "paretofact/common/rng.hpp"

namespace paretofact::moea {

// All objectives are minimized.
bool dominates(std::span<const double> a, std::span<const double> b);

struct Individual {
  std::vector<double> delta;
  std::vector<double> objectives;  // empty until evaluated
  std::size_t rank = 0;
  double crowding = 0.0;
};

// Fronts F1, F2, ... as index lists into `points`, each in ascending index
// order. Points must share one objective count.
std::vector<std::vector<std::size_t>> fast_non_dominated_sort(const std::vector<std::vector<double>>& points);
// Same, over individuals; writes ranks. Throws ContractError when an
// individual has no objectives.
std::vector<std::vector<std::size_t>> fast_non_dominated_sort(std::vector<Individual>& population);

// Crowding distance of each member of `front` (indices into `points`),
// returned in front order. Boundary members of every objective get +inf.
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& points,
                                      std::span<const std::size_t> front);

// One SBX component with spread draw u in [0,1): returns the two children
// before clamping. u = 0.5 reproduces the parents.
std::pair<double, double> sbx_component(double x1, double x2, double u, double eta);

// Crosses every component; children clamped to [lower, upper].
std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> p1,
                                                                  std::span<const double> p2, double eta,
                                                                  Rng& rng, double lower = -1.0,
                                                                  double upper = 1.0);

// Bounded polynomial perturbation of y in [lower, upper] for draw u in
// [0,1). u = 0.5 leaves y unchanged.
double polynomial_component(double y, double u, double eta, double lower, double upper);

// Each component mutates with probability p. `fired`, when given, records
// which components drew a mutation.
std::vector<double> polynomial_mutation(std::span<const double> delta, double p, double eta, Rng& rng,
                                        double lower = -1.0, double upper = 1.0,
                                        std::vector<bool>* fired = nullptr);

struct NsgaConfig {
  std::size_t population = 100;
  std::size_t offspring = 100;
  double mutation_probability = -1.0;  // negative: 1/N
  double eta_mutation = 20.0;
  double crossover_probability = 0.9;
  double eta_crossover = 20.0;
  std::size_t generations = 50;
  std::uint64_t seed = 0;
  double lower = -1.0;
  double upper = 1.0;
  std::size_t threads = 1;

  double mutation_rate(std::size_t dimensions) const;
  // Throws ContractError naming the offending field.
  void validate() const;
};

// Black-box problem: `evaluate` must be safe to call concurrently.
struct Problem {
  std::size_t dimensions = 0;
  std::function<std::vector<double>(std::span<const double>)> evaluate;
};

struct ParetoFront {
  std::vector<Individual> members;  // rank 0, distinct delta vectors
  NsgaConfig config;
  std::size_t generations = 0;
  std::size_t evaluations = 0;
};

// Called with the retained population after initialization (generation 0)
// and after every generation's truncation.
using GenerationObserver = std::function<void(std::size_t generation, const std::vector<Individual>&)>;

ParetoFront evolve(const Problem& problem, const NsgaConfig& config, const GenerationObserver& observer = {});

// Exact dominated volume for 1-3 objectives relative to `reference`.
// Throws ContractError when a point does not dominate the reference.
double hypervolume(const std::vector<std::vector<double>>& points, std::span<const double> reference);

// Runs fn(i) for i in [0, n) on up to `threads` threads; fn writes its own
// slot, so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace paretofact::moea
