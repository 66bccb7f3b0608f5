#include "paretofact/moea/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "paretofact/common/error.hpp"

namespace paretofact::moea {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dominates: objective counts " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
  }
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> fast_non_dominated_sort(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> counts(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(points[p], points[q])) {
        dominated[p].push_back(q);
        ++counts[q];
      } else if (dominates(points[q], points[p])) {
        dominated[q].push_back(p);
        ++counts[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (counts[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--counts[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::vector<std::size_t>> fast_non_dominated_sort(std::vector<Individual>& population) {
  std::vector<std::vector<double>> points;
  points.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population[i].objectives.empty()) {
      throw ContractError("fast_non_dominated_sort: individual " + std::to_string(i) + " is not evaluated");
    }
    points.push_back(population[i].objectives);
  }
  auto fronts = fast_non_dominated_sort(points);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    for (std::size_t i : fronts[r]) population[i].rank = r;
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& points,
                                      std::span<const std::size_t> front) {
  const std::size_t k = front.size();
  std::vector<double> dist(k, 0.0);
  if (k == 0) return dist;
  if (k <= 2) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  const std::size_t m = points[front[0]].size();
  std::vector<std::size_t> order(k);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return points[front[a]][obj] < points[front[b]][obj];
    });
    const double lo = points[front[order.front()]][obj];
    const double hi = points[front[order.back()]][obj];
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    dist[order.front()] = std::numeric_limits<double>::infinity();
    dist[order.back()] = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < k; ++j) {
      dist[order[j]] += (points[front[order[j + 1]]][obj] - points[front[order[j - 1]]][obj]) / range;
    }
  }
  return dist;
}

std::pair<double, double> sbx_component(double x1, double x2, double u, double eta) {
  // The blend below is not exact in floating point; equal genes stay equal.
  if (x1 == x2) return {x1, x2};
  const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                               : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
  return {0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2), 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)};
}

std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> p1,
                                                                  std::span<const double> p2, double eta,
                                                                  Rng& rng, double lower, double upper) {
  if (p1.size() != p2.size()) {
    throw DimensionError("sbx_crossover: parent lengths " + std::to_string(p1.size()) + " and " +
                         std::to_string(p2.size()) + " differ");
  }
  std::vector<double> c1(p1.size()), c2(p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const auto [a, b] = sbx_component(p1[i], p2[i], rng.uniform(), eta);
    c1[i] = std::clamp(a, lower, upper);
    c2[i] = std::clamp(b, lower, upper);
  }
  return {std::move(c1), std::move(c2)};
}

double polynomial_component(double y, double u, double eta, double lower, double upper) {
  const double span = upper - lower;
  const double d1 = (y - lower) / span;
  const double d2 = (upper - y) / span;
  const double power = 1.0 / (eta + 1.0);
  double dq;
  if (u <= 0.5) {
    const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
    dq = std::pow(val, power) - 1.0;
  } else {
    const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
    dq = 1.0 - std::pow(val, power);
  }
  return std::clamp(y + dq * span, lower, upper);
}

std::vector<double> polynomial_mutation(std::span<const double> delta, double p, double eta, Rng& rng,
                                        double lower, double upper, std::vector<bool>* fired) {
  std::vector<double> out(delta.begin(), delta.end());
  if (fired) fired->assign(delta.size(), false);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!rng.bernoulli(p)) continue;
    out[i] = polynomial_component(out[i], rng.uniform(), eta, lower, upper);
    if (fired) (*fired)[i] = true;
  }
  return out;
}

double NsgaConfig::mutation_rate(std::size_t dimensions) const {
  if (mutation_probability >= 0.0) return mutation_probability;
  return dimensions == 0 ? 0.0 : 1.0 / static_cast<double>(dimensions);
}

void NsgaConfig::validate() const {
  if (population == 0) throw ContractError("nsga.population must be >= 1");
  if (offspring == 0) throw ContractError("nsga.offspring must be >= 1");
  if (mutation_probability > 1.0) throw ContractError("nsga.mutation_probability must be <= 1 (negative means 1/N)");
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) {
    throw ContractError("nsga.crossover_probability must be in [0,1]");
  }
  if (!(eta_mutation > 0.0)) throw ContractError("nsga.eta_mutation must be > 0");
  if (!(eta_crossover > 0.0)) throw ContractError("nsga.eta_crossover must be > 0");
  if (!(lower < upper)) throw ContractError("nsga.lower must be below nsga.upper");
  if (threads == 0) throw ContractError("nsga.threads must be >= 1");
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

namespace {

void evaluate_all(const Problem& problem, std::vector<Individual>& batch, std::size_t threads,
                  std::size_t generation) {
  try {
    parallel_for(batch.size(), threads, [&](std::size_t i) { batch[i].objectives = problem.evaluate(batch[i].delta); });
  } catch (const std::exception& e) {
    throw Error("evaluation failed in generation " + std::to_string(generation) + ": " + e.what());
  }
}

// Ranks and crowding for `population`, returning its fronts.
std::vector<std::vector<std::size_t>> assign_fitness(std::vector<Individual>& population) {
  auto fronts = fast_non_dominated_sort(population);
  std::vector<std::vector<double>> points;
  points.reserve(population.size());
  for (const auto& ind : population) points.push_back(ind.objectives);
  for (const auto& front : fronts) {
    const auto d = crowding_distance(points, front);
    for (std::size_t j = 0; j < front.size(); ++j) population[front[j]].crowding = d[j];
  }
  return fronts;
}

bool better(const std::vector<Individual>& pop, std::size_t a, std::size_t b) {
  if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank;
  if (pop[a].crowding != pop[b].crowding) return pop[a].crowding > pop[b].crowding;
  return a < b;
}

std::size_t tournament(const std::vector<Individual>& pop, Rng& rng) {
  const std::size_t a = rng.below(pop.size());
  const std::size_t b = rng.below(pop.size());
  return better(pop, a, b) ? a : b;
}

// Keeps whole fronts while they fit, then the most crowded-apart members
// of the first front that does not, ties broken by merged index.
std::vector<Individual> truncate(std::vector<Individual>& merged, std::size_t size) {
  const auto fronts = assign_fitness(merged);
  std::vector<Individual> out;
  out.reserve(size);
  for (const auto& front : fronts) {
    if (out.size() + front.size() <= size) {
      for (std::size_t i : front) out.push_back(merged[i]);
      continue;
    }
    std::vector<std::size_t> order(front.begin(), front.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
    for (std::size_t j = 0; out.size() < size; ++j) out.push_back(merged[order[j]]);
    break;
  }
  return out;
}

bool same_delta(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

ParetoFront evolve(const Problem& problem, const NsgaConfig& config, const GenerationObserver& observer) {
  config.validate();
  if (problem.dimensions == 0) throw ContractError("evolve: problem has no decision variables");
  if (!problem.evaluate) throw ContractError("evolve: problem has no evaluation function");

  Rng rng(config.seed);
  const std::size_t n = problem.dimensions;
  const double pm = config.mutation_rate(n);
  std::size_t evaluations = 0;

  std::vector<Individual> population(config.population);
  for (auto& ind : population) {
    ind.delta.resize(n);
    for (double& v : ind.delta) v = rng.uniform(config.lower, config.upper);
  }
  evaluate_all(problem, population, config.threads, 0);
  evaluations += population.size();
  assign_fitness(population);
  if (observer) observer(0, population);

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> children;
    children.reserve(config.offspring + 1);
    while (children.size() < config.offspring) {
      const auto& p1 = population[tournament(population, rng)].delta;
      const auto& p2 = population[tournament(population, rng)].delta;
      std::vector<double> c1 = p1, c2 = p2;
      if (rng.bernoulli(config.crossover_probability)) {
        std::tie(c1, c2) = sbx_crossover(p1, p2, config.eta_crossover, rng, config.lower, config.upper);
      }
      children.push_back({polynomial_mutation(c1, pm, config.eta_mutation, rng, config.lower, config.upper), {}});
      if (children.size() < config.offspring) {
        children.push_back({polynomial_mutation(c2, pm, config.eta_mutation, rng, config.lower, config.upper), {}});
      }
    }
    evaluate_all(problem, children, config.threads, gen);
    evaluations += children.size();

    std::vector<Individual> merged = std::move(population);
    merged.insert(merged.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
    population = truncate(merged, config.population);
    assign_fitness(population);
    if (observer) observer(gen, population);
  }

  ParetoFront front;
  front.config = config;
  front.generations = config.generations;
  front.evaluations = evaluations;
  for (const auto& ind : population) {
    if (ind.rank != 0) continue;
    const bool seen = std::any_of(front.members.begin(), front.members.end(),
                                  [&](const Individual& m) { return same_delta(m.delta, ind.delta); });
    if (!seen) front.members.push_back(ind);
  }
  return front;
}

namespace {

// Area dominated by 2-D points within [.., ref0] x [.., ref1].
double area_2d(std::vector<std::pair<double, double>> pts, double ref0, double ref1) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double best1 = ref1;
  for (const auto& [x, y] : pts) {
    if (y < best1) {
      area += (ref0 - x) * (best1 - y);
      best1 = y;
    }
  }
  return area;
}

}  // namespace

double hypervolume(const std::vector<std::vector<double>>& points, std::span<const double> reference) {
  const std::size_t m = reference.size();
  if (m < 1 || m > 3) throw ContractError("hypervolume: supports 1 to 3 objectives, got " + std::to_string(m));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != m) {
      throw DimensionError("hypervolume: point " + std::to_string(i) + " has " + std::to_string(points[i].size()) +
                           " objectives, reference has " + std::to_string(m));
    }
    if (!dominates(points[i], reference)) {
      throw ContractError("hypervolume: point " + std::to_string(i) + " does not dominate the reference point");
    }
  }
  if (points.empty()) return 0.0;
  if (m == 1) {
    double best = reference[0];
    for (const auto& p : points) best = std::min(best, p[0]);
    return reference[0] - best;
  }
  if (m == 2) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points) pts.emplace_back(p[0], p[1]);
    return area_2d(std::move(pts), reference[0], reference[1]);
  }
  // Slice along the third objective: between consecutive levels the
  // dominated cross-section is the 2-D area of every point at or below.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a][2] < points[b][2]; });
  double volume = 0.0;
  std::vector<std::pair<double, double>> active;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = points[order[k]];
    active.emplace_back(p[0], p[1]);
    const double next = k + 1 < order.size() ? points[order[k + 1]][2] : reference[2];
    if (next > p[2]) volume += area_2d(active, reference[0], reference[1]) * (next - p[2]);
  }
  return volume;
}

}  // namespace paretofact::moea
