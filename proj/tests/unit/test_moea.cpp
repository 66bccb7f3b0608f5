#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "paretofact/common/error.hpp"
#include "paretofact/common/rng.hpp"
#include "paretofact/moea/nsga2.hpp"

namespace pf = paretofact;
namespace moea = paretofact::moea;
using Points = std::vector<std::vector<double>>;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

bool dom(const std::vector<double>& a, const std::vector<double>& b) { return moea::dominates(a, b); }

// Peels off the non-dominated set repeatedly, by pairwise comparison.
std::vector<std::vector<std::size_t>> brute_fronts(const Points& pts) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<bool> done(pts.size(), false);
  std::size_t left = pts.size();
  while (left > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (done[i]) continue;
      bool beaten = false;
      for (std::size_t j = 0; j < pts.size() && !beaten; ++j) beaten = !done[j] && dom(pts[j], pts[i]);
      if (!beaten) front.push_back(i);
    }
    for (std::size_t i : front) done[i] = true;
    left -= front.size();
    fronts.push_back(front);
  }
  return fronts;
}

// Union of boxes [p, ref] by inclusion-exclusion over every subset.
double union_volume(const Points& pts, const std::vector<double>& ref) {
  double total = 0;
  const std::size_t n = pts.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> corner(ref.size(), -kInf);
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      for (std::size_t d = 0; d < ref.size(); ++d) corner[d] = std::max(corner[d], pts[i][d]);
    }
    double vol = 1;
    for (std::size_t d = 0; d < ref.size(); ++d) vol *= ref[d] - corner[d];
    total += (bits % 2 ? 1 : -1) * vol;
  }
  return total;
}

moea::Problem schaffer(std::size_t n, std::atomic<std::size_t>* calls = nullptr) {
  return {n, [calls](std::span<const double> d) {
            if (calls) ++*calls;
            return std::vector<double>{d[0] * d[0], (d[0] - 1) * (d[0] - 1)};
          }};
}

moea::NsgaConfig small_config(std::size_t generations) {
  moea::NsgaConfig c;
  c.population = 24;
  c.offspring = 24;
  c.generations = generations;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Dominance, ReferenceExamples) {
  EXPECT_TRUE(dom({1, 1, 1}, {2, 2, 2}));
  EXPECT_FALSE(dom({1, 2, 3}, {1, 2, 3}));
  EXPECT_FALSE(dom({1, 4, 0}, {2, 2, 0}));
  EXPECT_FALSE(dom({2, 2, 0}, {1, 4, 0}));
  EXPECT_TRUE(dom({1, 2, 3}, {1, 2, 4}));
}

TEST(Dominance, IrreflexiveAndAntisymmetric) {
  pf::Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> a(3), b(3);
    for (double& v : a) v = double(rng.below(3));
    for (double& v : b) v = double(rng.below(3));
    EXPECT_FALSE(dom(a, a));
    EXPECT_FALSE(dom(a, b) && dom(b, a));
  }
}

TEST(NonDominatedSort, ReferenceExamples) {
  using Fronts = std::vector<std::vector<std::size_t>>;
  EXPECT_EQ(moea::fast_non_dominated_sort(Points{{1, 4}, {2, 2}, {3, 1}, {3, 3}, {4, 4}}),
            (Fronts{{0, 1, 2}, {3}, {4}}));
  EXPECT_EQ(moea::fast_non_dominated_sort(Points(4, {1, 1, 1})), (Fronts{{0, 1, 2, 3}}));
  EXPECT_EQ(moea::fast_non_dominated_sort(Points{{3, 3, 3}, {1, 1, 1}, {2, 2, 2}}), (Fronts{{1}, {2}, {0}}));
}

TEST(NonDominatedSort, MatchesPairwiseStratification) {
  pf::Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    Points pts(200, std::vector<double>(3));
    for (auto& p : pts) {
      for (double& v : p) v = t % 2 ? double(rng.below(5)) : rng.uniform();
    }
    EXPECT_EQ(moea::fast_non_dominated_sort(pts), brute_fronts(pts));
  }
}

TEST(NonDominatedSort, WritesRanksAndRejectsUnevaluated) {
  std::vector<moea::Individual> pop(3);
  pop[0].objectives = {2, 2};
  pop[1].objectives = {1, 1};
  pop[2].objectives = {3, 0};
  moea::fast_non_dominated_sort(pop);
  EXPECT_EQ(pop[0].rank, 1u);
  EXPECT_EQ(pop[1].rank, 0u);
  EXPECT_EQ(pop[2].rank, 0u);
  pop[2].objectives.clear();
  EXPECT_THROW(moea::fast_non_dominated_sort(pop), pf::ContractError);
}

TEST(Crowding, ReferenceExamples) {
  const Points two{{1, 2}, {2, 1}};
  const std::vector<std::size_t> both{0, 1};
  for (double d : moea::crowding_distance(two, both)) EXPECT_EQ(d, kInf);

  const Points three{{1, 3}, {2, 2}, {3, 1}};
  const std::vector<std::size_t> all{0, 1, 2};
  const auto d = moea::crowding_distance(three, all);
  EXPECT_EQ(d[0], kInf);
  EXPECT_DOUBLE_EQ(d[1], 2.0);
  EXPECT_EQ(d[2], kInf);

  // A constant third column adds nothing.
  const Points flat{{1, 3, 7}, {2, 2, 7}, {3, 1, 7}};
  EXPECT_DOUBLE_EQ(moea::crowding_distance(flat, all)[1], 2.0);
}

TEST(Sbx, MedianDrawReproducesParents) {
  const auto [c1, c2] = moea::sbx_component(-0.3, 0.6, 0.5, 20);
  EXPECT_DOUBLE_EQ(c1 + c2, 0.3);
  EXPECT_NEAR(std::min(c1, c2), -0.3, 1e-15);
  EXPECT_NEAR(std::max(c1, c2), 0.6, 1e-15);
}

TEST(Sbx, IdenticalParentsAndBox) {
  pf::Rng rng(3);
  const std::vector<double> p{0.2, -0.7, 0.99};
  for (int t = 0; t < 200; ++t) {
    const auto [c1, c2] = moea::sbx_crossover(p, p, 20, rng);
    EXPECT_EQ(c1, p);
    EXPECT_EQ(c2, p);
  }
  const std::vector<double> a{0.95, -0.95, 0.0}, b{-0.95, 0.95, 0.9};
  for (int t = 0; t < 2000; ++t) {
    const auto [c1, c2] = moea::sbx_crossover(a, b, 2, rng);
    for (double v : c1) EXPECT_TRUE(v >= -1 && v <= 1);
    for (double v : c2) EXPECT_TRUE(v >= -1 && v <= 1);
  }
  EXPECT_THROW(moea::sbx_crossover(a, std::vector<double>{0, 0}, 20, rng), pf::DimensionError);
}

TEST(Sbx, PreservesParentMean) {
  pf::Rng rng(4);
  double sum = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto [c1, c2] = moea::sbx_component(-0.1, 0.3, rng.uniform(), 20);
    sum += (c1 + c2) / 2;
  }
  EXPECT_NEAR(sum / 10000, 0.1, 0.01);
}

TEST(Mutation, NoOpCases) {
  EXPECT_EQ(moea::polynomial_component(0.37, 0.5, 20, -1, 1), 0.37);
  pf::Rng rng(5);
  const std::vector<double> d{0.1, -0.2, 0.3, 1.0, -1.0};
  EXPECT_EQ(moea::polynomial_mutation(d, 0.0, 20, rng), d);
  for (int t = 0; t < 2000; ++t) {
    for (double v : moea::polynomial_mutation(d, 1.0, 1.0, rng)) EXPECT_TRUE(v >= -1 && v <= 1);
  }
}

TEST(Mutation, RateMatchesProbability) {
  pf::Rng rng(6);
  const std::vector<double> d(5, 0.0);
  std::vector<std::size_t> count(5, 0);
  std::vector<bool> fired;
  for (int t = 0; t < 10000; ++t) {
    moea::polynomial_mutation(d, 0.2, 20, rng, -1, 1, &fired);
    for (std::size_t i = 0; i < 5; ++i) count[i] += fired[i];
  }
  const double se = std::sqrt(0.2 * 0.8 / 10000);
  for (std::size_t c : count) EXPECT_NEAR(c / 10000.0, 0.2, 3 * se);
}

TEST(Config, DefaultsAndValidation) {
  moea::NsgaConfig c;
  EXPECT_EQ(c.population, 100u);
  EXPECT_EQ(c.generations, 50u);
  EXPECT_DOUBLE_EQ(c.mutation_rate(5), 0.2);
  c.validate();
  c.crossover_probability = 1.5;
  EXPECT_THROW(c.validate(), pf::ContractError);
  c = {};
  c.population = 0;
  try {
    c.validate();
    FAIL();
  } catch (const pf::ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("population"), std::string::npos);
  }
}

TEST(Evolve, ZeroGenerationsKeepsInitialNonDominated) {
  Points initial;
  const auto front = moea::evolve(schaffer(3), small_config(0), [&](std::size_t g, const auto& pop) {
    EXPECT_EQ(g, 0u);
    for (const auto& ind : pop) initial.push_back(ind.objectives);
  });
  ASSERT_EQ(initial.size(), 24u);
  EXPECT_EQ(front.evaluations, 24u);
  EXPECT_EQ(front.members.size(), moea::fast_non_dominated_sort(initial).front().size());
}

TEST(Evolve, CountsEvaluationsAndStaysInTheBox) {
  std::atomic<std::size_t> calls{0};
  std::size_t last = 0;
  const auto front = moea::evolve(schaffer(4, &calls), small_config(7), [&](std::size_t g, const auto& pop) {
    last = g;
    EXPECT_EQ(pop.size(), 24u);
    for (const auto& ind : pop) {
      for (double v : ind.delta) EXPECT_TRUE(v >= -1 && v <= 1);
    }
  });
  EXPECT_EQ(last, 7u);
  EXPECT_EQ(calls.load(), 24u + 7 * 24);
  EXPECT_EQ(front.evaluations, calls.load());
  for (const auto& a : front.members) {
    for (const auto& b : front.members) {
      EXPECT_FALSE(dom(a.objectives, b.objectives));
      if (&a != &b) EXPECT_NE(a.delta, b.delta);
    }
  }
}

TEST(Evolve, DeterministicAndThreadIndependent) {
  auto c = small_config(10);
  const auto a = moea::evolve(schaffer(3), c);
  const auto b = moea::evolve(schaffer(3), c);
  c.threads = 4;
  const auto p = moea::evolve(schaffer(3), c);
  ASSERT_EQ(a.members.size(), b.members.size());
  ASSERT_EQ(a.members.size(), p.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_EQ(a.members[i].delta, b.members[i].delta);
    EXPECT_EQ(a.members[i].delta, p.members[i].delta);
    EXPECT_EQ(a.members[i].objectives, p.members[i].objectives);
  }
}

TEST(Evolve, ConvergesOnSchafferProblem) {
  moea::NsgaConfig c;
  c.seed = 9;
  const auto front = moea::evolve(schaffer(5), c);
  std::size_t inside = 0;
  for (const auto& m : front.members) inside += m.delta[0] >= -0.05 && m.delta[0] <= 1.05;
  EXPECT_GE(inside, std::size_t(std::ceil(0.95 * front.members.size())));
}

TEST(Evolve, EvaluationFailureNamesTheGeneration) {
  std::atomic<std::size_t> calls{0};
  moea::Problem p{2, [&](std::span<const double>) -> std::vector<double> {
                    if (++calls > 30) throw std::runtime_error("boom");
                    return {0.0, 0.0};
                  }};
  try {
    moea::evolve(p, small_config(3));
    FAIL();
  } catch (const pf::Error& e) {
    EXPECT_NE(std::string(e.what()).find("generation 1"), std::string::npos) << e.what();
  }
}

TEST(Hypervolume, ReferenceExamples) {
  const std::vector<double> ref{1, 1, 1};
  EXPECT_DOUBLE_EQ(moea::hypervolume({{0, 0, 0}}, ref), 1.0);
  EXPECT_DOUBLE_EQ(moea::hypervolume({{0, 0.5, 0}, {0.5, 0, 0}}, ref), 0.75);
  EXPECT_DOUBLE_EQ(moea::hypervolume({{0, 0.5, 0}, {0.5, 0, 0}, {0.6, 0.6, 0.1}}, ref), 0.75);
  EXPECT_THROW(moea::hypervolume({{0, 0, 1.2}}, ref), pf::ContractError);
}

TEST(Hypervolume, MatchesInclusionExclusion) {
  pf::Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    const std::size_t dims = 1 + t % 3, n = 1 + rng.below(8);
    const std::vector<double> ref(dims, 1.0);
    Points pts(n, std::vector<double>(dims));
    for (auto& p : pts) {
      for (double& v : p) v = t % 4 == 0 ? double(rng.below(4)) / 4 : rng.uniform();
    }
    EXPECT_NEAR(moea::hypervolume(pts, ref), union_volume(pts, ref), 1e-12);
  }
}

TEST(ParallelFor, CoversEverySlotOnce) {
  std::vector<int> hits(101, 0);
  moea::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(moea::parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw pf::ContractError("slot 7");
               }),
               pf::ContractError);
}
