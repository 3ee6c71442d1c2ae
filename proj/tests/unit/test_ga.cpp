#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "../support/check.hpp"
#include "../support/fixtures.hpp"
#include "signalopt/ga.hpp"

using namespace signalopt;
using doctest::Approx;

namespace {

// Cheap deterministic fitness with a unique optimum at the even split.
FitnessFunction bowl() {
  return [](std::span<const double> g) {
    double s = 0.0;
    for (double v : g) s += (v - 22.5) * (v - 22.5);
    return Evaluation{-s, true};
  };
}

ChromosomeLayout layout4x4() { return ChromosomeLayout::from_network(build_testbed()); }

void check_feasible(const Chromosome& c, const ChromosomeLayout& layout) {
  REQUIRE(c.size() == layout.gene_count());
  for (std::size_t j = 0; j < layout.segments().size(); ++j) {
    const auto seg = layout.segment(std::span<const double>(c), j);
    CHECK(segment_sum(seg) == layout.segments()[j].cycle);
    for (double d : seg) CHECK(d >= layout.min_green() - 1e-9);
  }
}

}  // namespace

TEST_CASE("rng draws are reproducible and in range") {
  Rng a(9), b(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto k = a.index(7);
    CHECK(k == b.index(7));
    CHECK(k < 7);
  }
  CHECK_THROWS_AS(a.index(0), InputError);
}

TEST_CASE("rng index is uniform") {
  Rng r(1);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[r.index(6)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
  CHECK(chi2 < 20.5);  // 5 dof, p ~ 0.001
}

TEST_CASE("initial population") {
  const auto layout = layout4x4();
  GaConfig cfg;
  Rng r1(42), r2(42);
  const auto p1 = init_population(layout, cfg, r1);
  CHECK(p1.size() == cfg.population_size);
  for (const auto& c : p1) check_feasible(c, layout);
  CHECK(p1 == init_population(layout, cfg, r2));

  // degenerate simplex: every gene forced to cycle / phases
  const auto net = fixture::Toy{}.network();
  const auto tight = ChromosomeLayout::from_network(net, 45.0);
  Rng r3(1);
  for (const auto& c : init_population(tight, cfg, r3)) CHECK(c == Chromosome{45.0, 45.0});
}

TEST_CASE("initial population is uniform on the simplex") {
  // For a flat Dirichlet over 4 phases, the share u of the free time held
  // by one phase has P(u <= t) = 1 - (1 - t)^3.
  const auto layout = layout4x4();
  GaConfig cfg;
  cfg.population_size = 5000;
  Rng rng(3);
  const auto pop = init_population(layout, cfg, rng);
  const double free = 90.0 - 4 * layout.min_green();
  for (std::size_t gene : {0u, 3u, 9u}) {
    std::vector<double> u;
    for (const auto& c : pop) u.push_back((c[gene] - layout.min_green()) / free);
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double cdf = 1.0 - std::pow(1.0 - u[i], 3);
      ks = std::max({ks, std::abs(cdf - double(i) / u.size()), std::abs(cdf - double(i + 1) / u.size())});
    }
    CHECK(ks < 1.95 / std::sqrt(double(u.size())));  // ~0.1% level
  }
}

TEST_CASE("binary tournament selection probabilities") {
  // Individual of rank r (0 = best) wins when drawn together with someone
  // worse: P = 2 (n - 1 - r) / (n (n - 1)).
  const std::vector<double> fit{-3.0, -1.0, -4.0, -2.0, -5.0};  // ranks 2,0,3,1,4
  const std::vector<int> rank{2, 0, 3, 1, 4};
  const int n = 5, draws = 200000;
  Rng rng(12);
  std::vector<int> wins(n, 0);
  for (int i = 0; i < draws; ++i) ++wins[tournament(fit, rng)];
  for (int k = 0; k < n; ++k) {
    const double p = 2.0 * (n - 1 - rank[k]) / (n * (n - 1.0));
    const double sd = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(wins[k] - draws * p) <= 5 * sd + 1e-9);
  }
  // all equal: the first drawn wins, so every index is equally likely
  const std::vector<double> flat(4, -1.0);
  std::vector<int> w(4, 0);
  for (int i = 0; i < 40000; ++i) ++w[tournament(flat, rng)];
  for (int c : w) CHECK(std::abs(c - 10000) < 5 * std::sqrt(40000 * 0.25 * 0.75));
}

TEST_CASE("blend crossover") {
  const auto layout = layout4x4();
  Rng rng(8);
  GaConfig cfg;
  const auto pop = init_population(layout, cfg, rng);
  const auto& f = pop[0];
  const auto& m = pop[1];
  for (double x : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const auto c = blend(f, m, x, layout);
    check_feasible(c, layout);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == Approx(f[i] * x + m[i] * (1 - x)).epsilon(1e-12));
  }
  CHECK(blend(f, m, 1.0, layout) == f);
  CHECK(blend(f, m, 0.0, layout) == m);
}

TEST_CASE("mutation moves time between two phases of one junction") {
  const auto layout = layout4x4();
  Chromosome c{18, 22, 12, 38, 20, 19, 15, 36, 17, 12, 17, 44, 30, 22, 9, 29};
  auto m = c;
  apply_mutation(m, layout, {2, 3, 0, 10.0});
  CHECK(m[8 + 3] == 34.0);
  CHECK(m[8 + 0] == 27.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (i != 11 && i != 8) CHECK(m[i] == c[i]);
  CHECK_THROWS_AS(apply_mutation(m, layout, {4, 0, 1, 1.0}), InputError);
  CHECK_THROWS_AS(apply_mutation(m, layout, {0, 1, 1, 1.0}), InputError);

  GaConfig always;
  always.p_mutation = 1.0;
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    auto x = c;
    const auto d = mutate(x, layout, always, rng);
    REQUIRE(d.has_value());
    const double before = c[layout.segments()[d->junction].offset + d->from_phase];
    CHECK(d->amount >= 0.0);
    CHECK(d->amount < std::max(before - layout.min_green(), 1e-300));
    check_feasible(x, layout);
  }
  GaConfig never;
  never.p_mutation = 0.0;
  auto y = c;
  CHECK_FALSE(mutate(y, layout, never, rng).has_value());
  CHECK(y == c);
}

TEST_CASE("property: operators preserve cycle sums exactly") {
  const auto layout = layout4x4();
  GaConfig cfg;
  cfg.population_size = 40;
  cfg.p_mutation = 0.5;
  Rng rng(2024);
  auto pop = init_population(layout, cfg, rng);
  for (int i = 0; i < 10000; ++i) {
    const auto a = rng.index(pop.size()), b = rng.index(pop.size());
    auto [c1, c2] = crossover(pop[a], pop[b], layout, cfg, rng);
    mutate(c1, layout, cfg, rng);
    mutate(c2, layout, cfg, rng);
    for (const auto* c : {&c1, &c2})
      for (std::size_t j = 0; j < layout.segments().size(); ++j) {
        const auto seg = layout.segment(std::span<const double>(*c), j);
        REQUIRE(segment_sum(seg) == 90.0);
        for (double d : seg) REQUIRE(d >= layout.min_green() - 1e-9);
      }
    pop[rng.index(pop.size())] = std::move(c1);
    pop[rng.index(pop.size())] = std::move(c2);
  }
}

TEST_CASE("fitness is the negated total travel time") {
  const auto net = build_testbed();
  const auto layout = ChromosomeLayout::from_network(net);
  const auto genes = encode_plans(initial_plans(net));
  const auto e = fitness(genes, net, layout);
  const auto r = solve_ue(net, link_green_splits(net, initial_plans(net)));
  CHECK(e.fitness == -r.total_travel_time);
  CHECK(e.converged);

  auto doc = fixture::Toy{}.doc();
  doc["demand"] = {{{"from", "A"}, {"to", "C"}, {"vph", 0}}};
  const auto empty = load_network(doc.dump());
  const auto l2 = ChromosomeLayout::from_network(empty);
  CHECK(fitness(std::vector<double>{45, 45}, empty, l2).fitness == 0.0);
}

TEST_CASE("fitness cache memoises on rounded genes and merges by index") {
  int calls = 0;
  FitnessCache cache(
      [&](std::span<const double> g) {
        ++calls;
        return Evaluation{-g[0], true};
      },
      1);
  std::vector<Chromosome> pop{{1.0, 2.0}, {1.0 + 1e-9, 2.0}, {3.0, 4.0}, {1.0, 2.0}};
  const auto r = cache.evaluate(pop);
  CHECK(calls == 2);
  CHECK(cache.evaluations() == 2);
  CHECK(cache.hits() == 2);
  CHECK(r[0].fitness == -1.0);
  CHECK(r[1].fitness == -1.0);
  CHECK(r[2].fitness == -3.0);
  cache.evaluate(pop);
  CHECK(calls == 2);

  std::vector<Chromosome> many;
  for (int i = 0; i < 64; ++i) many.push_back({double(i), 0.0});
  FitnessCache serial([](std::span<const double> g) { return Evaluation{g[0] * g[0], true}; }, 1);
  FitnessCache parallel([](std::span<const double> g) { return Evaluation{g[0] * g[0], true}; }, 4);
  const auto s = serial.evaluate(many);
  const auto p = parallel.evaluate(many);
  for (std::size_t i = 0; i < many.size(); ++i) CHECK(s[i].fitness == p[i].fitness);

  FitnessCache failing(
      [](std::span<const double> g) -> Evaluation {
        if (g[0] > 10) throw std::runtime_error("boom " + std::to_string(int(g[0])));
        return {0, true};
      },
      4);
  CHECK_THROWS_CONTAINING(std::runtime_error, failing.evaluate(many), "boom 11");
}

TEST_CASE("generation loop") {
  const auto layout = layout4x4();
  GaConfig cfg;
  cfg.population_size = 20;
  cfg.max_generations = 15;
  cfg.seed = 5;
  std::size_t seen = 0;
  const auto r = run_ga(bowl(), layout, cfg, {}, [&](const GenerationRecord& g) {
    CHECK(g.generation == seen++);
  });
  CHECK(r.trace.size() == 16);
  CHECK(seen == 16);
  for (std::size_t g = 1; g < r.trace.size(); ++g) {
    CHECK(r.trace[g].best_so_far >= r.trace[g - 1].best_so_far);
    // elitism: last generation's best survives unchanged
    CHECK(std::find(r.trace[g].population.begin(), r.trace[g].population.end(),
                    r.trace[g - 1].best_genes) != r.trace[g].population.end());
  }
  for (const auto& g : r.trace) {
    CHECK(g.population.size() == 20);
    for (const auto& c : g.population) check_feasible(c, layout);
  }
  CHECK(r.best_fitness == r.trace.back().best_so_far);
  CHECK(r.best_fitness > r.trace.front().generation_best);
  std::size_t evals = 0;
  for (const auto& g : r.trace) evals += g.evaluations;
  CHECK(evals == r.evaluations);
  CHECK(r.evaluations + r.cache_hits == 20 * 16);

  // same seed, same result; threads do not matter
  auto cfg4 = cfg;
  cfg4.threads = 4;
  const auto again = run_ga(bowl(), layout, cfg4);
  CHECK(again.best_chromosome == r.best_chromosome);
  for (std::size_t g = 0; g < r.trace.size(); ++g) CHECK(again.trace[g].population == r.trace[g].population);
}

TEST_CASE("zero generations reports the best initial individual") {
  const auto layout = layout4x4();
  GaConfig cfg;
  cfg.population_size = 10;
  cfg.max_generations = 0;
  const auto r = run_ga(bowl(), layout, cfg);
  REQUIRE(r.trace.size() == 1);
  const auto& f = r.trace[0].fitness;
  CHECK(r.best_fitness == *std::max_element(f.begin(), f.end()));
}

TEST_CASE("seeds enter the initial population") {
  const auto layout = layout4x4();
  GaConfig cfg;
  cfg.population_size = 10;
  cfg.max_generations = 3;
  const Chromosome even(16, 22.5);
  const std::vector<Chromosome> seeds{even};
  const auto r = run_ga(bowl(), layout, cfg, seeds);
  CHECK(r.trace[0].population[0] == even);
  CHECK(r.best_fitness == 0.0);
  CHECK(r.best_chromosome == even);
}

TEST_CASE("config validation") {
  GaConfig c;
  c.population_size = 1;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.p_crossover = 1.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.p_mutation = -0.1;
  CHECK_THROWS_AS(c.validate(), InputError);
}
