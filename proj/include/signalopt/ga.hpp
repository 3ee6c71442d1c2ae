#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "signalopt/assignment.hpp"
#include "signalopt/signals.hpp"

namespace signalopt {

using Chromosome = std::vector<double>;

struct GaConfig {
  std::size_t population_size = 75;
  std::size_t max_generations = 20;
  double p_crossover = 0.8;
  double p_mutation = 0.1;
  std::size_t elitism = 1;
  std::uint64_t seed = 42;
  // Fitness evaluation workers; 0 means one per hardware thread. Capped by
  // the SIGNALOPT_THREADS environment variable when set.
  std::size_t threads = 1;

  void validate() const;
};

// Seeded stream with platform-independent draws (the standard
// distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);  // [0, n)

 private:
  std::mt19937_64 engine_;
};

struct Evaluation {
  double fitness = 0.0;
  bool converged = true;
};

// Must be a pure function of the genes: it may be called from several
// threads at once.
using FitnessFunction = std::function<Evaluation(std::span<const double>)>;

// Decode, compute link green splits, solve the equilibrium and return the
// negated total travel time.
Evaluation fitness(std::span<const double> genes, const Network& net,
                   const ChromosomeLayout& layout, const CostParams& params = {},
                   const SolverOptions& opts = {});

// `net` must outlive the returned function.
FitnessFunction assignment_fitness(const Network& net, const ChromosomeLayout& layout,
                                   CostParams params = {}, SolverOptions opts = {});

// Memoised, optionally parallel batch evaluation. Keys are genes rounded to
// 1e-6 s; results are merged by individual index.
class FitnessCache {
 public:
  FitnessCache(FitnessFunction fn, std::size_t threads);

  std::vector<Evaluation> evaluate(std::span<const Chromosome> population);

  std::size_t evaluations() const { return evaluations_; }
  std::size_t hits() const { return hits_; }

 private:
  using Key = std::vector<std::int64_t>;
  static Key key_of(std::span<const double> genes);

  FitnessFunction fn_;
  std::size_t threads_;
  std::map<Key, Evaluation> memo_;
  std::size_t evaluations_ = 0;
  std::size_t hits_ = 0;
};

std::vector<Chromosome> init_population(const ChromosomeLayout& layout, const GaConfig& cfg,
                                        Rng& rng);

// Binary tournament: two distinct individuals, the fitter wins, ties go to
// the first drawn. Returns an index.
std::size_t tournament(std::span<const double> fitness, Rng& rng);

// child = father * x + mother * (1 - x), per-junction sums restored exactly
// and min-green repaired where needed.
Chromosome blend(std::span<const double> father, std::span<const double> mother, double x,
                 const ChromosomeLayout& layout);

std::pair<Chromosome, Chromosome> crossover(std::span<const double> father,
                                            std::span<const double> mother,
                                            const ChromosomeLayout& layout, const GaConfig& cfg,
                                            Rng& rng);

struct MutationDraw {
  std::size_t junction = 0;  // segment index
  std::size_t from_phase = 0;
  std::size_t to_phase = 0;
  double amount = 0.0;  // seconds moved from from_phase to to_phase
};

void apply_mutation(Chromosome& child, const ChromosomeLayout& layout, const MutationDraw& draw);

// With probability p_mutation moves a random amount in
// [0, p_from - min_green) between two phases of one junction.
std::optional<MutationDraw> mutate(Chromosome& child, const ChromosomeLayout& layout,
                                   const GaConfig& cfg, Rng& rng);

struct GenerationRecord {
  std::size_t generation = 0;  // 0 is the initial population
  std::vector<Chromosome> population;
  std::vector<double> fitness;
  std::vector<char> converged;
  double generation_best = 0.0;
  double best_so_far = 0.0;
  Chromosome best_genes;  // best so far
  std::size_t evaluations = 0;  // cache misses in this generation
};

struct GaResult {
  Chromosome best_chromosome;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> trace;
  std::size_t evaluations = 0;
  std::size_t cache_hits = 0;
  // trace entries (individual x generation) whose solve hit max_iterations
  std::size_t unconverged = 0;
};

using GenerationCallback = std::function<void(const GenerationRecord&)>;

// Generational GA with binary tournament, blend crossover, intra-junction
// mutation and elitism. `seeds` replace the first random individuals.
// RNG draws per child pair, in order: two tournaments (2 draws each),
// crossover gate, two blend weights if crossing, then per child a mutation
// gate and, if mutating, junction, source phase, target phase, amount.
GaResult run_ga(const FitnessFunction& fn, const ChromosomeLayout& layout, const GaConfig& cfg,
                std::span<const Chromosome> seeds = {}, const GenerationCallback& on_generation = {});

GaResult run_ga(const Network& net, const ChromosomeLayout& layout, const GaConfig& cfg,
                const CostParams& params = {}, const SolverOptions& opts = {},
                std::span<const Chromosome> seeds = {},
                const GenerationCallback& on_generation = {});

// Worker count after applying SIGNALOPT_THREADS.
std::size_t evaluation_threads(std::size_t requested);

}  // namespace signalopt
