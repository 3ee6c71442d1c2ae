#include "signalopt/ga.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

namespace signalopt {

void GaConfig::validate() const {
  if (population_size < 2) throw InputError("population size must be at least 2");
  if (!(p_crossover >= 0.0 && p_crossover <= 1.0))
    throw InputError("crossover probability must be in [0, 1]");
  if (!(p_mutation >= 0.0 && p_mutation <= 1.0))
    throw InputError("mutation probability must be in [0, 1]");
  if (elitism >= population_size) throw InputError("elitism must be below the population size");
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw InputError("Rng::index on an empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % range);
}

std::size_t evaluation_threads(std::size_t requested) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("SIGNALOPT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

// ---------------------------------------------------------------------------

Evaluation fitness(std::span<const double> genes, const Network& net,
                   const ChromosomeLayout& layout, const CostParams& params,
                   const SolverOptions& opts) {
  const auto plans = decode_chromosome(genes, layout, net);
  const auto lambdas = link_green_splits(net, plans);
  SolverOptions solve_opts = opts;
  solve_opts.track_routes = false;
  const auto r = solve_ue(net, lambdas, params, solve_opts);
  return {-r.total_travel_time, r.converged};
}

FitnessFunction assignment_fitness(const Network& net, const ChromosomeLayout& layout,
                                   CostParams params, SolverOptions opts) {
  return [&net, layout, params, opts](std::span<const double> genes) {
    return fitness(genes, net, layout, params, opts);
  };
}

FitnessCache::FitnessCache(FitnessFunction fn, std::size_t threads)
    : fn_(std::move(fn)), threads_(std::max<std::size_t>(1, threads)) {}

FitnessCache::Key FitnessCache::key_of(std::span<const double> genes) {
  Key k;
  k.reserve(genes.size());
  for (double g : genes) k.push_back(std::llround(g * 1e6));
  return k;
}

std::vector<Evaluation> FitnessCache::evaluate(std::span<const Chromosome> population) {
  std::vector<Key> keys;
  keys.reserve(population.size());
  std::vector<std::size_t> jobs;  // first individual carrying each new key
  std::map<Key, std::size_t> pending;
  for (std::size_t i = 0; i < population.size(); ++i) {
    keys.push_back(key_of(population[i]));
    if (memo_.count(keys.back()) || pending.count(keys.back())) {
      ++hits_;
      continue;
    }
    pending.emplace(keys.back(), i);
    jobs.push_back(i);
  }

  std::vector<Evaluation> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  auto work = [&](std::size_t j) {
    try {
      results[j] = fn_(population[jobs[j]]);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(threads_, jobs.size());
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) work(j);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  evaluations_ += jobs.size();
  for (std::size_t j = 0; j < jobs.size(); ++j) memo_.emplace(keys[jobs[j]], results[j]);
  std::vector<Evaluation> out;
  out.reserve(population.size());
  for (const auto& k : keys) out.push_back(memo_.at(k));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t largest(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_layout(std::span<const double> genes, const ChromosomeLayout& layout) {
  if (genes.size() != layout.gene_count())
    throw InputError("chromosome has " + std::to_string(genes.size()) +
                     " genes, layout expects " + std::to_string(layout.gene_count()));
}

}  // namespace

std::vector<Chromosome> init_population(const ChromosomeLayout& layout, const GaConfig& cfg,
                                        Rng& rng) {
  std::vector<Chromosome> population;
  population.reserve(cfg.population_size);
  std::vector<double> cuts;
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    Chromosome c(layout.gene_count());
    for (std::size_t j = 0; j < layout.segments().size(); ++j) {
      const auto& seg = layout.segments()[j];
      const double free = seg.cycle - static_cast<double>(seg.phase_count) * layout.min_green();
      // Uniform spacings of sorted uniforms: flat Dirichlet on the simplex.
      cuts.assign(1, 0.0);
      for (std::size_t k = 1; k < seg.phase_count; ++k) cuts.push_back(rng.uniform());
      std::sort(cuts.begin() + 1, cuts.end());
      cuts.push_back(1.0);
      auto genes = layout.segment(std::span<double>(c), j);
      for (std::size_t k = 0; k < seg.phase_count; ++k)
        genes[k] = layout.min_green() + free * (cuts[k + 1] - cuts[k]);
      close_cycle(genes, seg.cycle, largest(genes));
    }
    population.push_back(std::move(c));
  }
  return population;
}

std::size_t tournament(std::span<const double> fitness, Rng& rng) {
  const auto n = fitness.size();
  if (n == 0) throw InputError("tournament on an empty population");
  if (n == 1) return 0;
  const auto first = rng.index(n);
  auto second = rng.index(n - 1);
  if (second >= first) ++second;
  return fitness[second] > fitness[first] ? second : first;
}

Chromosome blend(std::span<const double> father, std::span<const double> mother, double x,
                 const ChromosomeLayout& layout) {
  check_layout(father, layout);
  check_layout(mother, layout);
  Chromosome child(father.size());
  for (std::size_t i = 0; i < child.size(); ++i)
    child[i] = father[i] * x + mother[i] * (1.0 - x);
  for (std::size_t j = 0; j < layout.segments().size(); ++j) {
    auto genes = layout.segment(std::span<double>(child), j);
    const double cycle = layout.segments()[j].cycle;
    close_cycle(genes, cycle, largest(genes));
    if (std::any_of(genes.begin(), genes.end(),
                    [&](double d) { return d < layout.min_green() - 1e-9; })) {
      const auto fixed = repair(genes, cycle, layout.min_green());
      std::copy(fixed.begin(), fixed.end(), genes.begin());
    }
  }
  return child;
}

std::pair<Chromosome, Chromosome> crossover(std::span<const double> father,
                                            std::span<const double> mother,
                                            const ChromosomeLayout& layout, const GaConfig& cfg,
                                            Rng& rng) {
  check_layout(father, layout);
  check_layout(mother, layout);
  if (rng.uniform() < cfg.p_crossover) {
    const double x1 = rng.uniform();
    const double x2 = rng.uniform();
    return {blend(father, mother, x1, layout), blend(father, mother, x2, layout)};
  }
  return {Chromosome(father.begin(), father.end()), Chromosome(mother.begin(), mother.end())};
}

void apply_mutation(Chromosome& child, const ChromosomeLayout& layout, const MutationDraw& draw) {
  check_layout(child, layout);
  if (draw.junction >= layout.segments().size())
    throw InputError("mutation junction out of range");
  const auto& seg = layout.segments()[draw.junction];
  if (draw.from_phase >= seg.phase_count || draw.to_phase >= seg.phase_count ||
      draw.from_phase == draw.to_phase)
    throw InputError("mutation phases must be two distinct phases of the junction");
  if (draw.amount == 0.0) return;
  auto genes = layout.segment(std::span<double>(child), draw.junction);
  genes[draw.from_phase] -= draw.amount;
  genes[draw.to_phase] += draw.amount;
  close_cycle(genes, seg.cycle, draw.to_phase);
}

std::optional<MutationDraw> mutate(Chromosome& child, const ChromosomeLayout& layout,
                                   const GaConfig& cfg, Rng& rng) {
  if (!(rng.uniform() < cfg.p_mutation)) return std::nullopt;
  MutationDraw draw;
  draw.junction = rng.index(layout.segments().size());
  const auto& seg = layout.segments()[draw.junction];
  if (seg.phase_count < 2) return std::nullopt;
  draw.from_phase = rng.index(seg.phase_count);
  draw.to_phase = rng.index(seg.phase_count - 1);
  if (draw.to_phase >= draw.from_phase) ++draw.to_phase;
  const double current = child[seg.offset + draw.from_phase];
  draw.amount = rng.uniform() * std::max(0.0, current - layout.min_green());
  apply_mutation(child, layout, draw);
  return draw;
}

// ---------------------------------------------------------------------------

GaResult run_ga(const FitnessFunction& fn, const ChromosomeLayout& layout, const GaConfig& cfg,
                std::span<const Chromosome> seeds, const GenerationCallback& on_generation) {
  cfg.validate();
  Rng rng(cfg.seed);
  FitnessCache cache(fn, evaluation_threads(cfg.threads));

  auto population = init_population(layout, cfg, rng);
  for (std::size_t i = 0; i < seeds.size() && i < population.size(); ++i) {
    check_layout(seeds[i], layout);
    Chromosome seeded(seeds[i].begin(), seeds[i].end());
    for (std::size_t j = 0; j < layout.segments().size(); ++j) {
      auto genes = layout.segment(std::span<double>(seeded), j);
      const auto fixed = repair(genes, layout.segments()[j].cycle, layout.min_green());
      std::copy(fixed.begin(), fixed.end(), genes.begin());
    }
    population[i] = std::move(seeded);
  }

  GaResult result;
  bool have_best = false;
  auto record = [&](std::size_t generation, std::vector<Chromosome> members) {
    const auto before = cache.evaluations();
    const auto evals = cache.evaluate(members);
    GenerationRecord rec;
    rec.generation = generation;
    rec.evaluations = cache.evaluations() - before;
    for (const auto& e : evals) {
      rec.fitness.push_back(e.fitness);
      rec.converged.push_back(e.converged ? 1 : 0);
    }
    result.unconverged += static_cast<std::size_t>(
        std::count(rec.converged.begin(), rec.converged.end(), 0));
    const auto top = static_cast<std::size_t>(
        std::max_element(rec.fitness.begin(), rec.fitness.end()) - rec.fitness.begin());
    rec.generation_best = rec.fitness[top];
    if (!have_best || rec.fitness[top] > result.best_fitness) {
      result.best_fitness = rec.fitness[top];
      result.best_chromosome = members[top];
      have_best = true;
    }
    rec.best_so_far = result.best_fitness;
    rec.best_genes = result.best_chromosome;
    rec.population = std::move(members);
    if (on_generation) on_generation(rec);
    result.trace.push_back(std::move(rec));
  };

  record(0, std::move(population));
  for (std::size_t g = 1; g <= cfg.max_generations; ++g) {
    const auto& last = result.trace.back();
    std::vector<std::size_t> order(last.fitness.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return last.fitness[a] > last.fitness[b]; });

    std::vector<Chromosome> next;
    next.reserve(cfg.population_size);
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(last.population[order[e]]);
    while (next.size() < cfg.population_size) {
      const auto& father = last.population[tournament(last.fitness, rng)];
      const auto& mother = last.population[tournament(last.fitness, rng)];
      auto [first, second] = crossover(father, mother, layout, cfg, rng);
      mutate(first, layout, cfg, rng);
      mutate(second, layout, cfg, rng);
      next.push_back(std::move(first));
      if (next.size() < cfg.population_size) next.push_back(std::move(second));
    }
    record(g, std::move(next));
  }

  result.evaluations = cache.evaluations();
  result.cache_hits = cache.hits();
  return result;
}

GaResult run_ga(const Network& net, const ChromosomeLayout& layout, const GaConfig& cfg,
                const CostParams& params, const SolverOptions& opts,
                std::span<const Chromosome> seeds, const GenerationCallback& on_generation) {
  return run_ga(assignment_fitness(net, layout, params, opts), layout, cfg, seeds,
                on_generation);
}

}  // namespace signalopt
