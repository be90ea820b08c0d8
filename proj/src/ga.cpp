#include "phasebal/ga.hpp"

#include <algorithm>
#include <thread>

#include "phasebal/error.hpp"

namespace phasebal::ga {

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject the low 2^64 mod n values so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = next();
    if (x >= threshold) return x % n;
  }
}

void GaConfig::check() const {
  if (population_size < 4 || population_size % 2 != 0)
    throw ConfigError("population size must be even and at least 4");
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
    throw ConfigError("mutation probability must lie in [0, 1]");
  if (stall_generations < 1) throw ConfigError("stall generations must be at least 1");
  if (max_generations < 1) throw ConfigError("max generations must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (mutated_individuals)
    throw ConfigError("mutated individual count is not used by deterministic crowding; remove it");
  weights.check();
  if (!(solver.tolerance > 0.0) || solver.max_iterations < 1) throw ConfigError("invalid solver options");
}

std::vector<PhaseAssignment> random_population(std::size_t gene_count, std::size_t size, Rng& rng,
                                               std::shared_ptr<const GeneLayout> layout) {
  std::vector<PhaseAssignment> out;
  out.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    std::vector<std::uint8_t> genes(gene_count);
    for (auto& g : genes) g = static_cast<std::uint8_t>(1 + rng.below(3));
    out.emplace_back(std::move(genes), layout);
  }
  return out;
}

std::pair<PhaseAssignment, PhaseAssignment> crossover_with_mask(const PhaseAssignment& p1, const PhaseAssignment& p2,
                                                                const std::vector<bool>& mask) {
  if (p1.size() != p2.size()) throw LengthMismatch(p1.size(), p2.size());
  if (mask.size() != p1.size()) throw LengthMismatch(p1.size(), mask.size());
  std::vector<std::uint8_t> a(p1.genes().begin(), p1.genes().end());
  std::vector<std::uint8_t> b(p2.genes().begin(), p2.genes().end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask[i]) std::swap(a[i], b[i]);
  return {PhaseAssignment(std::move(a), p1.layout()), PhaseAssignment(std::move(b), p2.layout())};
}

std::vector<bool> draw_swap_mask(std::size_t gene_count, Rng& rng) {
  std::vector<bool> mask(gene_count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < gene_count; ++i) {
    if (i % 64 == 0) word = rng.next();
    mask[i] = ((word >> (i % 64)) & 1u) != 0;
  }
  return mask;
}

std::pair<PhaseAssignment, PhaseAssignment> uniform_crossover(const PhaseAssignment& p1, const PhaseAssignment& p2,
                                                              Rng& rng) {
  if (p1.size() != p2.size()) throw LengthMismatch(p1.size(), p2.size());
  return crossover_with_mask(p1, p2, draw_swap_mask(p1.size(), rng));
}

PhaseAssignment mutate(const PhaseAssignment& a, double probability, Rng& rng) {
  std::vector<std::uint8_t> genes(a.genes().begin(), a.genes().end());
  if (probability > 0.0) {
    for (auto& g : genes) {
      if (!(rng.unit() < probability)) continue;
      const auto shift = static_cast<std::uint8_t>(1 + rng.below(2));
      g = static_cast<std::uint8_t>((g - 1 + shift) % 3 + 1);
    }
  }
  return PhaseAssignment(std::move(genes), a.layout());
}

std::vector<Individual> dc_compete(std::span<const Individual> parents, std::span<const Individual> children) {
  if (parents.size() != children.size()) throw LengthMismatch(parents.size(), children.size());
  if (parents.size() % 2 != 0) throw Error("population size must be even");
  auto winner = [](const Individual& parent, const Individual& child) -> const Individual& {
    return child.fitness() > parent.fitness() ? child : parent;
  };
  std::vector<Individual> next;
  next.reserve(parents.size());
  for (std::size_t k = 0; k < parents.size(); k += 2) {
    const Individual& p1 = parents[k];
    const Individual& p2 = parents[k + 1];
    const Individual& c1 = children[k];
    const Individual& c2 = children[k + 1];
    const std::size_t straight = hamming(p1.genome, c1.genome) + hamming(p2.genome, c2.genome);
    const std::size_t crossed = hamming(p1.genome, c2.genome) + hamming(p2.genome, c1.genome);
    if (straight <= crossed) {
      next.push_back(winner(p1, c1));
      next.push_back(winner(p2, c2));
    } else {
      next.push_back(winner(p1, c2));
      next.push_back(winner(p2, c1));
    }
  }
  return next;
}

std::vector<Individual> dc_generation(std::span<const Individual> population, Rng& rng, const BatchFitness& fitness,
                                      double mutation_probability) {
  if (population.size() % 2 != 0 || population.empty()) throw Error("population size must be even and non-empty");

  std::vector<Individual> parents(population.begin(), population.end());
  for (std::size_t i = parents.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(parents[i], parents[j]);
  }

  std::vector<PhaseAssignment> offspring;
  offspring.reserve(parents.size());
  for (std::size_t k = 0; k < parents.size(); k += 2) {
    auto [c1, c2] = uniform_crossover(parents[k].genome, parents[k + 1].genome, rng);
    if (mutation_probability > 0.0) {
      c1 = mutate(c1, mutation_probability, rng);
      c2 = mutate(c2, mutation_probability, rng);
    }
    offspring.push_back(std::move(c1));
    offspring.push_back(std::move(c2));
  }

  auto reports = fitness(offspring);
  if (reports.size() != offspring.size()) throw Error("fitness returned the wrong number of reports");
  std::vector<Individual> children;
  children.reserve(offspring.size());
  for (std::size_t k = 0; k < offspring.size(); ++k)
    children.push_back({std::move(offspring[k]), std::move(reports[k])});
  return dc_compete(parents, children);
}

FitnessCache::FitnessCache(Single fn, unsigned threads) : fn_(std::move(fn)), threads_(std::max(1u, threads)) {}

std::vector<FitnessReport> FitnessCache::operator()(std::span<const PhaseAssignment> genomes) {
  std::vector<std::size_t> misses;
  std::unordered_map<std::string, std::size_t> pending;
  for (std::size_t k = 0; k < genomes.size(); ++k) {
    const std::string key = genomes[k].key();
    if (cache_.contains(key) || pending.contains(key)) continue;
    pending.emplace(key, misses.size());
    misses.push_back(k);
  }

  std::vector<FitnessReport> fresh(misses.size());
  const unsigned workers = std::min<unsigned>(threads_, static_cast<unsigned>(misses.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < misses.size(); ++i) fresh[i] = fn_(genomes[misses[i]]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < misses.size(); i += workers) fresh[i] = fn_(genomes[misses[i]]);
      });
  }
  for (std::size_t i = 0; i < misses.size(); ++i) cache_.emplace(genomes[misses[i]].key(), std::move(fresh[i]));

  std::vector<FitnessReport> out;
  out.reserve(genomes.size());
  for (const auto& g : genomes) out.push_back(cache_.at(g.key()));
  return out;
}

BatchFitness FitnessCache::batch() {
  return [this](std::span<const PhaseAssignment> genomes) { return (*this)(genomes); };
}

namespace {

std::size_t best_index(std::span<const Individual> population) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < population.size(); ++k)
    if (population[k].fitness() > population[best].fitness()) best = k;
  return best;
}

GenerationRecord record(std::size_t generation, const FitnessReport& r) {
  return {generation, r.fitness, r.imbalance_b, r.voltage_drop, r.changes};
}

}  // namespace

GaRunResult run(std::size_t gene_count, const FitnessCache::Single& fitness, const GaConfig& config,
                std::shared_ptr<const GeneLayout> layout) {
  config.check();
  if (gene_count == 0) throw NoMovableCustomers();

  Rng rng(config.rng_seed);
  FitnessCache cache(fitness, config.threads);
  const BatchFitness batch = cache.batch();

  auto genomes = random_population(gene_count, config.population_size, rng, std::move(layout));
  auto reports = batch(genomes);
  std::vector<Individual> population;
  population.reserve(genomes.size());
  for (std::size_t k = 0; k < genomes.size(); ++k) population.push_back({std::move(genomes[k]), std::move(reports[k])});

  GaRunResult result;
  Individual best = population[best_index(population)];
  result.history.push_back(record(0, best.report));

  std::size_t stall = 0;
  std::size_t generation = 0;
  while (generation < config.max_generations && stall < config.stall_generations) {
    population = dc_generation(population, rng, batch, config.mutation_probability);
    ++generation;
    const Individual& leader = population[best_index(population)];
    if (leader.fitness() > best.fitness()) {
      best = leader;
      stall = 0;
    } else {
      ++stall;
    }
    result.history.push_back(record(generation, best.report));
  }

  result.best = std::move(best.genome);
  result.best_report = std::move(best.report);
  result.generations_run = generation;
  result.final_population = std::move(population);
  result.evaluations = cache.size();
  return result;
}

GaRunResult run(const Network& network, const LoadProfile& profile, const GaConfig& config) {
  config.check();
  auto layout = GeneLayout::of(network);
  if (layout->size() == 0) throw NoMovableCustomers();
  const Evaluator evaluator(network, profile, config.weights, config.solver);
  return run(
      layout->size(), [&evaluator](const PhaseAssignment& a) { return evaluator(a); }, config, layout);
}

}  // namespace phasebal::ga
