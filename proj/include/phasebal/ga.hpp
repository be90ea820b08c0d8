#pragma once

// Deterministic Crowding over integer phase genomes.
//
// Random stream discipline: one Rng per run, seeded with GaConfig::rng_seed,
// consumed strictly in this order on the sequential path:
//   1. initial population: individual by individual, gene by gene, 1 + below(3);
//   2. every generation:
//      a. shuffle: Fisher-Yates, i = size-1 .. 1, j = below(i + 1);
//      b. per consecutive pair: ceil(m / 64) raw words; gene i swaps when bit
//         i % 64 of word i / 64 is set;
//      c. only when mutation_probability > 0, right after the pair's crossover,
//         child 1 then child 2, gene by gene: unit() < p, and on a hit
//         below(2) picks one of the two other phases.
// Fitness evaluation never touches the stream, so evaluating in parallel
// leaves results unchanged.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phasebal/assignment.hpp"
#include "phasebal/load_flow.hpp"
#include "phasebal/metrics.hpp"

namespace phasebal::ga {

// Portable draws on top of std::mt19937_64, whose output sequence is fixed by
// the standard (unlike the std distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n), n > 0, by rejection.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct Individual {
  PhaseAssignment genome;
  FitnessReport report;

  double fitness() const noexcept { return report.fitness; }
  friend bool operator==(const Individual&, const Individual&) = default;
};

// Scores a batch of genomes; element k of the result belongs to genome k.
using BatchFitness = std::function<std::vector<FitnessReport>(std::span<const PhaseAssignment>)>;

struct GaConfig {
  std::size_t population_size = 100;  // even, >= 4
  double mutation_probability = 0.0;  // per gene
  std::size_t stall_generations = 50;
  std::size_t max_generations = 2000;
  std::uint64_t rng_seed = 1;
  ObjectiveWeights weights;
  SolverOptions solver;
  unsigned threads = 1;  // fitness evaluation workers
  // Number of mutated individuals. Has no meaning in this algorithm and is
  // rejected when set.
  std::optional<std::size_t> mutated_individuals;

  // Throws ConfigError.
  void check() const;
};

struct GenerationRecord {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double imbalance_b = 0.0;
  double voltage_drop = 0.0;
  std::size_t changes = 0;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct GaRunResult {
  PhaseAssignment best;
  FitnessReport best_report;
  std::size_t generations_run = 0;
  std::vector<GenerationRecord> history;  // generation 0 is the initial population
  std::vector<Individual> final_population;
  std::size_t evaluations = 0;  // distinct genomes scored

  friend bool operator==(const GaRunResult&, const GaRunResult&) = default;
};

std::vector<PhaseAssignment> random_population(std::size_t gene_count, std::size_t size, Rng& rng,
                                               std::shared_ptr<const GeneLayout> layout = nullptr);

// Children of swapping the genes selected by mask. Throws LengthMismatch.
std::pair<PhaseAssignment, PhaseAssignment> crossover_with_mask(const PhaseAssignment& p1, const PhaseAssignment& p2,
                                                                const std::vector<bool>& mask);

std::vector<bool> draw_swap_mask(std::size_t gene_count, Rng& rng);

// Each gene swapped between the parents with probability 0.5.
std::pair<PhaseAssignment, PhaseAssignment> uniform_crossover(const PhaseAssignment& p1, const PhaseAssignment& p2,
                                                              Rng& rng);

// Each gene replaced with probability p by one of the two other phases.
PhaseAssignment mutate(const PhaseAssignment& a, double probability, Rng& rng);

// Replacement step: parents[k], parents[k+1] against children[k], children[k+1]
// for even k, pairing by the smaller total Hamming distance (ties keep the
// straight pairing) and keeping the fitter of each match, the parent on ties.
std::vector<Individual> dc_compete(std::span<const Individual> parents, std::span<const Individual> children);

// One generation: shuffle, pairwise crossover (and optional mutation),
// evaluation, replacement. Returns the next population in shuffled order.
std::vector<Individual> dc_generation(std::span<const Individual> population, Rng& rng, const BatchFitness& fitness,
                                      double mutation_probability = 0.0);

// Memoizes an inner BatchFitness per genome and optionally spreads the
// distinct misses over worker threads.
class FitnessCache {
 public:
  using Single = std::function<FitnessReport(const PhaseAssignment&)>;

  explicit FitnessCache(Single fn, unsigned threads = 1);

  std::vector<FitnessReport> operator()(std::span<const PhaseAssignment> genomes);
  BatchFitness batch();
  std::size_t size() const noexcept { return cache_.size(); }

 private:
  Single fn_;
  unsigned threads_;
  std::unordered_map<std::string, FitnessReport> cache_;
};

// Generic driver over any fitness; genomes have gene_count genes.
GaRunResult run(std::size_t gene_count, const FitnessCache::Single& fitness, const GaConfig& config,
                std::shared_ptr<const GeneLayout> layout = nullptr);

// Optimizes the movable customers of the network over the profile.
// Throws NoMovableCustomers.
GaRunResult run(const Network& network, const LoadProfile& profile, const GaConfig& config);

}  // namespace phasebal::ga
