#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "rfv/geometry.hpp"
#include "rfv/system.hpp"

namespace rfv::evolution {

/// Single RNG stream driving every stochastic decision of a run.
using Rng = std::mt19937_64;

/// Variable-length genome: the evolvable rules only (apriori rules never
/// appear here).
struct Individual {
  std::vector<FuzzyRule> rules;
  std::optional<double> fitness;
  std::uint64_t id = 0;

  std::size_t rule_count() const noexcept { return rules.size(); }
};

struct GaConfig {
  std::size_t population_size = 50;
  std::size_t generations = 100;
  double p_crossover = 0.8;
  double p_mutation = 0.3;
  double p_structural = 0.1;
  std::size_t tournament_size = 2;
  std::size_t elite_count = 1;
  /// Site mutation std-dev, relative to the domain width.
  double sigma_site = 0.1;
  double sigma_coeff = 0.2;
  std::size_t min_rules = 1;
  std::size_t max_rules = 20;
  std::pair<std::size_t, std::size_t> init_rule_range{2, 8};
  std::uint64_t seed = 1;

  void validate() const;
};

struct AprioriSet {
  std::vector<FuzzyRule> rules;
};

/// Sites of the given rules, used to keep evolved sites clear of them.
std::vector<geometry::Point> sites_of(std::span<const FuzzyRule> rules);

/// Rule with a uniform site in the domain and coefficients uniform in [-1, 1].
FuzzyRule random_rule(const Dimensions& dims, const geometry::Box& domain, Rng& rng);

std::vector<Individual> init_population(const GaConfig& cfg, const Dimensions& dims,
                                        const geometry::Box& domain, Rng& rng,
                                        std::span<const geometry::Point> reserved = {});

/// Hyperplane used by crossover: unit normal and a point it passes through.
struct Hyperplane {
  std::vector<double> normal;
  geometry::Point origin;

  bool positive_side(std::span<const double> p) const;
};

Hyperplane random_hyperplane(const geometry::Box& domain, Rng& rng);

/// Exchanges rules across a hyperplane. Child 1 takes parent 1's rules on the
/// non-negative side and parent 2's on the negative side; child 2 the rest.
/// An empty child receives one uniformly chosen rule of parent 1.
std::pair<Individual, Individual> crossover_with(const Individual& p1, const Individual& p2,
                                                 const Hyperplane& plane, Rng& rng);
std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2,
                                            const geometry::Box& domain, Rng& rng);

/// Gaussian mutation (probability p_mutation) then structural add/delete
/// (probability p_structural, fair coin). Sites closer than the duplicate
/// tolerance to another site or to a reserved site are re-sampled.
Individual mutate(Individual ind, const GaConfig& cfg, const Dimensions& dims, const geometry::Box& domain,
                  Rng& rng, std::span<const geometry::Point> reserved = {});

/// Apriori rules first, then the individual's rules; one joint triangulation.
RfvSystem assemble(const Individual& ind, const AprioriSet& apriori, const Dimensions& dims,
                   const geometry::Box& domain, const geometry::TriangulationOptions& options = {});

/// Best of k distinct entrants (k is capped at the population size); ties go
/// to the lower id.
const Individual& select_tournament(std::span<const Individual> pop, std::size_t k, Rng& rng);

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t best_rule_count = 0;
  double mean_rule_count = 0.0;
};

struct GaResult {
  Individual best;
  std::vector<GenerationStats> history;
};

using FitnessFn = std::function<double(const Individual&)>;

struct RunOptions {
  /// Worker threads for fitness evaluation. Results do not depend on it.
  std::size_t jobs = 1;
  /// Re-evaluate every individual each generation (stochastic objectives).
  bool reevaluate_each_generation = false;
  /// Called after each generation's evaluation with the best-ever individual.
  std::function<void(const GenerationStats&, const Individual&)> on_generation;
};

/// Evaluates every individual lacking a fitness value, in parallel.
void evaluate_population(std::vector<Individual>& pop, const FitnessFn& fitness, std::size_t jobs,
                         bool force = false);

/// Generational GA, maximizing. Generation 0 is the initial population;
/// `cfg.generations` rounds of variation follow, so the history holds
/// generations + 1 rows.
GaResult run_ga(const GaConfig& cfg, const AprioriSet& apriori, const Dimensions& dims,
                const geometry::Box& domain, const FitnessFn& fitness, Rng& rng, const RunOptions& options = {});

}  // namespace rfv::evolution
