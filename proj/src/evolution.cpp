#include "rfv/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace rfv::evolution {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double gaussian(Rng& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

geometry::Point uniform_site(const geometry::Box& domain, Rng& rng) {
  geometry::Point p(domain.dimension());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::uniform_real_distribution<double>(domain.lower[i], domain.upper[i])(rng);
  }
  return p;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

bool crowded(std::span<const double> site, std::span<const FuzzyRule> earlier,
             std::span<const geometry::Point> reserved, double tol2) {
  for (const FuzzyRule& r : earlier) {
    if (squared_distance(site, r.site) < tol2) return true;
  }
  for (const geometry::Point& p : reserved) {
    if (squared_distance(site, p) < tol2) return true;
  }
  return false;
}

// Re-samples every site that lies within the duplicate tolerance of an
// earlier site or a reserved site. Returns whether anything moved.
bool separate_sites(std::vector<FuzzyRule>& rules, const geometry::Box& domain, Rng& rng,
                    std::span<const geometry::Point> reserved) {
  const double tol = geometry::TriangulationOptions{}.duplicate_tolerance * domain.width();
  const double tol2 = tol * tol;
  bool moved = false;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::span<const FuzzyRule> earlier(rules.data(), i);
    while (crowded(rules[i].site, earlier, reserved, tol2)) {
      rules[i].site = uniform_site(domain, rng);
      moved = true;
    }
  }
  return moved;
}

bool better(const Individual& a, const Individual& b) {
  const double fa = a.fitness.value_or(-std::numeric_limits<double>::infinity());
  const double fb = b.fitness.value_or(-std::numeric_limits<double>::infinity());
  if (fa != fb) return fa > fb;
  return a.id < b.id;
}

GenerationStats summarize(std::size_t generation, const std::vector<Individual>& pop) {
  GenerationStats s;
  s.generation = generation;
  const auto best = std::min_element(pop.begin(), pop.end(), better);
  s.best_fitness = *best->fitness;
  s.best_rule_count = best->rule_count();
  double fsum = 0.0;
  double rsum = 0.0;
  for (const Individual& ind : pop) {
    fsum += *ind.fitness;
    rsum += static_cast<double>(ind.rule_count());
  }
  s.mean_fitness = fsum / static_cast<double>(pop.size());
  s.mean_rule_count = rsum / static_cast<double>(pop.size());
  return s;
}

}  // namespace

void GaConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population_size < 2) throw ModelError("population_size must be at least 2");
  if (!prob(p_crossover) || !prob(p_mutation) || !prob(p_structural)) {
    throw ModelError("probabilities must lie in [0, 1]");
  }
  if (tournament_size < 1) throw ModelError("tournament_size must be at least 1");
  if (elite_count > population_size) throw ModelError("elite_count exceeds population_size");
  if (min_rules < 1 || max_rules < min_rules) throw ModelError("need 1 <= min_rules <= max_rules");
  if (init_rule_range.first < min_rules || init_rule_range.second > max_rules ||
      init_rule_range.first > init_rule_range.second) {
    throw ModelError("init_rule_range must lie within [min_rules, max_rules]");
  }
  if (!(sigma_site >= 0.0) || !(sigma_coeff >= 0.0)) throw ModelError("mutation sigmas must be non-negative");
}

std::vector<geometry::Point> sites_of(std::span<const FuzzyRule> rules) {
  std::vector<geometry::Point> out;
  out.reserve(rules.size());
  for (const FuzzyRule& r : rules) out.push_back(r.site);
  return out;
}

FuzzyRule random_rule(const Dimensions& dims, const geometry::Box& domain, Rng& rng) {
  FuzzyRule rule;
  rule.site = uniform_site(domain, rng);
  rule.coefficients.resize(dims.rule_outputs() * dims.coefficient_columns());
  for (double& a : rule.coefficients) a = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  return rule;
}

std::vector<Individual> init_population(const GaConfig& cfg, const Dimensions& dims,
                                        const geometry::Box& domain, Rng& rng,
                                        std::span<const geometry::Point> reserved) {
  cfg.validate();
  std::vector<Individual> pop(cfg.population_size);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const std::size_t count = std::uniform_int_distribution<std::size_t>(
        cfg.init_rule_range.first, cfg.init_rule_range.second)(rng);
    pop[i].id = i;
    for (std::size_t k = 0; k < count; ++k) pop[i].rules.push_back(random_rule(dims, domain, rng));
    separate_sites(pop[i].rules, domain, rng, reserved);
  }
  return pop;
}

bool Hyperplane::positive_side(std::span<const double> p) const {
  double s = 0.0;
  for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * (p[i] - origin[i]);
  return s >= 0.0;
}

Hyperplane random_hyperplane(const geometry::Box& domain, Rng& rng) {
  Hyperplane h;
  const std::size_t d = domain.dimension();
  h.normal.resize(d);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& v : h.normal) {
      v = gaussian(rng, 1.0);
      norm += v * v;
    }
  }
  norm = std::sqrt(norm);
  for (double& v : h.normal) v /= norm;
  h.origin = uniform_site(domain, rng);
  return h;
}

std::pair<Individual, Individual> crossover_with(const Individual& p1, const Individual& p2,
                                                 const Hyperplane& plane, Rng& rng) {
  Individual c1;
  Individual c2;
  std::size_t c1_from_p1 = 0;
  std::size_t c2_from_p2 = 0;
  for (const FuzzyRule& r : p1.rules) {
    if (plane.positive_side(r.site)) {
      c1.rules.push_back(r);
      ++c1_from_p1;
    } else {
      c2.rules.push_back(r);
    }
  }
  for (const FuzzyRule& r : p2.rules) {
    if (plane.positive_side(r.site)) {
      c2.rules.push_back(r);
      ++c2_from_p2;
    } else {
      c1.rules.push_back(r);
    }
  }
  if (c1_from_p1 == p1.rules.size() && c1.rules.size() == p1.rules.size()) c1.fitness = p1.fitness;
  if (c2_from_p2 == p2.rules.size() && c2.rules.size() == p2.rules.size()) c2.fitness = p2.fitness;
  for (Individual* child : {&c1, &c2}) {
    if (child->rules.empty() && !p1.rules.empty()) {
      child->rules.push_back(p1.rules[uniform_index(rng, p1.rules.size())]);
      child->fitness.reset();
    }
  }
  return {std::move(c1), std::move(c2)};
}

std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2,
                                            const geometry::Box& domain, Rng& rng) {
  const Hyperplane plane = random_hyperplane(domain, rng);
  return crossover_with(p1, p2, plane, rng);
}

Individual mutate(Individual ind, const GaConfig& cfg, const Dimensions& dims, const geometry::Box& domain,
                  Rng& rng, std::span<const geometry::Point> reserved) {
  bool changed = false;
  if (uniform01(rng) < cfg.p_mutation) {
    const double sigma_site = cfg.sigma_site * domain.width();
    for (FuzzyRule& r : ind.rules) {
      for (std::size_t i = 0; i < r.site.size(); ++i) {
        r.site[i] = std::clamp(r.site[i] + gaussian(rng, sigma_site), domain.lower[i], domain.upper[i]);
      }
      for (double& a : r.coefficients) a += gaussian(rng, cfg.sigma_coeff);
    }
    changed = true;
  }
  if (uniform01(rng) < cfg.p_structural) {
    const bool add = uniform01(rng) < 0.5;
    if (add && ind.rules.size() < cfg.max_rules) {
      ind.rules.push_back(random_rule(dims, domain, rng));
      changed = true;
    } else if (!add && ind.rules.size() > cfg.min_rules) {
      ind.rules.erase(ind.rules.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, ind.rules.size())));
      changed = true;
    }
  }
  changed = separate_sites(ind.rules, domain, rng, reserved) || changed;
  if (changed) ind.fitness.reset();
  return ind;
}

RfvSystem assemble(const Individual& ind, const AprioriSet& apriori, const Dimensions& dims,
                   const geometry::Box& domain, const geometry::TriangulationOptions& options) {
  std::vector<FuzzyRule> rules;
  rules.reserve(apriori.rules.size() + ind.rules.size());
  for (FuzzyRule r : apriori.rules) {
    r.frozen = true;
    rules.push_back(std::move(r));
  }
  for (FuzzyRule r : ind.rules) {
    r.frozen = false;
    rules.push_back(std::move(r));
  }
  return RfvSystem(dims, std::move(rules), domain, options);
}

const Individual& select_tournament(std::span<const Individual> pop, std::size_t k, Rng& rng) {
  if (pop.empty()) throw ModelError("tournament over an empty population");
  // Distinct entrants: a partial Fisher-Yates shuffle of the indices.
  const std::size_t entrants = std::clamp<std::size_t>(k, 1, pop.size());
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  const Individual* winner = nullptr;
  for (std::size_t i = 0; i < entrants; ++i) {
    std::swap(idx[i], idx[i + uniform_index(rng, pop.size() - i)]);
    const Individual& entrant = pop[idx[i]];
    if (!winner || better(entrant, *winner)) winner = &entrant;
  }
  return *winner;
}

void evaluate_population(std::vector<Individual>& pop, const FitnessFn& fitness, std::size_t jobs, bool force) {
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (force || !pop[i].fitness) pending.push_back(i);
  }
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, pending.size()));
  if (workers == 1) {
    for (std::size_t i : pending) pop[i].fitness = fitness(pop[i]);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t n = next++; n < pending.size(); n = next++) {
      try {
        pop[pending[n]].fitness = fitness(pop[pending[n]]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
}

GaResult run_ga(const GaConfig& cfg, const AprioriSet& apriori, const Dimensions& dims,
                const geometry::Box& domain, const FitnessFn& fitness, Rng& rng, const RunOptions& options) {
  cfg.validate();
  const std::vector<geometry::Point> reserved = sites_of(apriori.rules);
  std::vector<Individual> pop = init_population(cfg, dims, domain, rng, reserved);
  std::uint64_t next_id = pop.size();

  GaResult result;
  std::optional<Individual> best_ever;
  for (std::size_t gen = 0;; ++gen) {
    evaluate_population(pop, fitness, options.jobs, options.reevaluate_each_generation);
    const GenerationStats stats = summarize(gen, pop);
    result.history.push_back(stats);
    const Individual& gen_best = *std::min_element(pop.begin(), pop.end(), better);
    if (!best_ever || *gen_best.fitness > *best_ever->fitness) best_ever = gen_best;
    if (options.on_generation) options.on_generation(stats, *best_ever);
    if (gen == cfg.generations) break;

    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return better(pop[a], pop[b]); });

    std::vector<Individual> next;
    next.reserve(pop.size());
    for (std::size_t e = 0; e < cfg.elite_count; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop.size()) {
      const Individual& a = select_tournament(pop, cfg.tournament_size, rng);
      const Individual& b = select_tournament(pop, cfg.tournament_size, rng);
      std::pair<Individual, Individual> children =
          uniform01(rng) < cfg.p_crossover ? crossover(a, b, domain, rng) : std::make_pair(a, b);
      for (Individual* child : {&children.first, &children.second}) {
        if (child->rules.size() > cfg.max_rules) {
          while (child->rules.size() > cfg.max_rules) {
            child->rules.erase(child->rules.begin() +
                               static_cast<std::ptrdiff_t>(uniform_index(rng, child->rules.size())));
          }
          child->fitness.reset();
        }
        if (child->rules.size() < cfg.min_rules) {
          while (child->rules.size() < cfg.min_rules) child->rules.push_back(random_rule(dims, domain, rng));
          child->fitness.reset();
        }
        *child = mutate(std::move(*child), cfg, dims, domain, rng, reserved);
        child->id = next_id++;
      }
      next.push_back(std::move(children.first));
      if (next.size() < pop.size()) next.push_back(std::move(children.second));
    }
    pop = std::move(next);
  }
  result.best = *best_ever;
  return result;
}

}  // namespace rfv::evolution
