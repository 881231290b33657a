#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "quadsr/expr.hpp"

namespace quadsr::sr {

struct SRConfig {
  std::size_t population = 500;
  std::size_t generations = 200;
  std::size_t tournament = 7;
  // operator-choice weights, must sum to 1
  double crossover = 0.8;
  double mutation = 0.15;
  double constant_jitter = 0.05;

  int max_depth = 12;
  int init_min_depth = 2;
  int init_max_depth = 6;

  /// Share of offspring whose constants are refined before evaluation.
  double constant_fit_rate = 1.0;
  std::size_t constant_fit_rows = 256;
  int constant_fit_iterations = 25;

  /// Early stop once best fitness <= stop_fitness * rows.
  double stop_fitness = 1e-9;
  /// Sifting: lowest complexity within this relative band of the best fitness.
  double sifting_tolerance = 0.05;
  /// Front members re-injected per generation, at most this share of population.
  double elite_fraction = 0.1;

  bool allow_sqrt = false;
  std::uint64_t seed = 42;
  /// Fitness-evaluation threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  /// Feature columns fed to the search; empty selects the channel default.
  std::vector<std::string> features;
  /// Add u1sq..u4sq as precomputed features.
  bool squared_inputs = false;

  void validate() const;
  bool operator==(const SRConfig&) const = default;
};

struct Candidate {
  ExprTree tree;
  double fitness = 0.0;
  std::size_t complexity() const { return tree.complexity(); }
};

/// Nondominated set over (complexity, fitness), both minimized.
class ParetoFront {
 public:
  static bool dominates(const Candidate& a, const Candidate& b);

  /// Adds c unless an existing member dominates or ties it; evicts members
  /// c dominates. Non-finite fitness is never admitted.
  bool insert(const Candidate& c);

  const std::vector<Candidate>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  const Candidate& best() const;
  /// Lowest-complexity member whose fitness is within `tolerance` of the best.
  const Candidate& select(double tolerance) const;
  /// Best fitness among members no more complex than `complexity`; +inf if none.
  double best_fitness_at(std::size_t complexity) const;

 private:
  // complexity strictly ascending, fitness strictly descending
  std::vector<Candidate> members_;
};

struct EvolutionResult {
  ParetoFront front;
  std::size_t generations_run = 0;
  /// Front snapshot after initialization and after every generation.
  std::vector<std::vector<std::pair<std::size_t, double>>> history;
};

/// Genetic-programming search over expression trees.
///
/// Ramped half-and-half initialization, tournament selection on Pareto
/// domination count, subtree crossover, point/subtree mutation, constant
/// jitter and an elitist Pareto archive. Deterministic for a fixed seed
/// regardless of `threads`.
EvolutionResult evolve(const SRConfig& config, const Dataset& data);

/// Refines the constants of `tree` against `data` by Levenberg-Marquardt on
/// squared error followed by iteratively reweighted least absolute
/// deviations. The sum of absolute errors never increases.
ExprTree fit_constants(const ExprTree& tree, const Dataset& data, int iterations = 50);

/// Variation operators, exposed for testing.
class Breeder {
 public:
  Breeder(const SRConfig& config, std::size_t features, std::uint64_t seed);

  ExprTree random_tree(int depth, bool full);
  ExprTree crossover(const ExprTree& a, const ExprTree& b);
  ExprTree point_mutation(const ExprTree& t);
  ExprTree subtree_mutation(const ExprTree& t);
  ExprTree jitter_constants(const ExprTree& t);

  std::mt19937_64& rng() { return rng_; }

 private:
  Node random_terminal();
  Node random_function(int arity);
  std::size_t pick_node(const ExprTree& t, bool prefer_internal);

  const SRConfig& config_;
  std::size_t features_;
  std::mt19937_64 rng_;
  std::vector<Op> unary_ops_;
};

}  // namespace quadsr::sr
