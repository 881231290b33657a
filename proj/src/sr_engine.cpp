#include "quadsr/sr_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

namespace quadsr::sr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SRConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  if (tournament < 1) throw std::invalid_argument("tournament size must be at least 1");
  if (!prob(crossover) || !prob(mutation) || !prob(constant_jitter) || !prob(constant_fit_rate) ||
      !prob(elite_fraction)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  if (std::abs(crossover + mutation + constant_jitter - 1.0) > 1e-9) {
    throw std::invalid_argument("crossover + mutation + constant_jitter must sum to 1");
  }
  if (max_depth < 1 || init_min_depth < 1 || init_max_depth < init_min_depth || init_max_depth > max_depth) {
    throw std::invalid_argument("invalid depth limits");
  }
  if (!(sifting_tolerance >= 0.0) || !(stop_fitness >= 0.0)) throw std::invalid_argument("tolerances must be >= 0");
}

// ---------------------------------------------------------------------------
// ParetoFront

bool ParetoFront::dominates(const Candidate& a, const Candidate& b) {
  const auto ca = a.complexity(), cb = b.complexity();
  return ca <= cb && a.fitness <= b.fitness && (ca < cb || a.fitness < b.fitness);
}

bool ParetoFront::insert(const Candidate& c) {
  if (!std::isfinite(c.fitness)) return false;
  for (const Candidate& m : members_) {
    if (m.complexity() <= c.complexity() && m.fitness <= c.fitness) return false;
  }
  std::erase_if(members_, [&](const Candidate& m) { return dominates(c, m); });
  const auto pos = std::lower_bound(members_.begin(), members_.end(), c.complexity(),
                                    [](const Candidate& m, std::size_t cx) { return m.complexity() < cx; });
  members_.insert(pos, c);
  return true;
}

const Candidate& ParetoFront::best() const {
  if (members_.empty()) throw std::logic_error("empty Pareto front");
  return members_.back();
}

const Candidate& ParetoFront::select(double tolerance) const {
  const double limit = best().fitness * (1.0 + tolerance);
  for (const Candidate& m : members_) {
    if (m.fitness <= limit) return m;
  }
  return best();
}

double ParetoFront::best_fitness_at(std::size_t complexity) const {
  double best = kInf;
  for (const Candidate& m : members_) {
    if (m.complexity() <= complexity) best = std::min(best, m.fitness);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Constant refinement

namespace {

double weighted_sse(const Eigen::ArrayXd& pred, const Eigen::VectorXd& y, const Eigen::ArrayXd& w) {
  if (!pred.allFinite()) return kInf;
  return (w * (y.array() - pred).square()).sum();
}

// Levenberg-Marquardt on sum_i w_i r_i^2 with Marquardt diagonal scaling.
std::vector<double> levenberg_marquardt(ExprTree tree, const Dataset& data, const Eigen::ArrayXd& w,
                                        int iterations) {
  std::vector<double> p = tree.constants();
  const auto k = static_cast<Eigen::Index>(p.size());
  Jacobian jac = eval_with_jacobian(tree, data.X);
  double loss = weighted_sse(jac.value, data.y, w);
  if (!std::isfinite(loss)) return p;
  double lambda = 1e-3;

  for (int it = 0; it < iterations; ++it) {
    if (!jac.d.allFinite()) break;
    const Eigen::VectorXd r = data.y - jac.value.matrix();
    const Eigen::MatrixXd jw = jac.d.array().colwise() * w;
    const Eigen::MatrixXd a = jw.transpose() * jac.d;
    const Eigen::VectorXd g = jw.transpose() * r;
    const double ridge = 1e-14 * std::max(a.diagonal().maxCoeff(), 1e-300);

    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd lhs = a;
      for (Eigen::Index i = 0; i < k; ++i) lhs(i, i) += lambda * a(i, i) + ridge;
      const Eigen::VectorXd step = lhs.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= 10;
        continue;
      }
      std::vector<double> trial(p);
      for (Eigen::Index i = 0; i < k; ++i) trial[static_cast<std::size_t>(i)] += step(i);
      if (!std::all_of(trial.begin(), trial.end(), [](double v) { return std::isfinite(v); })) {
        lambda *= 10;
        continue;
      }
      tree.set_constants(trial);
      Jacobian tj = eval_with_jacobian(tree, data.X);
      const double tl = weighted_sse(tj.value, data.y, w);
      if (tl < loss) {
        const double rel = (loss - tl) / std::max(loss, 1e-300);
        p = std::move(trial);
        loss = tl;
        jac = std::move(tj);
        lambda = std::max(lambda / 3, 1e-12);
        improved = true;
        if (rel < 1e-14) it = iterations;
        break;
      }
      lambda *= 4;
    }
    if (!improved) break;
  }
  return p;
}

}  // namespace

ExprTree fit_constants(const ExprTree& tree, const Dataset& data, int iterations) {
  if (tree.constant_count() == 0 || data.rows() == 0) return tree;

  ExprTree best = tree;
  double best_fit = fitness(tree, data);

  auto consider = [&](const std::vector<double>& p) {
    ExprTree t = tree;
    t.set_constants(p);
    const double f = fitness(t, data);
    if (f < best_fit) {
      best_fit = f;
      best = std::move(t);
    }
  };

  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(data.y.size());
  consider(levenberg_marquardt(best, data, ones, iterations));

  // least absolute deviations via reweighting around the current best
  for (int round = 0; round < 3 && std::isfinite(best_fit) && best_fit > 0; ++round) {
    const Eigen::ArrayXd r = (data.y.array() - eval_batch(best, data.X)).abs();
    const double floor = std::max(1e-12, 1e-6 * r.mean());
    const Eigen::ArrayXd w = 1.0 / r.max(floor);
    const double before = best_fit;
    consider(levenberg_marquardt(best, data, w, iterations / 2 + 1));
    if (!(best_fit < before * (1 - 1e-9))) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Breeder

Breeder::Breeder(const SRConfig& config, std::size_t features, std::uint64_t seed)
    : config_(config), features_(features), rng_(seed) {
  if (features == 0) throw std::invalid_argument("at least one feature is required");
  unary_ops_ = {Op::Sin, Op::Cos};
  if (config.allow_sqrt) unary_ops_.push_back(Op::Sqrt);
}

Node Breeder::random_terminal() {
  std::bernoulli_distribution is_var(0.6);
  if (is_var(rng_)) {
    std::uniform_int_distribution<int> v(0, static_cast<int>(features_) - 1);
    return Node{Op::Var, 0.0, v(rng_)};
  }
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  return Node{Op::Const, c(rng_), 0};
}

Node Breeder::random_function(int a) {
  if (a == 1) {
    std::uniform_int_distribution<std::size_t> pick(0, unary_ops_.size() - 1);
    return Node{unary_ops_[pick(rng_)], 0.0, 0};
  }
  static constexpr Op kBinary[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
  std::uniform_int_distribution<int> pick(0, 3);
  return Node{kBinary[pick(rng_)], 0.0, 0};
}

ExprTree Breeder::random_tree(int depth, bool full) {
  std::vector<Node> out;
  // (depth remaining) per pending slot, filled in prefix order
  std::vector<int> pending{depth};
  std::bernoulli_distribution pick_terminal(0.3);
  std::bernoulli_distribution pick_unary(0.2);
  while (!pending.empty()) {
    const int d = pending.back();
    pending.pop_back();
    const bool terminal = d == 0 || (!full && pick_terminal(rng_));
    if (terminal) {
      out.push_back(random_terminal());
      continue;
    }
    const int a = pick_unary(rng_) ? 1 : 2;
    out.push_back(random_function(a));
    for (int i = 0; i < a; ++i) pending.push_back(d - 1);
  }
  return ExprTree(std::move(out));
}

std::size_t Breeder::pick_node(const ExprTree& t, bool prefer_internal) {
  std::uniform_int_distribution<std::size_t> any(0, t.size() - 1);
  if (prefer_internal && t.size() > 1) {
    std::bernoulli_distribution internal(0.9);
    if (internal(rng_)) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (!is_terminal(t.nodes()[i].op)) idx.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> p(0, idx.size() - 1);
      return idx[p(rng_)];
    }
  }
  return any(rng_);
}

ExprTree Breeder::crossover(const ExprTree& a, const ExprTree& b) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    const std::size_t i = pick_node(a, true);
    const std::size_t j = pick_node(b, true);
    ExprTree child = a.replace_subtree(i, b.subtree(j));
    if (child.depth() <= config_.max_depth) return child;
  }
  return a;
}

ExprTree Breeder::point_mutation(const ExprTree& t) {
  ExprTree out = t;
  const std::size_t i = pick_node(t, false);
  const int a = arity(t.nodes()[i].op);
  out.set_node(i, a == 0 ? random_terminal() : random_function(a));
  return out;
}

ExprTree Breeder::subtree_mutation(const ExprTree& t) {
  const std::size_t i = pick_node(t, false);
  const int room = config_.max_depth - t.node_level(i);
  std::uniform_int_distribution<int> d(0, std::max(0, std::min(4, room)));
  return t.replace_subtree(i, random_tree(d(rng_), false));
}

ExprTree Breeder::jitter_constants(const ExprTree& t) {
  if (t.constant_count() == 0) return point_mutation(t);
  std::vector<double> c = t.constants();
  std::normal_distribution<double> n(0.0, 0.1);
  std::bernoulli_distribution touch(std::max(0.5, 1.0 / static_cast<double>(c.size())));
  for (double& v : c) {
    if (touch(rng_)) v = v * (1.0 + n(rng_)) + 0.01 * n(rng_);
  }
  ExprTree out = t;
  out.set_constants(c);
  return out;
}

// ---------------------------------------------------------------------------
// Evolution

namespace {

struct Individual {
  ExprTree tree;
  double fitness = kInf;
  bool refine = false;
};

void evaluate(std::vector<Individual>& pop, std::size_t begin, const Dataset& data, const Dataset& fit_rows,
              const SRConfig& cfg) {
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Individual& ind = pop[i];
      if (ind.refine && ind.tree.constant_count() > 0) {
        const ExprTree refined = fit_constants(ind.tree, fit_rows, cfg.constant_fit_iterations);
        const double before = fitness(ind.tree, data);
        const double after = fitness(refined, data);
        if (after <= before) {
          ind.tree = refined;
          ind.fitness = after;
        } else {
          ind.fitness = before;
        }
      } else {
        ind.fitness = fitness(ind.tree, data);
      }
    }
  };

  const std::size_t n = pop.size() - begin;
  const unsigned wanted = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  const unsigned threads = std::max(1u, std::min<unsigned>(wanted, static_cast<unsigned>(n)));
  if (threads <= 1) {
    work(begin, pop.size());
    return;
  }
  // static partition; each slot is written by exactly one thread
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = begin + t * chunk;
    const std::size_t hi = std::min(pop.size(), lo + chunk);
    if (lo < hi) pool.emplace_back(work, lo, hi);
  }
}

std::vector<std::size_t> domination_counts(const std::vector<Individual>& pop) {
  std::vector<std::size_t> count(pop.size(), 0);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    for (std::size_t j = 0; j < pop.size(); ++j) {
      if (i == j) continue;
      const auto cj = pop[j].tree.complexity();
      const auto cx = pop[i].tree.complexity();
      if (cj <= cx && pop[j].fitness <= pop[i].fitness && (cj < cx || pop[j].fitness < pop[i].fitness)) {
        ++count[i];
      }
    }
  }
  return count;
}

std::vector<std::pair<std::size_t, double>> snapshot(const ParetoFront& front) {
  std::vector<std::pair<std::size_t, double>> s;
  for (const Candidate& c : front.members()) s.emplace_back(c.complexity(), c.fitness);
  return s;
}

}  // namespace

EvolutionResult evolve(const SRConfig& config, const Dataset& data) {
  config.validate();
  if (data.rows() == 0) throw std::invalid_argument("evolve needs a nonempty dataset");

  Breeder breeder(config, data.features(), config.seed);
  auto& rng = breeder.rng();

  // fixed, evenly spaced rows for constant refinement
  Dataset fit_rows = data;
  if (data.rows() > config.constant_fit_rows && config.constant_fit_rows > 0) {
    std::vector<Eigen::Index> rows;
    const double stride = static_cast<double>(data.rows()) / static_cast<double>(config.constant_fit_rows);
    for (std::size_t i = 0; i < config.constant_fit_rows; ++i) {
      rows.push_back(static_cast<Eigen::Index>(std::floor(static_cast<double>(i) * stride)));
    }
    fit_rows = data.subset_rows(rows);
  }

  std::bernoulli_distribution refine(config.constant_fit_rate);

  std::vector<Individual> pop;
  pop.reserve(config.population);
  const int depth_span = config.init_max_depth - config.init_min_depth + 1;
  for (std::size_t i = 0; i < config.population; ++i) {
    const int depth = config.init_min_depth + static_cast<int>(i % static_cast<std::size_t>(depth_span));
    const bool full = (i / static_cast<std::size_t>(depth_span)) % 2 == 0;
    pop.push_back(Individual{breeder.random_tree(depth, full), kInf, refine(rng)});
  }
  evaluate(pop, 0, data, fit_rows, config);

  EvolutionResult result;
  for (const Individual& ind : pop) result.front.insert(Candidate{ind.tree, ind.fitness});
  result.history.push_back(snapshot(result.front));

  const double stop = config.stop_fitness * static_cast<double>(data.rows());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any(0, config.population - 1);
  std::bernoulli_distribution coin(0.5);

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    if (result.front.best().fitness <= stop) break;

    const std::vector<std::size_t> rank = domination_counts(pop);
    auto tournament = [&]() -> const Individual& {
      std::size_t best = any(rng);
      for (std::size_t k = 1; k < config.tournament; ++k) {
        const std::size_t c = any(rng);
        const auto key = [&](std::size_t i) {
          return std::make_tuple(rank[i], pop[i].fitness, pop[i].tree.complexity());
        };
        if (key(c) < key(best)) best = c;
      }
      return pop[best];
    };

    std::vector<Individual> next;
    next.reserve(config.population);
    const auto elite_cap = static_cast<std::size_t>(config.elite_fraction * static_cast<double>(config.population));
    const auto& members = result.front.members();
    // keep the most accurate members when the front is larger than the cap
    const std::size_t first = members.size() > elite_cap ? members.size() - elite_cap : 0;
    for (std::size_t i = first; i < members.size(); ++i) {
      next.push_back(Individual{members[i].tree, members[i].fitness, false});
    }
    const std::size_t offspring_begin = next.size();

    while (next.size() < config.population) {
      const double r = unit(rng);
      ExprTree child;
      if (r < config.crossover) {
        const Individual& a = tournament();
        const Individual& b = tournament();
        child = breeder.crossover(a.tree, b.tree);
      } else if (r < config.crossover + config.mutation) {
        const Individual& a = tournament();
        child = coin(rng) ? breeder.point_mutation(a.tree) : breeder.subtree_mutation(a.tree);
      } else {
        child = breeder.jitter_constants(tournament().tree);
      }
      child = simplify(child);
      if (child.depth() > config.max_depth) continue;
      next.push_back(Individual{std::move(child), kInf, refine(rng)});
    }
    evaluate(next, offspring_begin, data, fit_rows, config);
    pop = std::move(next);

    for (std::size_t i = offspring_begin; i < pop.size(); ++i) {
      result.front.insert(Candidate{pop[i].tree, pop[i].fitness});
    }
    result.history.push_back(snapshot(result.front));
    result.generations_run = gen + 1;
  }
  return result;
}

}  // namespace quadsr::sr
