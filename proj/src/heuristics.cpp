#include "uavgtsp/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uavgtsp/errors.hpp"
#include "uavgtsp/rng.hpp"

namespace uavgtsp {

SolveReport solve_greedy(const Instance& instance, const EnergyParams& params) {
  Stopwatch clock;
  const WeightedCosts costs(params, instance);
  const std::size_t k = costs.num_clusters();
  const std::size_t n = costs.cluster_size();
  std::vector<bool> visited(k, false);
  Tour tour;
  Point at = instance.depot;
  for (std::size_t step = 0; step < k; ++step) {
    // The last choice also fixes the return leg, so it is part of its cost.
    const bool last = step + 1 == k;
    Stop best{};
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (visited[c]) continue;
      for (std::size_t v = 0; v < n; ++v) {
        double cost = costs.entry_cost(at, c, v);
        if (last) cost += costs.return_cost(costs.node_point(c, v));
        if (cost < best_cost) {
          best_cost = cost;
          best = {c, v};
        }
      }
    }
    visited[best.cluster] = true;
    tour.stops.push_back(best);
    at = costs.node_point(best.cluster, best.node);
  }
  const double elapsed = clock.seconds();
  return make_report("greedy", params, instance, std::move(tour), elapsed);
}

void AcoConfig::validate() const {
  if (n_ants < 1) throw ValidationError("aco: n_ants must be >= 1");
  if (n_iterations < 1) throw ValidationError("aco: n_iterations must be >= 1");
  if (!(evaporation > 0.0 && evaporation < 1.0)) {
    throw ValidationError("aco: evaporation must lie in (0, 1)");
  }
  if (!(pheromone_weight >= 0.0) || !(visibility_weight >= 0.0)) {
    throw ValidationError("aco: weights must be >= 0");
  }
}

void PheromoneMatrix::evaporate(double rate) {
  for (double& t : trail_) t = std::max(kMinTrail, t * (1.0 - rate));
}

void PheromoneMatrix::deposit(std::size_t from, std::size_t to, double amount) {
  double& t = trail_[from * nodes_ + to];
  t = std::max(kMinTrail, t + amount);
}

double PheromoneMatrix::min_entry() const {
  return *std::min_element(trail_.begin(), trail_.end());
}

AcoResult run_aco(const Instance& instance, const EnergyParams& params, const AcoConfig& config) {
  Stopwatch clock;
  config.validate();
  const WeightedCosts costs(params, instance);
  const std::size_t k = costs.num_clusters();
  const std::size_t n = costs.cluster_size();
  const std::size_t nodes = k * n + 1;  // 0 is the depot
  auto point_of = [&](std::size_t i) {
    return i == 0 ? instance.depot : costs.node_point((i - 1) / n, (i - 1) % n);
  };

  // Entry cost of every i -> j move into another cluster and its visibility.
  std::vector<double> cost(nodes * nodes, 0.0);
  std::vector<double> to_depot(nodes, 0.0);
  double cost_sum = 0.0;
  double cost_min = std::numeric_limits<double>::infinity();
  std::size_t cost_count = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const Point from = point_of(i);
    to_depot[i] = costs.return_cost(from);
    for (std::size_t j = 1; j < nodes; ++j) {
      if (i != 0 && (i - 1) / n == (j - 1) / n) continue;
      const double c = costs.entry_cost(from, (j - 1) / n, (j - 1) % n);
      cost[i * nodes + j] = c;
      cost_sum += c;
      cost_min = std::min(cost_min, c);
      ++cost_count;
    }
  }
  const double deposit_scale = cost_count ? cost_sum / static_cast<double>(cost_count) : 1.0;
  // (1/c)^beta rescaled by cost_min^beta: same proportions, no underflow.
  std::vector<double> visibility(nodes * nodes, 0.0);
  for (std::size_t idx = 0; idx < cost.size(); ++idx) {
    if (cost[idx] > 0.0) visibility[idx] = std::pow(cost_min / cost[idx], config.visibility_weight);
  }

  PheromoneMatrix trail(nodes);
  const bool linear_trail = config.pheromone_weight == 1.0;
  std::vector<std::size_t> best_path;
  double best_energy = std::numeric_limits<double>::infinity();
  AcoResult result;
  result.history.reserve(config.n_iterations);

  std::vector<std::size_t> path(k), iter_path(k);
  std::vector<double> weight(nodes);
  std::vector<bool> visited(k);
  for (std::size_t it = 0; it < config.n_iterations; ++it) {
    double iter_energy = std::numeric_limits<double>::infinity();
    for (std::size_t ant = 0; ant < config.n_ants; ++ant) {
      Rng rng(derive_seed(config.rng_seed, it, ant));
      std::fill(visited.begin(), visited.end(), false);
      std::size_t at = 0;
      double energy = 0.0;
      for (std::size_t step = 0; step < k; ++step) {
        double total = 0.0;
        std::size_t last_candidate = 0;
        for (std::size_t c = 0; c < k; ++c) {
          if (visited[c]) continue;
          for (std::size_t v = 0; v < n; ++v) {
            const std::size_t j = 1 + c * n + v;
            const double tau = linear_trail ? trail.at(at, j)
                                            : std::pow(trail.at(at, j), config.pheromone_weight);
            weight[j] = tau * visibility[at * nodes + j];
            total += weight[j];
            last_candidate = j;
          }
        }
        std::size_t chosen = last_candidate;
        const double target = rng.uniform() * total;
        double running = 0.0;
        for (std::size_t c = 0; c < k && total > 0.0; ++c) {
          if (visited[c]) continue;
          bool found = false;
          for (std::size_t v = 0; v < n; ++v) {
            const std::size_t j = 1 + c * n + v;
            running += weight[j];
            if (running > target) {
              chosen = j;
              found = true;
              break;
            }
          }
          if (found) break;
        }
        energy += cost[at * nodes + chosen];
        visited[(chosen - 1) / n] = true;
        path[step] = chosen;
        at = chosen;
      }
      energy += to_depot[at];
      if (energy < iter_energy) {
        iter_energy = energy;
        iter_path = path;
      }
    }
    if (iter_energy < best_energy) {
      best_energy = iter_energy;
      best_path = iter_path;
    }
    trail.evaporate(config.evaporation);
    const double amount = deposit_scale / iter_energy;
    std::size_t from = 0;
    for (std::size_t j : iter_path) {
      trail.deposit(from, j, amount);
      from = j;
    }
    trail.deposit(from, 0, amount);
    result.history.push_back(best_energy);
  }

  Tour tour;
  for (std::size_t j : best_path) tour.stops.push_back({(j - 1) / n, (j - 1) % n});
  const double elapsed = clock.seconds();
  result.report = make_report("aco", params, instance, std::move(tour), elapsed, config.rng_seed);
  return result;
}

SolveReport solve_aco(const Instance& instance, const EnergyParams& params,
                      const AcoConfig& config) {
  return run_aco(instance, params, config).report;
}

}  // namespace uavgtsp
