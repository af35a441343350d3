#include "uavgtsp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "uavgtsp/errors.hpp"

namespace uavgtsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

SolveReport solve_exact(const Instance& instance, const EnergyParams& params) {
  Stopwatch clock;
  const std::size_t k = instance.num_clusters();
  if (k > kExactMaxClusters) {
    throw CapacityError("exact solver supports at most " + std::to_string(kExactMaxClusters) +
                        " clusters, got " + std::to_string(k));
  }
  const WeightedCosts costs(params, instance);
  const std::size_t n = instance.cluster_size();
  const std::size_t m = k * n;
  const std::size_t masks = std::size_t{1} << k;

  // Weighted leg cost between every pair of candidate nodes plus the vertex
  // cost of the destination: the full price of entering node b from node a.
  std::vector<double> enter(m * m);
  std::vector<double> from_depot(m), to_depot(m);
  for (std::size_t a = 0; a < m; ++a) {
    const Point pa = costs.node_point(a / n, a % n);
    from_depot[a] = costs.entry_cost(instance.depot, a / n, a % n);
    to_depot[a] = costs.return_cost(pa);
    for (std::size_t b = 0; b < m; ++b) {
      enter[a * m + b] = costs.entry_cost(pa, b / n, b % n);
    }
  }

  std::vector<double> dp(masks * m, kInf);
  std::vector<std::int32_t> pred(masks * m, -1);
  for (std::size_t g = 0; g < m; ++g) dp[(std::size_t{1} << (g / n)) * m + g] = from_depot[g];

  for (std::size_t mask = 1; mask < masks; ++mask) {
    const double* row = dp.data() + mask * m;
    for (std::size_t g = 0; g < m; ++g) {
      const double base = row[g];
      if (base == kInf) continue;
      const double* out = enter.data() + g * m;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const std::size_t next = mask | (std::size_t{1} << j);
        double* target = dp.data() + next * m;
        std::int32_t* target_pred = pred.data() + next * m;
        for (std::size_t b = j * n; b < (j + 1) * n; ++b) {
          const double cand = base + out[b];
          if (cand < target[b]) {
            target[b] = cand;
            target_pred[b] = static_cast<std::int32_t>(g);
          }
        }
      }
    }
  }

  const std::size_t full = masks - 1;
  std::size_t best_last = 0;
  double best = kInf;
  for (std::size_t g = 0; g < m; ++g) {
    const double total = dp[full * m + g] + to_depot[g];
    if (total < best) {
      best = total;
      best_last = g;
    }
  }

  Tour tour;
  std::size_t mask = full;
  std::int32_t g = static_cast<std::int32_t>(best_last);
  while (g >= 0) {
    const auto node = static_cast<std::size_t>(g);
    tour.stops.push_back({node / n, node % n});
    const std::int32_t prev = pred[mask * m + node];
    mask &= ~(std::size_t{1} << (node / n));
    g = prev;
  }
  std::reverse(tour.stops.begin(), tour.stops.end());
  const double elapsed = clock.seconds();
  return make_report("exact", params, instance, std::move(tour), elapsed);
}

SolveReport brute_force(const Instance& instance, const EnergyParams& params) {
  Stopwatch clock;
  const std::size_t k = instance.num_clusters();
  const std::size_t n = instance.cluster_size();
  double count = std::tgamma(static_cast<double>(k) + 1.0) * std::pow(static_cast<double>(n), k);
  if (count > kBruteForceBudget) {
    throw CapacityError("brute force over " + std::to_string(count) + " tours exceeds budget");
  }
  params.validate();

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  Tour best_tour;
  double best = kInf;
  Tour tour;
  tour.stops.resize(k);
  do {
    std::vector<std::size_t> heads(k, 0);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) tour.stops[i] = {order[i], heads[i]};
      const double e = total_weighted_energy(params, instance, tour).total_weighted;
      // Tours are visited in lexicographic order; only a clear improvement
      // replaces the incumbent so ties keep the first one.
      if (best_tour.stops.empty() || e < best - 1e-12 * std::abs(best)) {
        best = e;
        best_tour = tour;
      }
      std::size_t pos = k;
      while (pos > 0 && ++heads[pos - 1] == n) heads[--pos] = 0;
      if (pos == 0) break;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  const double elapsed = clock.seconds();
  return make_report("brute_force", params, instance, std::move(best_tour), elapsed);
}

}  // namespace uavgtsp
