#pragma once

#include <cstddef>

#include "uavgtsp/energy.hpp"
#include "uavgtsp/report.hpp"

namespace uavgtsp {

inline constexpr std::size_t kExactMaxClusters = 16;
inline constexpr double kBruteForceBudget = 1e7;

// Held-Karp over (visited cluster set, last chosen node). Entering node v of
// cluster j costs (1 - omega) * (leg + collection) + omega * ground(j, v); the
// closing leg to the depot is added at the end. Globally optimal. Throws
// CapacityError for more than kExactMaxClusters clusters.
SolveReport solve_exact(const Instance& instance, const EnergyParams& params);

// Enumerates every cluster order and every cluster-head assignment, scoring
// each tour with total_weighted_energy. Ties keep the lexicographically first
// tour. Throws CapacityError when K! * N^K exceeds kBruteForceBudget.
SolveReport brute_force(const Instance& instance, const EnergyParams& params);

}  // namespace uavgtsp
