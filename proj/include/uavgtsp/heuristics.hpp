#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "uavgtsp/energy.hpp"
#include "uavgtsp/report.hpp"

namespace uavgtsp {

// From the current position, always take the unvisited (cluster, node) with
// the smallest entry cost (weighted flight leg + collection + ground), then
// fly home. The final choice is scored with the return leg it forces. Ties go
// to the lowest (cluster, node).
SolveReport solve_greedy(const Instance& instance, const EnergyParams& params);

struct AcoConfig {
  std::size_t n_ants = 30;
  std::size_t n_iterations = 200;
  double evaporation = 0.1;
  double pheromone_weight = 1.0;  // exponent on trail intensity
  double visibility_weight = 5.0; // exponent on 1 / edge cost
  std::uint64_t rng_seed = 1;

  void validate() const;
};

inline constexpr double kInitialTrail = 1.0;
inline constexpr double kMinTrail = 1e-12;

// Dense trail over the K*N candidate nodes plus the depot (index 0).
class PheromoneMatrix {
 public:
  explicit PheromoneMatrix(std::size_t nodes, double initial = kInitialTrail)
      : nodes_(nodes), trail_(nodes * nodes, initial) {}

  std::size_t nodes() const { return nodes_; }
  double at(std::size_t from, std::size_t to) const { return trail_[from * nodes_ + to]; }
  void evaporate(double rate);
  void deposit(std::size_t from, std::size_t to, double amount);
  double min_entry() const;

 private:
  std::size_t nodes_;
  std::vector<double> trail_;
};

struct AcoResult {
  SolveReport report;
  // Best-so-far weighted energy after each iteration.
  std::vector<double> history;
};

// GTSP ant colony: each ant starts at the depot and repeatedly moves to a
// node of an unvisited cluster with probability proportional to
// trail^pheromone_weight * (1 / entry cost)^visibility_weight. After every
// iteration the trail evaporates and the iteration-best ant deposits
// Q / energy on its edges, Q being the mean entry cost of the instance.
AcoResult run_aco(const Instance& instance, const EnergyParams& params, const AcoConfig& config);
SolveReport solve_aco(const Instance& instance, const EnergyParams& params,
                      const AcoConfig& config);

}  // namespace uavgtsp
