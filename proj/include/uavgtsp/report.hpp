#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "uavgtsp/energy.hpp"
#include "uavgtsp/problem.hpp"

namespace uavgtsp {

struct SolveReport {
  std::string solver;
  Tour tour;
  EnergyBreakdown energy;
  double wall_clock = 0.0;  // seconds spent inside the solver
  std::uint64_t seed = 0;   // solver RNG seed (0 for deterministic solvers)
  double omega = 0.0;
  std::string params_hash;
};

// Evaluates `tour` with the independent energy routine and fills the
// reproducibility fields; the solvers all finish through here.
SolveReport make_report(std::string solver, const EnergyParams& params, const Instance& instance,
                        Tour tour, double wall_clock, std::uint64_t seed = 0);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace uavgtsp
