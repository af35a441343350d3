#include "uavgtsp/report.hpp"

namespace uavgtsp {

SolveReport make_report(std::string solver, const EnergyParams& params, const Instance& instance,
                        Tour tour, double wall_clock, std::uint64_t seed) {
  SolveReport r;
  r.solver = std::move(solver);
  r.energy = total_weighted_energy(params, instance, tour);
  r.tour = std::move(tour);
  r.wall_clock = wall_clock;
  r.seed = seed;
  r.omega = params.omega;
  r.params_hash = params_fingerprint(params);
  return r;
}

}  // namespace uavgtsp
