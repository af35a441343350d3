#pragma once

// REINFORCE with a learned critic baseline, and the solver comparison used to
// score trained checkpoints.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uavgtsp/adam.hpp"
#include "uavgtsp/energy.hpp"
#include "uavgtsp/heuristics.hpp"
#include "uavgtsp/policy.hpp"
#include "uavgtsp/problem.hpp"

namespace uavgtsp {

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t n_steps = 10000;  // total; a resumed run stops at the same step
  std::size_t num_clusters = 4;
  std::size_t cluster_size = 20;
  double zeta = 100.0;
  double actor_lr = 1e-4;
  double critic_lr = 1e-4;
  std::uint64_t seed = 1;
  std::size_t embed_dim = 64;
  std::size_t eval_every = 500;  // 0 disables periodic evaluation
  std::size_t eval_instances = 30;
  std::size_t checkpoint_every = 500;  // 0 writes only the final checkpoint
  std::string checkpoint_path;         // empty disables checkpoint files
  std::string log_path;                // empty disables the CSV log
  bool resume = false;                 // continue from checkpoint_path if it exists
  std::size_t workers = 1;
  double max_grad_norm = 2.0;
  EnergyParams energy;

  void validate() const;
};

// Instance i of training step s. Depends only on (seed, s, i), so a resumed
// run sees the same stream as an uninterrupted one.
std::vector<Instance> training_batch(const TrainConfig& config, std::uint64_t step);
// Fixed evaluation set, drawn from a stream disjoint from training_batch.
std::vector<Instance> held_out_set(const TrainConfig& config);

// Fresh parameters plus the reward scale: the mean greedy-solver energy over
// the first training batch.
Checkpoint initial_checkpoint(const TrainConfig& config);

// Loss for one sampled rollout whose gradient is that instance's share of the
// batch update:
//   -(r - V.detach) * log p / B  +  (V - r)^2 / B,   r = reward / reward_scale.
// `value` must be the critic output for the same instance.
nn::Tensor reinforce_loss(const Rollout& rollout, const nn::Tensor& value, double reward_scale,
                          std::size_t batch_size);

struct StepStats {
  double mean_reward = 0.0;  // normalized units
  double grad_norm = 0.0;    // actor gradient norm before clipping
  double critic_loss = 0.0;
};

class Trainer {
 public:
  Trainer(TrainConfig config, Checkpoint start);

  // One update on `batch`; `sample_seed` drives the rollout sampling. Throws
  // DivergenceError with parameters left at the last good state.
  StepStats step(const std::vector<Instance>& batch, std::uint64_t sample_seed);

  // Parameters, optimizer moments and step count.
  Checkpoint checkpoint() const;
  const PolicyParams& actor() const { return state_.actor; }
  const CriticParams& critic() const { return state_.critic; }
  std::uint64_t steps_done() const { return state_.step; }

 private:
  TrainConfig config_;
  Checkpoint state_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
};

struct TrainResult {
  Checkpoint checkpoint;
  // (step, mean greedy-decode ratio vs exact on the held-out set); includes
  // step 0 and the final step when evaluation is enabled.
  std::vector<std::pair<std::uint64_t, double>> eval_history;
};

TrainResult train(const TrainConfig& config);

// Mean over `instances` of drl energy / exact energy with greedy decoding.
double eval_ratio(const PolicyParams& params, const EnergyParams& energy,
                  const std::vector<Instance>& instances, const std::vector<double>& exact_energy);

// "exact", "brute_force", "greedy", "aco" or "drl". drl needs `policy`;
// anything else unknown throws ValidationError.
SolveReport run_solver(const std::string& solver, const Instance& instance,
                       const EnergyParams& energy, const AcoConfig& aco,
                       const PolicyParams* policy);

struct ComparisonRow {
  std::string label;  // instance index, or "mean" for the summary row
  std::map<std::string, double> energy;   // weighted joules
  std::map<std::string, double> ratio;    // energy / exact energy
  std::map<std::string, double> seconds;  // solver wall clock
};

struct ComparisonTable {
  std::vector<std::string> solvers;
  std::vector<ComparisonRow> rows;  // one per instance, then the summary
  std::vector<SolveReport> reports;  // instance-major, solver order as `solvers`

  const ComparisonRow& summary() const { return rows.back(); }
};

// Runs every solver on every instance. Ratios are normalized to exact, which
// is always computed and appears first in `solvers`.
ComparisonTable evaluate(const std::vector<Instance>& instances, const EnergyParams& energy,
                         std::vector<std::string> solvers, const AcoConfig& aco,
                         const PolicyParams* policy);

}  // namespace uavgtsp
