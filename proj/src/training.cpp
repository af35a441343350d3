#include "uavgtsp/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "uavgtsp/errors.hpp"
#include "uavgtsp/exact.hpp"
#include "uavgtsp/instances.hpp"
#include "uavgtsp/rng.hpp"

namespace uavgtsp {

using nn::Tensor;

namespace {

// Child-stream tags for derive_seed.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kEvalStream = 3;
constexpr std::uint64_t kInitStream = 4;

Instance make_instance(const TrainConfig& config, std::uint64_t seed) {
  GenerateOptions opt;
  opt.num_clusters = config.num_clusters;
  opt.cluster_size = config.cluster_size;
  opt.zeta = config.zeta;
  opt.seed = seed;
  return generate_instance(opt);
}

std::vector<Tensor> clone_params(const std::vector<Tensor>& ts) {
  std::vector<Tensor> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(t.clone());
  return out;
}

void accumulate_grads(const std::vector<Tensor>& into, const std::vector<Tensor>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) {
    Tensor target = into[i];  // shares the node
    auto dst = target.mutable_grad();
    auto src = from[i].grad();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (num_clusters < 1) throw ValidationError("train: K must be >= 1");
  if (cluster_size < 2) throw ValidationError("train: N must be >= 2");
  if (!(zeta > 0.0)) throw ValidationError("train: zeta must be > 0");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw ValidationError("train: learning rates must be > 0");
  }
  if (embed_dim < 1) throw ValidationError("train: embed_dim must be >= 1");
  if (workers < 1) throw ValidationError("train: workers must be >= 1");
  if (!(max_grad_norm > 0.0)) throw ValidationError("train: max_grad_norm must be > 0");
  energy.validate();
}

std::vector<Instance> training_batch(const TrainConfig& config, std::uint64_t step) {
  const std::uint64_t base = derive_seed(config.seed, kTrainStream);
  std::vector<Instance> batch;
  batch.reserve(config.batch_size);
  for (std::size_t i = 0; i < config.batch_size; ++i) {
    batch.push_back(make_instance(config, derive_seed(base, step, i)));
  }
  return batch;
}

std::vector<Instance> held_out_set(const TrainConfig& config) {
  const std::uint64_t base = derive_seed(config.seed, kEvalStream);
  std::vector<Instance> out;
  for (std::size_t j = 0; j < config.eval_instances; ++j) {
    out.push_back(make_instance(config, derive_seed(base, j)));
  }
  return out;
}

Checkpoint initial_checkpoint(const TrainConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, kInitStream));
  Checkpoint c;
  c.actor = PolicyParams::init(config.embed_dim, rng);
  c.critic = CriticParams::init(config.embed_dim, rng);
  c.trained_clusters = config.num_clusters;
  c.trained_cluster_size = config.cluster_size;
  double total = 0.0;
  const auto batch = training_batch(config, 0);
  for (const auto& inst : batch) total += solve_greedy(inst, config.energy).energy.total_weighted;
  c.reward_scale = total / static_cast<double>(batch.size());
  c.metadata["seed"] = std::to_string(config.seed);
  c.metadata["batch_size"] = std::to_string(config.batch_size);
  c.metadata["energy_params"] = params_fingerprint(config.energy);
  return c;
}

Tensor reinforce_loss(const Rollout& rollout, const Tensor& value, double reward_scale,
                      std::size_t batch_size) {
  const double b = static_cast<double>(batch_size);
  const double r = rollout.reward / reward_scale;
  const double advantage = r - value.item();
  const Tensor actor_term = nn::scale(rollout.log_prob, -advantage / b);
  const Tensor diff = nn::sub(value, Tensor::scalar(r));
  const Tensor critic_term = nn::scale(nn::mul(diff, diff), 1.0 / b);
  return nn::add(actor_term, critic_term);
}

Trainer::Trainer(TrainConfig config, Checkpoint start)
    : config_(std::move(config)),
      state_(std::move(start)),
      actor_opt_(state_.actor.tensors(), nn::AdamConfig{config_.actor_lr}),
      critic_opt_(state_.critic.tensors(), nn::AdamConfig{config_.critic_lr}) {
  config_.validate();
  state_.actor.validate();
  state_.critic.validate();
  if (state_.actor.embed_dim != state_.critic.embed_dim) {
    throw ValidationError("actor and critic widths differ");
  }
  if (!(state_.reward_scale > 0.0) || !std::isfinite(state_.reward_scale)) {
    throw ValidationError("reward scale must be positive and finite");
  }
  if (!state_.actor_opt.first_moment.empty()) actor_opt_.set_state(state_.actor_opt);
  if (!state_.critic_opt.first_moment.empty()) critic_opt_.set_state(state_.critic_opt);
}

StepStats Trainer::step(const std::vector<Instance>& batch, std::uint64_t sample_seed) {
  const std::size_t b = batch.size();
  if (b == 0) throw ContractError("empty training batch");
  const std::size_t workers = std::min(config_.workers, b);

  // Workers differentiate private copies and are merged in worker order.
  std::vector<std::vector<Tensor>> actor_copies(workers), critic_copies(workers);
  std::vector<double> rewards(b), losses(b);
  std::vector<std::exception_ptr> errors(workers);

  auto work = [&](std::size_t w) {
    try {
      auto a = clone_params(state_.actor.tensors());
      auto c = clone_params(state_.critic.tensors());
      const PolicyParams actor{state_.actor.embed_dim, a[0], a[1], a[2], a[3], a[4],
                               a[5],                   a[6], a[7], a[8], a[9]};
      const CriticParams critic{state_.critic.embed_dim, c[0], c[1], c[2], c[3]};
      const std::size_t lo = b * w / workers, hi = b * (w + 1) / workers;
      for (std::size_t i = lo; i < hi; ++i) {
        const Rollout r = rollout(batch[i], config_.energy, actor, DecodeMode::sample,
                                  derive_seed(sample_seed, i));
        const Tensor value = critic_forward(critic, r.critic_context);
        const double target = r.reward / state_.reward_scale;
        rewards[i] = target;
        losses[i] = (value.item() - target) * (value.item() - target);
        nn::backward(reinforce_loss(r, value, state_.reward_scale, b));
      }
      actor_copies[w] = std::move(a);
      critic_copies[w] = std::move(c);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  StepStats stats;
  for (std::size_t i = 0; i < b; ++i) {
    stats.mean_reward += rewards[i];
    stats.critic_loss += losses[i];
  }
  stats.mean_reward /= static_cast<double>(b);
  stats.critic_loss /= static_cast<double>(b);
  if (!std::isfinite(stats.mean_reward) || !std::isfinite(stats.critic_loss)) {
    throw DivergenceError("non-finite loss at step " + std::to_string(state_.step));
  }

  actor_opt_.zero_grad();
  critic_opt_.zero_grad();
  for (std::size_t w = 0; w < workers; ++w) {
    accumulate_grads(actor_opt_.params(), actor_copies[w]);
    accumulate_grads(critic_opt_.params(), critic_copies[w]);
  }
  stats.grad_norm = nn::clip_grad_norm(actor_opt_.params(), config_.max_grad_norm);
  nn::clip_grad_norm(critic_opt_.params(), config_.max_grad_norm);
  if (!std::isfinite(stats.grad_norm)) {
    actor_opt_.zero_grad();
    critic_opt_.zero_grad();
    throw DivergenceError("non-finite gradient at step " + std::to_string(state_.step));
  }
  actor_opt_.step();
  critic_opt_.step();
  ++state_.step;
  return stats;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c = state_;
  c.actor = state_.actor.clone();
  c.critic = state_.critic.clone();
  // An optimizer that has not stepped has all-zero moments, which the empty
  // state already means; keeping it empty makes S=0 return `start` verbatim.
  if (actor_opt_.state().step_count > 0) c.actor_opt = actor_opt_.state();
  if (critic_opt_.state().step_count > 0) c.critic_opt = critic_opt_.state();
  return c;
}

double eval_ratio(const PolicyParams& params, const EnergyParams& energy,
                  const std::vector<Instance>& instances, const std::vector<double>& exact_energy) {
  if (instances.empty()) throw ContractError("eval_ratio: no instances");
  double sum = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Rollout r = rollout(instances[i], energy, params, DecodeMode::greedy);
    sum += r.energy.total_weighted / exact_energy[i];
  }
  return sum / static_cast<double>(instances.size());
}

TrainResult train(const TrainConfig& config) {
  config.validate();
  Checkpoint start;
  const bool have_file = !config.checkpoint_path.empty() &&
                         std::filesystem::exists(config.checkpoint_path);
  if (config.resume && have_file) {
    start = load_checkpoint(config.checkpoint_path);
    if (start.actor.embed_dim != config.embed_dim) {
      throw ValidationError("checkpoint width does not match embed_dim");
    }
  } else {
    start = initial_checkpoint(config);
  }

  TrainResult result;
  Trainer trainer(config, start);

  std::vector<Instance> held;
  std::vector<double> exact_energy;
  if (config.eval_every > 0 && config.eval_instances > 0) {
    held = held_out_set(config);
    for (const auto& inst : held) {
      exact_energy.push_back(solve_exact(inst, config.energy).energy.total_weighted);
    }
  }
  auto evaluate_now = [&] { return eval_ratio(trainer.actor(), config.energy, held, exact_energy); };

  std::ofstream log;
  if (!config.log_path.empty()) {
    const bool fresh = !std::filesystem::exists(config.log_path) ||
                       std::filesystem::file_size(config.log_path) == 0;
    log.open(config.log_path, std::ios::app);
    if (!log) throw IoError("cannot open training log " + config.log_path);
    if (fresh) log << "step,mean_reward,grad_stat,critic_loss,eval_ratio\n";
  }

  if (!held.empty() && start.step == 0) {
    const double ratio = evaluate_now();
    result.eval_history.emplace_back(0, ratio);
    if (log.is_open()) log << "0,,,," << fmt(ratio) << "\n";
  }

  const std::uint64_t sample_base = derive_seed(config.seed, kSampleStream);
  for (std::uint64_t s = start.step; s < config.n_steps; ++s) {
    StepStats stats;
    try {
      stats = trainer.step(training_batch(config, s), derive_seed(sample_base, s));
    } catch (const DivergenceError&) {
      if (!config.checkpoint_path.empty()) save_checkpoint(trainer.checkpoint(), config.checkpoint_path);
      throw;
    }
    const std::uint64_t done = s + 1;
    std::string ratio_text;
    if (!held.empty() && (done % config.eval_every == 0 || done == config.n_steps)) {
      const double ratio = evaluate_now();
      result.eval_history.emplace_back(done, ratio);
      ratio_text = fmt(ratio);
    }
    if (log.is_open()) {
      log << done << ',' << fmt(stats.mean_reward) << ',' << fmt(stats.grad_norm) << ','
          << fmt(stats.critic_loss) << ',' << ratio_text << "\n";
      if (!log) throw IoError("write failed for training log " + config.log_path);
    }
    const bool periodic = config.checkpoint_every > 0 && done % config.checkpoint_every == 0;
    if (!config.checkpoint_path.empty() && periodic && done != config.n_steps) {
      log.flush();
      save_checkpoint(trainer.checkpoint(), config.checkpoint_path);
    }
  }

  result.checkpoint = trainer.checkpoint();
  if (!config.checkpoint_path.empty()) save_checkpoint(result.checkpoint, config.checkpoint_path);
  return result;
}

SolveReport run_solver(const std::string& solver, const Instance& instance,
                       const EnergyParams& energy, const AcoConfig& aco,
                       const PolicyParams* policy) {
  if (solver == "exact") return solve_exact(instance, energy);
  if (solver == "brute_force") return brute_force(instance, energy);
  if (solver == "greedy") return solve_greedy(instance, energy);
  if (solver == "aco") return solve_aco(instance, energy, aco);
  if (solver == "drl") {
    if (policy == nullptr) throw ValidationError("solver drl needs a checkpoint");
    return solve_drl(instance, energy, *policy);
  }
  throw ValidationError("unknown solver '" + solver + "'");
}

ComparisonTable evaluate(const std::vector<Instance>& instances, const EnergyParams& energy,
                         std::vector<std::string> solvers, const AcoConfig& aco,
                         const PolicyParams* policy) {
  solvers.erase(std::remove(solvers.begin(), solvers.end(), "exact"), solvers.end());
  solvers.insert(solvers.begin(), "exact");
  ComparisonTable table;
  table.solvers = solvers;
  ComparisonRow mean;
  mean.label = "mean";
  for (std::size_t i = 0; i < instances.size(); ++i) {
    ComparisonRow row;
    row.label = std::to_string(i);
    for (const auto& name : solvers) {
      SolveReport rep = run_solver(name, instances[i], energy, aco, policy);
      row.energy[name] = rep.energy.total_weighted;
      row.seconds[name] = rep.wall_clock;
      table.reports.push_back(std::move(rep));
    }
    const double base = row.energy.at("exact");
    for (const auto& name : solvers) {
      row.ratio[name] = name == "exact" ? 1.0 : row.energy[name] / base;
      mean.energy[name] += row.energy[name];
      mean.ratio[name] += row.ratio[name];
      mean.seconds[name] += row.seconds[name];
    }
    table.rows.push_back(std::move(row));
  }
  const double n = static_cast<double>(std::max<std::size_t>(instances.size(), 1));
  for (const auto& name : solvers) {
    mean.energy[name] /= n;
    mean.ratio[name] = instances.empty() ? 1.0 : mean.ratio[name] / n;
    mean.seconds[name] /= n;
  }
  table.rows.push_back(std::move(mean));
  return table;
}

}  // namespace uavgtsp
