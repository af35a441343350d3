#pragma once

#include <cstdint>
#include <vector>

#include "uavgtsp/tensor.hpp"

namespace uavgtsp::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Moment buffers for one parameter list, in the same order.
struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step_count = 0;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  // Bias-corrected Adam update followed by zeroing the gradients. Throws
  // DivergenceError, leaving parameters untouched, if any gradient is not
  // finite.
  void step();
  void zero_grad();

  const AdamConfig& config() const { return config_; }
  const AdamState& state() const { return state_; }
  // Restores moments from a checkpoint; shapes must match the parameters.
  void set_state(AdamState state);
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  AdamState state_;
};

// Global L2 norm of the gradients of `params`.
double grad_norm(const std::vector<Tensor>& params);
// Rescales gradients so their global norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(const std::vector<Tensor>& params, double max_norm);

}  // namespace uavgtsp::nn
