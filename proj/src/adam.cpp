#include "uavgtsp/adam.hpp"

#include <cmath>

#include "uavgtsp/errors.hpp"

namespace uavgtsp::nn {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("adam: learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ValidationError("adam: beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ValidationError("adam: beta2 must be in (0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("adam: epsilon must be > 0");
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  config_.validate();
  for (const auto& p : params_) {
    if (!p.requires_grad()) throw ContractError("adam: parameter without gradient");
    state_.first_moment.emplace_back(p.size(), 0.0);
    state_.second_moment.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  for (const auto& p : params_) {
    for (double g : p.grad()) {
      if (!std::isfinite(g)) throw DivergenceError("adam: non-finite gradient");
    }
  }
  ++state_.step_count;
  const double t = static_cast<double>(state_.step_count);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto value = params_[k].mutable_data();
    auto grad = params_[k].mutable_grad();
    auto& m = state_.first_moment[k];
    auto& v = state_.second_moment[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      grad[i] = 0.0;
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::set_state(AdamState state) {
  if (state.first_moment.size() != params_.size() ||
      state.second_moment.size() != params_.size()) {
    throw ValidationError("adam: state has wrong number of buffers");
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (state.first_moment[k].size() != params_[k].size() ||
        state.second_moment[k].size() != params_[k].size()) {
      throw ValidationError("adam: state buffer " + std::to_string(k) + " has wrong size");
    }
  }
  state_ = std::move(state);
}

double grad_norm(const std::vector<Tensor>& params) {
  double total = 0.0;
  for (const auto& p : params)
    for (double g : p.grad()) total += g * g;
  return std::sqrt(total);
}

double clip_grad_norm(const std::vector<Tensor>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto p : params)
      for (double& g : p.mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace uavgtsp::nn
