#pragma once

// Central finite differences against the tape.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "uavgtsp/tensor.hpp"

namespace testing {

struct FdResult {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  // The worst entry, for failure messages.
  std::size_t worst_param = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// |a - n| / max(|a|, |n|, floor): relative where the gradient is sizable,
// measured against `floor` where it is close to zero. check_gradients sets
// the floor to scale_floor times the largest analytic entry, so entries far
// below the gradient's own scale are judged on the scale the difference
// quotient can resolve.
inline double rel_err(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// `loss` rebuilds a scalar from the current values of `params` on each call.
inline FdResult check_gradients(std::vector<uavgtsp::nn::Tensor> params,
                                const std::function<uavgtsp::nn::Tensor()>& loss,
                                double h = 1e-5, double scale_floor = 1e-3) {
  for (auto& p : params) p.zero_grad();
  uavgtsp::nn::backward(loss());
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  double largest = 0.0;
  for (const auto& g : analytic) {
    for (double v : g) largest = std::max(largest, std::abs(v));
  }
  const double floor = std::max(1e-6, scale_floor * largest);

  FdResult r;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + h;
      const double up = loss().item();
      values[j] = saved - h;
      const double down = loss().item();
      values[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double e = rel_err(analytic[i][j], numeric, floor);
      if (e > r.max_rel_err) r = {e, r.checked, i, analytic[i][j], numeric};
      ++r.checked;
    }
  }
  for (auto& p : params) p.zero_grad();
  return r;
}

}  // namespace testing
