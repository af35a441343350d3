#include "uavgtsp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "uavgtsp/errors.hpp"

namespace uavgtsp::nn {

std::string Shape::str() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

namespace {

std::shared_ptr<Node> new_leaf(Shape shape, std::vector<double> value, bool requires_grad) {
  if (value.size() != shape.size()) {
    throw DimensionError("tensor data has " + std::to_string(value.size()) +
                         " values for shape " + shape.str());
  }
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(shape.size(), 0.0);
  return node;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

void require_vector(const Tensor& x, const char* op) {
  if (x.rows() != 1 && x.cols() != 1) {
    throw DimensionError(std::string(op) + " expects a vector, got " + x.shape().str());
  }
  if (x.size() == 0) throw DimensionError(std::string(op) + " of an empty vector");
}

// Applies f elementwise; df(x, y) is the local derivative given input and output.
template <class F, class DF>
Tensor unary(const Tensor& a, F f, DF df) {
  std::vector<double> out(a.size());
  auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(a.shape(), std::move(out), {a}, [df](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.grad[i] * df(p.value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn) {
  bool needs_grad = std::any_of(parents.begin(), parents.end(),
                                [](const Tensor& t) { return t.requires_grad(); });
  auto node = new_leaf(shape, std::move(value), needs_grad);
  if (needs_grad) {
    // Every parent stays in the list so backward rules can index them by
    // position; multi-input rules check requires_grad before writing.
    for (auto& p : parents) node->parents.push_back(p.node_);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return Tensor(new_leaf({rows, cols}, std::vector<double>(rows * cols, 0.0), requires_grad));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value) {
  return Tensor(new_leaf({rows, cols}, std::vector<double>(rows * cols, value), false));
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  return Tensor(new_leaf({rows, cols}, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(1, 1, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  static const Shape empty{};
  return node_ ? node_->shape : empty;
}

std::span<const double> Tensor::data() const { return node_->value; }
std::span<double> Tensor::mutable_data() { return node_->value; }

double Tensor::at(std::size_t r, std::size_t c) const {
  return node_->value[r * node_->shape.cols + c];
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape().str());
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::grad() const {
  if (!requires_grad()) return {};
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!requires_grad()) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(new_leaf(shape(), node_->value, false)); }

Tensor Tensor::clone() const {
  return Tensor(new_leaf(shape(), node_->value, node_->requires_grad));
}

namespace {

// Matrix-vector case of matmul, laid out so every inner loop is contiguous.
Tensor matvec(const Tensor& a, const Tensor& x, std::vector<double> out) {
  const std::size_t m = a.rows(), k = a.cols();
  auto av = a.data();
  auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = av.data() + i * k;
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += row[p] * xv[p];
    out[i] = acc;
  }
  return make_result({m, 1}, std::move(out), {a, x}, [m, k](Node& self) {
    Node& pa = *self.parents[0];
    Node& px = *self.parents[1];
    const double* g = self.grad.data();
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        double* grow = pa.grad.data() + i * k;
        const double gi = g[i];
        for (std::size_t p = 0; p < k; ++p) grow[p] += gi * px.value[p];
      }
    }
    if (px.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = pa.value.data() + i * k;
        const double gi = g[i];
        for (std::size_t p = 0; p < k; ++p) px.grad[p] += gi * row[p];
      }
    }
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + a.shape().str() + " x " + b.shape().str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  auto av = a.data();
  auto bv = b.data();
  if (n == 1) return matvec(a, b, std::move(out));
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double* g = self.grad.data();
    if (pa.requires_grad) {
      // dA = dC * B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb.value.data() + p * n;
          const double* grow = g + i * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          pa.grad[i * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      // dB = A^T * dC
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = pa.value[i * k + p];
          double* bgrow = pb.grad.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) bgrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return make_result({c, r}, std::move(out), {a}, [r, c](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += self.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += self.grad[i];
      if (pb.requires_grad) pb.grad[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.value[i];
      if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary(
      a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

namespace {

// Max over finite entries; throws when there are none.
double finite_max(std::span<const double> x, const char* op) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (v != -std::numeric_limits<double>::infinity()) m = std::max(m, v);
  }
  if (m == -std::numeric_limits<double>::infinity()) {
    throw ContractError(std::string(op) + ": every entry is masked");
  }
  return m;
}

}  // namespace

Tensor softmax(const Tensor& x) {
  require_vector(x, "softmax");
  auto in = x.data();
  const double m = finite_max(in, "softmax");
  std::vector<double> out(in.size());
  double total = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    double dot = 0.0;
    for (std::size_t i = 0; i < self.grad.size(); ++i) dot += self.grad[i] * self.value[i];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.value[i] * (self.grad[i] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  require_vector(x, "log_softmax");
  auto in = x.data();
  const double m = finite_max(in, "log_softmax");
  double total = 0.0;
  for (double v : in) total += std::exp(v - m);
  const double lse = m + std::log(total);
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - lse;
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    double gsum = 0.0;
    for (double g : self.grad) gsum += g;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.grad[i] - std::exp(self.value[i]) * gsum;
    }
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_result({1, 1}, {total}, {a}, [](Node& self) {
    Node& p = *self.parents[0];
    for (double& g : p.grad) g += self.grad[0];
  });
}

Tensor pick(const Tensor& a, std::size_t index) {
  if (index >= a.size()) {
    throw DimensionError("pick: index " + std::to_string(index) + " outside " +
                         a.shape().str());
  }
  return make_result({1, 1}, {a.data()[index]}, {a}, [index](Node& self) {
    self.parents[0]->grad[index] += self.grad[0];
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + a.shape().str());
  }
  const std::size_t c = a.cols();
  auto in = a.data();
  std::vector<double> out(in.begin() + begin * c, in.begin() + (begin + count) * c);
  return make_result({count, c}, std::move(out), {a}, [begin, c](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[begin * c + i] += self.grad[i];
  });
}

Tensor column(const Tensor& a, std::size_t c) {
  if (c >= a.cols()) {
    throw DimensionError("column " + std::to_string(c) + " outside " + a.shape().str());
  }
  const std::size_t r = a.rows(), n = a.cols();
  std::vector<double> out(r);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i) out[i] = in[i * n + c];
  return make_result({r, 1}, std::move(out), {a}, [c, n](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i * n + c] += self.grad[i];
  });
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got " + loss.shape().str());
  }
  Node* root = loss.node_.get();
  if (!root->requires_grad) return;

  // Iterative post-order DFS; reversed, it is a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward_fn) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace uavgtsp::nn
