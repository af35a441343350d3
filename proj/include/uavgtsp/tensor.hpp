#pragma once

// Dense 2-D tensors with a dynamic reverse-mode graph.
//
// Every tensor is a rows x cols matrix of doubles stored row-major; vectors
// are explicit [n x 1] or [1 x n] matrices. An operation whose inputs require
// gradients records its parents and a backward rule on the result node, so a
// computation builds its own tape as it runs. backward() walks that graph in
// reverse topological order. There is no broadcasting except scale().

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace uavgtsp::nn {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

struct Node;

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor full(std::size_t rows, std::size_t cols, double value);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::size_t size() const { return shape().size(); }

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const;
  // Empty span unless requires_grad().
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Same values, cut from the graph.
  Tensor detach() const;
  // Deep copy of values into a fresh leaf with the same requires_grad flag.
  Tensor clone() const;

  Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;

  friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>,
                            std::function<void(Node&)>);
  friend void backward(const Tensor&);
};

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into its parents' grads.
  std::function<void(Node&)> backward_fn;
};

// Result node for a custom op. Parents and backward_fn are recorded only when
// at least one parent needs gradients; parents keep their positions, so a
// rule must check requires_grad before writing into a parent.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor log(const Tensor& a);

// Softmax over all entries of a vector-shaped tensor. Entries equal to -inf
// get probability exactly 0. Throws ContractError when every entry is -inf.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

Tensor sum(const Tensor& a);
// Scalar tensor holding entry `index` of the flattened data.
Tensor pick(const Tensor& a, std::size_t index);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);
Tensor column(const Tensor& a, std::size_t c);

// Fills the grad of every requires_grad tensor reachable from `loss` with
// d loss / d tensor. Leaf gradients accumulate across calls; intermediate
// gradients are recomputed from scratch each call.
void backward(const Tensor& loss);

}  // namespace uavgtsp::nn
