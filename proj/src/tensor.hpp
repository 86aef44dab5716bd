#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "error.hpp"

namespace mlcl {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);

/// Dense row-major tensor of doubles with an optional same-shape gradient
/// accumulator. Gradients are written by Tape::backward.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);
  static Tensor scalar(double v);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double at(std::size_t i) const { return values_[i]; }
  double& at(std::size_t i) { return values_[i]; }

  bool has_grad() const { return grad_.size() == values_.size() && !values_.empty(); }
  std::span<const double> grad() const;
  std::span<double> grad();
  void zero_grad();

 private:
  Shape shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

  const Shape& shape() const;
  std::size_t numel() const;
  std::span<const double> values() const;
  double value() const;  // scalar nodes only

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = static_cast<std::size_t>(-1);
};

/// Norm guard for cosine similarity; vectors with smaller norms are
/// treated as a bug in the caller and rejected.
inline constexpr double kNormEpsilon = 1e-12;

/// Record of forward operations replayed in reverse for adjoints.
/// Single-threaded; one tape per training step.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Binds a parameter tensor: backward() accumulates into param.grad.
  Var leaf(Tensor& param);

  /// Value without gradient tracking.
  Var constant(const Tensor& t);
  Var constant(Shape shape, std::vector<double> values);
  Var scalar_constant(double v);

  // Elementwise; shapes must match.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);

  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var neg(Var a) { return scale(a, -1.0); }

  Var tanh(Var a);
  Var sigmoid(Var a);
  Var log(Var a);  // requires strictly positive entries

  Var matmul(Var a, Var b);  // [m,k] x [k,n] -> [m,n]
  Var vecmat(Var x, Var w);  // [k] x [k,n] -> [n]
  Var dot(Var a, Var b);     // [n] · [n] -> scalar

  Var mean_axis(Var a, std::size_t axis);  // [r,c] -> axis 0: [c], axis 1: [r]
  Var sum(Var a);                          // all elements -> scalar
  Var sum(std::span<const Var> scalars);   // n-ary scalar sum; empty -> 0 constant
  Var concat(Var a, Var b);                // 1-D
  Var row(Var m, std::size_t r);           // [r,c] -> [c]
  Var rows(Var m, std::span<const std::uint32_t> indices);  // gather -> [len,c]
  Var stack(std::span<const Var> scalars);                  // scalars -> [n]

  /// a·b / (‖a‖‖b‖) for equal-length vectors; errors when either norm
  /// is ≤ kNormEpsilon.
  Var cosine_similarity(Var a, Var b);

  /// log Σ exp(x_i), max-shifted so no intermediate overflows.
  Var log_sum_exp(Var xs);

  /// Reverse pass from a scalar. Zeroes the grad of every bound parameter
  /// first, so repeated calls from the same node give identical gradients.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> adjoint;
    Tensor* bound = nullptr;  // leaves only
    std::function<void(Tape&, std::size_t)> backprop;
  };

  Var push(Shape shape, std::vector<double> value, std::function<void(Tape&, std::size_t)> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  void check_owned(Var v) const;
  static void check_same_shape(const Var& a, const Var& b);

  std::vector<double>& adj(std::size_t id) { return nodes_[id].adjoint; }
  const std::vector<double>& val(std::size_t id) const { return nodes_[id].value; }

  std::vector<Node> nodes_;
  std::vector<std::size_t> leaves_;
};

/// Central-difference gradient estimate (f(θ+he)−f(θ−he))/2h for every
/// coordinate of every parameter tensor. Restores parameters afterwards.
/// The independent oracle against which Tape::backward is checked.
std::vector<std::vector<double>> finite_difference_gradient(const std::function<double()>& f,
                                                            std::span<Tensor* const> params,
                                                            double step);

}  // namespace mlcl
