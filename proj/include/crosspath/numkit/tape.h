#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crosspath/numkit/tensor.h"

namespace crosspath::numkit {

// A named learnable (or persistent, non-trainable) tensor with its gradient
// accumulator. Gradients always share the value's shape.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool trainable = true)
      : name(std::move(name)),
        value(std::move(value)),
        grad(Tensor(this->value.shape())),
        trainable(trainable) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Gradient rule of a recorded primitive. `in_grads[k]` is null when input k
// does not require a gradient; rules must accumulate (+=), never assign.
using BackwardFn = std::function<void(
    const Tensor& out_value, const Tensor& out_grad,
    std::span<const Tensor* const> in_values, std::span<Tensor* const> in_grads)>;

// Records primitives in execution order; backward() replays them in reverse,
// which is a reverse topological order because operands always precede
// results. A tape supports exactly one backward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter; backward() accumulates into param.grad.
  Var parameter(Parameter& param);
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(const Var& v) const;
  bool requires_grad(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }

  void backward(const Var& loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::size_t check(const Var& v) const;

  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace crosspath::numkit
