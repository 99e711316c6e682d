#include "crosspath/numkit/tape.h"

#include <algorithm>

#include "crosspath/common/errors.h"

namespace crosspath::numkit {

const Tensor& Var::value() const {
  if (!tape_) throw GraphError("value() of a detached variable");
  return tape_->value(*this);
}

std::size_t Tape::check(const Var& v) const {
  if (v.tape_ != this) {
    throw GraphError(v.tape_ ? "variable belongs to a different tape"
                             : "detached variable used in graph");
  }
  if (v.id_ >= nodes_.size()) throw GraphError("variable id out of range");
  return v.id_;
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  Node node;
  node.value = param.value;
  node.param = &param;
  node.requires_grad = param.trainable;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (backward_done_) {
    throw GraphError("cannot record on a tape after backward()");
  }
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    const std::size_t id = check(in);
    node.inputs.push_back(id);
    node.requires_grad = node.requires_grad || nodes_[id].requires_grad;
  }
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(const Var& v) const { return nodes_[check(v)].value; }

bool Tape::requires_grad(const Var& v) const {
  return nodes_[check(v)].requires_grad;
}

void Tape::backward(const Var& loss) {
  const std::size_t root = check(loss);
  if (backward_done_) {
    throw GraphError("backward() called twice without a new forward pass");
  }
  if (nodes_[root].value.size() != 1) {
    throw GraphError("backward() needs a scalar loss, got " +
                     nodes_[root].value.shape_string());
  }
  backward_done_ = true;
  for (std::size_t i = 0; i <= root; ++i) {
    if (nodes_[i].requires_grad) nodes_[i].grad = Tensor(nodes_[i].value.shape());
  }
  if (!nodes_[root].requires_grad) return;
  nodes_[root].grad[0] = 1.0;

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (std::size_t i = root + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad) continue;
    if (node.param) {
      Tensor& target = node.param->grad;
      for (std::size_t k = 0; k < target.size(); ++k) target[k] += node.grad[k];
      continue;
    }
    if (!node.backward) continue;
    in_values.clear();
    in_grads.clear();
    for (std::size_t id : node.inputs) {
      in_values.push_back(&nodes_[id].value);
      in_grads.push_back(nodes_[id].requires_grad ? &nodes_[id].grad : nullptr);
    }
    node.backward(node.value, node.grad, in_values, in_grads);
  }
}

}  // namespace crosspath::numkit
