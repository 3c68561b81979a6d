#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hcn/grad/tensor.hpp"

namespace hcn::grad {

enum class Mode { train, eval };

/// Handle to a node of a Graph. Only meaningful for the graph that issued it.
struct Var {
  static constexpr std::uint32_t invalid = 0xFFFFFFFFu;
  std::uint32_t id = invalid;
  bool valid() const { return id != invalid; }
  friend bool operator==(Var, Var) = default;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::size_t index = 0;  // position within the owning ParameterSet
};

/// Owns trainable tensors. Parameters have stable addresses for the life of
/// the set, so graphs may hold pointers to them.
template <typename T>
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter<T>& add(std::string name, Tensor<T> init) {
    if (find(name)) throw ConfigError("duplicate parameter name " + name);
    auto p = std::make_unique<Parameter<T>>(Parameter<T>{std::move(name), std::move(init), params_.size()});
    params_.push_back(std::move(p));
    return *params_.back();
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  const Parameter<T>* find(const std::string& name) const {
    for (const auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }
  Parameter<T>* find(const std::string& name) {
    return const_cast<Parameter<T>*>(std::as_const(*this).find(name));
  }

  std::vector<Tensor<T>> snapshot() const {
    std::vector<Tensor<T>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
  }

  void restore(const std::vector<Tensor<T>>& values) {
    if (values.size() != params_.size()) throw DimensionError("snapshot size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!values[i].same_shape(params_[i]->value)) {
        throw DimensionError("snapshot shape mismatch for " + params_[i]->name);
      }
      params_[i]->value = values[i];
    }
  }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

/// One gradient tensor per parameter of a set, in the same order.
template <typename T>
class GradientBuffer {
 public:
  explicit GradientBuffer(const ParameterSet<T>& params) {
    grads_.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) grads_.emplace_back(params[i].value.shape());
  }

  std::size_t size() const { return grads_.size(); }
  Tensor<T>& operator[](std::size_t i) { return grads_[i]; }
  const Tensor<T>& operator[](std::size_t i) const { return grads_[i]; }

  void zero() {
    for (auto& g : grads_) g.fill(T{});
  }

  double global_norm() const {
    double sq = 0.0;
    for (const auto& g : grads_) {
      for (T v : g.data()) sq += static_cast<double>(v) * static_cast<double>(v);
    }
    return std::sqrt(sq);
  }

  void scale(T factor) {
    for (auto& g : grads_) {
      for (T& v : g.data()) v *= factor;
    }
  }

  /// Rescales so the global norm does not exceed max_norm. Returns the norm
  /// before clipping.
  double clip_global_norm(double max_norm) {
    const double norm = global_norm();
    if (norm > max_norm) scale(static_cast<T>(max_norm / norm));
    return norm;
  }

 private:
  std::vector<Tensor<T>> grads_;
};

/// Append-only reverse-mode tape. Nodes reference only earlier nodes, so the
/// insertion order is a topological order and backward walks it in reverse.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const std::vector<Var>& inputs, const Tensor<T>& out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor<T> value) { return push(Node{"constant", {}, std::move(value), nullptr, nullptr, {}, false}); }

  /// Leaf that reads `value` in place; the tensor must outlive the graph.
  Var constant_ref(const Tensor<T>& value) {
    return push(Node{"constant", {}, Tensor<T>{}, &value, nullptr, {}, false});
  }

  Var parameter(const Parameter<T>& p) {
    return push(Node{"parameter", {}, Tensor<T>{}, &p.value, &p, {}, true});
  }

  /// Records the result of a primitive op. `backward` receives the output
  /// gradient and must add into the gradients of its inputs via grad_mut.
  Var record(const char* op, std::vector<Var> inputs, Tensor<T> value, BackwardFn backward) {
    for (Var in : inputs) check(in);
    if (!value.all_finite()) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
    bool needs = false;
    for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
    return push(Node{op, std::move(inputs), std::move(value), nullptr, nullptr, std::move(backward), needs});
  }

  const Tensor<T>& value(Var v) const {
    check(v);
    const Node& n = nodes_[v.id];
    return n.external ? *n.external : n.value;
  }

  bool requires_grad(Var v) const {
    check(v);
    return nodes_[v.id].requires_grad;
  }

  bool has_grad(Var v) const {
    check(v);
    return nodes_[v.id].grad.has_value();
  }

  /// Gradient of the last backward pass; zeros when the node was unreachable.
  Tensor<T> grad(Var v) const {
    check(v);
    const Node& n = nodes_[v.id];
    return n.grad ? *n.grad : Tensor<T>(value(v).shape());
  }

  Tensor<T>& grad_mut(Var v) {
    check(v);
    Node& n = nodes_[v.id];
    if (!n.grad) n.grad.emplace(value(v).shape());
    return *n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

  void backward(Var loss) {
    check(loss);
    if (value(loss).size() != 1) {
      throw UsageError("backward requires a scalar loss, got shape " + to_string(value(loss).shape()));
    }
    for (auto& n : nodes_) n.grad.reset();
    grad_mut(loss)[0] = T{1};
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.grad || !n.requires_grad) continue;
      if (!n.grad->all_finite()) {
        throw NumericError(std::string("non-finite gradient at ") + n.op);
      }
      if (n.backward) {
        // nodes_ is not resized during backward, so this reference stays valid.
        const Tensor<T>& g = *n.grad;
        n.backward(*this, n.inputs, g);
      }
    }
  }

  /// Adds the gradients of every parameter leaf into `out`. Parameters that
  /// appear several times are summed; unreachable ones contribute nothing.
  void accumulate_into(GradientBuffer<T>& out) const {
    for (const Node& n : nodes_) {
      if (!n.param || !n.grad) continue;
      Tensor<T>& dst = out[n.param->index];
      const auto src = n.grad->data();
      auto d = dst.data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += src[k];
    }
  }

 private:
  struct Node {
    const char* op;
    std::vector<Var> inputs;
    Tensor<T> value;
    const Tensor<T>* external;
    const Parameter<T>* param;
    BackwardFn backward;
    bool requires_grad;
    std::optional<Tensor<T>> grad{};
  };

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  void check(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) throw UsageError("variable does not belong to this graph");
  }

  std::vector<Node> nodes_;
};

/// Parameter leaves of one graph, created on first use, so that a parameter
/// read at every time step of an unrolled sequence is a single node.
template <typename T>
class Binding {
 public:
  Binding(Graph<T>& graph, const ParameterSet<T>& params)
      : graph_(graph), params_(params), vars_(params.size()) {}

  Var operator[](std::size_t index) {
    Var& v = vars_.at(index);
    if (!v.valid()) v = graph_.parameter(params_[index]);
    return v;
  }

  Graph<T>& graph() { return graph_; }
  const ParameterSet<T>& params() const { return params_; }

 private:
  Graph<T>& graph_;
  const ParameterSet<T>& params_;
  std::vector<Var> vars_;
};

/// Gradients of a scalar loss for every parameter of `params`; parameters the
/// loss does not depend on get zeros.
template <typename T>
GradientBuffer<T> gradients(Graph<T>& graph, Var loss, const ParameterSet<T>& params) {
  graph.backward(loss);
  GradientBuffer<T> out(params);
  graph.accumulate_into(out);
  return out;
}

}  // namespace hcn::grad
