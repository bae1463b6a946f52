#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "strlab/tensor.hpp"

namespace strlab {

using ValueId = int32_t;

/// Records one forward computation for reverse-mode differentiation.
///
/// Nodes are appended in execution order, which is already a topological
/// order (an op can only reference ids that exist). backward() walks the
/// node list once in reverse, so every node's rule runs exactly once after
/// all its consumers have contributed to its adjoint.
///
/// A Tape is confined to one thread; parameters live outside (ParamStore)
/// and are bound as leaves per recording.
class Tape {
 public:
  /// Backward rule: read grad(out), accumulate into the node's inputs.
  using BackwardFn = std::function<void(Tape&, ValueId out)>;

  /// Constant leaf (no gradient tracked).
  ValueId leaf(Tensor value);

  /// Constant leaf referencing external storage (no copy). The referenced
  /// tensor must outlive the tape and stay unmodified while it is in use.
  ValueId leaf_view(const Tensor* value);

  /// Parameter leaf, registered under a unique name. Views external storage
  /// like leaf_view (parameters live in a ParamStore across steps).
  ValueId param(const std::string& name, const Tensor* value);

  /// Record an op result. `inputs` are the ids the backward rule touches;
  /// the output tracks gradients iff any input does. Throws NumericError if
  /// the value contains NaN/Inf.
  ValueId record(const char* op, Tensor value, std::vector<ValueId> inputs, BackwardFn backward);

  const Tensor& value(ValueId id) const { return nodes_[static_cast<size_t>(id)].val(); }
  bool needs_grad(ValueId id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }

  /// Adjoint of a node; zeros until something accumulates into it.
  const Tensor& grad(ValueId id);

  /// Add `g` into the adjoint of `id` (no-op for non-grad nodes).
  void accumulate(ValueId id, const Tensor& g);

  /// Reverse sweep from a scalar loss. Seeds d(loss)/d(loss) = 1.
  void backward(ValueId loss);

  /// Parameters bound on this tape, in name order.
  const std::map<std::string, ValueId>& params() const { return params_; }

  /// Gradient per bound parameter after backward(); parameters the loss
  /// never reached get zero tensors of the right shape.
  std::map<std::string, Tensor> param_grads();

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;                 // owned storage (ops, plain leaves)
    const Tensor* view = nullptr; // external storage (params, leaf views)
    Tensor adjoint;               // empty until first accumulate
    BackwardFn backward;          // empty for leaves
    bool needs_grad = false;
    const char* op = "leaf";

    const Tensor& val() const { return view ? *view : value; }
  };

  ValueId push(Node n);

  std::vector<Node> nodes_;
  std::map<std::string, ValueId> params_;
};

/// Named parameter tensors; the registry that owns theta across steps.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return tensors_.count(name) != 0; }

  std::map<std::string, Tensor>& tensors() { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  int64_t total_size() const;

  /// Bind every parameter onto a tape; returns name -> ValueId.
  std::map<std::string, ValueId> bind(Tape& tape) const;

 private:
  std::map<std::string, Tensor> tensors_;
};

/// Binary parameter container: magic, version, count, then per tensor
/// (name length, name, rank, dims, raw little-endian doubles).
void save_params(const ParamStore& params, const std::string& path);
ParamStore load_params(const std::string& path);
void save_params_stream(const ParamStore& params, std::ostream& out);
ParamStore load_params_stream(std::istream& in, const std::string& what);

}  // namespace strlab
