#include "strlab/tape.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "strlab/errors.hpp"

namespace strlab {

namespace {

void check_finite(const Tensor& t, const char* op) {
  const double* d = t.data();
  for (int64_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(d[i]))
      throw NumericError(std::string("non-finite value produced by op '") + op + "'");
  }
}

}  // namespace

ValueId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

ValueId Tape::leaf_view(const Tensor* value) {
  Node n;
  n.view = value;
  return push(std::move(n));
}

ValueId Tape::param(const std::string& name, const Tensor* value) {
  if (params_.count(name)) throw Error("parameter bound twice: " + name);
  Node n;
  n.view = value;
  n.needs_grad = true;
  n.op = "param";
  ValueId id = push(std::move(n));
  params_[name] = id;
  return id;
}

ValueId Tape::record(const char* op, Tensor value, std::vector<ValueId> inputs,
                     BackwardFn backward) {
  check_finite(value, op);
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (ValueId in : inputs) {
    if (in < 0 || static_cast<size_t>(in) >= nodes_.size())
      throw Error(std::string("op '") + op + "' references unknown node");
    if (nodes_[static_cast<size_t>(in)].needs_grad) n.needs_grad = true;
  }
  if (n.needs_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::grad(ValueId id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.adjoint.size() == 0 && n.val().size() != 0) n.adjoint = Tensor(n.val().shape());
  return n.adjoint;
}

void Tape::accumulate(ValueId id, const Tensor& g) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.needs_grad) return;
  if (n.adjoint.size() == 0) n.adjoint = Tensor(n.val().shape());
  if (!n.adjoint.same_shape(g))
    throw NumericError("gradient shape mismatch: " + n.adjoint.shape_str() + " vs " +
                       g.shape_str());
  double* a = n.adjoint.data();
  const double* b = g.data();
  for (int64_t i = 0; i < g.size(); ++i) a[i] += b[i];
}

void Tape::backward(ValueId loss) {
  Node& top = nodes_.at(static_cast<size_t>(loss));
  if (top.val().size() != 1) throw Error("backward: loss must be scalar");
  if (!top.needs_grad) return;  // loss does not depend on any parameter
  accumulate(loss, Tensor::scalar(1.0));
  for (ValueId id = loss; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad || !n.backward) continue;
    if (n.adjoint.size() == 0) continue;  // never reached from the loss
    n.backward(*this, id);
  }
}

std::map<std::string, Tensor> Tape::param_grads() {
  std::map<std::string, Tensor> out;
  for (const auto& [name, id] : params_) {
    const Node& n = nodes_[static_cast<size_t>(id)];
    out[name] = n.adjoint.size() ? n.adjoint : Tensor(n.val().shape());
  }
  return out;
}

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  auto [it, inserted] = tensors_.emplace(name, std::move(t));
  if (!inserted) throw Error("parameter already exists: " + name);
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error("no such parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error("no such parameter: " + name);
  return it->second;
}

int64_t ParamStore::total_size() const {
  int64_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

std::map<std::string, ValueId> ParamStore::bind(Tape& tape) const {
  std::map<std::string, ValueId> ids;
  for (const auto& [name, t] : tensors_) ids[name] = tape.param(name, &t);
  return ids;
}

namespace {
constexpr char kParamMagic[4] = {'S', 'T', 'P', 'K'};
constexpr uint32_t kParamVersion = 1;
}  // namespace

void save_params(const ParamStore& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write params: " + path);
  save_params_stream(params, out);
  if (!out) throw IoError("param write failed: " + path);
}

void save_params_stream(const ParamStore& params, std::ostream& out) {
  out.write(kParamMagic, 4);
  uint32_t version = kParamVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  uint32_t count = static_cast<uint32_t>(params.tensors().size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& [name, t] : params.tensors()) {
    uint32_t len = static_cast<uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(name.data(), len);
    uint32_t rank = static_cast<uint32_t>(t.rank());
    out.write(reinterpret_cast<const char*>(&rank), 4);
    for (int64_t d : t.shape()) out.write(reinterpret_cast<const char*>(&d), 8);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size()) * 8);
  }
}

ParamStore load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read params: " + path);
  return load_params_stream(in, path);
}

ParamStore load_params_stream(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kParamMagic, 4) != 0) throw IoError("bad params magic: " + path);
  uint32_t version = 0, count = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != kParamVersion) throw IoError("unsupported params version: " + path);
  in.read(reinterpret_cast<char*>(&count), 4);
  ParamStore store;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    std::string name(len, '\0');
    in.read(name.data(), len);
    uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), 4);
    std::vector<int64_t> shape(rank);
    for (uint32_t r = 0; r < rank; ++r) in.read(reinterpret_cast<char*>(&shape[r]), 8);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size()) * 8);
    if (!in) throw IoError("truncated params: " + path);
    store.add(name, std::move(t));
  }
  return store;
}

}  // namespace strlab
