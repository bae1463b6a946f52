#include "strlab/optim.hpp"

#include <cmath>

#include "strlab/errors.hpp"

namespace strlab {

namespace {

Tensor& state_for(std::map<std::string, Tensor>& state, const std::string& name,
                  const Tensor& like) {
  auto it = state.find(name);
  if (it == state.end()) it = state.emplace(name, Tensor(like.shape())).first;
  if (!it->second.same_shape(like))
    throw NumericError("optimizer state shape mismatch for " + name);
  return it->second;
}

void check_update_finite(double u, const std::string& name) {
  if (!std::isfinite(u)) throw NumericError("non-finite optimizer update for " + name);
}

}  // namespace

void Adam::step(ParamStore& params, const std::map<std::string, Tensor>& grads) {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& [name, w] : params.tensors()) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    Tensor& m = state_for(m_, name, w);
    Tensor& v = state_for(v_, name, w);
    for (int64_t i = 0; i < w.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      double u = cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      check_update_finite(u, name);
      w[i] -= u;
    }
  }
}

void Adam::save_state(ParamStore& out, const std::string& prefix) const {
  out.add(prefix + "t", Tensor::scalar(static_cast<double>(t_)));
  for (const auto& [name, t] : m_) out.add(prefix + "m." + name, t);
  for (const auto& [name, t] : v_) out.add(prefix + "v." + name, t);
}

void Adam::load_state(const ParamStore& in, const std::string& prefix) {
  t_ = static_cast<int64_t>(in.at(prefix + "t").item());
  m_.clear();
  v_.clear();
  for (const auto& [name, t] : in.tensors()) {
    if (name.rfind(prefix + "m.", 0) == 0) m_[name.substr(prefix.size() + 2)] = t;
    if (name.rfind(prefix + "v.", 0) == 0) v_[name.substr(prefix.size() + 2)] = t;
  }
}

void Adadelta::step(ParamStore& params, const std::map<std::string, Tensor>& grads) {
  for (auto& [name, w] : params.tensors()) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    Tensor& eg = state_for(eg_, name, w);
    Tensor& ex = state_for(ex_, name, w);
    for (int64_t i = 0; i < w.size(); ++i) {
      eg[i] = cfg_.rho * eg[i] + (1.0 - cfg_.rho) * g[i] * g[i];
      double delta = -std::sqrt(ex[i] + cfg_.eps) / std::sqrt(eg[i] + cfg_.eps) * g[i];
      ex[i] = cfg_.rho * ex[i] + (1.0 - cfg_.rho) * delta * delta;
      check_update_finite(delta, name);
      w[i] += cfg_.lr * delta;
    }
  }
}

void Adadelta::save_state(ParamStore& out, const std::string& prefix) const {
  for (const auto& [name, t] : eg_) out.add(prefix + "eg." + name, t);
  for (const auto& [name, t] : ex_) out.add(prefix + "ex." + name, t);
}

void Adadelta::load_state(const ParamStore& in, const std::string& prefix) {
  eg_.clear();
  ex_.clear();
  for (const auto& [name, t] : in.tensors()) {
    if (name.rfind(prefix + "eg.", 0) == 0) eg_[name.substr(prefix.size() + 3)] = t;
    if (name.rfind(prefix + "ex.", 0) == 0) ex_[name.substr(prefix.size() + 3)] = t;
  }
}

}  // namespace strlab
