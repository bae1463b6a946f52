#pragma once

#include <map>
#include <memory>
#include <string>

#include "strlab/tape.hpp"

namespace strlab {

/// Optimizer state accumulators mirror parameter shapes; step() is
/// deterministic given (params, grads, hyperparameters).
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParamStore& params, const std::map<std::string, Tensor>& grads) = 0;
  virtual std::string name() const = 0;

  /// Serialize accumulators into a ParamStore under a prefix (checkpointing).
  virtual void save_state(ParamStore& out, const std::string& prefix) const = 0;
  virtual void load_state(const ParamStore& in, const std::string& prefix) = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam : public Optimizer {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  void step(ParamStore& params, const std::map<std::string, Tensor>& grads) override;
  std::string name() const override { return "adam"; }
  void save_state(ParamStore& out, const std::string& prefix) const override;
  void load_state(const ParamStore& in, const std::string& prefix) override;

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

struct AdadeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
  double lr = 1.0;
};

class Adadelta : public Optimizer {
 public:
  explicit Adadelta(AdadeltaConfig cfg = {}) : cfg_(cfg) {}
  void step(ParamStore& params, const std::map<std::string, Tensor>& grads) override;
  std::string name() const override { return "adadelta"; }
  void save_state(ParamStore& out, const std::string& prefix) const override;
  void load_state(const ParamStore& in, const std::string& prefix) override;

 private:
  AdadeltaConfig cfg_;
  std::map<std::string, Tensor> eg_, ex_;  // running squared grad / update
};

}  // namespace strlab
