#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "simlearn/common.hpp"

namespace simlearn::optim {

using Eigen::VectorXd;

struct Hyperparams {
  // RProp (iRprop-)
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta0 = 0.1;
  double delta_min = 1e-6;
  double delta_max = 50.0;
  // Adam / RMSProp
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rms_decay = 0.9;
  double eps = 1e-8;
};

/// First-order optimizer over a flat parameter vector. State is single-owner:
/// exactly one training loop drives step().
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(VectorXd& params, const VectorXd& grad) = 0;
  virtual std::string name() const = 0;
};

/// iRprop- : sign-based step size adaptation, no weight backtracking.
/// Full-batch gradients are the caller's contract.
class Rprop final : public Optimizer {
 public:
  Rprop(Eigen::Index n_params, const Hyperparams& hp = {});
  void step(VectorXd& params, const VectorXd& grad) override;
  std::string name() const override { return "rprop"; }
  const VectorXd& step_sizes() const { return delta_; }

 private:
  Hyperparams hp_;
  VectorXd delta_;
  VectorXd prev_grad_;
};

class Adam final : public Optimizer {
 public:
  Adam(Eigen::Index n_params, const Hyperparams& hp = {});
  void step(VectorXd& params, const VectorXd& grad) override;
  std::string name() const override { return "adam"; }

 private:
  Hyperparams hp_;
  VectorXd m_, v_;
  long t_ = 0;
};

class RmsProp final : public Optimizer {
 public:
  RmsProp(Eigen::Index n_params, const Hyperparams& hp = {});
  void step(VectorXd& params, const VectorXd& grad) override;
  std::string name() const override { return "rmsprop"; }

 private:
  Hyperparams hp_;
  VectorXd acc_;
};

std::unique_ptr<Optimizer> make_optimizer(const std::string& id, Eigen::Index n_params,
                                          const Hyperparams& hp = {});

}  // namespace simlearn::optim
