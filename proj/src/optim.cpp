#include "simlearn/optim.hpp"

#include <cmath>

namespace simlearn::optim {

namespace {
void check_len(const VectorXd& params, const VectorXd& grad, Eigen::Index n) {
  if (params.size() != n || grad.size() != n)
    throw ShapeError("optimizer: parameter/gradient length mismatch");
}
}  // namespace

Rprop::Rprop(Eigen::Index n_params, const Hyperparams& hp)
    : hp_(hp),
      delta_(VectorXd::Constant(n_params, hp.delta0)),
      prev_grad_(VectorXd::Zero(n_params)) {}

void Rprop::step(VectorXd& params, const VectorXd& grad) {
  check_len(params, grad, delta_.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    double g = grad[i];
    double prod = prev_grad_[i] * g;
    if (prod > 0.0) {
      delta_[i] = std::min(delta_[i] * hp_.eta_plus, hp_.delta_max);
    } else if (prod < 0.0) {
      delta_[i] = std::max(delta_[i] * hp_.eta_minus, hp_.delta_min);
      g = 0.0;  // skip the update after a sign change
    }
    if (g > 0.0)
      params[i] -= delta_[i];
    else if (g < 0.0)
      params[i] += delta_[i];
    prev_grad_[i] = g;
  }
}

Adam::Adam(Eigen::Index n_params, const Hyperparams& hp)
    : hp_(hp), m_(VectorXd::Zero(n_params)), v_(VectorXd::Zero(n_params)) {}

void Adam::step(VectorXd& params, const VectorXd& grad) {
  check_len(params, grad, m_.size());
  ++t_;
  m_ = hp_.beta1 * m_ + (1.0 - hp_.beta1) * grad;
  v_ = hp_.beta2 * v_ + (1.0 - hp_.beta2) * grad.cwiseProduct(grad);
  double c1 = 1.0 - std::pow(hp_.beta1, t_);
  double c2 = 1.0 - std::pow(hp_.beta2, t_);
  params.array() -= hp_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + hp_.eps);
}

RmsProp::RmsProp(Eigen::Index n_params, const Hyperparams& hp)
    : hp_(hp), acc_(VectorXd::Zero(n_params)) {}

void RmsProp::step(VectorXd& params, const VectorXd& grad) {
  check_len(params, grad, acc_.size());
  acc_ = hp_.rms_decay * acc_ + (1.0 - hp_.rms_decay) * grad.cwiseProduct(grad);
  params.array() -= hp_.lr * grad.array() / (acc_.array().sqrt() + hp_.eps);
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& id, Eigen::Index n_params,
                                          const Hyperparams& hp) {
  if (id == "rprop") return std::make_unique<Rprop>(n_params, hp);
  if (id == "adam") return std::make_unique<Adam>(n_params, hp);
  if (id == "rmsprop") return std::make_unique<RmsProp>(n_params, hp);
  throw ConfigError("unknown optimizer: " + id);
}

}  // namespace simlearn::optim
