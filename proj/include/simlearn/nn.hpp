#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "simlearn/common.hpp"

namespace simlearn::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;
// Weight matrices are stored row-major inside the flat parameter vector so the
// serialized layout is easy to describe: for each layer, W (n_out x n_in, row
// by row) followed by the bias (n_out).
using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

enum class Activation { Relu, Sigmoid, Softmax, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Dense feed-forward network with a single flat parameter vector.
/// Immutable during evaluation; training loops mutate `params` through an
/// optimizer while holding exclusive ownership.
struct Network {
  std::vector<int> layout;            // layer widths, layout.size() >= 2
  std::vector<Activation> acts;       // one per layer (layout.size() - 1)
  VectorXd params;                    // flat, layer by layer: W row-major, then bias
  std::uint64_t seed = 0;

  int layer_count() const { return static_cast<int>(acts.size()); }
  int input_width() const { return layout.front(); }
  int output_width() const { return layout.back(); }
  Eigen::Index param_count() const;

  ConstRowMajorMap weights(int layer) const;
  RowMajorMap weights(int layer);
  Eigen::Map<const VectorXd> bias(int layer) const;
  Eigen::Map<VectorXd> bias(int layer);
};

Eigen::Index param_count(const std::vector<int>& layout);

/// Deterministic initialization: weights uniform in
/// +-sqrt(6/(n_in+n_out)) per layer, biases zero, driven by mt19937_64(seed).
Network init_network(const std::vector<int>& layout, const std::vector<Activation>& acts,
                     std::uint64_t seed);

/// Activations cached by a forward pass; one backward pass per cache.
/// Rows are batch samples.
struct BatchCache {
  MatrixXd input;                // N x n_in
  std::vector<MatrixXd> pre;     // per layer, N x n_out (pre-activation)
  std::vector<MatrixXd> post;    // per layer, N x n_out (post-activation)
  const MatrixXd& output() const { return post.back(); }
};

BatchCache forward_batch(const Network& net, const MatrixXd& X);

/// Single-sample convenience wrapper.
VectorXd forward(const Network& net, const VectorXd& x, BatchCache* cache = nullptr);

struct BackwardResult {
  VectorXd param_grad;   // summed over the batch, aligned with Network::params
  MatrixXd input_grad;   // N x n_in, filled when want_input_grad
};

/// Reverse pass over a cached forward evaluation.
///
/// `at_output` is dL/d(post-activation output), one row per sample; it is
/// pushed through the final activation (including the full softmax Jacobian).
/// `at_logits`, when non-empty, is added directly to the final pre-activation
/// gradient; losses like cross-entropy that differentiate cleanly at the
/// logits use this channel. Either may be empty (treated as zero), not both.
BackwardResult backward_batch(const Network& net, const BatchCache& cache,
                              const MatrixXd& at_output, const MatrixXd& at_logits = MatrixXd(),
                              bool want_input_grad = false);

/// Categorical cross entropy between a softmax output row and a target row.
/// Probabilities are clamped to [1e-12, 1] before the log. The gradient is
/// reported at the logits: p - t.
struct CrossEntropyResult {
  double value;
  VectorXd logit_grad;
};
CrossEntropyResult cross_entropy(const VectorXd& p, const VectorXd& t);

/// |s - pred| with subgradient d/dpred = sign(pred - s), 0 at the kink.
struct AbsErrorResult {
  double value;
  double pred_grad;
};
AbsErrorResult absolute_error(double pred, double s);

}  // namespace simlearn::nn
