#include "simlearn/nn.hpp"

#include <cmath>
#include <random>

namespace simlearn::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
    case Activation::Linear: return "linear";
  }
  throw ConfigError("unknown activation tag");
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "softmax") return Activation::Softmax;
  if (s == "linear") return Activation::Linear;
  throw ConfigError("unknown activation: " + s);
}

Eigen::Index param_count(const std::vector<int>& layout) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < layout.size(); ++l)
    n += static_cast<Eigen::Index>(layout[l] + 1) * layout[l + 1];
  return n;
}

Eigen::Index Network::param_count() const { return nn::param_count(layout); }

namespace {
Eigen::Index layer_offset(const std::vector<int>& layout, int layer) {
  Eigen::Index off = 0;
  for (int l = 0; l < layer; ++l) off += static_cast<Eigen::Index>(layout[l] + 1) * layout[l + 1];
  return off;
}
}  // namespace

ConstRowMajorMap Network::weights(int layer) const {
  Eigen::Index off = layer_offset(layout, layer);
  return ConstRowMajorMap(params.data() + off, layout[layer + 1], layout[layer]);
}

RowMajorMap Network::weights(int layer) {
  Eigen::Index off = layer_offset(layout, layer);
  return RowMajorMap(params.data() + off, layout[layer + 1], layout[layer]);
}

Eigen::Map<const VectorXd> Network::bias(int layer) const {
  Eigen::Index off = layer_offset(layout, layer) +
                     static_cast<Eigen::Index>(layout[layer]) * layout[layer + 1];
  return Eigen::Map<const VectorXd>(params.data() + off, layout[layer + 1]);
}

Eigen::Map<VectorXd> Network::bias(int layer) {
  Eigen::Index off = layer_offset(layout, layer) +
                     static_cast<Eigen::Index>(layout[layer]) * layout[layer + 1];
  return Eigen::Map<VectorXd>(params.data() + off, layout[layer + 1]);
}

Network init_network(const std::vector<int>& layout, const std::vector<Activation>& acts,
                     std::uint64_t seed) {
  if (layout.size() < 2) throw ConfigError("network layout needs at least two layers");
  for (int w : layout)
    if (w <= 0) throw ConfigError("network layout widths must be positive");
  if (acts.size() != layout.size() - 1)
    throw ConfigError("one activation per layer expected");
  for (std::size_t l = 0; l + 1 < acts.size(); ++l)
    if (acts[l] == Activation::Softmax)
      throw ConfigError("softmax is only permitted on the final layer");

  Network net;
  net.layout = layout;
  net.acts = acts;
  net.seed = seed;
  net.params = VectorXd::Zero(param_count(layout));

  std::mt19937_64 rng(seed);
  for (int l = 0; l < net.layer_count(); ++l) {
    double r = std::sqrt(6.0 / (layout[l] + layout[l + 1]));
    std::uniform_real_distribution<double> dist(-r, r);
    auto W = net.weights(l);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = dist(rng);
    // biases stay zero
  }
  return net;
}

namespace {

void apply_activation(Activation act, const MatrixXd& z, MatrixXd& out) {
  switch (act) {
    case Activation::Relu:
      out = z.cwiseMax(0.0);
      break;
    case Activation::Sigmoid:
      out = ((-z.array()).exp() + 1.0).inverse();
      break;
    case Activation::Linear:
      out = z;
      break;
    case Activation::Softmax: {
      out.resize(z.rows(), z.cols());
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        Eigen::ArrayXd e = (z.row(r).array() - z.row(r).maxCoeff()).exp();
        out.row(r) = e / e.sum();
      }
      break;
    }
  }
}

}  // namespace

BatchCache forward_batch(const Network& net, const MatrixXd& X) {
  if (X.cols() != net.input_width())
    throw ShapeError("forward: input width " + std::to_string(X.cols()) + " != network input " +
                     std::to_string(net.input_width()));
  BatchCache cache;
  cache.input = X;
  cache.pre.resize(net.layer_count());
  cache.post.resize(net.layer_count());
  const MatrixXd* a = &cache.input;
  for (int l = 0; l < net.layer_count(); ++l) {
    cache.pre[l].noalias() = (*a) * net.weights(l).transpose();
    cache.pre[l].rowwise() += net.bias(l).transpose();
    apply_activation(net.acts[l], cache.pre[l], cache.post[l]);
    a = &cache.post[l];
  }
  return cache;
}

VectorXd forward(const Network& net, const VectorXd& x, BatchCache* cache) {
  BatchCache local = forward_batch(net, x.transpose());
  VectorXd out = local.output().row(0).transpose();
  if (cache) *cache = std::move(local);
  return out;
}

BackwardResult backward_batch(const Network& net, const BatchCache& cache,
                              const MatrixXd& at_output, const MatrixXd& at_logits,
                              bool want_input_grad) {
  const int L = net.layer_count();
  if (static_cast<int>(cache.post.size()) != L || cache.input.cols() != net.input_width())
    throw ShapeError("backward: cache does not match network");
  const Eigen::Index N = cache.input.rows();
  if (at_output.size() != 0 && (at_output.rows() != N || at_output.cols() != net.output_width()))
    throw ShapeError("backward: output gradient shape mismatch");
  if (at_logits.size() != 0 && (at_logits.rows() != N || at_logits.cols() != net.output_width()))
    throw ShapeError("backward: logit gradient shape mismatch");

  BackwardResult res;
  res.param_grad = VectorXd::Zero(net.param_count());

  // Gradient at the final layer pre-activation.
  MatrixXd dz;
  if (at_output.size() != 0) {
    const MatrixXd& a = cache.post[L - 1];
    switch (net.acts[L - 1]) {
      case Activation::Relu:
        dz = at_output.cwiseProduct((cache.pre[L - 1].array() > 0.0).cast<double>().matrix());
        break;
      case Activation::Sigmoid:
        dz = at_output.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
        break;
      case Activation::Linear:
        dz = at_output;
        break;
      case Activation::Softmax: {
        dz.resize(N, a.cols());
        for (Eigen::Index r = 0; r < N; ++r) {
          double dot = at_output.row(r).dot(a.row(r));
          dz.row(r) = (a.row(r).array() * (at_output.row(r).array() - dot)).matrix();
        }
        break;
      }
    }
  } else {
    dz = MatrixXd::Zero(N, net.output_width());
  }
  if (at_logits.size() != 0) dz += at_logits;

  for (int l = L - 1; l >= 0; --l) {
    const MatrixXd& a_prev = (l == 0) ? cache.input : cache.post[l - 1];
    Eigen::Index off = 0;
    for (int k = 0; k < l; ++k)
      off += static_cast<Eigen::Index>(net.layout[k] + 1) * net.layout[k + 1];
    RowMajorMap gw(res.param_grad.data() + off, net.layout[l + 1], net.layout[l]);
    gw.noalias() = dz.transpose() * a_prev;
    Eigen::Map<VectorXd> gb(res.param_grad.data() + off +
                                static_cast<Eigen::Index>(net.layout[l]) * net.layout[l + 1],
                            net.layout[l + 1]);
    gb = dz.colwise().sum();

    if (l == 0 && !want_input_grad) break;
    MatrixXd da;
    da.noalias() = dz * net.weights(l);
    if (l == 0) {
      res.input_grad = std::move(da);
      break;
    }
    // push through the previous layer's activation
    const MatrixXd& a = cache.post[l - 1];
    switch (net.acts[l - 1]) {
      case Activation::Relu:
        dz = da.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
        break;
      case Activation::Sigmoid:
        dz = da.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
        break;
      case Activation::Linear:
        dz = std::move(da);
        break;
      case Activation::Softmax:
        throw ConfigError("softmax on a hidden layer");
    }
  }
  return res;
}

CrossEntropyResult cross_entropy(const VectorXd& p, const VectorXd& t) {
  if (p.size() != t.size()) throw ShapeError("cross_entropy: width mismatch");
  CrossEntropyResult r;
  r.value = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double pi = std::min(std::max(p[i], 1e-12), 1.0);
    r.value -= t[i] * std::log(pi);
  }
  r.logit_grad = p - t;
  return r;
}

AbsErrorResult absolute_error(double pred, double s) {
  AbsErrorResult r;
  r.value = std::abs(s - pred);
  r.pred_grad = (pred > s) ? 1.0 : (pred < s ? -1.0 : 0.0);
  return r;
}

}  // namespace simlearn::nn
