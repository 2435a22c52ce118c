#include "simlearn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "simlearn/serialize.hpp"

namespace simlearn::measures {

namespace {
constexpr std::size_t kChunk = 16384;  // pair-batch size for full-batch accumulation

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<data::AttributeInfo> attrs_from_json(const json& j) {
  std::vector<data::AttributeInfo> attrs;
  for (const auto& ja : j) {
    data::AttributeInfo a;
    a.name = ja.at("name");
    a.categorical = ja.at("categorical");
    a.col_start = ja.at("col_start");
    a.width = ja.at("width");
    attrs.push_back(std::move(a));
  }
  return attrs;
}

json attrs_to_json(const std::vector<data::AttributeInfo>& attrs) {
  json j = json::array();
  for (const auto& a : attrs)
    j.push_back({{"name", a.name},
                 {"categorical", a.categorical},
                 {"col_start", a.col_start},
                 {"width", a.width}});
  return j;
}
}  // namespace

std::string to_string(MeasureType t) {
  switch (t) {
    case MeasureType::T11: return "t11";
    case MeasureType::T21: return "t21";
    case MeasureType::Gabel: return "gabel";
    case MeasureType::Chopra: return "chopra";
    case MeasureType::T31: return "t31";
    case MeasureType::Esnn: return "esnn";
  }
  throw ConfigError("unknown measure type tag");
}

MeasureType measure_type_from_string(const std::string& s) {
  if (s == "t11") return MeasureType::T11;
  if (s == "t21") return MeasureType::T21;
  if (s == "gabel") return MeasureType::Gabel;
  if (s == "chopra") return MeasureType::Chopra;
  if (s == "t31") return MeasureType::T31;
  if (s == "esnn") return MeasureType::Esnn;
  throw ConfigError("unknown measure: " + s);
}

double Measure::score(const VectorXd& x, const VectorXd& y) const {
  return std::clamp(raw_score(x, y), 0.0, 1.0);
}

VectorXd Measure::raw_scores_vs(const VectorXd& x, const MatrixXd& T) const {
  VectorXd out(T.rows());
  for (Eigen::Index i = 0; i < T.rows(); ++i) out[i] = raw_score(x, T.row(i).transpose());
  return out;
}

MatrixXd Measure::raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const {
  MatrixXd out(V.rows(), T.rows());
  for (Eigen::Index i = 0; i < V.rows(); ++i) out.row(i) = raw_scores_vs(V.row(i), T).transpose();
  return out;
}

TrainHistory Measure::train(const data::Dataset&, const std::vector<int>&, const TrainConfig& cfg,
                            const EvalHook&) {
  if (cfg.epochs > 0)
    std::fprintf(stderr, "warning: measure %s requires no training; ignoring %d epochs\n",
                 to_string(type()).c_str(), cfg.epochs);
  return {};
}

void Measure::check_trained() const {
  if (!trained_) throw NotTrainedError("measure " + to_string(type()) + " is not trained");
}

// ---------------------------------------------------------------------------
// t11

T11Measure::T11Measure(std::vector<data::AttributeInfo> attrs) : attrs_(std::move(attrs)) {}

double T11Measure::raw_score(const VectorXd& x, const VectorXd& y) const {
  if (x.size() != y.size()) throw ShapeError("t11: input width mismatch");
  double w = 1.0 / attrs_.size();
  double s = 0.0;
  for (const auto& a : attrs_) {
    if (a.categorical) {
      bool eq = true;
      for (int c = a.col_start; c < a.col_start + a.width; ++c)
        if (x[c] != y[c]) {
          eq = false;
          break;
        }
      s += w * (eq ? 1.0 : 0.0);
    } else {
      s += w * (1.0 - std::abs(x[a.col_start] - y[a.col_start]));
    }
  }
  return s;
}

json T11Measure::to_json() const {
  return {{"format_version", kModelFormatVersion}, {"tag", "t11"}, {"attrs", attrs_to_json(attrs_)}};
}

std::unique_ptr<T11Measure> T11Measure::from_json(const json& j) {
  return std::make_unique<T11Measure>(attrs_from_json(j.at("attrs")));
}

// ---------------------------------------------------------------------------
// t21

T21Measure::T21Measure(std::vector<data::AttributeInfo> attrs, LocalSimParams params)
    : attrs_(std::move(attrs)), params_(std::move(params)) {}

std::unique_ptr<T21Measure> T21Measure::fit(const data::Dataset& ds,
                                            const std::vector<int>& train_ids) {
  if (train_ids.empty()) throw ProtocolError("t21: empty training partition");
  LocalSimParams p;
  for (const auto& a : ds.attrs) {
    if (a.categorical) continue;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn, sum = 0.0;
    for (int id : train_ids) {
      double v = ds.X(id, a.col_start);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
    }
    double mean = sum / train_ids.size();
    double ss = 0.0;
    for (int id : train_ids) {
      double d = ds.X(id, a.col_start) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / train_ids.size());
    double range = mx - mn;
    double m = (sd > 0.0 && range > 0.0) ? std::clamp(range / (4.0 * sd), 1.0, 4.0) : 1.0;
    p.min.push_back(mn);
    p.max.push_back(mx);
    p.mean.push_back(mean);
    p.stddev.push_back(sd);
    p.exponent.push_back(m);
  }
  return std::make_unique<T21Measure>(ds.attrs, std::move(p));
}

double T21Measure::raw_score(const VectorXd& x, const VectorXd& y) const {
  if (x.size() != y.size()) throw ShapeError("t21: input width mismatch");
  double w = 1.0 / attrs_.size();
  double s = 0.0;
  std::size_t num_idx = 0;
  for (const auto& a : attrs_) {
    if (a.categorical) {
      bool eq = true;
      for (int c = a.col_start; c < a.col_start + a.width; ++c)
        if (x[c] != y[c]) {
          eq = false;
          break;
        }
      s += w * (eq ? 1.0 : 0.0);
    } else {
      double m = params_.exponent.at(num_idx++);
      double base = 1.0 - std::abs(x[a.col_start] - y[a.col_start]);
      s += w * std::pow(std::max(base, 0.0), m);
    }
  }
  return s;
}

json T21Measure::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"tag", "t21"},
          {"attrs", attrs_to_json(attrs_)},
          {"local_sim",
           {{"min", params_.min},
            {"max", params_.max},
            {"mean", params_.mean},
            {"stddev", params_.stddev},
            {"exponent", params_.exponent}}}};
}

std::unique_ptr<T21Measure> T21Measure::from_json(const json& j) {
  LocalSimParams p;
  const auto& ls = j.at("local_sim");
  p.min = ls.at("min").get<std::vector<double>>();
  p.max = ls.at("max").get<std::vector<double>>();
  p.mean = ls.at("mean").get<std::vector<double>>();
  p.stddev = ls.at("stddev").get<std::vector<double>>();
  p.exponent = ls.at("exponent").get<std::vector<double>>();
  return std::make_unique<T21Measure>(attrs_from_json(j.at("attrs")), std::move(p));
}

// ---------------------------------------------------------------------------
// training helpers

namespace {

struct EpochDriver {
  const TrainConfig& cfg;
  TrainHistory history;

  template <typename EpochFn>
  void run(const EvalHook& hook, EpochFn&& epoch_fn) {
    for (int e = 0; e < cfg.epochs; ++e) {
      history.train_loss.push_back(epoch_fn());
      if (hook && cfg.eval_every > 0 && (e + 1) % cfg.eval_every == 0)
        history.val_loss.emplace_back(e + 1, hook());
    }
  }
};

MatrixXd gather_rows(const MatrixXd& X, const std::vector<int>& ids) {
  MatrixXd out(static_cast<Eigen::Index>(ids.size()), X.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row((Eigen::Index)i) = X.row(ids[i]);
  return out;
}

MatrixXd one_hot_rows(const Eigen::VectorXi& labels, const std::vector<int>& ids, int n_classes) {
  MatrixXd T = MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()), n_classes);
  for (std::size_t i = 0; i < ids.size(); ++i) T((Eigen::Index)i, labels[ids[i]]) = 1.0;
  return T;
}

// local (position) indices of a pair list relative to train_ids
struct LocalPairs {
  std::vector<int> a, b;
  VectorXd s;
};

LocalPairs localize(const std::vector<data::PairTriplet>& pairs,
                    const std::vector<int>& train_ids) {
  std::unordered_map<int, int> pos;
  pos.reserve(train_ids.size());
  for (std::size_t i = 0; i < train_ids.size(); ++i) pos[train_ids[i]] = (int)i;
  LocalPairs lp;
  lp.a.reserve(pairs.size());
  lp.b.reserve(pairs.size());
  lp.s.resize((Eigen::Index)pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    lp.a.push_back(pos.at(pairs[i].x));
    lp.b.push_back(pos.at(pairs[i].y));
    lp.s[(Eigen::Index)i] = pairs[i].s;
  }
  return lp;
}

data::PairMode resolve_pair_mode(const TrainConfig& cfg) {
  data::PairMode m = cfg.pair_mode;
  if (m.kind == data::PairKind::Sampled && m.seed == 0) m.seed = splitmix64(cfg.seed ^ 0x70617273ULL);
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// gabel

GabelMeasure::GabelMeasure(int input_width, int hidden, std::uint64_t seed)
    : net_(nn::init_network({2 * input_width, hidden, hidden, 1},
                            {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Sigmoid},
                            seed)) {
  trained_ = false;
}

GabelMeasure::GabelMeasure(nn::Network net) : net_(std::move(net)) {}

double GabelMeasure::raw_score(const VectorXd& x, const VectorXd& y) const {
  check_trained();
  if (x.size() + y.size() != net_.input_width())
    throw ShapeError("gabel: pair width does not match network input");
  VectorXd xy(x.size() + y.size());
  xy << x, y;
  return nn::forward(net_, xy)[0];
}

MatrixXd GabelMeasure::raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const {
  check_trained();
  MatrixXd out(V.rows(), T.rows());
  MatrixXd batch(T.rows(), V.cols() + T.cols());
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    batch.leftCols(V.cols()).rowwise() = V.row(i);
    batch.rightCols(T.cols()) = T;
    out.row(i) = nn::forward_batch(net_, batch).output().col(0).transpose();
  }
  return out;
}

TrainHistory GabelMeasure::train(const data::Dataset& ds, const std::vector<int>& train_ids,
                                 const TrainConfig& cfg, const EvalHook& hook) {
  auto pairs = data::build_pairs(ds.labels, train_ids, resolve_pair_mode(cfg));
  if (pairs.empty()) throw ProtocolError("gabel: no training pairs");
  const std::size_t P = pairs.size();
  auto opt = optim::make_optimizer(cfg.optimizer, net_.param_count(), cfg.hyper);
  trained_ = true;

  EpochDriver driver{cfg};
  driver.run(hook, [&]() {
    VectorXd grad = VectorXd::Zero(net_.param_count());
    double loss = 0.0;
    for (std::size_t start = 0; start < P; start += kChunk) {
      std::size_t m = std::min(kChunk, P - start);
      MatrixXd X((Eigen::Index)m, net_.input_width());
      const int w = static_cast<int>(ds.width());
      for (std::size_t r = 0; r < m; ++r) {
        const auto& p = pairs[start + r];
        X.row((Eigen::Index)r).head(w) = ds.X.row(p.x);
        X.row((Eigen::Index)r).tail(w) = ds.X.row(p.y);
      }
      auto cache = nn::forward_batch(net_, X);
      MatrixXd up((Eigen::Index)m, 1);
      for (std::size_t r = 0; r < m; ++r) {
        double pred = cache.output()((Eigen::Index)r, 0);
        auto ae = nn::absolute_error(pred, pairs[start + r].s);
        loss += ae.value;
        up((Eigen::Index)r, 0) = ae.pred_grad / (double)P;
      }
      grad += nn::backward_batch(net_, cache, up).param_grad;
    }
    opt->step(net_.params, grad);
    return loss / (double)P;
  });
  return std::move(driver.history);
}

json GabelMeasure::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"tag", "gabel"},
          {"trained", trained_},
          {"net", network_to_json(net_)}};
}

std::unique_ptr<GabelMeasure> GabelMeasure::from_json(const json& j) {
  auto m = std::make_unique<GabelMeasure>(network_from_json(j.at("net")));
  m->trained_ = j.value("trained", true);
  return m;
}

// ---------------------------------------------------------------------------
// chopra

ChopraMeasure::ChopraMeasure(int input_width, int embed_width, int hidden, std::uint64_t seed)
    : g_(nn::init_network({input_width, hidden, hidden, embed_width},
                          {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Linear},
                          seed)) {
  trained_ = false;
}

ChopraMeasure::ChopraMeasure(nn::Network g) : g_(std::move(g)) {}

MatrixXd ChopraMeasure::embed(const MatrixXd& X) const { return nn::forward_batch(g_, X).output(); }

double ChopraMeasure::raw_score(const VectorXd& x, const VectorXd& y) const {
  check_trained();
  double e = (nn::forward(g_, x) - nn::forward(g_, y)).lpNorm<1>();
  return 1.0 / (1.0 + e);
}

MatrixXd ChopraMeasure::raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const {
  check_trained();
  MatrixXd ev = embed(V), et = embed(T);
  MatrixXd out(V.rows(), T.rows());
  for (Eigen::Index i = 0; i < ev.rows(); ++i)
    for (Eigen::Index j = 0; j < et.rows(); ++j)
      out(i, j) = 1.0 / (1.0 + (ev.row(i) - et.row(j)).lpNorm<1>());
  return out;
}

TrainHistory ChopraMeasure::train(const data::Dataset& ds, const std::vector<int>& train_ids,
                                  const TrainConfig& cfg, const EvalHook& hook) {
  auto pairs = data::build_pairs(ds.labels, train_ids, resolve_pair_mode(cfg));
  if (pairs.empty()) throw ProtocolError("chopra: no training pairs");
  LocalPairs lp = localize(pairs, train_ids);
  MatrixXd X = gather_rows(ds.X, train_ids);
  const std::size_t P = pairs.size();
  const double margin = cfg.margin;
  auto opt = optim::make_optimizer(cfg.optimizer, g_.param_count(), cfg.hyper);
  trained_ = true;

  EpochDriver driver{cfg};
  driver.run(hook, [&]() {
    auto cache = nn::forward_batch(g_, X);
    const MatrixXd& emb = cache.output();
    MatrixXd demb = MatrixXd::Zero(emb.rows(), emb.cols());
    double loss = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      auto ea = emb.row(lp.a[p]);
      auto eb = emb.row(lp.b[p]);
      Eigen::RowVectorXd diff = ea - eb;
      double E = diff.lpNorm<1>();
      double dE;
      if (lp.s[(Eigen::Index)p] == 1.0) {
        loss += 0.5 * E * E;
        dE = E;
      } else {
        double d = margin - E;
        if (d > 0.0) {
          loss += 0.5 * d * d;
          dE = -d;
        } else {
          dE = 0.0;
        }
      }
      if (dE != 0.0) {
        Eigen::RowVectorXd g = (dE / (double)P) * diff.unaryExpr([](double v) { return sgn(v); });
        demb.row(lp.a[p]) += g;
        demb.row(lp.b[p]) -= g;
      }
    }
    opt->step(g_.params, nn::backward_batch(g_, cache, demb).param_grad);
    return loss / (double)P;
  });
  return std::move(driver.history);
}

json ChopraMeasure::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"tag", "chopra"},
          {"trained", trained_},
          {"g", network_to_json(g_)}};
}

std::unique_ptr<ChopraMeasure> ChopraMeasure::from_json(const json& j) {
  auto m = std::make_unique<ChopraMeasure>(network_from_json(j.at("g")));
  m->trained_ = j.value("trained", true);
  return m;
}

// ---------------------------------------------------------------------------
// t31

T31Measure::T31Measure(int input_width, int n_classes, int hidden, std::uint64_t seed)
    : g_(nn::init_network({input_width, hidden, hidden, n_classes},
                          {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Softmax},
                          seed)) {
  trained_ = false;
}

T31Measure::T31Measure(nn::Network g) : g_(std::move(g)) {}

MatrixXd T31Measure::embed(const MatrixXd& X) const { return nn::forward_batch(g_, X).output(); }

double T31Measure::raw_score(const VectorXd& x, const VectorXd& y) const {
  check_trained();
  return 1.0 - (nn::forward(g_, x) - nn::forward(g_, y)).norm();
}

MatrixXd T31Measure::raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const {
  check_trained();
  MatrixXd ev = embed(V), et = embed(T);
  MatrixXd out(V.rows(), T.rows());
  for (Eigen::Index i = 0; i < ev.rows(); ++i)
    for (Eigen::Index j = 0; j < et.rows(); ++j)
      out(i, j) = 1.0 - (ev.row(i) - et.row(j)).norm();
  return out;
}

TrainHistory T31Measure::train(const data::Dataset& ds, const std::vector<int>& train_ids,
                               const TrainConfig& cfg, const EvalHook& hook) {
  if (train_ids.empty()) throw ProtocolError("t31: empty training partition");
  MatrixXd X = gather_rows(ds.X, train_ids);
  MatrixXd T = one_hot_rows(ds.labels, train_ids, ds.n_classes);
  const double N = static_cast<double>(train_ids.size());
  auto opt = optim::make_optimizer(cfg.optimizer, g_.param_count(), cfg.hyper);
  trained_ = true;

  EpochDriver driver{cfg};
  driver.run(hook, [&]() {
    auto cache = nn::forward_batch(g_, X);
    const MatrixXd& P = cache.output();
    double loss = 0.0;
    for (Eigen::Index r = 0; r < P.rows(); ++r)
      loss += nn::cross_entropy(P.row(r).transpose(), T.row(r).transpose()).value;
    MatrixXd at_logits = (P - T) / N;
    opt->step(g_.params, nn::backward_batch(g_, cache, MatrixXd(), at_logits).param_grad);
    return loss / N;
  });
  return std::move(driver.history);
}

json T31Measure::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"tag", "t31"},
          {"trained", trained_},
          {"g", network_to_json(g_)}};
}

std::unique_ptr<T31Measure> T31Measure::from_json(const json& j) {
  auto m = std::make_unique<T31Measure>(network_from_json(j.at("g")));
  m->trained_ = j.value("trained", true);
  return m;
}

// ---------------------------------------------------------------------------
// eSNN

EsnnMeasure::EsnnMeasure(int input_width, int n_classes, int hidden, std::uint64_t seed)
    : g_(nn::init_network({input_width, hidden, hidden, n_classes},
                          {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Softmax},
                          splitmix64(seed ^ 0x67ULL))),
      c_(nn::init_network({n_classes, hidden, hidden, 1},
                          {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Sigmoid},
                          splitmix64(seed ^ 0x63ULL))) {
  trained_ = false;
}

EsnnMeasure::EsnnMeasure(nn::Network g, nn::Network c) : g_(std::move(g)), c_(std::move(c)) {}

MatrixXd EsnnMeasure::embed(const MatrixXd& X) const { return nn::forward_batch(g_, X).output(); }

double EsnnMeasure::raw_score(const VectorXd& x, const VectorXd& y) const {
  check_trained();
  VectorXd z = (nn::forward(g_, x) - nn::forward(g_, y)).cwiseAbs();
  return nn::forward(c_, z)[0];
}

MatrixXd EsnnMeasure::raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const {
  check_trained();
  MatrixXd ev = embed(V), et = embed(T);
  MatrixXd out(V.rows(), T.rows());
  MatrixXd Z(et.rows(), ev.cols());
  for (Eigen::Index i = 0; i < ev.rows(); ++i) {
    Z = (et.rowwise() - ev.row(i)).cwiseAbs();
    out.row(i) = nn::forward_batch(c_, Z).output().col(0).transpose();
  }
  return out;
}

TrainHistory EsnnMeasure::train(const data::Dataset& ds, const std::vector<int>& train_ids,
                                const TrainConfig& cfg, const EvalHook& hook) {
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("esnn: alpha must be in [0,1]");
  auto pairs = data::build_pairs(ds.labels, train_ids, resolve_pair_mode(cfg));
  if (pairs.empty()) throw ProtocolError("esnn: no training pairs");
  LocalPairs lp = localize(pairs, train_ids);
  MatrixXd X = gather_rows(ds.X, train_ids);
  MatrixXd T = one_hot_rows(ds.labels, train_ids, ds.n_classes);
  const std::size_t P = pairs.size();
  const double alpha = cfg.alpha;

  // per-row pair multiplicity, used to weight the classification terms
  VectorXd deg = VectorXd::Zero(X.rows());
  for (std::size_t p = 0; p < P; ++p) {
    deg[lp.a[p]] += 1.0;
    deg[lp.b[p]] += 1.0;
  }

  auto opt_g = optim::make_optimizer(cfg.optimizer, g_.param_count(), cfg.hyper);
  auto opt_c = optim::make_optimizer(cfg.optimizer, c_.param_count(), cfg.hyper);
  trained_ = true;

  EpochDriver driver{cfg};
  driver.run(hook, [&]() {
    auto cache_g = nn::forward_batch(g_, X);
    const MatrixXd& emb = cache_g.output();

    VectorXd c_grad = VectorXd::Zero(c_.param_count());
    MatrixXd demb = MatrixXd::Zero(emb.rows(), emb.cols());
    double sim_loss = 0.0;

    for (std::size_t start = 0; start < P; start += kChunk) {
      std::size_t m = std::min(kChunk, P - start);
      MatrixXd Z((Eigen::Index)m, emb.cols());
      for (std::size_t r = 0; r < m; ++r)
        Z.row((Eigen::Index)r) = (emb.row(lp.a[start + r]) - emb.row(lp.b[start + r])).cwiseAbs();
      auto cache_c = nn::forward_batch(c_, Z);
      MatrixXd up((Eigen::Index)m, 1);
      for (std::size_t r = 0; r < m; ++r) {
        auto ae = nn::absolute_error(cache_c.output()((Eigen::Index)r, 0), lp.s[(Eigen::Index)(start + r)]);
        sim_loss += ae.value;
        up((Eigen::Index)r, 0) = alpha * ae.pred_grad / (double)P;
      }
      auto back_c = nn::backward_batch(c_, cache_c, up, MatrixXd(), true);
      c_grad += back_c.param_grad;
      for (std::size_t r = 0; r < m; ++r) {
        int a = lp.a[start + r], b = lp.b[start + r];
        Eigen::RowVectorXd signs =
            (emb.row(a) - emb.row(b)).unaryExpr([](double v) { return sgn(v); });
        Eigen::RowVectorXd dz = back_c.input_grad.row((Eigen::Index)r).cwiseProduct(signs);
        demb.row(a) += dz;
        demb.row(b) -= dz;
      }
    }

    // classification terms, weighted by how often each row occurs in pairs
    double cls_loss = 0.0;
    for (Eigen::Index r = 0; r < emb.rows(); ++r)
      cls_loss += deg[r] * nn::cross_entropy(emb.row(r).transpose(), T.row(r).transpose()).value;
    MatrixXd at_logits =
        ((emb - T).array().colwise() * deg.array()).matrix() * ((1.0 - alpha) / (2.0 * P));

    VectorXd g_grad = nn::backward_batch(g_, cache_g, demb, at_logits).param_grad;
    opt_g->step(g_.params, g_grad);
    opt_c->step(c_.params, c_grad);
    return (1.0 - alpha) / (2.0 * P) * cls_loss + alpha / (double)P * sim_loss;
  });
  return std::move(driver.history);
}

json EsnnMeasure::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"tag", "esnn"},
          {"trained", trained_},
          {"g", network_to_json(g_)},
          {"c", network_to_json(c_)}};
}

std::unique_ptr<EsnnMeasure> EsnnMeasure::from_json(const json& j) {
  auto m = std::make_unique<EsnnMeasure>(network_from_json(j.at("g")), network_from_json(j.at("c")));
  m->trained_ = j.value("trained", true);
  return m;
}

EsnnLossResult esnn_loss(double alpha, const VectorXd& x, const VectorXd& y, double s,
                         const VectorXd& t_x, const VectorXd& t_y, const nn::Network& g,
                         const nn::Network& c) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("esnn_loss: alpha must be in [0,1]");
  MatrixXd X(2, x.size());
  X.row(0) = x.transpose();
  X.row(1) = y.transpose();
  auto cache_g = nn::forward_batch(g, X);
  const MatrixXd& emb = cache_g.output();

  Eigen::RowVectorXd diff = emb.row(0) - emb.row(1);
  MatrixXd Z = diff.cwiseAbs();
  auto cache_c = nn::forward_batch(c, Z);
  double pred = cache_c.output()(0, 0);
  auto ae = nn::absolute_error(pred, s);
  auto ce_x = nn::cross_entropy(emb.row(0).transpose(), t_x);
  auto ce_y = nn::cross_entropy(emb.row(1).transpose(), t_y);

  EsnnLossResult res;
  res.value = (1.0 - alpha) / 2.0 * (ce_x.value + ce_y.value) + alpha * ae.value;

  MatrixXd up(1, 1);
  up(0, 0) = alpha * ae.pred_grad;
  auto back_c = nn::backward_batch(c, cache_c, up, MatrixXd(), true);
  res.c_grad = back_c.param_grad;

  Eigen::RowVectorXd signs = diff.unaryExpr([](double v) { return sgn(v); });
  Eigen::RowVectorXd dz = back_c.input_grad.row(0).cwiseProduct(signs);
  MatrixXd demb(2, emb.cols());
  demb.row(0) = dz;
  demb.row(1) = -dz;
  MatrixXd at_logits(2, emb.cols());
  at_logits.row(0) = (1.0 - alpha) / 2.0 * ce_x.logit_grad.transpose();
  at_logits.row(1) = (1.0 - alpha) / 2.0 * ce_y.logit_grad.transpose();
  res.g_grad = nn::backward_batch(g, cache_g, demb, at_logits).param_grad;
  return res;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Measure> make_measure(MeasureType type, const data::Dataset& ds,
                                      const std::vector<int>& train_ids, const TrainConfig& cfg) {
  const int w = static_cast<int>(ds.width());
  switch (type) {
    case MeasureType::T11:
      return std::make_unique<T11Measure>(ds.attrs);
    case MeasureType::T21:
      return T21Measure::fit(ds, train_ids);
    case MeasureType::Gabel:
      return std::make_unique<GabelMeasure>(w, cfg.hidden, mix_seed(cfg.seed, hash_str("gabel")));
    case MeasureType::Chopra:
      return std::make_unique<ChopraMeasure>(w, ds.n_classes, cfg.hidden,
                                             mix_seed(cfg.seed, hash_str("chopra")));
    case MeasureType::T31:
      return std::make_unique<T31Measure>(w, ds.n_classes, cfg.hidden,
                                          mix_seed(cfg.seed, hash_str("t31")));
    case MeasureType::Esnn:
      return std::make_unique<EsnnMeasure>(w, ds.n_classes, cfg.hidden,
                                           mix_seed(cfg.seed, hash_str("esnn")));
  }
  throw ConfigError("unknown measure type");
}

std::unique_ptr<Measure> measure_from_json(const json& j) {
  std::string tag = j.at("tag");
  switch (measure_type_from_string(tag)) {
    case MeasureType::T11: return T11Measure::from_json(j);
    case MeasureType::T21: return T21Measure::from_json(j);
    case MeasureType::Gabel: return GabelMeasure::from_json(j);
    case MeasureType::Chopra: return ChopraMeasure::from_json(j);
    case MeasureType::T31: return T31Measure::from_json(j);
    case MeasureType::Esnn: return EsnnMeasure::from_json(j);
  }
  throw ConfigError("unknown measure tag: " + tag);
}

}  // namespace simlearn::measures
