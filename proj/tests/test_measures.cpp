#include "doctest.h"

#include <cmath>
#include <random>

#include "simlearn/measures.hpp"

using namespace simlearn;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nn::Activation;

namespace {

data::AttributeInfo numeric_attr(const std::string& name, int col) {
  data::AttributeInfo a;
  a.name = name;
  a.col_start = col;
  return a;
}

data::AttributeInfo categorical_attr(const std::string& name, int col, int width) {
  data::AttributeInfo a;
  a.name = name;
  a.categorical = true;
  a.col_start = col;
  a.width = width;
  return a;
}

// Two-class synthetic dataset: one numeric feature separates the classes.
data::Dataset synthetic_dataset(int n, std::uint64_t seed) {
  data::Dataset ds;
  ds.id = "synthetic";
  ds.n_classes = 2;
  ds.class_names = {"lo", "hi"};
  ds.attrs = {numeric_attr("f0", 0), numeric_attr("f1", 1)};
  ds.X.resize(n, 2);
  ds.labels.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 0.45);
  for (int i = 0; i < n; ++i) {
    int cls = i % 2;
    ds.labels[i] = cls;
    ds.X(i, 0) = d(rng) + (cls ? 0.55 : 0.0);
    ds.X(i, 1) = d(rng);
  }
  return ds;
}

std::vector<int> all_ids(const data::Dataset& ds) {
  std::vector<int> ids(ds.n());
  for (int i = 0; i < (int)ids.size(); ++i) ids[i] = i;
  return ids;
}

}  // namespace

TEST_CASE("t11: uniform weights over numeric and categorical locals") {
  // layout: numeric in col 0, a 2-wide one-hot group in cols 1..2
  measures::T11Measure m({numeric_attr("n", 0), categorical_attr("c", 1, 2)});
  VectorXd x(3), y(3);
  x << 0.2, 1, 0;
  y << 0.7, 1, 0;
  // numeric local 1-|0.2-0.7| = 0.5, categorical equal -> 1; mean = 0.75
  CHECK(m.raw_score(x, y) == doctest::Approx(0.75));
  CHECK(m.raw_score(x, x) == doctest::Approx(1.0));
  y << 0.2, 0, 1;  // same numeric, different category: (1 + 0) / 2
  CHECK(m.raw_score(x, y) == doctest::Approx(0.5));
  CHECK(m.raw_score(x, y) == m.raw_score(y, x));
  CHECK_FALSE(m.needs_training());
}

TEST_CASE("t21: polynomial local similarity with a known exponent") {
  measures::LocalSimParams p;
  p.min = {0.0};
  p.max = {1.0};
  p.mean = {0.5};
  p.stddev = {0.25};
  p.exponent = {2.0};
  measures::T21Measure m({numeric_attr("n", 0)}, p);
  VectorXd x(1), y(1);
  x << 0.0;
  y << 0.5;
  CHECK(m.raw_score(x, y) == doctest::Approx(0.25));  // (1 - 0.5)^2
  CHECK(m.raw_score(x, x) == doctest::Approx(1.0));
  CHECK(m.raw_score(x, y) == m.raw_score(y, x));
}

TEST_CASE("t21 fit: exponent from the training spread, constants degrade to linear") {
  // feature 0: 0, 1 and eighteen 0.5s -> sd = sqrt(1/40), m = sqrt(40)/4
  data::Dataset ds;
  ds.id = "fit";
  ds.n_classes = 2;
  ds.class_names = {"a", "b"};
  ds.attrs = {numeric_attr("spread", 0), numeric_attr("flat", 1)};
  const int n = 20;
  ds.X = MatrixXd::Constant(n, 2, 0.5);
  ds.X(0, 0) = 0.0;
  ds.X(1, 0) = 1.0;
  ds.X.col(1).setConstant(0.3);  // constant feature: sd = 0
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) ds.labels[i] = i % 2;

  auto m = measures::T21Measure::fit(ds, all_ids(ds));
  CHECK(m->params().exponent[0] == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
  CHECK(m->params().exponent[1] == 1.0);

  // wide spread relative to the range clamps at the lower bound of 1
  data::Dataset ds2 = ds;
  for (int i = 0; i < n; ++i) ds2.X(i, 0) = (i % 2) ? 1.0 : 0.0;  // sd = 0.5, range 1
  auto m2 = measures::T21Measure::fit(ds2, all_ids(ds2));
  CHECK(m2->params().exponent[0] == 1.0);
}

TEST_CASE("gabel: zero network scores 0.5 everywhere; asymmetry is possible") {
  auto net = nn::init_network({4, 5, 5, 1},
                              {Activation::Relu, Activation::Relu, Activation::Sigmoid}, 3);
  nn::Network zero = net;
  zero.params.setZero();
  measures::GabelMeasure mz(std::move(zero));
  VectorXd x = VectorXd::Random(2), y = VectorXd::Random(2);
  CHECK(mz.raw_score(x, y) == doctest::Approx(0.5).epsilon(1e-15));

  measures::GabelMeasure m(std::move(net));
  // a concatenation-based net is not symmetric in general
  bool asym = false;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int t = 0; t < 20 && !asym; ++t) {
    VectorXd a(2), b(2);
    a << d(rng), d(rng);
    b << d(rng), d(rng);
    asym = std::abs(m.raw_score(a, b) - m.raw_score(b, a)) > 1e-9;
  }
  CHECK(asym);
}

TEST_CASE("gabel: matrix evaluation agrees with pairwise calls") {
  auto net = nn::init_network({6, 4, 4, 1},
                              {Activation::Relu, Activation::Relu, Activation::Sigmoid}, 11);
  measures::GabelMeasure m(std::move(net));
  MatrixXd V = MatrixXd::Random(3, 3).cwiseAbs();
  MatrixXd T = MatrixXd::Random(5, 3).cwiseAbs();
  MatrixXd S = m.raw_score_matrix(V, T);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(S(i, j) == doctest::Approx(m.raw_score(V.row(i).transpose(), T.row(j).transpose())).epsilon(1e-12));
}

TEST_CASE("chopra: identical inputs score 1, symmetric by construction") {
  auto g = nn::init_network({3, 6, 6, 2},
                            {Activation::Relu, Activation::Relu, Activation::Linear}, 21);
  measures::ChopraMeasure m(std::move(g));
  VectorXd x = VectorXd::Random(3).cwiseAbs(), y = VectorXd::Random(3).cwiseAbs();
  CHECK(m.raw_score(x, x) == doctest::Approx(1.0));
  CHECK(m.raw_score(x, y) == doctest::Approx(m.raw_score(y, x)).epsilon(1e-15));
  CHECK(m.raw_score(x, y) > 0.0);
  CHECK(m.raw_score(x, y) <= 1.0);
}

TEST_CASE("t31: score is one minus the embedding distance") {
  // saturated one-layer softmax puts x=(1,0) at e1 and y=(0,1) at e2,
  // so the raw score approaches 1 - sqrt(2)
  nn::Network net;
  net.layout = {2, 2};
  net.acts = {Activation::Softmax};
  net.params.resize(6);
  net.params << 50.0, 0.0, 0.0, 50.0, 0.0, 0.0;
  measures::T31Measure m(std::move(net));
  VectorXd x(2), y(2);
  x << 1, 0;
  y << 0, 1;
  CHECK(m.raw_score(x, y) == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-9));
  CHECK(m.score(x, y) == 0.0);  // reported score clamps at zero
  CHECK(m.raw_score(x, x) == doctest::Approx(1.0));

  // zero parameters embed everything uniformly: distance 0, score 1
  nn::Network zero;
  zero.layout = {2, 2};
  zero.acts = {Activation::Softmax};
  zero.params = VectorXd::Zero(6);
  measures::T31Measure mz(std::move(zero));
  CHECK(mz.raw_score(x, y) == doctest::Approx(1.0));
}

TEST_CASE("esnn: self similarity is one constant for every input") {
  auto g = nn::init_network({4, 5, 5, 3},
                            {Activation::Relu, Activation::Relu, Activation::Softmax}, 31);
  auto c = nn::init_network({3, 5, 5, 1},
                            {Activation::Relu, Activation::Relu, Activation::Sigmoid}, 32);
  measures::EsnnMeasure m(std::move(g), std::move(c));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  VectorXd first(4);
  for (int i = 0; i < 4; ++i) first[i] = d(rng);
  double constant = m.raw_score(first, first);
  for (int t = 0; t < 50; ++t) {
    VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = d(rng);
    CHECK(m.raw_score(x, x) == constant);  // bitwise equal
  }
}

TEST_CASE("esnn: bit-exact symmetry") {
  auto g = nn::init_network({4, 5, 5, 3},
                            {Activation::Relu, Activation::Relu, Activation::Softmax}, 41);
  auto c = nn::init_network({3, 5, 5, 1},
                            {Activation::Relu, Activation::Relu, Activation::Sigmoid}, 42);
  measures::EsnnMeasure m(std::move(g), std::move(c));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    VectorXd x(4), y(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = d(rng);
      y[i] = d(rng);
    }
    CHECK(m.raw_score(x, y) == m.raw_score(y, x));  // bitwise equal
  }
}

TEST_CASE("esnn: matrix evaluation agrees with pairwise calls") {
  auto g = nn::init_network({3, 4, 4, 2},
                            {Activation::Relu, Activation::Relu, Activation::Softmax}, 51);
  auto c = nn::init_network({2, 4, 4, 1},
                            {Activation::Relu, Activation::Relu, Activation::Sigmoid}, 52);
  measures::EsnnMeasure m(std::move(g), std::move(c));
  MatrixXd V = MatrixXd::Random(4, 3).cwiseAbs();
  MatrixXd T = MatrixXd::Random(6, 3).cwiseAbs();
  MatrixXd S = m.raw_score_matrix(V, T);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(S(i, j) == doctest::Approx(m.raw_score(V.row(i).transpose(), T.row(j).transpose())).epsilon(1e-12));
}

TEST_CASE("esnn loss: alpha endpoints isolate the two terms") {
  auto g = nn::init_network({4, 5, 5, 3},
                            {Activation::Relu, Activation::Relu, Activation::Softmax}, 61);
  auto c = nn::init_network({3, 5, 5, 1},
                            {Activation::Relu, Activation::Relu, Activation::Sigmoid}, 62);
  VectorXd x = VectorXd::Random(4).cwiseAbs(), y = VectorXd::Random(4).cwiseAbs();
  VectorXd tx = VectorXd::Zero(3), ty = VectorXd::Zero(3);
  tx[0] = 1.0;
  ty[1] = 1.0;

  auto ex = nn::forward(g, x);
  auto ey = nn::forward(g, y);
  double ce = nn::cross_entropy(ex, tx).value + nn::cross_entropy(ey, ty).value;
  double pred = nn::forward(c, (ex - ey).cwiseAbs())[0];

  auto at0 = measures::esnn_loss(0.0, x, y, 1.0, tx, ty, g, c);
  CHECK(at0.value == doctest::Approx(0.5 * ce).epsilon(1e-12));
  CHECK(at0.c_grad.cwiseAbs().maxCoeff() == 0.0);  // similarity term switched off

  auto at1 = measures::esnn_loss(1.0, x, y, 1.0, tx, ty, g, c);
  CHECK(at1.value == doctest::Approx(std::abs(1.0 - pred)).epsilon(1e-12));

  CHECK_THROWS_AS(measures::esnn_loss(1.5, x, y, 1.0, tx, ty, g, c), ConfigError);
}

TEST_CASE("esnn loss gradients match central finite differences") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const double h = 1e-5;
  for (int rep = 0; rep < 10; ++rep) {
    auto g = nn::init_network({4, 6, 6, 3},
                              {Activation::Relu, Activation::Relu, Activation::Softmax}, rng());
    auto c = nn::init_network({3, 6, 6, 1},
                              {Activation::Relu, Activation::Relu, Activation::Sigmoid}, rng());
    VectorXd x(4), y(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = d(rng);
      y[i] = d(rng);
    }
    VectorXd tx = VectorXd::Zero(3), ty = VectorXd::Zero(3);
    tx[rep % 3] = 1.0;
    ty[(rep + 1) % 3] = 1.0;
    double alpha = 0.15 + 0.5 * d(rng);
    double s = (rep % 2) ? 1.0 : 0.0;

    auto res = measures::esnn_loss(alpha, x, y, s, tx, ty, g, c);
    std::uniform_int_distribution<Eigen::Index> pick_g(0, g.param_count() - 1);
    for (int k = 0; k < 8; ++k) {
      Eigen::Index i = pick_g(rng);
      nn::Network gp = g, gm = g;
      gp.params[i] += h;
      gm.params[i] -= h;
      double fd = (measures::esnn_loss(alpha, x, y, s, tx, ty, gp, c).value -
                   measures::esnn_loss(alpha, x, y, s, tx, ty, gm, c).value) /
                  (2 * h);
      double denom = std::max({std::abs(fd), std::abs(res.g_grad[i]), 1e-8});
      CHECK(std::abs(fd - res.g_grad[i]) / denom < 1e-4);
    }
    std::uniform_int_distribution<Eigen::Index> pick_c(0, c.param_count() - 1);
    for (int k = 0; k < 8; ++k) {
      Eigen::Index i = pick_c(rng);
      nn::Network cp = c, cm = c;
      cp.params[i] += h;
      cm.params[i] -= h;
      double fd = (measures::esnn_loss(alpha, x, y, s, tx, ty, g, cp).value -
                   measures::esnn_loss(alpha, x, y, s, tx, ty, g, cm).value) /
                  (2 * h);
      double denom = std::max({std::abs(fd), std::abs(res.c_grad[i]), 1e-8});
      CHECK(std::abs(fd - res.c_grad[i]) / denom < 1e-4);
    }
  }
}

TEST_CASE("untrained network measures refuse to score") {
  measures::GabelMeasure m(4, 5, 1);
  VectorXd x = VectorXd::Zero(4), y = VectorXd::Zero(4);
  CHECK_THROWS_AS(m.raw_score(x, y), NotTrainedError);
  measures::EsnnMeasure e(4, 2, 5, 1);
  CHECK_THROWS_AS(e.raw_score(x, y), NotTrainedError);
}

TEST_CASE("training reduces the loss on a separable synthetic problem") {
  auto ds = synthetic_dataset(24, 9);
  auto ids = all_ids(ds);
  measures::TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 7;
  cfg.hidden = 8;
  cfg.pair_mode = data::PairMode::parse("unordered-unique");

  for (auto type : {measures::MeasureType::Esnn, measures::MeasureType::Chopra,
                    measures::MeasureType::T31, measures::MeasureType::Gabel}) {
    if (type == measures::MeasureType::Gabel)
      cfg.pair_mode = data::PairMode::parse("ordered-full");
    auto m = measures::make_measure(type, ds, ids, cfg);
    auto hist = m->train(ds, ids, cfg, nullptr);
    REQUIRE(hist.train_loss.size() == 60);
    CHECK(hist.train_loss.back() < hist.train_loss.front());
    CHECK(m->trained());
    // same-class neighbours end up more similar than cross-class ones
    double same = m->raw_score(ds.X.row(0).transpose(), ds.X.row(2).transpose());
    double diff = m->raw_score(ds.X.row(0).transpose(), ds.X.row(1).transpose());
    CHECK(same > diff);
  }
}

TEST_CASE("training is deterministic in the seed") {
  auto ds = synthetic_dataset(16, 13);
  auto ids = all_ids(ds);
  measures::TrainConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 99;
  cfg.hidden = 6;
  cfg.pair_mode = data::PairMode::parse("unordered-unique");

  auto a = measures::make_measure(measures::MeasureType::Esnn, ds, ids, cfg);
  auto b = measures::make_measure(measures::MeasureType::Esnn, ds, ids, cfg);
  a->train(ds, ids, cfg, nullptr);
  b->train(ds, ids, cfg, nullptr);
  auto* ea = dynamic_cast<measures::EsnnMeasure*>(a.get());
  auto* eb = dynamic_cast<measures::EsnnMeasure*>(b.get());
  REQUIRE(ea);
  REQUIRE(eb);
  CHECK(ea->g().params == eb->g().params);
  CHECK(ea->c().params == eb->c().params);
}

TEST_CASE("esnn rejects alpha outside [0,1]") {
  auto ds = synthetic_dataset(8, 3);
  auto ids = all_ids(ds);
  measures::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.alpha = 1.5;
  cfg.pair_mode = data::PairMode::parse("unordered-unique");
  measures::EsnnMeasure m(2, 2, 4, 0);
  CHECK_THROWS_AS(m.train(ds, ids, cfg, nullptr), ConfigError);
}

TEST_CASE("measure factory produces the requested types") {
  auto ds = synthetic_dataset(10, 5);
  auto ids = all_ids(ds);
  measures::TrainConfig cfg;
  for (auto [name, type] : std::initializer_list<std::pair<const char*, measures::MeasureType>>{
           {"t11", measures::MeasureType::T11},
           {"t21", measures::MeasureType::T21},
           {"gabel", measures::MeasureType::Gabel},
           {"chopra", measures::MeasureType::Chopra},
           {"t31", measures::MeasureType::T31},
           {"esnn", measures::MeasureType::Esnn}}) {
    CHECK(measures::measure_type_from_string(name) == type);
    auto m = measures::make_measure(type, ds, ids, cfg);
    CHECK(m->type() == type);
    CHECK(measures::to_string(m->type()) == name);
  }
  CHECK_THROWS_AS(measures::measure_type_from_string("cosine"), ConfigError);
}
