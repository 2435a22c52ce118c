#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simlearn/data.hpp"
#include "simlearn/nn.hpp"
#include "simlearn/optim.hpp"

namespace simlearn::measures {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

enum class MeasureType { T11, T21, Gabel, Chopra, T31, Esnn };

std::string to_string(MeasureType t);
MeasureType measure_type_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 200;
  std::string optimizer = "rprop";
  optim::Hyperparams hyper;
  data::PairMode pair_mode;  // ignored by t31 (trains on single points)
  double alpha = 0.15;       // eSNN loss weighting
  double margin = 1.0;       // chopra contrastive margin
  std::uint64_t seed = 0;
  int hidden = 13;           // hidden layer width for all trained nets
  int eval_every = 0;        // call eval_hook every k epochs (0 = never)
};

struct TrainHistory {
  std::vector<double> train_loss;               // one entry per epoch
  std::vector<std::pair<int, double>> val_loss; // (epoch, hook value)
};

/// Hook used to record validation retrieval loss during training.
using EvalHook = std::function<double()>;

/// Base of the six concrete similarity measures. Scores are
/// higher-is-more-similar. `raw_score` is the ranking value; `score` is the
/// reported value clamped to [0,1].
class Measure {
 public:
  virtual ~Measure() = default;
  virtual MeasureType type() const = 0;

  virtual double raw_score(const VectorXd& x, const VectorXd& y) const = 0;
  double score(const VectorXd& x, const VectorXd& y) const;

  /// Raw scores of one probe against every row of T (rows are data points).
  /// Default loops; network-backed measures override with batched evaluation.
  virtual VectorXd raw_scores_vs(const VectorXd& x, const MatrixXd& T) const;

  /// V x T raw score matrix used by the retrieval protocol.
  virtual MatrixXd raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const;

  virtual bool needs_training() const { return true; }
  virtual bool trained() const { return true; }

  /// Train on the given rows. Non-learned measures warn and no-op.
  virtual TrainHistory train(const data::Dataset& ds, const std::vector<int>& train_ids,
                             const TrainConfig& cfg, const EvalHook& hook = nullptr);

  virtual json to_json() const = 0;

  /// Embedding network G for measures that have one (chopra, t31, esnn).
  virtual const nn::Network* embedding_net() const { return nullptr; }

 protected:
  void check_trained() const;
  bool trained_ = true;
};

/// Uniformly weighted global similarity: per-attribute local similarity,
/// numeric 1-|a-b|, categorical equality over the one-hot group.
class T11Measure final : public Measure {
 public:
  explicit T11Measure(std::vector<data::AttributeInfo> attrs);
  MeasureType type() const override { return MeasureType::T11; }
  double raw_score(const VectorXd& x, const VectorXd& y) const override;
  bool needs_training() const override { return false; }
  json to_json() const override;
  static std::unique_ptr<T11Measure> from_json(const json& j);

 private:
  std::vector<data::AttributeInfo> attrs_;
};

struct LocalSimParams {
  // per numeric attribute, computed on the training partition
  std::vector<double> min, max, mean, stddev, exponent;
};

/// T11 with polynomial numeric locals (1-|a-b|)^m, m from the feature spread.
class T21Measure final : public Measure {
 public:
  T21Measure(std::vector<data::AttributeInfo> attrs, LocalSimParams params);
  static std::unique_ptr<T21Measure> fit(const data::Dataset& ds,
                                         const std::vector<int>& train_ids);
  MeasureType type() const override { return MeasureType::T21; }
  double raw_score(const VectorXd& x, const VectorXd& y) const override;
  bool needs_training() const override { return false; }
  json to_json() const override;
  static std::unique_ptr<T21Measure> from_json(const json& j);
  const LocalSimParams& params() const { return params_; }

 private:
  std::vector<data::AttributeInfo> attrs_;
  LocalSimParams params_;  // indexed by numeric-attribute order
};

/// Single network over the concatenated pair, sigmoid output, trained with
/// absolute-error loss on ordered pairs. Not symmetry-guaranteed.
class GabelMeasure final : public Measure {
 public:
  GabelMeasure(int input_width, int hidden, std::uint64_t seed);
  explicit GabelMeasure(nn::Network net);
  MeasureType type() const override { return MeasureType::Gabel; }
  double raw_score(const VectorXd& x, const VectorXd& y) const override;
  MatrixXd raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const override;
  bool trained() const override { return trained_; }
  TrainHistory train(const data::Dataset& ds, const std::vector<int>& train_ids,
                     const TrainConfig& cfg, const EvalHook& hook) override;
  json to_json() const override;
  static std::unique_ptr<GabelMeasure> from_json(const json& j);
  const nn::Network& net() const { return net_; }

 private:
  nn::Network net_;
};

/// Shared-weight embedding with L1 energy; score 1/(1+E); contrastive loss.
class ChopraMeasure final : public Measure {
 public:
  ChopraMeasure(int input_width, int embed_width, int hidden, std::uint64_t seed);
  explicit ChopraMeasure(nn::Network g);
  MeasureType type() const override { return MeasureType::Chopra; }
  double raw_score(const VectorXd& x, const VectorXd& y) const override;
  MatrixXd raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const override;
  bool trained() const override { return trained_; }
  TrainHistory train(const data::Dataset& ds, const std::vector<int>& train_ids,
                     const TrainConfig& cfg, const EvalHook& hook) override;
  json to_json() const override;
  static std::unique_ptr<ChopraMeasure> from_json(const json& j);
  MatrixXd embed(const MatrixXd& X) const;
  const nn::Network* embedding_net() const override { return &g_; }
  const nn::Network& g() const { return g_; }

 private:
  nn::Network g_;
};

/// Classifier-backed measure: softmax embedding, score 1 - ||Gx - Gy||_2.
/// The raw score can go negative; the reported score is clamped.
class T31Measure final : public Measure {
 public:
  T31Measure(int input_width, int n_classes, int hidden, std::uint64_t seed);
  explicit T31Measure(nn::Network g);
  MeasureType type() const override { return MeasureType::T31; }
  double raw_score(const VectorXd& x, const VectorXd& y) const override;
  MatrixXd raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const override;
  bool trained() const override { return trained_; }
  TrainHistory train(const data::Dataset& ds, const std::vector<int>& train_ids,
                     const TrainConfig& cfg, const EvalHook& hook) override;
  json to_json() const override;
  static std::unique_ptr<T31Measure> from_json(const json& j);
  MatrixXd embed(const MatrixXd& X) const;
  const nn::Network* embedding_net() const override { return &g_; }
  const nn::Network& g() const { return g_; }

 private:
  nn::Network g_;
};

/// Extended Siamese measure: shared softmax embedding G, learned combiner C
/// whose first operation is the elementwise absolute difference, making the
/// whole measure order-invariant by construction.
class EsnnMeasure final : public Measure {
 public:
  EsnnMeasure(int input_width, int n_classes, int hidden, std::uint64_t seed);
  EsnnMeasure(nn::Network g, nn::Network c);
  MeasureType type() const override { return MeasureType::Esnn; }
  double raw_score(const VectorXd& x, const VectorXd& y) const override;
  MatrixXd raw_score_matrix(const MatrixXd& V, const MatrixXd& T) const override;
  bool trained() const override { return trained_; }
  TrainHistory train(const data::Dataset& ds, const std::vector<int>& train_ids,
                     const TrainConfig& cfg, const EvalHook& hook) override;
  json to_json() const override;
  static std::unique_ptr<EsnnMeasure> from_json(const json& j);
  MatrixXd embed(const MatrixXd& X) const;
  const nn::Network* embedding_net() const override { return &g_; }
  const nn::Network& g() const { return g_; }
  const nn::Network& c() const { return c_; }
  void mark_trained() { trained_ = true; }

 private:
  nn::Network g_;
  nn::Network c_;
};

/// Alpha-weighted eSNN loss on one triplet: classification terms on both
/// branches plus the similarity term routed through C and the ABS layer.
struct EsnnLossResult {
  double value;
  VectorXd g_grad;  // accumulated over both branches and the similarity path
  VectorXd c_grad;
};
EsnnLossResult esnn_loss(double alpha, const VectorXd& x, const VectorXd& y, double s,
                         const VectorXd& t_x, const VectorXd& t_y, const nn::Network& g,
                         const nn::Network& c);

/// Construct an untrained (or fit, for t11/t21) measure for a dataset.
std::unique_ptr<Measure> make_measure(MeasureType type, const data::Dataset& ds,
                                      const std::vector<int>& train_ids, const TrainConfig& cfg);

std::unique_ptr<Measure> measure_from_json(const json& j);

}  // namespace simlearn::measures
