#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simlearn/data.hpp"
#include "simlearn/measures.hpp"

namespace simlearn::eval {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

/// Retrieval-loss protocol: every validation row retrieves its most similar
/// training row by raw score (argmax, lowest training index wins ties); the
/// loss is 1 minus the fraction of class matches.
double retrieval_loss(const measures::Measure& m, const data::Dataset& ds,
                      const std::vector<int>& train_ids, const std::vector<int>& val_ids);

struct BenchmarkCell {
  std::string dataset;
  std::string measure;
  int epochs = 0;
  int split = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // non-empty when the cell failed
  bool ok() const { return error.empty(); }
};

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over splits
  int count = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;
  json config;  // RunConfig snapshot, reproduces the run together with the seed

  CellStats stats(const std::string& dataset, const std::string& measure, int epochs) const;
  std::string to_csv() const;
  json to_json() const;
  /// Plain-text table, one row per dataset plus Sum and Average rows. The
  /// best measure per row is starred; so is any measure within one standard
  /// deviation (of the best cell) of the best mean.
  std::string render_table(int epochs, const std::vector<std::string>& datasets,
                           const std::vector<std::string>& measures) const;
};

struct BenchmarkConfig {
  std::vector<int> epochs_list{200, 2000};
  int k = 5;
  int repeats = 5;
  std::uint64_t master_seed = 0;
  measures::TrainConfig train;  // template; seed/epochs/pair mode set per cell
  // Pair modes: gabel trains on all ordered pairs unless overridden; the
  // symmetric pair losses use each unordered pair once.
  data::PairMode pair_mode_siamese{data::PairKind::UnorderedUnique, 0, 0};
  data::PairMode pair_mode_gabel{data::PairKind::OrderedFull, 0, 0};
  bool pair_mode_overridden = false;
  data::PairMode pair_mode_override;
  int jobs = 1;
};

std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset,
                        const std::string& measure, int epochs, int split);

BenchmarkReport run_benchmark(const std::vector<data::Dataset>& datasets,
                              const std::vector<measures::MeasureType>& types,
                              const BenchmarkConfig& cfg);

struct AlphaPoint {
  double alpha;
  double mean_loss;
  double stddev;
  std::vector<double> split_losses;
};

/// One full cross-validated eSNN run per alpha value; splits and seeds are
/// shared across the grid so only alpha varies.
std::vector<AlphaPoint> alpha_sweep(const data::Dataset& ds, const std::vector<double>& alphas,
                                    const BenchmarkConfig& cfg);

struct OptimizerCurve {
  std::string optimizer;
  std::vector<int> epochs;            // hook epochs
  std::vector<double> mean_train;     // mean training loss at those epochs
  std::vector<double> mean_val;       // mean validation retrieval loss
  std::vector<double> final_val;      // per split, after the last epoch
};

/// eSNN trained with each optimizer over identical splits and seeds.
std::vector<OptimizerCurve> compare_optimizers(const data::Dataset& ds,
                                               const std::vector<std::string>& optimizers,
                                               const BenchmarkConfig& cfg, int eval_every = 10);

struct PcaResult {
  MatrixXd coords;           // rows x dims
  MatrixXd basis;            // columns are the principal directions (orthonormal)
  VectorXd singular_values;  // top `dims`
  VectorXd mean;             // column means removed before projection
};

PcaResult pca_project(const MatrixXd& vectors, int dims = 2);

struct EmbeddingExport {
  MatrixXd embeddings;       // row per exported data point
  std::vector<int> labels;
  MatrixXd coords;           // 2-D PCA coordinates
  double silhouette = 0.0;   // Euclidean silhouette in embedding space
};

EmbeddingExport export_embeddings(const measures::Measure& m, const data::Dataset& ds,
                                  const std::vector<int>& row_ids);

/// Mean silhouette coefficient with Euclidean distances.
double silhouette(const MatrixXd& points, const std::vector<int>& labels);

std::string format_double(double v);  // shortest round-trippable decimal form

}  // namespace simlearn::eval
