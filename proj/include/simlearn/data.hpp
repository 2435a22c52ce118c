#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simlearn/common.hpp"

namespace simlearn::data {

using Eigen::MatrixXd;
using Eigen::VectorXi;

enum class ColumnKind { Numeric, Categorical, Target, Ignore };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::string missing_token = "?";
  std::vector<std::string> categories;  // optional; empty = learn from data
};

struct Schema {
  std::vector<ColumnSpec> columns;
  bool has_header = false;
  char delimiter = ',';

  static Schema from_json_file(const std::string& path);
  static Schema from_json_text(const std::string& text);
  int target_index() const;
};

/// Span of one original attribute inside the preprocessed matrix.
struct AttributeInfo {
  std::string name;
  bool categorical = false;
  int col_start = 0;
  int width = 1;                         // one-hot width for categoricals
  double min = 0.0, max = 1.0;           // raw range used by min-max scaling
  std::vector<std::string> categories;   // sorted, for categoricals
};

/// Immutable after load; preprocessed: imputed, min-max scaled, one-hot.
struct Dataset {
  MatrixXd X;          // N x M'
  VectorXi labels;     // class ids 0..n_classes-1
  int n_classes = 0;
  std::vector<AttributeInfo> attrs;
  std::vector<std::string> class_names;  // sorted
  std::string source_hash;               // sha256 of the source file
  std::string id;                        // short dataset id (file stem by default)

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index width() const { return X.cols(); }
};

std::string sha256_file(const std::string& path);
std::string sha256_bytes(const std::string& bytes);

Dataset load_dataset(const std::string& csv_path, const Schema& schema);

/// Preprocess already-parsed raw cells; exposed for the idempotence property
/// and for synthetic fixtures in tests.
Dataset preprocess(const std::vector<std::vector<std::string>>& rows, const Schema& schema);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
};

/// k-fold stratified splits repeated `repeats` times (k*repeats splits).
/// Within one repeat the validation folds are disjoint and cover all rows.
std::vector<Split> stratified_kfold(const Dataset& ds, int k, int repeats, std::uint64_t seed);
std::vector<Split> stratified_kfold(const VectorXi& labels, int k, int repeats,
                                    std::uint64_t seed);

struct PairTriplet {
  int x;  // row index
  int y;
  double s;  // 1 if same class else 0
};

enum class PairKind { OrderedFull, UnorderedUnique, Sampled };

struct PairMode {
  PairKind kind = PairKind::UnorderedUnique;
  std::size_t count = 0;       // for Sampled
  std::uint64_t seed = 0;      // for Sampled

  static PairMode parse(const std::string& text);  // "ordered-full" | "unordered-unique" | "sampled-N"
  std::string to_string() const;
};

/// Pair dataset over `ids` (absolute row indices). Self-pairs are excluded.
std::vector<PairTriplet> build_pairs(const VectorXi& labels, const std::vector<int>& ids,
                                     const PairMode& mode);

}  // namespace simlearn::data
