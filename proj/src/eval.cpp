#include "simlearn/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

namespace simlearn::eval {

namespace {

MatrixXd gather_rows(const MatrixXd& X, const std::vector<int>& ids) {
  MatrixXd out(static_cast<Eigen::Index>(ids.size()), X.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row((Eigen::Index)i) = X.row(ids[i]);
  return out;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double retrieval_loss(const measures::Measure& m, const data::Dataset& ds,
                      const std::vector<int>& train_ids, const std::vector<int>& val_ids) {
  if (train_ids.empty() || val_ids.empty())
    throw ProtocolError("retrieval_loss: empty train or validation partition");
  MatrixXd V = gather_rows(ds.X, val_ids);
  MatrixXd T = gather_rows(ds.X, train_ids);
  MatrixXd S = m.raw_score_matrix(V, T);
  int hits = 0;
  for (Eigen::Index v = 0; v < S.rows(); ++v) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < S.cols(); ++t)
      if (S(v, t) > S(v, best)) best = t;  // strict >, so the lowest index wins ties
    if (ds.labels[train_ids[best]] == ds.labels[val_ids[v]]) ++hits;
  }
  return 1.0 - static_cast<double>(hits) / static_cast<double>(val_ids.size());
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset,
                        const std::string& measure, int epochs, int split) {
  return mix_seed(master, hash_str(dataset), hash_str(measure) ^ (std::uint64_t)epochs,
                  (std::uint64_t)split);
}

CellStats BenchmarkReport::stats(const std::string& dataset, const std::string& measure,
                                 int epochs) const {
  CellStats s;
  double sum = 0.0;
  std::vector<double> vals;
  for (const auto& c : cells)
    if (c.ok() && c.dataset == dataset && c.measure == measure && c.epochs == epochs) {
      vals.push_back(c.loss);
      sum += c.loss;
    }
  s.count = static_cast<int>(vals.size());
  if (s.count == 0) return s;
  s.mean = sum / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : vals) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.count - 1));
  }
  return s;
}

std::string BenchmarkReport::to_csv() const {
  // no timing column: reports with the same config and seed must be
  // byte-identical, and wall time is the one non-reproducible field
  std::string out = "dataset,measure,epochs,split,loss,seed,error\n";
  for (const auto& c : cells) {
    out += c.dataset + "," + c.measure + "," + std::to_string(c.epochs) + "," +
           std::to_string(c.split) + "," + (c.ok() ? format_double(c.loss) : "") + "," +
           std::to_string(c.seed) + "," + c.error + "\n";
  }
  return out;
}

json BenchmarkReport::to_json() const {
  json j;
  j["config"] = config;
  j["cells"] = json::array();
  for (const auto& c : cells) {
    json jc{{"dataset", c.dataset}, {"measure", c.measure}, {"epochs", c.epochs},
            {"split", c.split},     {"wall_ms", c.wall_ms}, {"seed", c.seed}};
    if (c.ok())
      jc["loss"] = c.loss;
    else
      jc["error"] = c.error;
    j["cells"].push_back(jc);
  }
  return j;
}

std::string BenchmarkReport::render_table(int epochs, const std::vector<std::string>& datasets,
                                          const std::vector<std::string>& ms) const {
  std::ostringstream out;
  out << "validation retrieval loss, " << epochs << " epochs (mean over splits; * = best or "
         "within one stddev of best)\n";
  out << std::left;
  out.width(10);
  out << "dataset";
  for (const auto& m : ms) {
    out.width(10);
    out << m;
  }
  out << "\n";
  std::map<std::string, double> sums;
  std::map<std::string, int> counts;
  for (const auto& d : datasets) {
    std::vector<CellStats> row;
    double best = std::numeric_limits<double>::infinity();
    double best_std = 0.0;
    for (const auto& m : ms) {
      auto s = stats(d, m, epochs);
      row.push_back(s);
      if (s.count > 0 && s.mean < best) {
        best = s.mean;
        best_std = s.stddev;
      }
    }
    out.width(10);
    out << d;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      char buf[32];
      if (row[i].count == 0) {
        std::snprintf(buf, sizeof(buf), "-");
      } else {
        bool star = row[i].mean <= best + best_std;
        std::snprintf(buf, sizeof(buf), "%.2f%s", row[i].mean, star ? "*" : "");
        sums[ms[i]] += row[i].mean;
        counts[ms[i]] += 1;
      }
      out.width(10);
      out << buf;
    }
    out << "\n";
  }
  out.width(10);
  out << "Sum";
  for (const auto& m : ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", sums[m]);
    out.width(10);
    out << buf;
  }
  out << "\n";
  out.width(10);
  out << "Average";
  for (const auto& m : ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", counts[m] ? sums[m] / counts[m] : 0.0);
    out.width(10);
    out << buf;
  }
  out << "\n";
  return out.str();
}

namespace {

measures::TrainConfig cell_train_config(const BenchmarkConfig& cfg, measures::MeasureType type,
                                        int epochs, std::uint64_t seed) {
  measures::TrainConfig tc = cfg.train;
  tc.epochs = epochs;
  tc.seed = seed;
  if (cfg.pair_mode_overridden)
    tc.pair_mode = cfg.pair_mode_override;
  else
    tc.pair_mode = (type == measures::MeasureType::Gabel) ? cfg.pair_mode_gabel
                                                          : cfg.pair_mode_siamese;
  return tc;
}

struct CellTask {
  const data::Dataset* ds;
  measures::MeasureType type;
  int epochs;
  int split;
  const data::Split* ids;
};

void run_cells(const std::vector<CellTask>& tasks, const BenchmarkConfig& cfg,
               std::vector<BenchmarkCell>& cells) {
  std::atomic<std::size_t> next{0};
  int jobs = std::max(1, cfg.jobs);
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      const auto& t = tasks[i];
      BenchmarkCell& cell = cells[i];
      cell.dataset = t.ds->id;
      cell.measure = measures::to_string(t.type);
      cell.epochs = t.epochs;
      cell.split = t.split;
      cell.seed = cell_seed(cfg.master_seed, cell.dataset, cell.measure, t.epochs, t.split);
      auto t0 = std::chrono::steady_clock::now();
      try {
        auto tc = cell_train_config(cfg, t.type, t.epochs, cell.seed);
        auto m = measures::make_measure(t.type, *t.ds, t.ids->train, tc);
        if (m->needs_training()) m->train(*t.ds, t.ids->train, tc, nullptr);
        cell.loss = retrieval_loss(*m, *t.ds, t.ids->train, t.ids->val);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.wall_ms = wall_ms_since(t0);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<data::Dataset>& datasets,
                              const std::vector<measures::MeasureType>& types,
                              const BenchmarkConfig& cfg) {
  BenchmarkReport report;

  // Splits are derived once per dataset from the master seed, shared by all
  // measures and epoch budgets so cells are comparable.
  std::vector<std::vector<data::Split>> splits;
  splits.reserve(datasets.size());
  for (const auto& ds : datasets)
    splits.push_back(
        data::stratified_kfold(ds, cfg.k, cfg.repeats, mix_seed(cfg.master_seed, hash_str(ds.id))));

  std::vector<CellTask> tasks;
  for (std::size_t d = 0; d < datasets.size(); ++d)
    for (auto type : types)
      for (int epochs : cfg.epochs_list)
        for (std::size_t s = 0; s < splits[d].size(); ++s)
          tasks.push_back({&datasets[d], type, epochs, static_cast<int>(s), &splits[d][s]});

  report.cells.resize(tasks.size());
  run_cells(tasks, cfg, report.cells);
  return report;
}

std::vector<AlphaPoint> alpha_sweep(const data::Dataset& ds, const std::vector<double>& alphas,
                                    const BenchmarkConfig& cfg) {
  if (alphas.empty()) throw ConfigError("alpha_sweep: empty grid");
  for (double a : alphas)
    if (a < 0.0 || a > 1.0) throw ConfigError("alpha_sweep: alpha outside [0,1]");

  auto splits = data::stratified_kfold(ds, cfg.k, cfg.repeats, mix_seed(cfg.master_seed, hash_str(ds.id)));
  std::vector<AlphaPoint> out;
  for (double a : alphas) {
    AlphaPoint pt;
    pt.alpha = a;
    std::vector<std::pair<std::size_t, double>> losses(splits.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t s = next.fetch_add(1);
        if (s >= splits.size()) break;
        measures::TrainConfig tc =
            cell_train_config(cfg, measures::MeasureType::Esnn, cfg.train.epochs,
                              cell_seed(cfg.master_seed, ds.id, "esnn", cfg.train.epochs, (int)s));
        tc.alpha = a;
        auto m = measures::make_measure(measures::MeasureType::Esnn, ds, splits[s].train, tc);
        m->train(ds, splits[s].train, tc, nullptr);
        losses[s] = {s, retrieval_loss(*m, ds, splits[s].train, splits[s].val)};
      }
    };
    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    double sum = 0.0;
    for (auto& [s, l] : losses) {
      pt.split_losses.push_back(l);
      sum += l;
    }
    pt.mean_loss = sum / losses.size();
    double ss = 0.0;
    for (double l : pt.split_losses) ss += (l - pt.mean_loss) * (l - pt.mean_loss);
    pt.stddev = pt.split_losses.size() > 1 ? std::sqrt(ss / (pt.split_losses.size() - 1)) : 0.0;
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<OptimizerCurve> compare_optimizers(const data::Dataset& ds,
                                               const std::vector<std::string>& optimizers,
                                               const BenchmarkConfig& cfg, int eval_every) {
  auto splits = data::stratified_kfold(ds, cfg.k, cfg.repeats, mix_seed(cfg.master_seed, hash_str(ds.id)));
  std::vector<OptimizerCurve> out;
  for (const auto& opt_id : optimizers) {
    OptimizerCurve curve;
    curve.optimizer = opt_id;
    std::vector<measures::TrainHistory> histories(splits.size());
    curve.final_val.resize(splits.size());
    for (std::size_t s = 0; s < splits.size(); ++s) {
      // seeds are shared across optimizers: identical splits and identical init
      measures::TrainConfig tc =
          cell_train_config(cfg, measures::MeasureType::Esnn, cfg.train.epochs,
                            cell_seed(cfg.master_seed, ds.id, "esnn", cfg.train.epochs, (int)s));
      tc.optimizer = opt_id;
      tc.eval_every = eval_every;
      auto m = measures::make_measure(measures::MeasureType::Esnn, ds, splits[s].train, tc);
      auto hook = [&]() { return retrieval_loss(*m, ds, splits[s].train, splits[s].val); };
      histories[s] = m->train(ds, splits[s].train, tc, hook);
      curve.final_val[s] = retrieval_loss(*m, ds, splits[s].train, splits[s].val);
    }
    if (!histories.empty() && !histories[0].val_loss.empty()) {
      for (const auto& [epoch, _] : histories[0].val_loss) curve.epochs.push_back(epoch);
      for (std::size_t k = 0; k < curve.epochs.size(); ++k) {
        double tr = 0.0, vl = 0.0;
        for (const auto& h : histories) {
          tr += h.train_loss[curve.epochs[k] - 1];
          vl += h.val_loss[k].second;
        }
        curve.mean_train.push_back(tr / histories.size());
        curve.mean_val.push_back(vl / histories.size());
      }
    }
    out.push_back(std::move(curve));
  }
  return out;
}

PcaResult pca_project(const MatrixXd& vectors, int dims) {
  if (vectors.rows() < dims)
    throw ProtocolError("pca_project: fewer rows than requested dimensions");
  PcaResult res;
  res.mean = vectors.colwise().mean();
  MatrixXd centered = vectors.rowwise() - res.mean.transpose();
  Eigen::BDCSVD<MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  int d = std::min<int>(dims, static_cast<int>(svd.singularValues().size()));
  res.basis = svd.matrixV().leftCols(d);
  res.singular_values = svd.singularValues().head(d);
  res.coords = centered * res.basis;
  return res;
}

double silhouette(const MatrixXd& points, const std::vector<int>& labels) {
  const Eigen::Index n = points.rows();
  if (static_cast<std::size_t>(n) != labels.size())
    throw ShapeError("silhouette: label count mismatch");
  std::map<int, std::vector<Eigen::Index>> clusters;
  for (Eigen::Index i = 0; i < n; ++i) clusters[labels[i]].push_back(i);
  if (clusters.size() < 2) throw ProtocolError("silhouette: needs at least two clusters");

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double a = 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [cls, members] : clusters) {
      double sum = 0.0;
      int cnt = 0;
      for (Eigen::Index j : members) {
        if (j == i) continue;
        sum += (points.row(i) - points.row(j)).norm();
        ++cnt;
      }
      if (cls == labels[i]) {
        a = cnt > 0 ? sum / cnt : 0.0;
        if (cnt == 0) a = -1.0;  // singleton marker
      } else if (cnt > 0) {
        b = std::min(b, sum / cnt);
      }
    }
    if (a < 0.0) continue;  // silhouette of a singleton is defined as 0
    total += (b - a) / std::max(a, b);
  }
  return total / n;
}

EmbeddingExport export_embeddings(const measures::Measure& m, const data::Dataset& ds,
                                  const std::vector<int>& row_ids) {
  const nn::Network* g = m.embedding_net();
  if (!g) throw ConfigError("export_embeddings: measure has no embedding network");
  EmbeddingExport ex;
  ex.embeddings = nn::forward_batch(*g, gather_rows(ds.X, row_ids)).output();
  for (int id : row_ids) ex.labels.push_back(ds.labels[id]);
  ex.coords = pca_project(ex.embeddings, 2).coords;
  ex.silhouette = silhouette(ex.embeddings, ex.labels);
  return ex;
}

}  // namespace simlearn::eval
