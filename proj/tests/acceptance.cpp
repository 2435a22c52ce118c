// Acceptance gate: one line per criterion, non-zero exit if any fails.
// Heavy criteria retrain measures over the full 5x5 cross-validation; expect
// a long run on a single core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "simlearn/data.hpp"
#include "simlearn/eval.hpp"
#include "simlearn/measures.hpp"

using namespace simlearn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string data_dir() {
  if (const char* env = std::getenv("SIMLEARN_DATA_DIR")) return env;
  return std::string(SIMLEARN_SOURCE_DIR) + "/datasets";
}

std::optional<data::Dataset> try_load(const std::string& id, const std::string& file) {
  try {
    auto schema =
        data::Schema::from_json_file(std::string(SIMLEARN_SOURCE_DIR) + "/datasets/schemas/" + id + ".json");
    auto ds = data::load_dataset(data_dir() + "/" + file, schema);
    ds.id = id;
    return ds;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "note: dataset %s unavailable: %s\n", id.c_str(), e.what());
    return std::nullopt;
  }
}

const std::vector<measures::MeasureType> kAllMeasures = {
    measures::MeasureType::Esnn,  measures::MeasureType::Chopra, measures::MeasureType::Gabel,
    measures::MeasureType::T31,   measures::MeasureType::T11,    measures::MeasureType::T21};

// published 200-epoch mean retrieval losses for the four benchmark datasets
const std::map<std::string, std::map<std::string, double>> kExpected = {
    {"bal", {{"esnn", 0.01}, {"chopra", 0.00}, {"gabel", 0.14}, {"t31", 0.10}, {"t11", 0.42}, {"t21", 0.81}}},
    {"iris", {{"esnn", 0.04}, {"chopra", 0.03}, {"gabel", 0.18}, {"t31", 0.07}, {"t11", 0.05}, {"t21", 0.04}}},
    {"hay", {{"esnn", 0.19}, {"chopra", 0.21}, {"gabel", 0.26}, {"t31", 0.17}, {"t11", 0.33}, {"t21", 0.37}}},
    {"ttt", {{"esnn", 0.03}, {"chopra", 0.03}, {"gabel", 0.17}, {"t31", 0.07}, {"t11", 0.32}, {"t21", 0.07}}}};

// the cells the reproduction criterion is gated on
const std::vector<std::pair<std::string, std::string>> kGatedCells = {
    {"bal", "esnn"}, {"iris", "esnn"}, {"hay", "esnn"},
    {"ttt", "esnn"}, {"bal", "chopra"}, {"iris", "t11"}};

std::vector<int> all_rows(const data::Dataset& ds) {
  std::vector<int> ids(ds.n());
  for (int i = 0; i < (int)ids.size(); ++i) ids[i] = i;
  return ids;
}

VectorXd random_point(const data::Dataset& ds, std::mt19937_64& rng) {
  // convex combination of two dataset rows: stays in the preprocessed domain
  std::uniform_int_distribution<int> pick(0, (int)ds.n() - 1);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  double t = d(rng);
  return t * ds.X.row(pick(rng)).transpose() + (1.0 - t) * ds.X.row(pick(rng)).transpose();
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  auto t_start = std::chrono::steady_clock::now();

  // --- load the benchmark datasets -----------------------------------------
  std::vector<data::Dataset> available;
  std::vector<std::string> missing;
  for (auto [id, file] : std::initializer_list<std::pair<const char*, const char*>>{
           {"iris", "iris.data"},
           {"bal", "balance-scale.data"},
           {"hay", "hayes-roth.data"},
           {"ttt", "tic-tac-toe.data"}}) {
    if (auto ds = try_load(id, file))
      available.push_back(std::move(*ds));
    else
      missing.push_back(id);
  }

  auto find_ds = [&](const std::string& id) -> const data::Dataset* {
    for (const auto& d : available)
      if (d.id == id) return &d;
    return nullptr;
  };

  // --- shared 200-epoch benchmark over every available dataset -------------
  eval::BenchmarkConfig bench;
  bench.epochs_list = {200};
  bench.k = 5;
  bench.repeats = 5;
  bench.master_seed = 20240515;
  std::printf("running the 200-epoch benchmark over %zu datasets...\n", available.size());
  auto report = eval::run_benchmark(available, kAllMeasures, bench);

  // --- criterion 1: Table-level reproduction -------------------------------
  {
    Criterion c{1, "benchmark reproduction within +-0.06 on the reference cells"};
    std::string grid = "\n    dataset  measure  mean    expected delta\n";
    for (const auto& [ds_id, row] : kExpected) {
      for (const auto& [m_id, expect] : row) {
        auto st = report.stats(ds_id, m_id, 200);
        char line[160];
        if (st.count > 0)
          std::snprintf(line, sizeof line, "    %-8s %-8s %.4f  %.2f     %+.4f\n", ds_id.c_str(),
                        m_id.c_str(), st.mean, expect, st.mean - expect);
        else
          std::snprintf(line, sizeof line, "    %-8s %-8s (no data) %.2f\n", ds_id.c_str(),
                        m_id.c_str(), expect);
        grid += line;
      }
    }
    std::printf("%s", grid.c_str());

    c.pass = true;
    for (const auto& [ds_id, m_id] : kGatedCells) {
      auto st = report.stats(ds_id, m_id, 200);
      double expect = kExpected.at(ds_id).at(m_id);
      if (st.count == 0) {
        c.pass = false;
        c.detail += ds_id + "/" + m_id + " has no results (dataset unavailable); ";
      } else if (std::abs(st.mean - expect) > 0.06) {
        c.pass = false;
        char buf[120];
        std::snprintf(buf, sizeof buf, "%s/%s mean %.4f vs %.2f; ", ds_id.c_str(), m_id.c_str(),
                      st.mean, expect);
        c.detail += buf;
      }
    }
    if (c.pass) c.detail = "all gated cells within tolerance";
    results.push_back(c);
  }

  // --- criterion 2: ordering of the averages --------------------------------
  {
    Criterion c{2, "esnn average loss below chopra and gabel averages"};
    auto avg = [&](const std::string& m) {
      double sum = 0;
      int n = 0;
      for (const auto& d : available) {
        auto st = report.stats(d.id, m, 200);
        if (st.count > 0) {
          sum += st.mean;
          ++n;
        }
      }
      return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
    };
    double e = avg("esnn"), ch = avg("chopra"), ga = avg("gabel");
    c.pass = std::isfinite(e) && e < ch && e < ga;
    char buf[120];
    std::snprintf(buf, sizeof buf, "esnn %.4f, chopra %.4f, gabel %.4f", e, ch, ga);
    c.detail = buf;
    if (!missing.empty()) c.detail += " (over the available datasets only)";
    results.push_back(c);
  }

  // --- train one model of each symmetric type per dataset for criteria 3/4 --
  std::printf("training symmetry-check models...\n");
  {
    Criterion c3{3, "bit-exact symmetry on 1000 random pairs per dataset"};
    Criterion c4{4, "esnn self-similarity is one bitwise constant"};
    c3.pass = c4.pass = true;
    long checked = 0;
    for (const auto& ds : available) {
      auto splits = data::stratified_kfold(ds, 5, 1, 77);
      const auto& train_ids = splits[0].train;
      measures::TrainConfig tc;
      tc.epochs = 50;
      tc.seed = 1234;
      tc.pair_mode = data::PairMode::parse("unordered-unique");

      std::vector<std::unique_ptr<measures::Measure>> ms;
      for (auto t : {measures::MeasureType::Esnn, measures::MeasureType::Chopra,
                     measures::MeasureType::T31, measures::MeasureType::T11,
                     measures::MeasureType::T21}) {
        auto m = measures::make_measure(t, ds, train_ids, tc);
        if (m->needs_training()) m->train(ds, train_ids, tc, nullptr);
        ms.push_back(std::move(m));
      }

      std::mt19937_64 rng(hash_str(ds.id));
      for (int p = 0; p < 1000; ++p) {
        VectorXd x = random_point(ds, rng), y = random_point(ds, rng);
        for (const auto& m : ms) {
          double a = m->raw_score(x, y), b = m->raw_score(y, x);
          ++checked;
          if (a != b) {
            c3.pass = false;
            c3.detail = "asymmetry in " + measures::to_string(m->type()) + " on " + ds.id;
          }
        }
      }

      const auto& esnn = ms[0];
      double ref = esnn->raw_score(ds.X.row(0).transpose(), ds.X.row(0).transpose());
      for (int p = 0; p < 100; ++p) {
        VectorXd x = random_point(ds, rng);
        if (esnn->raw_score(x, x) != ref) {
          c4.pass = false;
          c4.detail = "self-similarity varies on " + ds.id;
        }
      }
    }
    if (c3.pass) c3.detail = std::to_string(checked) + " ordered evaluations compared";
    if (c4.pass) c4.detail = "constant across 100 probes on every dataset";
    results.push_back(c3);
    results.push_back(c4);
  }

  // --- criterion 5: end-to-end gradient check -------------------------------
  {
    Criterion c{5, "loss gradient matches finite differences on 100 configurations"};
    c.pass = true;
    std::mt19937_64 rng(90210);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const double h = 1e-5;
    double worst = 0.0;
    int done = 0, draws = 0;
    while (done < 100 && draws < 2000 && c.pass) {
      ++draws;
      int rep = done;
      int in = 2 + (int)(rng() % 6), classes = 2 + (int)(rng() % 3), hidden = 4 + (int)(rng() % 9);
      auto g = nn::init_network({in, hidden, hidden, classes},
                                {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Softmax},
                                rng());
      auto cc = nn::init_network({classes, hidden, hidden, 1},
                                 {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Sigmoid},
                                 rng());
      VectorXd x(in), y(in);
      for (int i = 0; i < in; ++i) {
        x[i] = d(rng);
        y[i] = d(rng);
      }
      // finite differences are meaningless at a relu kink; redraw such configs
      {
        MatrixXd X(2, in);
        X.row(0) = x.transpose();
        X.row(1) = y.transpose();
        auto cg = nn::forward_batch(g, X);
        MatrixXd Z = (cg.output().row(0) - cg.output().row(1)).cwiseAbs();
        auto ccache = nn::forward_batch(cc, Z);
        bool near_kink = false;
        for (int l = 0; l < 2; ++l)
          if (cg.pre[l].cwiseAbs().minCoeff() < 1e-3 || ccache.pre[l].cwiseAbs().minCoeff() < 1e-3)
            near_kink = true;
        if (near_kink) continue;
      }
      ++done;
      VectorXd tx = VectorXd::Zero(classes), ty = VectorXd::Zero(classes);
      tx[rng() % classes] = 1.0;
      ty[rng() % classes] = 1.0;
      double alpha = 0.05 + 0.9 * d(rng);
      double s = (rng() % 2) ? 1.0 : 0.0;

      auto res = measures::esnn_loss(alpha, x, y, s, tx, ty, g, cc);
      auto probe = [&](bool on_g, Eigen::Index i) {
        nn::Network gp = g, cp = cc;
        (on_g ? gp : cp).params[i] += h;
        double up = measures::esnn_loss(alpha, x, y, s, tx, ty, gp, cp).value;
        (on_g ? gp : cp).params[i] -= 2 * h;
        double dn = measures::esnn_loss(alpha, x, y, s, tx, ty, gp, cp).value;
        return (up - dn) / (2 * h);
      };
      for (int k = 0; k < 10 && c.pass; ++k) {
        Eigen::Index ig = (Eigen::Index)(rng() % (std::uint64_t)g.param_count());
        Eigen::Index ic = (Eigen::Index)(rng() % (std::uint64_t)cc.param_count());
        for (auto [on_g, idx, an] :
             {std::tuple<bool, Eigen::Index, double>{true, ig, res.g_grad[ig]},
              std::tuple<bool, Eigen::Index, double>{false, ic, res.c_grad[ic]}}) {
          double fd = probe(on_g, idx);
          double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
          worst = std::max(worst, rel);
          if (rel >= 1e-4) {
            c.pass = false;
            char buf[120];
            std::snprintf(buf, sizeof buf, "config %d: rel err %.2e (%s param %ld)", rep, rel,
                          on_g ? "G" : "C", (long)idx);
            c.detail = buf;
          }
        }
      }
    }
    if (c.pass) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "worst relative error %.2e", worst);
      c.detail = buf;
    }
    results.push_back(c);
  }

  // --- criterion 6: exhaustive pair counts ----------------------------------
  {
    Criterion c{6, "pair builders emit N(N-1) and N(N-1)/2 triplets for all N <= 100"};
    c.pass = true;
    for (int N = 2; N <= 100 && c.pass; ++N) {
      Eigen::VectorXi labels(N);
      for (int i = 0; i < N; ++i) labels[i] = i % 3;
      std::vector<int> ids(N);
      for (int i = 0; i < N; ++i) ids[i] = i;
      auto ordered = data::build_pairs(labels, ids, data::PairMode::parse("ordered-full"));
      auto unordered = data::build_pairs(labels, ids, data::PairMode::parse("unordered-unique"));
      std::set<std::pair<int, int>> seen;
      for (const auto& p : ordered) seen.insert({p.x, p.y});
      if ((int)ordered.size() != N * (N - 1) || (int)seen.size() != N * (N - 1) ||
          (int)unordered.size() != N * (N - 1) / 2) {
        c.pass = false;
        c.detail = "count mismatch at N=" + std::to_string(N);
      }
    }
    if (c.pass) c.detail = "exhaustive for N=2..100";
    results.push_back(c);
  }

  // --- criterion 7: retrieval-loss oracle equivalence ------------------------
  {
    Criterion c{7, "retrieval loss equals the brute-force oracle on 20 fixtures"};
    c.pass = true;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int rep = 0; rep < 20 && c.pass; ++rep) {
      int n = 10 + (int)(rng() % 41);  // <= 50 rows
      data::Dataset ds;
      ds.id = "fixture";
      ds.n_classes = 2 + (int)(rng() % 3);
      data::AttributeInfo a0, a1;
      a0.name = "f0";
      a1.name = "f1";
      a1.col_start = 1;
      ds.attrs = {a0, a1};
      ds.X.resize(n, 2);
      ds.labels.resize(n);
      for (int i = 0; i < n; ++i) {
        ds.labels[i] = i % ds.n_classes;
        ds.X(i, 0) = d(rng);
        ds.X(i, 1) = d(rng);
      }
      measures::T11Measure m(ds.attrs);
      std::vector<int> train, val;
      for (int i = 0; i < n; ++i) (i % 3 ? train : val).push_back(i);

      // independent oracle: linear scan with strict > and first-wins ties
      int hits = 0;
      for (int v : val) {
        int best = train[0];
        double best_s = m.raw_score(ds.X.row(v).transpose(), ds.X.row(train[0]).transpose());
        for (std::size_t i = 1; i < train.size(); ++i) {
          double s = m.raw_score(ds.X.row(v).transpose(), ds.X.row(train[i]).transpose());
          if (s > best_s) {
            best_s = s;
            best = train[i];
          }
        }
        if (ds.labels[best] == ds.labels[v]) ++hits;
      }
      double oracle = 1.0 - double(hits) / val.size();
      double got = eval::retrieval_loss(m, ds, train, val);
      if (got != oracle) {
        c.pass = false;
        char buf[100];
        std::snprintf(buf, sizeof buf, "fixture %d: %.6f vs oracle %.6f", rep, got, oracle);
        c.detail = buf;
      }
    }
    if (c.pass) c.detail = "exact match on all 20 fixtures";
    results.push_back(c);
  }

  // --- criterion 8: optimizer comparison on bal ------------------------------
  {
    Criterion c{8, "rprop-trained esnn <= adam and rmsprop on bal (25 splits)"};
    if (const auto* bal = find_ds("bal")) {
      std::printf("running the optimizer comparison on bal...\n");
      eval::BenchmarkConfig cfg;
      cfg.epochs_list = {200};
      cfg.k = 5;
      cfg.repeats = 5;
      cfg.master_seed = 881;
      auto curves = eval::compare_optimizers(*bal, {"rprop", "adam", "rmsprop"}, cfg, 0);
      auto mean_of = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / v.size();
      };
      double rp = mean_of(curves[0].final_val), ad = mean_of(curves[1].final_val),
             rm = mean_of(curves[2].final_val);
      c.pass = rp <= ad && rp <= rm;
      char buf[120];
      std::snprintf(buf, sizeof buf, "rprop %.4f, adam %.4f, rmsprop %.4f", rp, ad, rm);
      c.detail = buf;
    } else {
      c.detail = "bal dataset unavailable";
    }
    results.push_back(c);
  }

  // --- criterion 9: alpha sweep shape on bal ---------------------------------
  {
    Criterion c{9, "minimizing alpha over a 21-point grid lies in [0.05, 0.35]"};
    if (const auto* bal = find_ds("bal")) {
      std::printf("running the alpha sweep on bal...\n");
      std::vector<double> grid;
      for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
      eval::BenchmarkConfig cfg;
      cfg.epochs_list = {200};
      cfg.k = 5;
      cfg.repeats = 1;
      cfg.master_seed = 414;
      auto pts = eval::alpha_sweep(*bal, grid, cfg);
      double best_alpha = pts[0].alpha, best = pts[0].mean_loss;
      for (const auto& p : pts) {
        std::printf("    alpha %.2f  mean loss %.4f\n", p.alpha, p.mean_loss);
        if (p.mean_loss < best) {
          best = p.mean_loss;
          best_alpha = p.alpha;
        }
      }
      c.pass = best_alpha >= 0.05 && best_alpha <= 0.35;
      char buf[100];
      std::snprintf(buf, sizeof buf, "minimum at alpha=%.2f (loss %.4f)", best_alpha, best);
      c.detail = buf;
    } else {
      c.detail = "bal dataset unavailable";
    }
    results.push_back(c);
  }

  // --- criterion 10: embedding separation ------------------------------------
  {
    Criterion c{10, "trained esnn embeddings separate classes better than untrained"};
    if (const auto* iris = find_ds("iris")) {
      auto splits = data::stratified_kfold(*iris, 5, 1, 55);
      const auto& sp = splits[0];
      measures::TrainConfig tc;
      tc.epochs = 200;
      tc.seed = 2718;
      tc.pair_mode = data::PairMode::parse("unordered-unique");
      auto untrained = measures::make_measure(measures::MeasureType::Esnn, *iris, sp.train, tc);
      auto trained = measures::make_measure(measures::MeasureType::Esnn, *iris, sp.train, tc);
      trained->train(*iris, sp.train, tc, nullptr);
      static_cast<measures::EsnnMeasure*>(untrained.get())->mark_trained();

      auto sil = [&](const measures::Measure& m) {
        return eval::export_embeddings(m, *iris, sp.val).silhouette;
      };
      double before = sil(*untrained), after = sil(*trained);
      c.pass = after > before;
      char buf[100];
      std::snprintf(buf, sizeof buf, "silhouette %.4f untrained -> %.4f trained", before, after);
      c.detail = buf;
    } else {
      c.detail = "iris dataset unavailable";
    }
    results.push_back(c);
  }

  // --- criterion 11: byte-identical determinism -------------------------------
  {
    Criterion c{11, "identical config and seed produce byte-identical CSV reports"};
    if (const auto* iris = find_ds("iris")) {
      eval::BenchmarkConfig cfg;
      cfg.epochs_list = {200};
      cfg.k = 5;
      cfg.repeats = 1;
      cfg.master_seed = 99;
      auto a = eval::run_benchmark({*iris}, kAllMeasures, cfg);
      auto b = eval::run_benchmark({*iris}, kAllMeasures, cfg);
      c.pass = a.to_csv() == b.to_csv();
      c.detail = c.pass ? std::to_string(a.to_csv().size()) + " bytes compared equal"
                        : "reports differ";
    } else {
      c.detail = "iris dataset unavailable";
    }
    results.push_back(c);
  }

  // --- summary ----------------------------------------------------------------
  double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() / 60.0;
  std::printf("\n");
  int failures = 0;
  for (const auto& c : results) {
    std::printf("[%s] criterion %2d: %s — %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("\n%d/%zu criteria passed in %.1f minutes\n", (int)results.size() - failures,
              results.size(), minutes);
  return failures == 0 ? 0 : 1;
}
