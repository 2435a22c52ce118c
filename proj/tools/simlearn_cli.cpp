// simlearn command line tool: dataset fetching, training, evaluation,
// benchmarking, sweeps, and embedding exports.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime
// failure. A JSON config file (--config) supplies defaults; flags override.

#include <curl/curl.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "simlearn/data.hpp"
#include "simlearn/eval.hpp"
#include "simlearn/measures.hpp"
#include "simlearn/serialize.hpp"

using namespace simlearn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// configuration

struct GlobalOpts {
  std::string data_dir;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
};

json load_config_json(int argc, char** argv) {
  // pre-scan for --config so file values can serve as flag defaults
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw ConfigError(std::string("cannot open config file ") + argv[i + 1]);
      try {
        return json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
      }
    }
  }
  return json::object();
}

std::string default_data_dir() {
  if (const char* env = std::getenv("SIMLEARN_DATA_DIR")) return env;
  return "datasets";
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------------
// dataset access

struct ManifestEntry {
  std::string id, file, url, sha256, note;
  bool bundled = false;
};

std::vector<ManifestEntry> load_manifest(const std::string& data_dir) {
  std::ifstream in(data_dir + "/manifest.json");
  if (!in) throw DataError("no manifest.json in " + data_dir);
  json j = json::parse(in);
  std::vector<ManifestEntry> out;
  for (const auto& e : j.at("datasets")) {
    ManifestEntry m;
    m.id = e.at("id");
    m.file = e.at("file");
    m.url = e.value("url", "");
    if (e.contains("sha256") && !e["sha256"].is_null()) m.sha256 = e["sha256"];
    m.note = e.value("note", "");
    m.bundled = e.value("bundled", false);
    out.push_back(std::move(m));
  }
  return out;
}

data::Dataset load_by_id(const GlobalOpts& g, const std::string& id) {
  auto manifest = load_manifest(g.data_dir);
  for (const auto& m : manifest) {
    if (m.id != id) continue;
    auto schema = data::Schema::from_json_file(g.data_dir + "/schemas/" + id + ".json");
    auto ds = data::load_dataset(g.data_dir + "/" + m.file, schema);
    ds.id = id;
    return ds;
  }
  throw ConfigError("unknown dataset id '" + id + "' (not in manifest.json)");
}

std::vector<std::string> resolve_dataset_ids(const GlobalOpts& g, const std::string& selector) {
  if (selector != "all") return split_csv(selector);
  std::vector<std::string> out;
  for (const auto& m : load_manifest(g.data_dir))
    if (fs::exists(g.data_dir + "/" + m.file)) out.push_back(m.id);
  if (out.empty()) throw DataError("no dataset files present in " + g.data_dir);
  return out;
}

std::vector<measures::MeasureType> resolve_measures(const std::string& selector) {
  std::vector<measures::MeasureType> out;
  std::vector<std::string> names =
      selector == "all" ? std::vector<std::string>{"esnn", "chopra", "gabel", "t31", "t11", "t21"}
                        : split_csv(selector);
  for (const auto& n : names) out.push_back(measures::measure_type_from_string(n));
  if (out.empty()) throw ConfigError("no measures selected");
  return out;
}

// ---------------------------------------------------------------------------
// fetch

size_t curl_sink(char* ptr, size_t size, size_t nmemb, void* userdata) {
  auto* out = static_cast<std::ofstream*>(userdata);
  out->write(ptr, (std::streamsize)(size * nmemb));
  return size * nmemb;
}

void download(const std::string& url, const std::string& dest) {
  CURL* curl = curl_easy_init();
  if (!curl) throw std::runtime_error("curl initialization failed");
  std::string tmp = dest + ".part";
  std::ofstream out(tmp, std::ios::binary);
  if (!out) throw DataError("cannot write " + tmp);
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, curl_sink);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &out);
  curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
  CURLcode rc = curl_easy_perform(curl);
  curl_easy_cleanup(curl);
  out.close();
  if (rc != CURLE_OK) {
    fs::remove(tmp);
    throw DataError("download of " + url + " failed: " + curl_easy_strerror(rc));
  }
  fs::rename(tmp, dest);
}

int cmd_fetch(const GlobalOpts& g, const std::string& selector, bool offline) {
  auto manifest = load_manifest(g.data_dir);
  std::vector<std::string> wanted =
      selector == "all" ? std::vector<std::string>{} : split_csv(selector);
  auto selected = [&](const std::string& id) {
    return wanted.empty() || std::find(wanted.begin(), wanted.end(), id) != wanted.end();
  };

  int failures = 0;
  for (const auto& m : manifest) {
    if (!selected(m.id)) continue;
    std::string path = g.data_dir + "/" + m.file;
    if (!fs::exists(path)) {
      if (offline) {
        std::fprintf(stderr, "%-6s missing (offline mode; place %s manually)\n", m.id.c_str(),
                     m.file.c_str());
        ++failures;
        continue;
      }
      if (m.url.empty()) {
        std::fprintf(stderr, "%-6s has no source URL; place %s manually\n", m.id.c_str(),
                     m.file.c_str());
        ++failures;
        continue;
      }
      std::printf("%-6s downloading %s\n", m.id.c_str(), m.url.c_str());
      try {
        download(m.url, path);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "%-6s %s\n", m.id.c_str(), e.what());
        ++failures;
        continue;
      }
    }
    std::string hash = data::sha256_file(path);
    if (m.sha256.empty()) {
      // no pinned hash: report what we saw so it can be recorded, never guess
      std::printf("%-6s present, sha256 %s (unpinned; record it in manifest.json)\n", m.id.c_str(),
                  hash.c_str());
    } else if (hash == m.sha256) {
      std::printf("%-6s present, hash verified\n", m.id.c_str());
    } else {
      std::fprintf(stderr, "%-6s HASH MISMATCH: expected %s, got %s — refusing to use %s\n",
                   m.id.c_str(), m.sha256.c_str(), hash.c_str(), path.c_str());
      ++failures;
    }
  }
  if (failures) throw DataError(std::to_string(failures) + " dataset(s) unavailable or rejected");
  return 0;
}

// ---------------------------------------------------------------------------
// train / eval

struct TrainOpts {
  std::string dataset, measure = "esnn", model_out;
  int epochs = 200, k = 5, fold = 0, hidden = 13;
  double alpha = 0.15;
  std::string optimizer = "rprop", pair_mode;
};

measures::TrainConfig to_train_config(const TrainOpts& t, const GlobalOpts& g,
                                      measures::MeasureType type) {
  measures::TrainConfig tc;
  tc.epochs = t.epochs;
  tc.optimizer = t.optimizer;
  tc.alpha = t.alpha;
  tc.hidden = t.hidden;
  tc.seed = mix_seed(g.seed, hash_str(t.dataset), hash_str(t.measure), (std::uint64_t)t.fold);
  if (!t.pair_mode.empty())
    tc.pair_mode = data::PairMode::parse(t.pair_mode);
  else
    tc.pair_mode = data::PairMode::parse(
        type == measures::MeasureType::Gabel ? "ordered-full" : "unordered-unique");
  return tc;
}

int cmd_train(const GlobalOpts& g, const TrainOpts& t) {
  auto ds = load_by_id(g, t.dataset);
  auto type = measures::measure_type_from_string(t.measure);
  auto splits = data::stratified_kfold(ds, t.k, 1, mix_seed(g.seed, hash_str(ds.id)));
  if (t.fold < 0 || t.fold >= (int)splits.size()) throw ConfigError("fold out of range");
  const auto& sp = splits[t.fold];

  auto tc = to_train_config(t, g, type);
  auto m = measures::make_measure(type, ds, sp.train, tc);
  if (m->needs_training()) {
    auto hist = m->train(ds, sp.train, tc, nullptr);
    if (!hist.train_loss.empty())
      std::printf("final training loss: %s\n", eval::format_double(hist.train_loss.back()).c_str());
  }
  double loss = eval::retrieval_loss(*m, ds, sp.train, sp.val);
  std::printf("validation retrieval loss (fold %d of %d): %s\n", t.fold, t.k,
              eval::format_double(loss).c_str());

  if (!t.model_out.empty()) {
    json doc = m->to_json();
    doc["run_config"] = {{"dataset", t.dataset}, {"measure", t.measure}, {"epochs", t.epochs},
                         {"alpha", t.alpha},     {"optimizer", t.optimizer},
                         {"k", t.k},             {"fold", t.fold},
                         {"hidden", t.hidden},   {"seed", g.seed},
                         {"pair_mode", tc.pair_mode.to_string()}};
    fs::create_directories(fs::path(t.model_out).parent_path().empty()
                               ? "."
                               : fs::path(t.model_out).parent_path().string());
    std::ofstream out(t.model_out);
    if (!out) throw DataError("cannot write " + t.model_out);
    out << doc.dump(2) << "\n";
    std::printf("model written to %s\n", t.model_out.c_str());
  }
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& model_path, const std::string& dataset_flag) {
  std::ifstream in(model_path);
  if (!in) throw DataError("cannot open model " + model_path);
  json doc = json::parse(in);
  auto m = measures::measure_from_json(doc);

  json rc = doc.value("run_config", json::object());
  std::string dataset = !dataset_flag.empty() ? dataset_flag : rc.value("dataset", "");
  if (dataset.empty()) throw ConfigError("no dataset given and none recorded in the model");
  auto ds = load_by_id(g, dataset);

  int k = rc.value("k", 5), fold = rc.value("fold", 0);
  std::uint64_t seed = rc.value("seed", g.seed);
  auto splits = data::stratified_kfold(ds, k, 1, mix_seed(seed, hash_str(ds.id)));
  if (fold < 0 || fold >= (int)splits.size()) throw ConfigError("fold out of range");
  double loss = eval::retrieval_loss(*m, ds, splits[fold].train, splits[fold].val);
  std::printf("validation retrieval loss (fold %d of %d): %s\n", fold, k,
              eval::format_double(loss).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark / sweeps / export

json run_config_json(const GlobalOpts& g, const eval::BenchmarkConfig& cfg,
                     const std::string& datasets, const std::string& ms) {
  return {{"datasets", datasets},
          {"measures", ms},
          {"epochs", cfg.epochs_list},
          {"k", cfg.k},
          {"repeats", cfg.repeats},
          {"seed", cfg.master_seed},
          {"alpha", cfg.train.alpha},
          {"optimizer", cfg.train.optimizer},
          {"hidden", cfg.train.hidden},
          {"jobs", cfg.jobs},
          {"data_dir", g.data_dir}};
}

void write_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path().empty()
                             ? "."
                             : fs::path(path).parent_path().string());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << content;
}

int cmd_benchmark(const GlobalOpts& g, const std::string& datasets_sel,
                  const std::string& measures_sel, const std::string& epochs_sel, int k,
                  int repeats, double alpha, const std::string& optimizer,
                  const std::string& pair_mode) {
  eval::BenchmarkConfig cfg;
  cfg.epochs_list.clear();
  for (const auto& e : split_csv(epochs_sel)) cfg.epochs_list.push_back(std::stoi(e));
  if (cfg.epochs_list.empty()) throw ConfigError("empty epochs list");
  cfg.k = k;
  cfg.repeats = repeats;
  cfg.master_seed = g.seed;
  cfg.train.alpha = alpha;
  cfg.train.optimizer = optimizer;
  cfg.jobs = g.jobs > 0 ? g.jobs : (int)std::thread::hardware_concurrency();
  if (!pair_mode.empty()) {
    cfg.pair_mode_overridden = true;
    cfg.pair_mode_override = data::PairMode::parse(pair_mode);
  }

  std::vector<data::Dataset> ds;
  for (const auto& id : resolve_dataset_ids(g, datasets_sel)) ds.push_back(load_by_id(g, id));
  auto types = resolve_measures(measures_sel);

  auto report = eval::run_benchmark(ds, types, cfg);
  report.config = run_config_json(g, cfg, datasets_sel, measures_sel);

  std::vector<std::string> ds_names, m_names;
  for (const auto& d : ds) ds_names.push_back(d.id);
  for (auto t : types) m_names.push_back(measures::to_string(t));
  for (int epochs : cfg.epochs_list)
    std::printf("%s\n", report.render_table(epochs, ds_names, m_names).c_str());

  write_file(g.out_dir + "/benchmark.csv", report.to_csv());
  write_file(g.out_dir + "/benchmark.json", report.to_json().dump(2) + "\n");
  std::printf("wrote %s/benchmark.csv and benchmark.json\n", g.out_dir.c_str());

  int failed = 0;
  for (const auto& c : report.cells)
    if (!c.ok()) {
      std::fprintf(stderr, "cell %s/%s/%d/%d failed: %s\n", c.dataset.c_str(), c.measure.c_str(),
                   c.epochs, c.split, c.error.c_str());
      ++failed;
    }
  if (failed) throw std::runtime_error(std::to_string(failed) + " benchmark cell(s) failed");
  return 0;
}

int cmd_sweep_alpha(const GlobalOpts& g, const std::string& dataset, int grid, int epochs, int k,
                    int repeats) {
  if (grid < 2) throw ConfigError("--grid must be at least 2");
  eval::BenchmarkConfig cfg;
  cfg.k = k;
  cfg.repeats = repeats;
  cfg.master_seed = g.seed;
  cfg.train.epochs = epochs;
  cfg.jobs = g.jobs > 0 ? g.jobs : (int)std::thread::hardware_concurrency();

  auto ds = load_by_id(g, dataset);
  std::vector<double> alphas;
  for (int i = 0; i < grid; ++i) alphas.push_back((double)i / (grid - 1));
  auto pts = eval::alpha_sweep(ds, alphas, cfg);

  std::string csv = "alpha,mean_loss,stddev\n";
  double best_alpha = pts[0].alpha, best = pts[0].mean_loss;
  for (const auto& p : pts) {
    std::printf("alpha %.3f  mean loss %.4f  (sd %.4f)\n", p.alpha, p.mean_loss, p.stddev);
    csv += eval::format_double(p.alpha) + "," + eval::format_double(p.mean_loss) + "," +
           eval::format_double(p.stddev) + "\n";
    if (p.mean_loss < best) {
      best = p.mean_loss;
      best_alpha = p.alpha;
    }
  }
  std::printf("minimum at alpha=%.3f\n", best_alpha);
  write_file(g.out_dir + "/alpha_sweep_" + dataset + ".csv", csv);
  return 0;
}

int cmd_compare_optimizers(const GlobalOpts& g, const std::string& dataset,
                           const std::string& optimizers, int epochs, int k, int repeats,
                           int eval_every) {
  eval::BenchmarkConfig cfg;
  cfg.k = k;
  cfg.repeats = repeats;
  cfg.master_seed = g.seed;
  cfg.train.epochs = epochs;

  auto ds = load_by_id(g, dataset);
  auto curves = eval::compare_optimizers(ds, split_csv(optimizers), cfg, eval_every);

  std::string csv = "optimizer,epoch,mean_train_loss,mean_val_loss\n";
  for (const auto& c : curves) {
    double mean_final = 0;
    for (double v : c.final_val) mean_final += v;
    mean_final /= c.final_val.size();
    std::printf("%-8s final validation loss %.4f over %zu splits\n", c.optimizer.c_str(),
                mean_final, c.final_val.size());
    for (std::size_t i = 0; i < c.epochs.size(); ++i)
      csv += c.optimizer + "," + std::to_string(c.epochs[i]) + "," +
             eval::format_double(c.mean_train[i]) + "," + eval::format_double(c.mean_val[i]) + "\n";
  }
  write_file(g.out_dir + "/optimizers_" + dataset + ".csv", csv);
  return 0;
}

int cmd_export_embeddings(const GlobalOpts& g, const std::string& model_path,
                          const std::string& dataset) {
  std::ifstream in(model_path);
  if (!in) throw DataError("cannot open model " + model_path);
  auto m = measures::measure_from_json(json::parse(in));
  if (!m->embedding_net()) throw ConfigError("measure has no embedding network to export");

  auto ds = load_by_id(g, dataset);
  std::vector<int> ids(ds.n());
  for (int i = 0; i < (int)ids.size(); ++i) ids[i] = i;
  auto exp = eval::export_embeddings(*m, ds, ids);

  std::string csv = "row,label,pca_x,pca_y";
  for (int c = 0; c < exp.embeddings.cols(); ++c) csv += ",e" + std::to_string(c);
  csv += "\n";
  for (int r = 0; r < exp.embeddings.rows(); ++r) {
    csv += std::to_string(ids[r]) + "," + std::to_string(exp.labels[r]) + "," +
           eval::format_double(exp.coords(r, 0)) + "," + eval::format_double(exp.coords(r, 1));
    for (int c = 0; c < exp.embeddings.cols(); ++c)
      csv += "," + eval::format_double(exp.embeddings(r, c));
    csv += "\n";
  }
  write_file(g.out_dir + "/embeddings_" + dataset + ".csv", csv);
  std::printf("silhouette %.4f; wrote %s/embeddings_%s.csv\n", exp.silhouette, g.out_dir.c_str(),
              dataset.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    json cfgj = load_config_json(argc, argv);
    auto dget = [&](const char* key, auto fallback) { return cfgj.value(key, fallback); };

    CLI::App app{"similarity measure learning toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override its values)");

    GlobalOpts g;
    g.data_dir = dget("data_dir", default_data_dir());
    g.out_dir = dget("out_dir", std::string("out"));
    g.seed = dget("seed", std::uint64_t{0});
    g.jobs = dget("jobs", 0);
    app.add_option("--data-dir", g.data_dir, "dataset directory (env SIMLEARN_DATA_DIR)");
    app.add_option("--out", g.out_dir, "output directory for artifacts");
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--jobs", g.jobs, "worker threads (0 = all cores)");

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download datasets and verify hashes")->fallthrough();
    std::string fetch_sel = dget("datasets", std::string("all"));
    bool offline = dget("offline", false);
    fetch->add_option("--datasets", fetch_sel, "comma list or 'all'");
    fetch->add_flag("--offline", offline, "verify pre-placed files only, never download");

    // train
    auto* train = app.add_subcommand("train", "train one measure on one fold")->fallthrough();
    TrainOpts topts;
    topts.dataset = dget("dataset", std::string());
    topts.measure = dget("measure", std::string("esnn"));
    topts.epochs = dget("epochs", 200);
    topts.alpha = dget("alpha", 0.15);
    topts.optimizer = dget("optimizer", std::string("rprop"));
    topts.k = dget("k", 5);
    topts.hidden = dget("hidden", 13);
    topts.pair_mode = dget("pair_mode", std::string());
    train->add_option("--dataset", topts.dataset, "dataset id")->required();
    train->add_option("--measure", topts.measure, "t11|t21|gabel|chopra|t31|esnn");
    train->add_option("--epochs", topts.epochs, "training epochs");
    train->add_option("--alpha", topts.alpha, "loss weighting for esnn");
    train->add_option("--optimizer", topts.optimizer, "rprop|adam|rmsprop");
    train->add_option("--pair-mode", topts.pair_mode,
                      "ordered-full|unordered-unique|sampled-N (default per measure)");
    train->add_option("--hidden", topts.hidden, "hidden layer width");
    train->add_option("--k", topts.k, "folds");
    train->add_option("--fold", topts.fold, "fold index used for validation");
    train->add_option("--model-out", topts.model_out, "write the trained model JSON here");

    // eval
    auto* evalc = app.add_subcommand("eval", "evaluate a saved model")->fallthrough();
    std::string model_path, eval_dataset;
    evalc->add_option("--model", model_path, "model JSON")->required();
    evalc->add_option("--dataset", eval_dataset, "dataset id (default: recorded in the model)");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "cross-validated loss grid")->fallthrough();
    std::string b_datasets = dget("datasets", std::string("all"));
    std::string b_measures = dget("measures", std::string("all"));
    std::string b_epochs = dget("epochs_list", std::string("200,2000"));
    int b_k = dget("k", 5), b_repeats = dget("repeats", 5);
    double b_alpha = dget("alpha", 0.15);
    std::string b_opt = dget("optimizer", std::string("rprop"));
    std::string b_pair = dget("pair_mode", std::string());
    bench->add_option("--datasets", b_datasets, "comma list or 'all'");
    bench->add_option("--measures", b_measures, "comma list or 'all'");
    bench->add_option("--epochs", b_epochs, "comma list of epoch budgets");
    bench->add_option("--k", b_k, "folds");
    bench->add_option("--repeats", b_repeats, "k-fold repetitions");
    bench->add_option("--alpha", b_alpha, "esnn loss weighting");
    bench->add_option("--optimizer", b_opt, "optimizer for learned measures");
    bench->add_option("--pair-mode", b_pair, "override the per-measure pair mode");

    // sweep-alpha
    auto* sweep = app.add_subcommand("sweep-alpha", "loss as a function of alpha")->fallthrough();
    std::string s_dataset = dget("dataset", std::string());
    int s_grid = dget("grid", 21), s_epochs = dget("epochs", 200);
    int s_k = dget("k", 5), s_repeats = dget("repeats", 1);
    sweep->add_option("--dataset", s_dataset, "dataset id")->required();
    sweep->add_option("--grid", s_grid, "number of evenly spaced alpha values");
    sweep->add_option("--epochs", s_epochs, "training epochs per run");
    sweep->add_option("--k", s_k, "folds");
    sweep->add_option("--repeats", s_repeats, "k-fold repetitions");

    // compare-optimizers
    auto* comp = app.add_subcommand("compare-optimizers", "optimizer comparison curves")->fallthrough();
    std::string c_dataset = dget("dataset", std::string());
    std::string c_opts = dget("optimizers", std::string("rprop,adam,rmsprop"));
    int c_epochs = dget("epochs", 200), c_k = dget("k", 5), c_repeats = dget("repeats", 5);
    int c_eval_every = dget("eval_every", 10);
    comp->add_option("--dataset", c_dataset, "dataset id")->required();
    comp->add_option("--optimizers", c_opts, "comma list");
    comp->add_option("--epochs", c_epochs, "training epochs");
    comp->add_option("--k", c_k, "folds");
    comp->add_option("--repeats", c_repeats, "k-fold repetitions");
    comp->add_option("--eval-every", c_eval_every, "validation hook interval in epochs");

    // export-embeddings
    auto* expc = app.add_subcommand("export-embeddings", "embedding vectors + 2-D projection")->fallthrough();
    std::string e_model, e_dataset;
    expc->add_option("--model", e_model, "trained model JSON")->required();
    expc->add_option("--dataset", e_dataset, "dataset id")->required();

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 1;
    }

    if (*fetch) return cmd_fetch(g, fetch_sel, offline);
    if (*train) return cmd_train(g, topts);
    if (*evalc) return cmd_eval(g, model_path, eval_dataset);
    if (*bench)
      return cmd_benchmark(g, b_datasets, b_measures, b_epochs, b_k, b_repeats, b_alpha, b_opt,
                           b_pair);
    if (*sweep) return cmd_sweep_alpha(g, s_dataset, s_grid, s_epochs, s_k, s_repeats);
    if (*comp)
      return cmd_compare_optimizers(g, c_dataset, c_opts, c_epochs, c_k, c_repeats, c_eval_every);
    if (*expc) return cmd_export_embeddings(g, e_model, e_dataset);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
