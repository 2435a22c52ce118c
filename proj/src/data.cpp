#include "simlearn/data.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace simlearn::data {

using nlohmann::json;

Schema Schema::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: invalid JSON: ") + e.what());
  }
  Schema s;
  if (!j.contains("columns") || !j["columns"].is_array())
    throw ConfigError("schema: missing 'columns' array");
  std::string target_name = j.value("target", "");
  for (const auto& jc : j["columns"]) {
    ColumnSpec c;
    c.name = jc.at("name").get<std::string>();
    std::string kind = jc.value("kind", "numeric");
    if (kind == "numeric")
      c.kind = ColumnKind::Numeric;
    else if (kind == "categorical")
      c.kind = ColumnKind::Categorical;
    else if (kind == "target")
      c.kind = ColumnKind::Target;
    else if (kind == "ignore")
      c.kind = ColumnKind::Ignore;
    else
      throw ConfigError("schema: unknown column kind '" + kind + "'");
    c.missing_token = jc.value("missing_token", "?");
    if (jc.contains("categories"))
      c.categories = jc["categories"].get<std::vector<std::string>>();
    if (!target_name.empty() && c.name == target_name) c.kind = ColumnKind::Target;
    s.columns.push_back(std::move(c));
  }
  s.has_header = j.value("has_header", false);
  std::string d = j.value("delimiter", ",");
  if (d == "whitespace")
    s.delimiter = ' ';
  else if (d.size() == 1)
    s.delimiter = d[0];
  else
    throw ConfigError("schema: delimiter must be one character or 'whitespace'");
  int targets = 0, features = 0;
  for (const auto& c : s.columns) {
    if (c.kind == ColumnKind::Target)
      ++targets;
    else if (c.kind != ColumnKind::Ignore)
      ++features;
  }
  if (targets != 1) throw ConfigError("schema: exactly one target column required");
  if (features < 1) throw ConfigError("schema: at least one feature column required");
  return s;
}

Schema Schema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("schema: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

int Schema::target_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].kind == ColumnKind::Target) return static_cast<int>(i);
  throw ConfigError("schema: no target column");
}

std::string sha256_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_bytes(ss.str());
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char ch : line) {
    if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset preprocess(const std::vector<std::vector<std::string>>& rows, const Schema& schema) {
  const std::size_t ncols = schema.columns.size();
  const int target = schema.target_index();
  const std::size_t n = rows.size();
  if (n == 0) throw DataError("dataset has no rows");
  for (std::size_t r = 0; r < n; ++r)
    if (rows[r].size() != ncols)
      throw DataError("row " + std::to_string(r) + ": expected " + std::to_string(ncols) +
                      " fields, got " + std::to_string(rows[r].size()));

  // Parse columns: numerics with imputation stats, categoricals with sorted vocab.
  struct NumCol {
    std::vector<double> vals;  // NaN = missing
  };
  struct CatCol {
    std::vector<std::string> vals;  // missing_token kept as-is until imputation
  };
  std::map<int, NumCol> nums;
  std::map<int, CatCol> cats;

  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& spec = schema.columns[c];
    if (spec.kind == ColumnKind::Target || spec.kind == ColumnKind::Ignore) continue;
    if (spec.kind == ColumnKind::Numeric) {
      NumCol col;
      col.vals.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        std::string v = trim(rows[r][c]);
        if (v == spec.missing_token || v.empty()) {
          col.vals[r] = std::numeric_limits<double>::quiet_NaN();
        } else {
          try {
            std::size_t pos = 0;
            col.vals[r] = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
          } catch (const std::exception&) {
            throw DataError("row " + std::to_string(r) + ", column '" + spec.name +
                            "': cannot parse numeric value '" + v + "'");
          }
        }
      }
      nums.emplace(static_cast<int>(c), std::move(col));
    } else {
      CatCol col;
      col.vals.resize(n);
      for (std::size_t r = 0; r < n; ++r) col.vals[r] = trim(rows[r][c]);
      cats.emplace(static_cast<int>(c), std::move(col));
    }
  }

  // Labels.
  std::vector<std::string> raw_labels(n);
  for (std::size_t r = 0; r < n; ++r) raw_labels[r] = trim(rows[r][target]);
  std::set<std::string> label_set(raw_labels.begin(), raw_labels.end());
  if (label_set.size() < 2) throw DataError("dataset needs at least two classes");
  std::vector<std::string> class_names(label_set.begin(), label_set.end());
  std::map<std::string, int> class_id;
  for (std::size_t i = 0; i < class_names.size(); ++i) class_id[class_names[i]] = (int)i;

  Dataset ds;
  ds.class_names = class_names;
  ds.n_classes = static_cast<int>(class_names.size());
  ds.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) ds.labels[(Eigen::Index)r] = class_id[raw_labels[r]];

  // Impute, then build attribute layout.
  int width = 0;
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& spec = schema.columns[c];
    if (spec.kind == ColumnKind::Target || spec.kind == ColumnKind::Ignore) continue;
    AttributeInfo info;
    info.name = spec.name;
    info.col_start = width;
    if (spec.kind == ColumnKind::Numeric) {
      auto& col = nums[(int)c];
      double sum = 0.0;
      std::size_t cnt = 0;
      for (double v : col.vals)
        if (!std::isnan(v)) {
          sum += v;
          ++cnt;
        }
      if (cnt == 0) throw DataError("column '" + spec.name + "' has no parseable values");
      double mean = sum / cnt;
      for (double& v : col.vals)
        if (std::isnan(v)) v = mean;
      info.min = *std::min_element(col.vals.begin(), col.vals.end());
      info.max = *std::max_element(col.vals.begin(), col.vals.end());
      info.categorical = false;
      info.width = 1;
      width += 1;
    } else {
      auto& col = cats[(int)c];
      // impute mode
      std::map<std::string, int> freq;
      for (const auto& v : col.vals)
        if (v != spec.missing_token && !v.empty()) ++freq[v];
      if (freq.empty()) throw DataError("column '" + spec.name + "' has no values");
      std::string mode = freq.begin()->first;
      for (const auto& [v, f] : freq)
        if (f > freq[mode]) mode = v;
      for (auto& v : col.vals)
        if (v == spec.missing_token || v.empty()) v = mode;
      std::set<std::string> vocab(col.vals.begin(), col.vals.end());
      if (!spec.categories.empty()) {
        std::set<std::string> allowed(spec.categories.begin(), spec.categories.end());
        for (const auto& v : vocab)
          if (!allowed.count(v))
            throw ConfigError("column '" + spec.name + "': unknown category '" + v + "'");
        vocab = allowed;
      }
      info.categories.assign(vocab.begin(), vocab.end());
      info.categorical = true;
      info.width = static_cast<int>(info.categories.size());
      width += info.width;
    }
    ds.attrs.push_back(std::move(info));
  }

  ds.X = MatrixXd::Zero((Eigen::Index)n, width);
  for (const auto& info : ds.attrs) {
    // locate source column by name
    int src = -1;
    for (std::size_t c = 0; c < ncols; ++c)
      if (schema.columns[c].name == info.name) src = (int)c;
    if (info.categorical) {
      const auto& col = cats[src];
      std::map<std::string, int> idx;
      for (std::size_t i = 0; i < info.categories.size(); ++i) idx[info.categories[i]] = (int)i;
      for (std::size_t r = 0; r < n; ++r)
        ds.X((Eigen::Index)r, info.col_start + idx[col.vals[r]]) = 1.0;
    } else {
      const auto& col = nums[src];
      double range = info.max - info.min;
      for (std::size_t r = 0; r < n; ++r)
        ds.X((Eigen::Index)r, info.col_start) =
            range > 0.0 ? (col.vals[r] - info.min) / range : 0.0;
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& csv_path, const Schema& schema) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open " + csv_path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && schema.has_header) {
      first = false;
      continue;
    }
    first = false;
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line, schema.delimiter));
  }
  Dataset ds = preprocess(rows, schema);
  ds.source_hash = sha256_file(csv_path);
  std::string stem = csv_path;
  if (auto p = stem.find_last_of('/'); p != std::string::npos) stem = stem.substr(p + 1);
  if (auto p = stem.find_last_of('.'); p != std::string::npos) stem = stem.substr(0, p);
  ds.id = stem;
  return ds;
}

std::vector<Split> stratified_kfold(const VectorXi& labels, int k, int repeats,
                                    std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
  const int n = static_cast<int>(labels.size());
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, ids] : by_class)
    if (static_cast<int>(ids.size()) < k)
      throw DataError("stratified_kfold: class " + std::to_string(cls) + " has " +
                      std::to_string(ids.size()) + " members, fewer than k=" + std::to_string(k));

  std::mt19937_64 rng(seed);
  std::vector<Split> splits;
  splits.reserve(static_cast<std::size_t>(k) * repeats);
  for (int rep = 0; rep < repeats; ++rep) {
    // fold id per row: deal each class's shuffled members round-robin
    std::vector<int> fold_of(n, -1);
    for (auto& [cls, ids] : by_class) {
      std::vector<int> sh = ids;
      std::shuffle(sh.begin(), sh.end(), rng);
      for (std::size_t i = 0; i < sh.size(); ++i) fold_of[sh[i]] = static_cast<int>(i % k);
    }
    for (int f = 0; f < k; ++f) {
      Split s;
      for (int i = 0; i < n; ++i)
        (fold_of[i] == f ? s.val : s.train).push_back(i);
      splits.push_back(std::move(s));
    }
  }
  return splits;
}

std::vector<Split> stratified_kfold(const Dataset& ds, int k, int repeats, std::uint64_t seed) {
  return stratified_kfold(ds.labels, k, repeats, seed);
}

PairMode PairMode::parse(const std::string& text) {
  PairMode m;
  if (text == "ordered-full") {
    m.kind = PairKind::OrderedFull;
  } else if (text == "unordered-unique") {
    m.kind = PairKind::UnorderedUnique;
  } else if (text.rfind("sampled-", 0) == 0) {
    m.kind = PairKind::Sampled;
    try {
      m.count = std::stoul(text.substr(8));
    } catch (const std::exception&) {
      throw ConfigError("pair mode: cannot parse sample count in '" + text + "'");
    }
  } else {
    throw ConfigError("unknown pair mode '" + text + "'");
  }
  return m;
}

std::string PairMode::to_string() const {
  switch (kind) {
    case PairKind::OrderedFull: return "ordered-full";
    case PairKind::UnorderedUnique: return "unordered-unique";
    case PairKind::Sampled: return "sampled-" + std::to_string(count);
  }
  return "?";
}

std::vector<PairTriplet> build_pairs(const VectorXi& labels, const std::vector<int>& ids,
                                     const PairMode& mode) {
  const std::size_t n = ids.size();
  std::vector<PairTriplet> out;
  auto s_of = [&](int a, int b) { return labels[a] == labels[b] ? 1.0 : 0.0; };

  switch (mode.kind) {
    case PairKind::OrderedFull:
      out.reserve(n * (n - 1));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) out.push_back({ids[i], ids[j], s_of(ids[i], ids[j])});
      break;
    case PairKind::UnorderedUnique:
      out.reserve(n * (n - 1) / 2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          out.push_back({ids[i], ids[j], s_of(ids[i], ids[j])});
      break;
    case PairKind::Sampled: {
      const std::size_t pop = n * (n - 1) / 2;
      if (mode.count > pop)
        throw ConfigError("sampled pair count " + std::to_string(mode.count) +
                          " exceeds population " + std::to_string(pop));
      // index the unordered pairs 0..pop-1 and sample without replacement
      std::vector<std::size_t> picks(pop);
      std::iota(picks.begin(), picks.end(), std::size_t{0});
      std::mt19937_64 rng(mode.seed);
      for (std::size_t i = 0; i < mode.count; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, pop - 1);
        std::swap(picks[i], picks[d(rng)]);
      }
      picks.resize(mode.count);
      std::sort(picks.begin(), picks.end());
      // map flat index -> (i, j), i < j
      std::size_t i = 0, base = 0;
      for (std::size_t flat : picks) {
        while (flat >= base + (n - 1 - i)) {
          base += n - 1 - i;
          ++i;
        }
        std::size_t j = i + 1 + (flat - base);
        out.push_back({ids[i], ids[j], s_of(ids[i], ids[j])});
      }
      break;
    }
  }
  return out;
}

}  // namespace simlearn::data
