#include "based/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "based/errors.hpp"
#include "based/parallel.hpp"
#include "based/rng.hpp"

namespace based {

using ordered_json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (max_features < 1 || max_features > static_cast<int>(kFeatureCount)) {
    throw ConfigError("max_features must lie in [1, " + std::to_string(kFeatureCount) + "]");
  }
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (max_depth && *max_depth < 0) throw ConfigError("max_depth must be >= 0");
}

// --- Tree -------------------------------------------------------------------

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

double RegressionTree::predict(std::span<const double, kFeatureCount> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // SL^2/nL + SR^2/nR, larger is better
  std::size_t left_count = 0;
};

bool better(const Split& candidate, const Split& best) {
  if (best.feature < 0) return true;
  if (candidate.score != best.score) return candidate.score > best.score;
  if (candidate.feature != best.feature) return candidate.feature < best.feature;
  return candidate.threshold < best.threshold;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TrainingRow> rows, const TrainConfig& config, Xoshiro256& rng)
      : rows_(rows), config_(config), rng_(rng) {
    values_.reserve(rows.size());
    for (const auto& r : rows) values_.push_back(r.features.values());
  }

  std::vector<TreeNode> build(std::vector<std::size_t> samples) {
    grow(samples, 0);
    return std::move(nodes_);
  }

 private:
  double x(std::size_t row, int feature) const { return values_[row][feature]; }

  int grow(std::vector<std::size_t>& samples, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    const double first = rows_[samples.front()].target;
    const bool pure = std::all_of(samples.begin(), samples.end(),
                                  [&](std::size_t s) { return rows_[s].target == first; });
    const bool too_small =
        samples.size() < 2 * static_cast<std::size_t>(config_.min_samples_leaf);
    const bool too_deep = config_.max_depth && depth >= *config_.max_depth;
    Split split;
    if (!pure && !too_small && !too_deep) split = find_split(samples);

    if (split.feature < 0) {
      double sum = 0.0;
      for (std::size_t s : samples) sum += rows_[s].target;
      nodes_[id].value = pure ? first : sum / static_cast<double>(samples.size());
      return id;
    }

    std::vector<std::size_t> left, right;
    left.reserve(split.left_count);
    right.reserve(samples.size() - split.left_count);
    for (std::size_t s : samples) {
      (x(s, split.feature) <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  Split best_split_on(const std::vector<std::size_t>& samples, int feature) {
    order_.assign(samples.begin(), samples.end());
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const double xa = x(a, feature), xb = x(b, feature);
      return xa != xb ? xa < xb : a < b;
    });
    double total = 0.0;
    for (std::size_t s : order_) total += rows_[s].target;

    const std::size_t n = order_.size();
    const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);
    Split best;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += rows_[order_[i]].target;
      const double lo = x(order_[i], feature);
      const double hi = x(order_[i + 1], feature);
      if (lo == hi) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / static_cast<double>(nl) +
                           right_sum * right_sum / static_cast<double>(nr);
      if (best.feature < 0 || score > best.score) {
        double threshold = lo + (hi - lo) / 2.0;
        if (threshold >= hi) threshold = lo;
        best = {feature, threshold, score, nl};
      }
    }
    return best;
  }

  Split find_split(const std::vector<std::size_t>& samples) {
    std::array<int, kFeatureCount> features;
    std::iota(features.begin(), features.end(), 0);
    const auto wanted = static_cast<std::size_t>(config_.max_features);
    if (wanted < kFeatureCount) {
      for (std::size_t i = kFeatureCount - 1; i > 0; --i) {
        std::swap(features[i], features[rng_.below(i + 1)]);
      }
    }
    // Like the usual CART forest, keep drawing features past max_features
    // until at least one of them admits a split.
    Split best;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      if (k >= wanted && best.feature >= 0) break;
      const Split candidate = best_split_on(samples, features[k]);
      if (candidate.feature >= 0 && better(candidate, best)) best = candidate;
    }
    return best;
  }

  std::span<const TrainingRow> rows_;
  const TrainConfig& config_;
  Xoshiro256& rng_;
  std::vector<std::array<double, kFeatureCount>> values_;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> order_;
};

void check_rows(std::span<const TrainingRow> rows) {
  if (rows.size() < 2) throw DataError("need at least 2 training rows, got " + std::to_string(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = rows[i].features.values();
    const bool finite = std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); }) &&
                        std::isfinite(rows[i].target);
    if (!finite) throw DataError("training row " + std::to_string(i) + " has a non-finite value");
  }
}

std::vector<std::size_t> draw_sample(std::size_t n, bool bootstrap, Xoshiro256& rng) {
  std::vector<std::size_t> idx(n);
  if (bootstrap) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
  } else {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }
  return idx;
}

RegressionTree train_tree(std::span<const TrainingRow> rows, const TrainConfig& config,
                          std::size_t tree_index, std::vector<std::size_t>* sample_out) {
  Xoshiro256 rng(tree_seed(config.seed, tree_index));
  auto sample = draw_sample(rows.size(), config.bootstrap, rng);
  if (sample_out) *sample_out = sample;
  TreeBuilder builder(rows, config, rng);
  return RegressionTree(builder.build(std::move(sample)));
}

}  // namespace

RegressionTree grow_tree(std::span<const TrainingRow> rows, std::span<const std::size_t> indices,
                         const TrainConfig& config, std::uint64_t rng_seed) {
  config.validate();
  check_rows(rows);
  if (indices.empty()) throw DataError("cannot grow a tree on an empty sample");
  Xoshiro256 rng(rng_seed);
  TreeBuilder builder(rows, config, rng);
  return RegressionTree(builder.build({indices.begin(), indices.end()}));
}

// --- Forest -----------------------------------------------------------------

RandomForestModel::RandomForestModel(TrainConfig config, std::vector<RegressionTree> trees)
    : config_(std::move(config)), trees_(std::move(trees)) {}

double RandomForestModel::predict(const FeatureVector& fv) const {
  const auto v = fv.values();
  return predict(std::span<const double, kFeatureCount>(v));
}

double RandomForestModel::predict(std::span<const double, kFeatureCount> x) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

RandomForestModel fit(std::span<const TrainingRow> rows, const TrainConfig& config, unsigned jobs) {
  config.validate();
  check_rows(rows);
  std::vector<RegressionTree> trees(static_cast<std::size_t>(config.n_estimators));
  parallel_for(trees.size(), jobs,
               [&](std::size_t t) { trees[t] = train_tree(rows, config, t, nullptr); });
  return RandomForestModel(config, std::move(trees));
}

double oob_r2(std::span<const TrainingRow> rows, const TrainConfig& config, unsigned jobs) {
  config.validate();
  if (!config.bootstrap) throw ConfigError("out-of-bag R^2 requires bootstrap sampling");
  check_rows(rows);
  if (rows.size() < 10) throw DataError("out-of-bag R^2 needs at least 10 rows");

  const std::size_t n = rows.size();
  const auto n_trees = static_cast<std::size_t>(config.n_estimators);
  std::vector<RegressionTree> trees(n_trees);
  std::vector<std::vector<std::size_t>> samples(n_trees);
  parallel_for(n_trees, jobs,
               [&](std::size_t t) { trees[t] = train_tree(rows, config, t, &samples[t]); });

  std::vector<double> sum(n, 0.0);
  std::vector<int> votes(n, 0);
  std::vector<char> in_bag(n);
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (std::size_t s : samples[t]) in_bag[s] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      const auto v = rows[i].features.values();
      sum[i] += trees[t].predict(std::span<const double, kFeatureCount>(v));
      ++votes[i];
    }
  }

  double mean = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (votes[i] == 0) continue;
    mean += rows[i].target;
    ++used;
  }
  if (used == 0) return 0.0;
  mean /= static_cast<double>(used);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (votes[i] == 0) continue;
    const double pred = sum[i] / votes[i];
    ss_res += (rows[i].target - pred) * (rows[i].target - pred);
    ss_tot += (rows[i].target - mean) * (rows[i].target - mean);
  }
  if (ss_tot == 0.0) return 0.0;
  return 1.0 - ss_res / ss_tot;
}

// --- Serialisation ----------------------------------------------------------
//
// Doubles are written in nlohmann::json's shortest round-trip decimal form
// and parsed back with strtod, so leaf values and thresholds survive exactly.

std::string RandomForestModel::to_json() const {
  ordered_json cfg;
  cfg["n_estimators"] = config_.n_estimators;
  cfg["max_features"] = config_.max_features;
  cfg["min_samples_leaf"] = config_.min_samples_leaf;
  cfg["max_depth"] = config_.max_depth ? ordered_json(*config_.max_depth) : ordered_json(nullptr);
  cfg["bootstrap"] = config_.bootstrap;
  cfg["seed"] = config_.seed;

  ordered_json trees = ordered_json::array();
  for (const auto& tree : trees_) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : tree.nodes()) {
      ordered_json node;
      if (n.is_leaf()) {
        node["v"] = n.value;
      } else {
        node["f"] = n.feature;
        node["t"] = n.threshold;
        node["l"] = n.left;
        node["r"] = n.right;
      }
      nodes.push_back(std::move(node));
    }
    trees.push_back(std::move(nodes));
  }

  ordered_json doc;
  doc["format"] = "based-forest";
  doc["version"] = 1;
  doc["config"] = std::move(cfg);
  doc["feature_names"] = ordered_json::array();
  for (auto name : kFeatureNames) doc["feature_names"].push_back(std::string(name));
  doc["trees"] = std::move(trees);
  return doc.dump();
}

namespace {

const ordered_json& member(const ordered_json& obj, const std::string& key, const std::string& at) {
  if (!obj.is_object()) throw SchemaError(at, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(at + "/" + key, "missing");
  return *it;
}

long long integer(const ordered_json& v, const std::string& at) {
  if (!v.is_number_integer()) throw SchemaError(at, "expected an integer");
  return v.get<long long>();
}

double number(const ordered_json& v, const std::string& at) {
  if (!v.is_number()) throw SchemaError(at, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(at, "expected a finite number");
  return d;
}

TrainConfig parse_config(const ordered_json& j) {
  const std::string at = "/config";
  TrainConfig c;
  c.n_estimators = static_cast<int>(integer(member(j, "n_estimators", at), at + "/n_estimators"));
  c.max_features = static_cast<int>(integer(member(j, "max_features", at), at + "/max_features"));
  c.min_samples_leaf =
      static_cast<int>(integer(member(j, "min_samples_leaf", at), at + "/min_samples_leaf"));
  const auto& depth = member(j, "max_depth", at);
  if (!depth.is_null()) c.max_depth = static_cast<int>(integer(depth, at + "/max_depth"));
  const auto& bootstrap = member(j, "bootstrap", at);
  if (!bootstrap.is_boolean()) throw SchemaError(at + "/bootstrap", "expected a boolean");
  c.bootstrap = bootstrap.get<bool>();
  const auto& seed = member(j, "seed", at);
  if (!seed.is_number_unsigned()) throw SchemaError(at + "/seed", "expected an unsigned integer");
  c.seed = seed.get<std::uint64_t>();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(at, e.what());
  }
  return c;
}

RegressionTree parse_tree(const ordered_json& j, const std::string& at) {
  if (!j.is_array() || j.empty()) throw SchemaError(at, "expected a non-empty node array");
  const auto size = static_cast<long long>(j.size());
  std::vector<TreeNode> nodes;
  nodes.reserve(j.size());
  for (long long i = 0; i < size; ++i) {
    const std::string nat = at + "/" + std::to_string(i);
    const auto& n = j[static_cast<std::size_t>(i)];
    if (!n.is_object()) throw SchemaError(nat, "expected an object");
    TreeNode node;
    if (n.contains("v")) {
      if (n.size() != 1) throw SchemaError(nat, "leaf nodes carry only 'v'");
      node.value = number(n["v"], nat + "/v");
    } else {
      const long long f = integer(member(n, "f", nat), nat + "/f");
      if (f < 0 || f >= static_cast<long long>(kFeatureCount)) {
        throw SchemaError(nat + "/f", "feature index out of range");
      }
      node.feature = static_cast<int>(f);
      node.threshold = number(member(n, "t", nat), nat + "/t");
      const long long l = integer(member(n, "l", nat), nat + "/l");
      const long long r = integer(member(n, "r", nat), nat + "/r");
      if (l <= i || l >= size) throw SchemaError(nat + "/l", "child index out of range");
      if (r <= i || r >= size) throw SchemaError(nat + "/r", "child index out of range");
      node.left = static_cast<int>(l);
      node.right = static_cast<int>(r);
    }
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes));
}

}  // namespace

RandomForestModel RandomForestModel::from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  const auto& format = member(doc, "format", "");
  if (format != "based-forest") throw SchemaError("/format", "expected \"based-forest\"");
  if (integer(member(doc, "version", ""), "/version") != 1) {
    throw SchemaError("/version", "unsupported version");
  }
  TrainConfig config = parse_config(member(doc, "config", ""));

  const auto& names = member(doc, "feature_names", "");
  if (!names.is_array() || names.size() != kFeatureCount) {
    throw SchemaError("/feature_names", "expected " + std::to_string(kFeatureCount) + " names");
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!names[i].is_string() || names[i].get<std::string>() != kFeatureNames[i]) {
      throw SchemaError("/feature_names/" + std::to_string(i),
                        "expected \"" + std::string(kFeatureNames[i]) + "\"");
    }
  }

  const auto& trees_json = member(doc, "trees", "");
  if (!trees_json.is_array()) throw SchemaError("/trees", "expected an array");
  if (trees_json.size() != static_cast<std::size_t>(config.n_estimators)) {
    throw SchemaError("/trees", "holds " + std::to_string(trees_json.size()) +
                                    " trees but n_estimators is " +
                                    std::to_string(config.n_estimators));
  }
  std::vector<RegressionTree> trees;
  trees.reserve(trees_json.size());
  for (std::size_t t = 0; t < trees_json.size(); ++t) {
    trees.push_back(parse_tree(trees_json[t], "/trees/" + std::to_string(t)));
  }
  return RandomForestModel(config, std::move(trees));
}

void save(const RandomForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << model.to_json() << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

RandomForestModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return RandomForestModel::from_json(buf.str());
}

}  // namespace based
