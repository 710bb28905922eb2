#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "based/features.hpp"

namespace based {

struct TrainConfig {
  int n_estimators = 220;
  int max_features = static_cast<int>(kFeatureCount);  // features tried per split
  int min_samples_leaf = 1;
  std::optional<int> max_depth;  // unlimited when empty
  bool bootstrap = true;
  std::uint64_t seed = 42;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainingRow {
  FeatureVector features;
  double target = 0.0;
};

/// One node of a flattened regression tree. Internal nodes send a sample left
/// when sample[feature] <= threshold; leaves carry `value`.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// CART regression tree stored as a flat node array, root at index 0.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double predict(std::span<const double, kFeatureCount> x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

/// Bagged ensemble of regression trees; predictions are the mean of the trees.
class RandomForestModel {
 public:
  RandomForestModel() = default;
  RandomForestModel(TrainConfig config, std::vector<RegressionTree> trees);

  double predict(const FeatureVector& fv) const;
  double predict(std::span<const double, kFeatureCount> x) const;

  const TrainConfig& config() const noexcept { return config_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

  /// Model file contents; identical models serialise to identical bytes.
  std::string to_json() const;
  static RandomForestModel from_json(const std::string& text);

 private:
  TrainConfig config_;
  std::vector<RegressionTree> trees_;
};

/// The tree index -> generator seed mapping used for bootstrap and feature sampling.
constexpr std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree_index) noexcept {
  return seed ^ static_cast<std::uint64_t>(tree_index);
}

/// Grows a single tree on rows[indices] (indices may repeat).
RegressionTree grow_tree(std::span<const TrainingRow> rows, std::span<const std::size_t> indices,
                         const TrainConfig& config, std::uint64_t rng_seed);

/// Trains a forest. Results do not depend on `jobs` (0 = all cores).
RandomForestModel fit(std::span<const TrainingRow> rows, const TrainConfig& config,
                      unsigned jobs = 0);

/// R^2 of out-of-bag predictions. Rows that are in every bootstrap sample are
/// skipped; a zero-variance target gives 0.
double oob_r2(std::span<const TrainingRow> rows, const TrainConfig& config, unsigned jobs = 0);

void save(const RandomForestModel& model, const std::filesystem::path& path);
RandomForestModel load(const std::filesystem::path& path);

}  // namespace based
