#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "based/correlation.hpp"
#include "based/forest.hpp"

namespace based {

/// Assignment of rows to folds. Rows sharing a group key share a fold.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
};

/// Shuffles the distinct group keys (sorted, then Fisher-Yates with
/// Xoshiro256(seed)) and deals them round-robin into k folds. An empty
/// `group_keys` puts every row in its own group.
FoldPlan make_fold_plan(std::size_t n_rows, int k, std::span<const std::string> group_keys,
                        std::uint64_t seed);

struct FoldScores {
  CorrelationTriple scores;
  std::size_t n = 0;
};

struct CrossValResult {
  FoldPlan plan;
  std::vector<FoldScores> folds;
  CorrelationTriple mean;  // unweighted over folds
  std::size_t n = 0;
};

/// Trains on k-1 folds, predicts the held-out one and correlates predictions
/// with targets, for every fold.
CrossValResult kfold_cv(std::span<const TrainingRow> rows, int k, const TrainConfig& config,
                        std::span<const std::string> group_keys, std::uint64_t seed,
                        unsigned jobs = 0);

/// `{"plcc","srcc","krcc","n","folds":[...]}`.
std::string to_json(const CrossValResult& result);

}  // namespace based
