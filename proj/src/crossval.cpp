#include "based/crossval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <json.hpp>

#include "based/errors.hpp"
#include "based/rng.hpp"

namespace based {

FoldPlan make_fold_plan(std::size_t n_rows, int k, std::span<const std::string> group_keys,
                        std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2, got " + std::to_string(k));
  if (!group_keys.empty() && group_keys.size() != n_rows) {
    throw LengthError("group keys do not match the number of rows");
  }

  // Group id per row; ids follow the sorted order of the keys.
  std::vector<std::size_t> group(n_rows);
  std::size_t n_groups = n_rows;
  if (group_keys.empty()) {
    std::iota(group.begin(), group.end(), std::size_t{0});
  } else {
    std::map<std::string, std::size_t> ids;
    for (const auto& key : group_keys) ids.emplace(key, 0);
    std::size_t next = 0;
    for (auto& [key, id] : ids) id = next++;
    for (std::size_t i = 0; i < n_rows; ++i) group[i] = ids[group_keys[i]];
    n_groups = ids.size();
  }
  if (n_groups < static_cast<std::size_t>(k)) {
    throw DataError(std::to_string(n_groups) + " groups cannot fill " + std::to_string(k) + " folds");
  }

  std::vector<std::size_t> shuffled(n_groups);
  std::iota(shuffled.begin(), shuffled.end(), std::size_t{0});
  Xoshiro256 rng(seed);
  for (std::size_t i = n_groups - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  std::vector<int> fold_of_group(n_groups);
  for (std::size_t pos = 0; pos < n_groups; ++pos) {
    fold_of_group[shuffled[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }

  FoldPlan plan{k, std::vector<int>(n_rows)};
  for (std::size_t i = 0; i < n_rows; ++i) plan.assignments[i] = fold_of_group[group[i]];
  return plan;
}

CrossValResult kfold_cv(std::span<const TrainingRow> rows, int k, const TrainConfig& config,
                        std::span<const std::string> group_keys, std::uint64_t seed,
                        unsigned jobs) {
  config.validate();
  CrossValResult result;
  result.plan = make_fold_plan(rows.size(), k, group_keys, seed);
  result.n = rows.size();

  for (int fold = 0; fold < k; ++fold) {
    std::vector<TrainingRow> train;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (result.plan.assignments[i] == fold) {
        held_out.push_back(i);
      } else {
        train.push_back(rows[i]);
      }
    }
    const RandomForestModel model = fit(train, config, jobs);
    std::vector<double> predicted, target;
    for (std::size_t i : held_out) {
      predicted.push_back(model.predict(rows[i].features));
      target.push_back(rows[i].target);
    }
    try {
      result.folds.push_back({correlations(predicted, target), held_out.size()});
    } catch (const Error& e) {
      throw DegenerateError("fold " + std::to_string(fold) + ": " + e.what());
    }
  }

  for (const auto& f : result.folds) {
    result.mean.plcc += f.scores.plcc;
    result.mean.srcc += f.scores.srcc;
    result.mean.krcc += f.scores.krcc;
  }
  result.mean.plcc /= k;
  result.mean.srcc /= k;
  result.mean.krcc /= k;
  return result;
}

std::string to_json(const CrossValResult& result) {
  nlohmann::ordered_json doc;
  doc["plcc"] = result.mean.plcc;
  doc["srcc"] = result.mean.srcc;
  doc["krcc"] = result.mean.krcc;
  doc["n"] = result.n;
  doc["folds"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < result.folds.size(); ++f) {
    nlohmann::ordered_json fold;
    fold["fold"] = f;
    fold["plcc"] = result.folds[f].scores.plcc;
    fold["srcc"] = result.folds[f].scores.srcc;
    fold["krcc"] = result.folds[f].scores.krcc;
    fold["n"] = result.folds[f].n;
    doc["folds"].push_back(std::move(fold));
  }
  return doc.dump(2);
}

}  // namespace based
