#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace based {

/// Outcomes of side-by-side votes between methods `a` and `b`.
struct PairwiseTally {
  std::string a;
  std::string b;
  std::int64_t wins_a = 0;
  std::int64_t wins_b = 0;
  std::int64_t ties = 0;
};

/// Natural-log Bradley-Terry abilities, shifted so the weakest method scores 0.
using BtScores = std::map<std::string, double>;

struct BtOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  /// Called after every MM sweep with the sweep number and the log-likelihood
  /// of the current abilities.
  std::function<void(int, double)> on_sweep;
};

/// Maximum-likelihood Bradley-Terry fit by minorisation-maximisation. A tie
/// counts as half a win for each side.
///
/// Throws DegenerateError when the comparison graph is disconnected or some
/// group of methods never fails to lose against the rest (the MLE would be
/// unbounded), ConvergenceError when max_iter sweeps do not reach `tol`, and
/// DataError for self-comparisons or negative counts.
BtScores bt_fit(std::span<const PairwiseTally> tallies, const BtOptions& options = {});

/// Log-likelihood of `tallies` under log-abilities `scores`, ties as half-wins.
double bt_loglik(std::span<const PairwiseTally> tallies, const BtScores& scores);

/// Reads `a,b,wins_a,wins_b,ties`.
std::vector<PairwiseTally> read_pairs_csv(const std::filesystem::path& path);

/// Writes `method,score` sorted by descending score (ties by name).
void write_scores_csv(const std::filesystem::path& path, const BtScores& scores);

/// Scores ordered by descending score, then name.
std::vector<std::pair<std::string, double>> ranked(const BtScores& scores);

}  // namespace based
