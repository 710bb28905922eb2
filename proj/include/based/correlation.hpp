#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace based {

/// Sample Pearson correlation. Throws LengthError for mismatched or short
/// inputs and DegenerateError when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks, ties sharing the average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Tie-corrected Kendall tau-b via Knight's O(n log n) merge-sort count.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct CorrelationTriple {
  double plcc = 0.0;
  double srcc = 0.0;
  double krcc = 0.0;
};

CorrelationTriple correlations(std::span<const double> x, std::span<const double> y);

/// Triple averaged over groups. Groups with fewer than two rows or a constant
/// side are skipped; DegenerateError when no group is usable.
struct GroupedCorrelation {
  CorrelationTriple mean;
  std::size_t groups_used = 0;
};

GroupedCorrelation grouped_correlations(std::span<const double> x, std::span<const double> y,
                                        std::span<const int> group);

}  // namespace based
