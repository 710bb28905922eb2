#include "based/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>

#include "based/errors.hpp"

namespace based {

namespace {

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw LengthError("inputs differ in length: " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  }
  if (x.size() < 2) throw LengthError("need at least 2 observations");
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
  };
  if (!finite(x) || !finite(y)) throw DataError("inputs contain non-finite values");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); });
  };
  if (constant(x) || constant(y)) throw DegenerateError("an input has zero variance");
}

double pearson_unchecked(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Pairs tied within runs of equal keys in an already-sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq equal) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run) * static_cast<std::int64_t>(run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Sorts v[lo, hi) ascending and returns the number of inversions removed.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  return pearson_unchecked(x, y);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // Positions i..j-1 share the mean of ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_unchecked(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]];
  });
  const std::int64_t n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t discordant = merge_count(ys, buf, 0, n);
  const std::int64_t n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const std::int64_t s = n0 - n1 - n2 + n3 - 2 * discordant;
  return static_cast<double>(s) /
         std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

CorrelationTriple correlations(std::span<const double> x, std::span<const double> y) {
  return {pearson(x, y), spearman(x, y), kendall_tau_b(x, y)};
}

GroupedCorrelation grouped_correlations(std::span<const double> x, std::span<const double> y,
                                        std::span<const int> group) {
  if (x.size() != y.size() || x.size() != group.size()) {
    throw LengthError("grouped correlation inputs differ in length");
  }
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group.size(); ++i) members[group[i]].push_back(i);
  GroupedCorrelation out;
  for (const auto& [g, ids] : members) {
    if (ids.size() < 2) continue;
    std::vector<double> gx, gy;
    for (std::size_t i : ids) {
      gx.push_back(x[i]);
      gy.push_back(y[i]);
    }
    try {
      const auto t = correlations(gx, gy);
      out.mean.plcc += t.plcc;
      out.mean.srcc += t.srcc;
      out.mean.krcc += t.krcc;
      ++out.groups_used;
    } catch (const DegenerateError&) {
    }
  }
  if (out.groups_used == 0) throw DegenerateError("no group has two distinct values on both sides");
  const double k = static_cast<double>(out.groups_used);
  out.mean.plcc /= k;
  out.mean.srcc /= k;
  out.mean.krcc /= k;
  return out;
}

}  // namespace based
