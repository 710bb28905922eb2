#pragma once

// Straightforward reference implementations used to check the library. None
// of them calls into the code path they verify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "based/image.hpp"

namespace based::testing {

inline int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

/// Direct 2-D sliding product with mirror borders; kernel given as rows.
inline Plane naive_correlate(const Plane& src, const std::vector<std::vector<double>>& kernel) {
  const int kh = static_cast<int>(kernel.size());
  const int kw = static_cast<int>(kernel[0].size());
  Plane out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < kh; ++j) {
        for (int i = 0; i < kw; ++i) {
          acc += kernel[j][i] *
                 src.at(mirror(x + i - kw / 2, src.width()), mirror(y + j - kh / 2, src.height()));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline std::vector<std::vector<double>> outer(const std::vector<double>& col, const std::vector<double>& row) {
  std::vector<std::vector<double>> k(col.size(), std::vector<double>(row.size()));
  for (std::size_t j = 0; j < col.size(); ++j) {
    for (std::size_t i = 0; i < row.size(); ++i) k[j][i] = col[j] * row[i];
  }
  return k;
}

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Sobel-13 pair built by explicit polynomial convolution of [-1,0,1] with C(10,k).
inline void sobel13(std::vector<double>& smooth, std::vector<double>& deriv) {
  smooth.assign(13, 0.0);
  for (int k = 0; k < 13; ++k) smooth[k] = binom(12, k) / 4096.0;
  const double d3[3] = {-1.0, 0.0, 1.0};
  deriv.assign(13, 0.0);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b <= 10; ++b) deriv[a + b] += d3[a] * binom(10, b);
  }
}

inline double rms(const Plane& a, const Plane& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a.data()[i] - b.data()[i]) * (a.data()[i] - b.data()[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

inline Plane oracle_sobel_magnitude(const Plane& p) {
  std::vector<double> s, d;
  sobel13(s, d);
  const Plane gx = naive_correlate(p, outer(s, d));
  const Plane gy = naive_correlate(p, outer(d, s));
  Plane m(p.width(), p.height());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = std::sqrt(gx.data()[i] * gx.data()[i] + gy.data()[i] * gy.data()[i]);
  }
  return m;
}

inline double oracle_sobel_feature(const Plane& b, const Plane& d) {
  return rms(oracle_sobel_magnitude(d), oracle_sobel_magnitude(b));
}

inline std::vector<double> oracle_gaussian(int size, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - size / 2;
    g[i] = std::exp(-x * x / (2 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

inline double oracle_reblur_feature(const Plane& b, const Plane& d, int size = 17, double sigma = 2.9) {
  const auto g = oracle_gaussian(size, sigma);
  const auto k = outer(g, g);
  return rms(naive_correlate(d, k), naive_correlate(b, k));
}

/// SSIM evaluated window by window with explicit weighted moments.
inline double oracle_ssim(const Plane& a, const Plane& b) {
  const auto g = oracle_gaussian(11, 1.5);
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double total = 0.0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      double ma = 0, mb = 0;
      for (int j = -5; j <= 5; ++j) {
        for (int i = -5; i <= 5; ++i) {
          const double w = g[j + 5] * g[i + 5];
          ma += w * a.at(mirror(x + i, a.width()), mirror(y + j, a.height()));
          mb += w * b.at(mirror(x + i, a.width()), mirror(y + j, a.height()));
        }
      }
      double va = 0, vb = 0, cov = 0;
      for (int j = -5; j <= 5; ++j) {
        for (int i = -5; i <= 5; ++i) {
          const double w = g[j + 5] * g[i + 5];
          const double da = a.at(mirror(x + i, a.width()), mirror(y + j, a.height())) - ma;
          const double db = b.at(mirror(x + i, a.width()), mirror(y + j, a.height())) - mb;
          va += w * da * da;
          vb += w * db * db;
          cov += w * da * db;
        }
      }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / static_cast<double>(a.size());
}

/// HOG where each pixel votes into every bin with weight max(0, 1 - d/width),
/// d being the circular distance from the bin centre.
inline std::vector<double> oracle_hog(const Plane& p, int cell = 8, int bins = 9) {
  const int w = p.width(), h = p.height();
  const int cx = w / cell, cy = h / cell;
  const double width = 180.0 / bins;
  std::vector<std::vector<std::vector<double>>> hist(
      cy, std::vector<std::vector<double>>(cx, std::vector<double>(bins, 0.0)));
  for (int y = 0; y < cy * cell; ++y) {
    for (int x = 0; x < cx * cell; ++x) {
      const double gx = p.at(mirror(x + 1, w), y) - p.at(mirror(x - 1, w), y);
      const double gy = p.at(x, mirror(y + 1, h)) - p.at(x, mirror(y - 1, h));
      const double mag = std::sqrt(gx * gx + gy * gy);
      double ang = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      ang = std::fmod(ang + 360.0, 180.0);
      for (int b = 0; b < bins; ++b) {
        const double centre = (b + 0.5) * width;
        double dist = std::abs(ang - centre);
        dist = std::min(dist, 180.0 - dist);
        hist[y / cell][x / cell][b] += mag * std::max(0.0, 1.0 - dist / width);
      }
    }
  }
  std::vector<double> out;
  for (int by = 0; by + 1 < cy; ++by) {
    for (int bx = 0; bx + 1 < cx; ++bx) {
      std::vector<double> v;
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) v.insert(v.end(), hist[by + j][bx + i].begin(), hist[by + j][bx + i].end());
      }
      for (int pass = 0; pass < 2; ++pass) {
        double n = 0;
        for (double e : v) n += e * e;
        if (n > 0) {
          for (double& e : v) e /= std::sqrt(n);
        }
        if (pass == 0) {
          for (double& e : v) e = std::min(e, 0.2);
        }
      }
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  return out;
}

/// Hough accumulator filled cell by cell: for every (theta, rho) count edge
/// pixels whose rounded rho lands there.
inline long oracle_hough_count(const std::vector<bool>& mask, int w, int h, int theta_bins = 180,
                               double frac = 0.5) {
  std::vector<std::pair<int, int>> edges;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask[static_cast<std::size_t>(y) * w + x]) edges.emplace_back(x, y);
    }
  }
  if (edges.empty()) return 0;
  const int diag = static_cast<int>(std::ceil(std::sqrt(double(w) * w + double(h) * h)));
  std::vector<long> cells;
  for (int t = 0; t < theta_bins; ++t) {
    const double th = t * std::numbers::pi / theta_bins;
    std::vector<long> column(2 * diag + 1, 0);
    for (auto [x, y] : edges) {
      const double rho = x * std::cos(th) + y * std::sin(th);
      column[static_cast<int>(std::floor(rho + 0.5)) + diag] += 1;
    }
    cells.insert(cells.end(), column.begin(), column.end());
  }
  const long peak = *std::max_element(cells.begin(), cells.end());
  long n = 0;
  for (long c : cells) n += static_cast<double>(c) >= frac * peak;
  return n;
}

/// Kendall tau-b from the pair-count definition.
struct PairCounts {
  std::int64_t s = 0, n0 = 0, n1 = 0, n2 = 0;
};

inline PairCounts brute_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  PairCounts c;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++c.n0;
      const int sx = (x[i] > x[j]) - (x[i] < x[j]);
      const int sy = (y[i] > y[j]) - (y[i] < y[j]);
      c.s += sx * sy;
      if (sx == 0) ++c.n1;
      if (sy == 0) ++c.n2;
    }
  }
  return c;
}

inline double brute_kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const auto c = brute_pairs(x, y);
  return static_cast<double>(c.s) /
         std::sqrt(static_cast<double>(c.n0 - c.n1) * static_cast<double>(c.n0 - c.n2));
}

}  // namespace based::testing
