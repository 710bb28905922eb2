#include "based/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "based/errors.hpp"
#include "based/filter.hpp"

namespace based {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void require_same_shape(const Plane& a, const Plane& b) {
  if (!a.same_shape(b)) throw DimensionError("plane shapes differ");
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

}  // namespace

double psnr(const Plane& a, const Plane& b, double peak, bool cap_identical) {
  require_same_shape(a, b);
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sse += d * d;
  }
  if (sse == 0.0) {
    if (cap_identical) return kPsnrCap;
    throw IdenticalError("PSNR is undefined for identical inputs");
  }
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

Plane ssim_map(const Plane& a, const Plane& b) {
  require_same_shape(a, b);
  if (std::min(a.width(), a.height()) < kWindow) {
    throw SizeError("SSIM needs both dimensions >= " + std::to_string(kWindow) + ", got " +
                    std::to_string(a.width()) + "x" + std::to_string(a.height()));
  }
  const auto g = gaussian_kernel_1d(kWindow, kWindowSigma);
  const Plane mu_a = convolve_separable(a, g, g);
  const Plane mu_b = convolve_separable(b, g, g);
  const Plane e_aa = convolve_separable(product(a, a), g, g);
  const Plane e_bb = convolve_separable(product(b, b), g, g);
  const Plane e_ab = convolve_separable(product(a, b), g, g);

  Plane out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ma = mu_a.data()[i];
    const double mb = mu_b.data()[i];
    const double var_a = e_aa.data()[i] - ma * ma;
    const double var_b = e_bb.data()[i] - mb * mb;
    const double cov = e_ab.data()[i] - ma * mb;
    out.data()[i] = ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                    ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
  }
  return out;
}

double ssim(const Plane& a, const Plane& b) {
  const Plane map = ssim_map(a, b);
  double s = 0.0;
  for (double v : map.data()) s += v;
  return s / static_cast<double>(map.size());
}

}  // namespace based
