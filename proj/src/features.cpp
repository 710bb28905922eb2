#include "based/features.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "based/baselines.hpp"
#include "based/color.hpp"
#include "based/errors.hpp"
#include "based/fft.hpp"
#include "based/filter.hpp"

namespace based {

namespace {

void require_same_shape(const Plane& a, const Plane& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("plane shapes differ: " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double rms_difference(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

double l2_difference(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

const Plane& laplacian_kernel() {
  static const Plane k(3, 3, {0, 1, 0, 1, -4, 1, 0, 1, 0});
  return k;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void require_odd_at_least(int size, int min, const char* what) {
  if (size < min || size % 2 == 0) {
    throw ParamError(std::string(what) + " must be odd and >= " + std::to_string(min) + ", got " +
                     std::to_string(size));
  }
}

}  // namespace

void FeatureParams::validate() const {
  if (fft_cutoff < 0) throw ParamError("fft_cutoff must be >= 0");
  require_odd_at_least(sobel_size, 3, "sobel_size");
  require_odd_at_least(reblur_size, 1, "reblur_size");
  require_odd_at_least(gabor_size, 1, "gabor_size");
  if (!(reblur_sigma > 0.0)) throw ParamError("reblur_sigma must be positive");
  if (!(gabor_sigma > 0.0)) throw ParamError("gabor_sigma must be positive");
  if (!(gabor_wavelength > 0.0)) throw ParamError("gabor_wavelength must be positive");
  if (!(gabor_gamma > 0.0)) throw ParamError("gabor_gamma must be positive");
  if (gabor_orientations.empty()) throw ParamError("gabor_orientations must not be empty");
  if (hog_cell < 1) throw ParamError("hog_cell must be >= 1");
  if (hog_bins < 1) throw ParamError("hog_bins must be >= 1");
  if (hough_theta_bins < 1) throw ParamError("hough_theta_bins must be >= 1");
  if (!(hough_peak_frac > 0.0 && hough_peak_frac <= 1.0)) {
    throw ParamError("hough_peak_frac must lie in (0, 1]");
  }
}

// --- Laplacian --------------------------------------------------------------

double laplacian_feature(const Plane& blurred, const Plane& deblurred) {
  require_same_shape(blurred, deblurred);
  const double vb = population_variance(convolve2d(blurred, laplacian_kernel()).data());
  const double vd = population_variance(convolve2d(deblurred, laplacian_kernel()).data());
  return vd - vb;
}

// --- FFT high-pass ----------------------------------------------------------

double highpass_log_energy(const Plane& plane, int cutoff) {
  if (cutoff < 0) throw ParamError("fft cutoff must be >= 0");
  if (std::min(plane.width(), plane.height()) <= 2 * cutoff) {
    throw HighpassError("plane " + std::to_string(plane.width()) + "x" +
                        std::to_string(plane.height()) + " too small for cutoff " +
                        std::to_string(cutoff));
  }
  ComplexPlane spectrum = fftshift(fft2(plane));
  const int cx = plane.width() / 2;
  const int cy = plane.height() / 2;
  for (int y = cy - cutoff; y <= cy + cutoff; ++y) {
    for (int x = cx - cutoff; x <= cx + cutoff; ++x) spectrum.at(x, y) = 0.0;
  }
  const ComplexPlane filtered = ifft2(ifftshift(spectrum));
  double s = 0.0;
  for (const auto& v : filtered.data()) s += 20.0 * std::log10(std::abs(v) + 1e-8);
  return s / static_cast<double>(plane.size());
}

double fft_feature(const Plane& blurred, const Plane& deblurred, int cutoff) {
  require_same_shape(blurred, deblurred);
  return highpass_log_energy(deblurred, cutoff) - highpass_log_energy(blurred, cutoff);
}

// --- Gabor ------------------------------------------------------------------

Plane gabor_kernel(int size, double sigma, double theta_deg, double wavelength, double gamma) {
  require_odd_at_least(size, 1, "gabor size");
  const int half = size / 2;
  const double theta = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Plane k(size, size);
  double total = 0.0;
  for (int y = -half; y <= half; ++y) {
    for (int x = -half; x <= half; ++x) {
      const double xr = x * c + y * s;
      const double yr = -x * s + y * c;
      const double v = std::exp(-(xr * xr + gamma * gamma * yr * yr) / (2.0 * sigma * sigma)) *
                       std::cos(2.0 * std::numbers::pi * xr / wavelength);
      k.at(x + half, y + half) = v;
      total += v;
    }
  }
  const double offset = total / static_cast<double>(k.size());
  for (double& v : k.data()) v -= offset;
  return k;
}

namespace {

std::vector<double> gabor_responses(const Plane& plane, const std::vector<Plane>& bank) {
  std::vector<double> r;
  r.reserve(bank.size());
  for (const Plane& k : bank) {
    const Plane resp = convolve2d(plane, k);
    double s = 0.0;
    for (double v : resp.data()) s += std::abs(v);
    r.push_back(s / static_cast<double>(resp.size()));
  }
  return r;
}

}  // namespace

double gabor_feature(const Plane& blurred, const Plane& deblurred, const FeatureParams& params) {
  require_same_shape(blurred, deblurred);
  std::vector<Plane> bank;
  for (double theta : params.gabor_orientations) {
    bank.push_back(gabor_kernel(params.gabor_size, params.gabor_sigma, theta,
                                params.gabor_wavelength, params.gabor_gamma));
  }
  return l2_difference(gabor_responses(deblurred, bank), gabor_responses(blurred, bank));
}

// --- Hough ------------------------------------------------------------------

std::vector<bool> hough_edge_mask(const Plane& plane) {
  static const Plane kx(3, 3, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
  static const Plane ky(3, 3, {-1, -2, -1, 0, 0, 0, 1, 2, 1});
  const Plane gx = convolve2d(plane, kx);
  const Plane gy = convolve2d(plane, ky);
  std::vector<double> mag(plane.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    mag[i] = std::hypot(gx.data()[i], gy.data()[i]);
  }
  const double threshold = mean(mag) + 2.0 * std::sqrt(population_variance(mag));
  std::vector<bool> mask(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mask[i] = mag[i] > threshold;
  return mask;
}

long hough_peak_count(const std::vector<bool>& mask, int width, int height, int theta_bins,
                      double peak_frac) {
  const int diag = static_cast<int>(std::ceil(std::hypot(width, height)));
  const int rho_bins = 2 * diag + 1;
  std::vector<double> cos_t(theta_bins), sin_t(theta_bins);
  for (int t = 0; t < theta_bins; ++t) {
    const double theta = t * std::numbers::pi / theta_bins;
    cos_t[t] = std::cos(theta);
    sin_t[t] = std::sin(theta);
  }
  std::vector<long> acc(static_cast<std::size_t>(theta_bins) * rho_bins, 0);
  bool any = false;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * width + x]) continue;
      any = true;
      for (int t = 0; t < theta_bins; ++t) {
        const double rho = x * cos_t[t] + y * sin_t[t];
        const int r = static_cast<int>(std::floor(rho + 0.5)) + diag;
        ++acc[static_cast<std::size_t>(t) * rho_bins + r];
      }
    }
  }
  if (!any) return 0;
  const long peak = *std::max_element(acc.begin(), acc.end());
  const double threshold = peak_frac * static_cast<double>(peak);
  return std::count_if(acc.begin(), acc.end(),
                       [threshold](long v) { return static_cast<double>(v) >= threshold; });
}

double hough_feature(const Plane& blurred, const Plane& deblurred, const FeatureParams& params) {
  require_same_shape(blurred, deblurred);
  const int w = blurred.width();
  const int h = blurred.height();
  const long nb = hough_peak_count(hough_edge_mask(blurred), w, h, params.hough_theta_bins,
                                   params.hough_peak_frac);
  const long nd = hough_peak_count(hough_edge_mask(deblurred), w, h, params.hough_theta_bins,
                                   params.hough_peak_frac);
  return static_cast<double>(nd - nb);
}

// --- HOG --------------------------------------------------------------------

std::vector<double> hog_descriptor(const Plane& plane, int cell, int bins) {
  if (plane.width() < 2 * cell || plane.height() < 2 * cell) {
    throw DimensionError("HOG needs at least 2x2 cells of " + std::to_string(cell) + " px");
  }
  const int w = plane.width();
  const int h = plane.height();
  const int cells_x = w / cell;
  const int cells_y = h / cell;
  const double bin_width = 180.0 / bins;

  std::vector<double> hist(static_cast<std::size_t>(cells_x) * cells_y * bins, 0.0);
  for (int y = 0; y < cells_y * cell; ++y) {
    for (int x = 0; x < cells_x * cell; ++x) {
      const double gx = plane.at(reflect_index(x + 1, w), y) - plane.at(reflect_index(x - 1, w), y);
      const double gy = plane.at(x, reflect_index(y + 1, h)) - plane.at(x, reflect_index(y - 1, h));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      const double pos = angle / bin_width - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int lo = ((static_cast<int>(lower) % bins) + bins) % bins;
      const int hi = (lo + 1) % bins;
      double* cell_hist = hist.data() + (static_cast<std::size_t>(y / cell) * cells_x + x / cell) * bins;
      cell_hist[lo] += (1.0 - frac) * mag;
      cell_hist[hi] += frac * mag;
    }
  }

  std::vector<double> descriptor;
  descriptor.reserve(static_cast<std::size_t>(cells_x - 1) * (cells_y - 1) * 4 * bins);
  std::vector<double> block(static_cast<std::size_t>(4) * bins);
  for (int by = 0; by + 1 < cells_y; ++by) {
    for (int bx = 0; bx + 1 < cells_x; ++bx) {
      std::size_t k = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const double* src = hist.data() + (static_cast<std::size_t>(by + dy) * cells_x + bx + dx) * bins;
          for (int b = 0; b < bins; ++b) block[k++] = src[b];
        }
      }
      auto normalize = [&block] {
        double n = 0.0;
        for (double v : block) n += v * v;
        n = std::sqrt(n);
        if (n == 0.0) return;
        for (double& v : block) v /= n;
      };
      normalize();
      for (double& v : block) v = std::min(v, 0.2);
      normalize();
      descriptor.insert(descriptor.end(), block.begin(), block.end());
    }
  }
  return descriptor;
}

double hog_feature(const Plane& blurred, const Plane& deblurred, const FeatureParams& params) {
  require_same_shape(blurred, deblurred);
  const auto hb = hog_descriptor(blurred, params.hog_cell, params.hog_bins);
  const auto hd = hog_descriptor(deblurred, params.hog_cell, params.hog_bins);
  return rms_difference(hb, hd);
}

// --- SSIM-M -----------------------------------------------------------------

double ssim_m(const RgbImage& blurred, const RgbImage& deblurred) {
  if (blurred.width() != deblurred.width() || blurred.height() != deblurred.height()) {
    throw DimensionError("image shapes differ");
  }
  const YuvImage b = rgb_to_yuv(blurred);
  const YuvImage d = rgb_to_yuv(deblurred);
  return (6.0 * ssim(b.y, d.y) + ssim(b.u, d.u) + ssim(b.v, d.v)) / 8.0;
}

// --- Sobel ------------------------------------------------------------------

std::vector<double> sobel_smoothing_kernel(int size) {
  require_odd_at_least(size, 3, "sobel size");
  std::vector<double> k(static_cast<std::size_t>(size));
  const double norm = std::ldexp(1.0, size - 1);
  for (int i = 0; i < size; ++i) k[i] = binomial(size - 1, i) / norm;
  return k;
}

std::vector<double> sobel_derivative_kernel(int size) {
  require_odd_at_least(size, 3, "sobel size");
  // [-1, 0, 1] convolved with the binomial row C(size-3, k).
  auto b = [size](int i) { return i >= 0 && i <= size - 3 ? binomial(size - 3, i) : 0.0; };
  std::vector<double> k(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) k[i] = b(i - 2) - b(i);
  return k;
}

Plane sobel_magnitude(const Plane& plane, int size) {
  const auto smooth = sobel_smoothing_kernel(size);
  const auto deriv = sobel_derivative_kernel(size);
  const Plane gx = convolve_separable(plane, deriv, smooth);
  const Plane gy = convolve_separable(plane, smooth, deriv);
  Plane out(plane.width(), plane.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = std::sqrt(gx.data()[i] * gx.data()[i] + gy.data()[i] * gy.data()[i]);
  }
  return out;
}

double sobel_feature(const Plane& blurred, const Plane& deblurred, int size) {
  require_same_shape(blurred, deblurred);
  return rms_difference(sobel_magnitude(deblurred, size).data(),
                        sobel_magnitude(blurred, size).data());
}

// --- LBP --------------------------------------------------------------------

std::vector<double> lbp_histogram(const Plane& plane) {
  if (plane.width() < 3 || plane.height() < 3) {
    throw DimensionError("LBP needs at least a 3x3 plane");
  }
  static constexpr int kDx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  static constexpr int kDy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  std::vector<double> hist(256, 0.0);
  for (int y = 1; y + 1 < plane.height(); ++y) {
    for (int x = 1; x + 1 < plane.width(); ++x) {
      const double centre = plane.at(x, y);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k) {
        if (plane.at(x + kDx[k], y + kDy[k]) >= centre) code |= 1u << k;
      }
      hist[code] += 1.0;
    }
  }
  const double n = static_cast<double>(plane.width() - 2) * (plane.height() - 2);
  for (double& v : hist) v /= n;
  return hist;
}

double lbp_feature(const Plane& blurred, const Plane& deblurred) {
  require_same_shape(blurred, deblurred);
  return l2_difference(lbp_histogram(blurred), lbp_histogram(deblurred));
}

// --- Reblur -----------------------------------------------------------------

double reblur_feature(const Plane& blurred, const Plane& deblurred, int size, double sigma) {
  require_same_shape(blurred, deblurred);
  const auto k = gaussian_kernel_1d(size, sigma);
  return rms_difference(convolve_separable(deblurred, k, k).data(),
                        convolve_separable(blurred, k, k).data());
}

// --- All features -----------------------------------------------------------

namespace {

double annotated(std::string_view name, const std::function<double()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw FeatureError(std::string(name), e.what());
  }
}

}  // namespace

FeatureVector extract_all(const RgbImage& blurred, const RgbImage& deblurred,
                          const FeatureParams& params) {
  params.validate();
  if (blurred.width() != deblurred.width() || blurred.height() != deblurred.height()) {
    throw DimensionError("image shapes differ: " + std::to_string(blurred.width()) + "x" +
                         std::to_string(blurred.height()) + " vs " +
                         std::to_string(deblurred.width()) + "x" +
                         std::to_string(deblurred.height()));
  }
  const Plane b = to_luma(blurred);
  const Plane d = to_luma(deblurred);

  FeatureVector fv;
  fv.laplacian = annotated("laplacian", [&] { return laplacian_feature(b, d); });
  fv.fft = annotated("fft", [&] { return fft_feature(b, d, params.fft_cutoff); });
  fv.gabor = annotated("gabor", [&] { return gabor_feature(b, d, params); });
  fv.hough = annotated("hough", [&] { return hough_feature(b, d, params); });
  fv.hog = annotated("hog", [&] { return hog_feature(b, d, params); });
  fv.ssim_m = annotated("ssim_m", [&] { return ssim_m(blurred, deblurred); });
  fv.sobel = annotated("sobel", [&] { return sobel_feature(b, d, params.sobel_size); });
  fv.lbp = annotated("lbp", [&] { return lbp_feature(b, d); });
  fv.reblur = annotated("reblur",
                        [&] { return reblur_feature(b, d, params.reblur_size, params.reblur_sigma); });
  return fv;
}

}  // namespace based
