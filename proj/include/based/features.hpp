#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "based/image.hpp"

namespace based {

inline constexpr std::size_t kFeatureCount = 9;

/// Feature names in serialisation order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "laplacian", "fft", "gabor", "hough", "hog", "ssim_m", "sobel", "lbp", "reblur"};

/// The nine reduced-reference features of one (blurred, deblurred) pair.
struct FeatureVector {
  double laplacian = 0.0;
  double fft = 0.0;
  double gabor = 0.0;
  double hough = 0.0;
  double hog = 0.0;
  double ssim_m = 0.0;
  double sobel = 0.0;
  double lbp = 0.0;
  double reblur = 0.0;

  std::array<double, kFeatureCount> values() const noexcept {
    return {laplacian, fft, gabor, hough, hog, ssim_m, sobel, lbp, reblur};
  }
  static FeatureVector from_values(std::span<const double, kFeatureCount> v) noexcept {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureParams {
  int fft_cutoff = 30;
  int sobel_size = 13;
  int reblur_size = 17;
  double reblur_sigma = 2.9;
  std::vector<double> gabor_orientations = {0.0, 60.0, 120.0};  // degrees
  int gabor_size = 21;
  double gabor_sigma = 4.0;
  double gabor_wavelength = 10.0;
  double gabor_gamma = 0.5;
  int hog_cell = 8;
  int hog_bins = 9;
  int hough_theta_bins = 180;
  double hough_peak_frac = 0.5;

  /// Throws ParamError on even kernel sizes, non-positive sigmas and the like.
  void validate() const;
};

// Every extractor takes (blurred, deblurred) in that order and throws
// DimensionError when the two planes differ in shape.

/// Var(Lap(D)) - Var(Lap(B)) with the 4-neighbour Laplacian.
double laplacian_feature(const Plane& blurred, const Plane& deblurred);

/// Difference of mean log-magnitude after removing a square low-frequency
/// block of half-width `cutoff` around DC. Throws HighpassError when the
/// block does not fit inside the spectrum.
double fft_feature(const Plane& blurred, const Plane& deblurred, int cutoff = 30);

/// Mean 20*log10(|highpass(X)| + 1e-8) for one plane.
double highpass_log_energy(const Plane& plane, int cutoff);

/// Real, zero-mean Gabor kernel; theta in degrees.
Plane gabor_kernel(int size, double sigma, double theta_deg, double wavelength, double gamma);

/// L2 distance between per-orientation mean absolute Gabor responses.
double gabor_feature(const Plane& blurred, const Plane& deblurred, const FeatureParams& params = {});

/// Edge pixels of a plane: 3x3 Sobel magnitude above mean + 2 std.
std::vector<bool> hough_edge_mask(const Plane& plane);

/// Number of (theta, rho) accumulator cells holding at least `peak_frac` of
/// the maximum vote; 0 when the mask is empty.
long hough_peak_count(const std::vector<bool>& mask, int width, int height, int theta_bins,
                      double peak_frac);

/// N(D) - N(B).
double hough_feature(const Plane& blurred, const Plane& deblurred, const FeatureParams& params = {});

/// Block-normalised (L2-Hys) HOG descriptor.
std::vector<double> hog_descriptor(const Plane& plane, int cell = 8, int bins = 9);

/// RMS difference of the two HOG descriptors.
double hog_feature(const Plane& blurred, const Plane& deblurred, const FeatureParams& params = {});

/// (6*SSIM(Y) + SSIM(U) + SSIM(V)) / 8 over BT.601 YUV planes.
double ssim_m(const RgbImage& blurred, const RgbImage& deblurred);

/// Smoothing and signed derivative taps of the large-aperture Sobel operator.
std::vector<double> sobel_smoothing_kernel(int size);
std::vector<double> sobel_derivative_kernel(int size);

/// Gradient magnitude sqrt(gx^2 + gy^2) with the `size`-tap Sobel pair.
Plane sobel_magnitude(const Plane& plane, int size = 13);

double sobel_feature(const Plane& blurred, const Plane& deblurred, int size = 13);

/// 8-neighbour LBP codes for interior pixels; bit k is neighbour k clockwise
/// from the top-left, set when neighbour >= centre.
std::vector<double> lbp_histogram(const Plane& plane);

double lbp_feature(const Plane& blurred, const Plane& deblurred);

double reblur_feature(const Plane& blurred, const Plane& deblurred, int size = 17, double sigma = 2.9);

/// Runs all nine extractors. Failures are rethrown as FeatureError carrying
/// the feature name.
FeatureVector extract_all(const RgbImage& blurred, const RgbImage& deblurred,
                          const FeatureParams& params = {});

}  // namespace based
