#include "based/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "based/errors.hpp"

namespace based {

namespace {

void check_kernel_extent(std::size_t taps, int extent, const char* axis) {
  if (taps % 2 == 0) {
    throw DimensionError(std::string("kernel ") + axis + " size " + std::to_string(taps) +
                         " is not odd");
  }
  if (taps > static_cast<std::size_t>(extent)) {
    throw DimensionError(std::string("kernel ") + axis + " size " + std::to_string(taps) +
                         " exceeds image extent " + std::to_string(extent));
  }
}

// Source padded by (rx, ry) on each side with reflected samples.
struct Padded {
  int width;
  int rx;
  int ry;
  std::vector<double> data;

  Padded(const Plane& src, int rx_, int ry_) : width(src.width() + 2 * rx_), rx(rx_), ry(ry_) {
    const int height = src.height() + 2 * ry;
    data.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
      const int sy = reflect_index(y - ry, src.height());
      for (int x = 0; x < width; ++x) {
        data[static_cast<std::size_t>(y) * width + x] = src.at(reflect_index(x - rx, src.width()), sy);
      }
    }
  }

  const double* row(int y) const { return data.data() + static_cast<std::size_t>(y) * width; }
};

}  // namespace

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Plane convolve2d(const Plane& src, const Plane& kernel) {
  check_kernel_extent(static_cast<std::size_t>(kernel.width()), src.width(), "width");
  check_kernel_extent(static_cast<std::size_t>(kernel.height()), src.height(), "height");
  const int rx = kernel.width() / 2;
  const int ry = kernel.height() / 2;
  const Padded padded(src, rx, ry);
  Plane out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.height(); ++ky) {
        const double* row = padded.row(y + ky) + x;
        for (int kx = 0; kx < kernel.width(); ++kx) acc += kernel.at(kx, ky) * row[kx];
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Plane convolve_separable(const Plane& src, std::span<const double> kx, std::span<const double> ky) {
  check_kernel_extent(kx.size(), src.width(), "width");
  check_kernel_extent(ky.size(), src.height(), "height");
  const int w = src.width();
  const int h = src.height();
  const int rx = static_cast<int>(kx.size() / 2);
  const int ry = static_cast<int>(ky.size() / 2);

  // Horizontal pass over reflected rows, then vertical pass over reflected columns.
  std::vector<double> line(static_cast<std::size_t>(w + 2 * rx));
  Plane horiz(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w + 2 * rx; ++x) line[x] = src.at(reflect_index(x - rx, w), y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kx.size(); ++k) acc += kx[k] * line[x + k];
      horiz.at(x, y) = acc;
    }
  }

  Plane out(w, h);
  std::vector<const double*> rows(ky.size());
  for (int y = 0; y < h; ++y) {
    for (std::size_t k = 0; k < ky.size(); ++k) {
      rows[k] = horiz.data().data() +
                static_cast<std::size_t>(reflect_index(y + static_cast<int>(k) - ry, h)) * w;
    }
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ky.size(); ++k) acc += ky[k] * rows[k][x];
      out.at(x, y) = acc;
    }
  }
  return out;
}

Kernel1d gaussian_kernel_1d(int size, double sigma) {
  if (size < 1 || size % 2 == 0) {
    throw ParamError("gaussian kernel size must be odd and positive, got " + std::to_string(size));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParamError("gaussian sigma must be positive, got " + std::to_string(sigma));
  }
  const int half = size / 2;
  Kernel1d k(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    const double x = std::abs(i - half);
    k[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
  }
  // Sum symmetric pairs outward from the centre so the total does not depend on direction.
  double sum = k[half];
  for (int d = 1; d <= half; ++d) sum += k[half - d] + k[half + d];
  for (double& v : k) v /= sum;
  return k;
}

Plane outer_product(std::span<const double> column, std::span<const double> row) {
  Plane out(static_cast<int>(row.size()), static_cast<int>(column.size()));
  for (std::size_t y = 0; y < column.size(); ++y) {
    for (std::size_t x = 0; x < row.size(); ++x) {
      out.at(static_cast<int>(x), static_cast<int>(y)) = column[y] * row[x];
    }
  }
  return out;
}

namespace {

int fitted_size(double sigma, int extent) {
  int size = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
  if (size > extent) size = extent % 2 == 1 ? extent : extent - 1;
  return std::max(size, 1);
}

}  // namespace

Plane gaussian_blur(const Plane& src, double sigma) {
  if (sigma <= 0.0) return src;
  const auto kx = gaussian_kernel_1d(fitted_size(sigma, src.width()), sigma);
  const auto ky = gaussian_kernel_1d(fitted_size(sigma, src.height()), sigma);
  return convolve_separable(src, kx, ky);
}

RgbImage gaussian_blur(const RgbImage& src, double sigma) {
  if (sigma <= 0.0) return src;
  RgbImage out(src.width(), src.height());
  for (int c = 0; c < 3; ++c) {
    Plane channel(src.width(), src.height());
    for (int y = 0; y < src.height(); ++y) {
      for (int x = 0; x < src.width(); ++x) channel.at(x, y) = src.at(x, y, c);
    }
    const Plane blurred = gaussian_blur(channel, sigma);
    for (int y = 0; y < src.height(); ++y) {
      for (int x = 0; x < src.width(); ++x) {
        out.at(x, y, c) =
            static_cast<std::uint8_t>(std::clamp(std::round(blurred.at(x, y)), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace based
