#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace based {

/// 8-bit interleaved RGB raster, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);
  RgbImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Single-channel double raster, row-major. Samples are expected to be finite.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);
  Plane(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_shape(const Plane& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Full-resolution YUV planes (no chroma subsampling).
struct YuvImage {
  Plane y;
  Plane u;
  Plane v;
};

/// Complex raster used by the 2-D FFT.
class ComplexPlane {
 public:
  ComplexPlane() = default;
  ComplexPlane(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::complex<double>& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::complex<double>& at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const std::complex<double>> data() const noexcept { return data_; }
  std::span<std::complex<double>> data() noexcept { return data_; }

  Plane real() const;
  Plane imag() const;
  Plane magnitude() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::complex<double>> data_;
};

}  // namespace based
