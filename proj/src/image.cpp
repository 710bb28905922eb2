#include "based/image.hpp"

#include <string>

#include "based/errors.hpp"

namespace based {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DimensionError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

}  // namespace

RgbImage::RgbImage(int width, int height)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height * 3, 0);
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw DimensionError("RGB buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
                         std::to_string(static_cast<std::size_t>(width) * height * 3));
  }
}

Plane::Plane(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Plane::Plane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionError("plane buffer holds " + std::to_string(data_.size()) +
                         " samples, expected " +
                         std::to_string(static_cast<std::size_t>(width) * height));
  }
}

ComplexPlane::ComplexPlane(int width, int height)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, {0.0, 0.0});
}

Plane ComplexPlane::real() const {
  Plane out(width_, height_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = data_[i].real();
  return out;
}

Plane ComplexPlane::imag() const {
  Plane out(width_, height_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = data_[i].imag();
  return out;
}

Plane ComplexPlane::magnitude() const {
  Plane out(width_, height_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = std::abs(data_[i]);
  return out;
}

}  // namespace based
