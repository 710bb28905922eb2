#include "based/color.hpp"

#include <algorithm>
#include <cmath>

namespace based {

namespace {

inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

}  // namespace

Plane to_luma(const RgbImage& img) {
  Plane out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = luma(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return out;
}

YuvImage rgb_to_yuv(const RgbImage& img) {
  YuvImage out{Plane(img.width(), img.height()), Plane(img.width(), img.height()),
               Plane(img.width(), img.height())};
  auto src = img.data();
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    const double r = src[3 * i];
    const double g = src[3 * i + 1];
    const double b = src[3 * i + 2];
    out.y.data()[i] = luma(r, g, b);
    out.u.data()[i] = -0.14713 * r - 0.28886 * g + 0.436 * b + 128.0;
    out.v.data()[i] = 0.615 * r - 0.51499 * g - 0.10001 * b + 128.0;
  }
  return out;
}

RgbImage gray_to_rgb(const Plane& plane) {
  RgbImage out(plane.width(), plane.height());
  auto src = plane.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(std::clamp(std::round(src[i]), 0.0, 255.0));
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = v;
  }
  return out;
}

}  // namespace based
