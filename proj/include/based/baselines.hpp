#pragma once

#include "based/image.hpp"

namespace based {

inline constexpr double kPsnrCap = 100.0;

/// 10*log10(peak^2 / MSE). Identical inputs throw IdenticalError unless
/// `cap_identical` is set, in which case kPsnrCap is returned.
double psnr(const Plane& a, const Plane& b, double peak = 255.0, bool cap_identical = false);

/// Mean SSIM map: 11x11 Gaussian window (sigma 1.5), C1=(0.01*255)^2,
/// C2=(0.03*255)^2, reflected borders. Requires both dimensions >= 11.
double ssim(const Plane& a, const Plane& b);

/// Per-pixel SSIM map backing ssim().
Plane ssim_map(const Plane& a, const Plane& b);

}  // namespace based
