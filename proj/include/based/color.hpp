#pragma once

#include "based/image.hpp"

namespace based {

// BT.601 full-range coefficients; outputs are unrounded and unclamped.

Plane to_luma(const RgbImage& img);
YuvImage rgb_to_yuv(const RgbImage& img);

/// Replicates a [0,255] plane into an RGB image, rounding and clamping each sample.
RgbImage gray_to_rgb(const Plane& plane);

}  // namespace based
