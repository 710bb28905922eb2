#pragma once

#include <span>
#include <vector>

#include "based/image.hpp"

namespace based {

using Kernel1d = std::vector<double>;

/// Maps an out-of-range coordinate into [0, n) by mirror reflection that does
/// not repeat the edge sample (-1 -> 1, n -> n-2).
int reflect_index(int i, int n) noexcept;

/// Sliding-window product, kernel not flipped, reflected borders. Output has
/// the shape of `src`. Kernel dimensions must be odd and no larger than `src`.
Plane convolve2d(const Plane& src, const Plane& kernel);

/// Same as convolve2d with the outer product ky (rows) x kx (columns).
Plane convolve_separable(const Plane& src, std::span<const double> kx, std::span<const double> ky);

/// Gaussian taps at integer offsets, normalised to sum to one.
Kernel1d gaussian_kernel_1d(int size, double sigma);

/// Outer product `column * row`, shaped row.size() x column.size().
Plane outer_product(std::span<const double> column, std::span<const double> row);

/// Separable Gaussian blur with a kernel of 2*ceil(3*sigma)+1 taps, shrunk to
/// fit small planes. sigma <= 0 returns the input unchanged.
Plane gaussian_blur(const Plane& src, double sigma);

/// Per-channel gaussian_blur, rounded back to 8 bits.
RgbImage gaussian_blur(const RgbImage& src, double sigma);

}  // namespace based
