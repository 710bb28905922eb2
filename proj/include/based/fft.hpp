#pragma once

#include "based/image.hpp"

namespace based {

/// Unnormalised forward 2-D DFT. Any dimensions are accepted.
ComplexPlane fft2(const Plane& src);
ComplexPlane fft2(const ComplexPlane& src);

/// Inverse 2-D DFT scaled by 1/(W*H), so ifft2(fft2(x)) == x.
ComplexPlane ifft2(const ComplexPlane& src);

/// Moves the DC bin to (floor(H/2), floor(W/2)).
ComplexPlane fftshift(const ComplexPlane& src);

/// Exact inverse of fftshift, also for odd dimensions.
ComplexPlane ifftshift(const ComplexPlane& src);

}  // namespace based
