#include "based/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace based {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

ComplexPlane transform(const ComplexPlane& src, int sign) {
  ComplexPlane out(src.width(), src.height());
  // FFTW_ESTIMATE never touches the arrays during planning, so `in` may alias const data.
  auto* in = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(src.data().data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data().data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(src.height(), src.width(), in, dst, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

ComplexPlane shift(const ComplexPlane& src, int dx, int dy) {
  const int w = src.width();
  const int h = src.height();
  ComplexPlane out(w, h);
  for (int y = 0; y < h; ++y) {
    const int ty = (y + dy) % h;
    for (int x = 0; x < w; ++x) out.at((x + dx) % w, ty) = src.at(x, y);
  }
  return out;
}

}  // namespace

ComplexPlane fft2(const Plane& src) {
  ComplexPlane c(src.width(), src.height());
  for (std::size_t i = 0; i < src.size(); ++i) c.data()[i] = {src.data()[i], 0.0};
  return fft2(c);
}

ComplexPlane fft2(const ComplexPlane& src) { return transform(src, FFTW_FORWARD); }

ComplexPlane ifft2(const ComplexPlane& src) {
  ComplexPlane out = transform(src, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(src.width()) * src.height());
  for (auto& v : out.data()) v *= scale;
  return out;
}

ComplexPlane fftshift(const ComplexPlane& src) {
  return shift(src, src.width() / 2, src.height() / 2);
}

ComplexPlane ifftshift(const ComplexPlane& src) {
  return shift(src, (src.width() + 1) / 2, (src.height() + 1) / 2);
}

}  // namespace based
