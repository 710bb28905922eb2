#include "based/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>

#include "based/errors.hpp"

namespace based {

namespace {

constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

// RAII owner for the simplified-API control struct.
struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

RgbImage load_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  unsigned char header[8] = {};
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (in.gcount() != sizeof header || std::memcmp(header, kPngSignature, sizeof header) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  in.close();

  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw FormatError("'" + path.string() + "': " + png.image.message);
  }
  if (png.image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw FormatError("'" + path.string() + "': only 8-bit PNGs are supported");
  }
  png.image.format = PNG_FORMAT_RGB;
  const int width = static_cast<int>(png.image.width);
  const int height = static_cast<int>(png.image.height);
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, data.data(), 0, nullptr)) {
    throw FormatError("'" + path.string() + "': " + png.image.message);
  }
  return RgbImage(width, height, std::move(data));
}

void save_png(const std::filesystem::path& path, const RgbImage& img) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width());
  png.image.height = static_cast<png_uint_32>(img.height());
  png.image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
    throw IoError("cannot write '" + path.string() + "': " + png.image.message);
  }
}

}  // namespace based
