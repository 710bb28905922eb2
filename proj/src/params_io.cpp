#include "based/params_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "based/errors.hpp"

namespace based {

namespace {

using json = nlohmann::ordered_json;

template <typename T>
void take(const json& doc, const char* key, T& field) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    field = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("parameter '") + key + "' has the wrong type");
  }
  if constexpr (std::is_same_v<T, int>) {
    if (!it->is_number_integer()) throw ConfigError(std::string("parameter '") + key + "' must be an integer");
  }
}

}  // namespace

FeatureParams params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parameter file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("parameter file must hold a JSON object");

  static const char* const known[] = {"fft_cutoff",     "sobel_size",       "reblur_size",    "reblur_sigma",
                                      "gabor_orientations", "gabor_size",   "gabor_sigma",    "gabor_wavelength",
                                      "gabor_gamma",    "hog_cell",         "hog_bins",       "hough_theta_bins",
                                      "hough_peak_frac"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown parameter '" + key + "'");
    }
  }

  FeatureParams p;
  take(doc, "fft_cutoff", p.fft_cutoff);
  take(doc, "sobel_size", p.sobel_size);
  take(doc, "reblur_size", p.reblur_size);
  take(doc, "reblur_sigma", p.reblur_sigma);
  take(doc, "gabor_orientations", p.gabor_orientations);
  take(doc, "gabor_size", p.gabor_size);
  take(doc, "gabor_sigma", p.gabor_sigma);
  take(doc, "gabor_wavelength", p.gabor_wavelength);
  take(doc, "gabor_gamma", p.gabor_gamma);
  take(doc, "hog_cell", p.hog_cell);
  take(doc, "hog_bins", p.hog_bins);
  take(doc, "hough_theta_bins", p.hough_theta_bins);
  take(doc, "hough_peak_frac", p.hough_peak_frac);
  p.validate();
  return p;
}

FeatureParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str());
}

std::string to_json(const FeatureParams& p) {
  json doc = {{"fft_cutoff", p.fft_cutoff},
              {"sobel_size", p.sobel_size},
              {"reblur_size", p.reblur_size},
              {"reblur_sigma", p.reblur_sigma},
              {"gabor_orientations", p.gabor_orientations},
              {"gabor_size", p.gabor_size},
              {"gabor_sigma", p.gabor_sigma},
              {"gabor_wavelength", p.gabor_wavelength},
              {"gabor_gamma", p.gabor_gamma},
              {"hog_cell", p.hog_cell},
              {"hog_bins", p.hog_bins},
              {"hough_theta_bins", p.hough_theta_bins},
              {"hough_peak_frac", p.hough_peak_frac}};
  return doc.dump(2);
}

}  // namespace based
