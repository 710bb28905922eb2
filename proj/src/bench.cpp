#include "based/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "based/baselines.hpp"
#include "based/color.hpp"
#include "based/csv.hpp"
#include "based/errors.hpp"
#include "based/parallel.hpp"
#include "based/png_io.hpp"

namespace based {

namespace {

const std::vector<std::string> kManifestHeader = {"crop_id",        "scene_id", "blurred_path",
                                                  "deblurred_path", "method",   "subjective"};

std::optional<double> parse_optional_double(const std::string& text, const std::string& where) {
  if (text.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": '" + text + "' is not a finite number");
  }
}

double parse_double(const std::string& text, const std::string& where) {
  auto v = parse_optional_double(text, where);
  if (!v) throw ValidationError(where + ": value is missing");
  return *v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

DatasetManifest ingest(const std::filesystem::path& manifest_path) {
  const CsvTable table = read_csv(manifest_path);
  require_header(table, kManifestHeader, manifest_path.string());
  if (table.rows.empty()) throw ValidationError(manifest_path.string() + ": manifest has no rows");

  const auto base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base / path : path;
  };

  DatasetManifest manifest;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    const std::string where = manifest_path.string() + " row " + std::to_string(line);
    for (std::size_t c = 0; c < 5; ++c) {
      if (f[c].empty()) throw ValidationError(where + ": column '" + kManifestHeader[c] + "' is empty");
    }
    auto [it, inserted] = seen.emplace(std::make_pair(f[0], f[4]), line);
    if (!inserted) {
      throw ValidationError(where + ": duplicate (crop_id, method) = (" + f[0] + ", " + f[4] +
                            ") first seen on row " + std::to_string(it->second));
    }
    manifest.rows.push_back({f[0], f[1], resolve(f[2]), resolve(f[3]), f[4],
                             parse_optional_double(f[5], where), line});
  }
  return manifest;
}

BenchResult run_benchmark(const DatasetManifest& manifest, const RandomForestModel* model,
                          const FeatureParams& params, unsigned jobs) {
  if (manifest.rows.empty()) throw ValidationError("manifest has no rows");
  params.validate();

  std::vector<BenchRecord> records(manifest.rows.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const ManifestRow& row = manifest.rows[i];
    BenchRecord& rec = records[i];
    rec.crop_id = row.crop_id;
    rec.scene_id = row.scene_id;
    rec.method = row.method;
    rec.subjective = row.subjective;
    try {
      const RgbImage blurred = load_png(row.blurred_path);
      const RgbImage deblurred = load_png(row.deblurred_path);
      rec.features = extract_all(blurred, deblurred, params);
      const Plane yb = to_luma(blurred);
      const Plane yd = to_luma(deblurred);
      rec.psnr = psnr(yb, yd, 255.0, true);
      rec.ssim = ssim(yb, yd);
      if (model) rec.predicted = model->predict(rec.features);
    } catch (const std::exception& e) {
      rec.error = "row " + std::to_string(row.line) + " (" + row.crop_id + ", " + row.method +
                  "): " + e.what();
    }
  });

  std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.crop_id, a.method) < std::tie(b.crop_id, b.method);
  });

  BenchResult result;
  result.failures = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const BenchRecord& r) { return !r.ok(); }));
  result.leaderboard = make_leaderboard(records);
  result.records = std::move(records);
  return result;
}

std::vector<LeaderboardRow> make_leaderboard(const std::vector<BenchRecord>& records) {
  struct Acc {
    double predicted = 0.0, psnr = 0.0, ssim = 0.0, ssim_m = 0.0;
    std::size_t n = 0, n_predicted = 0;
  };
  std::map<std::string, Acc> by_method;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    Acc& a = by_method[r.method];
    a.psnr += r.psnr;
    a.ssim += r.ssim;
    a.ssim_m += r.features.ssim_m;
    if (r.predicted) {
      a.predicted += *r.predicted;
      ++a.n_predicted;
    }
    ++a.n;
  }
  std::vector<LeaderboardRow> rows;
  for (const auto& [method, a] : by_method) {
    const double n = static_cast<double>(a.n);
    LeaderboardRow row{method, std::nullopt, a.psnr / n, a.ssim / n, a.ssim_m / n, a.n};
    if (a.n_predicted == a.n) row.predicted = a.predicted / n;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.predicted && b.predicted) return *a.predicted > *b.predicted;
    return a.predicted.has_value() && !b.predicted.has_value();
  });
  return rows;
}

CorrelationReport correlation_report(const std::vector<BenchRecord>& records) {
  std::vector<const BenchRecord*> scored;
  for (const auto& r : records) {
    if (r.ok() && r.subjective) scored.push_back(&r);
  }
  if (scored.size() < 2) {
    throw DataError("correlation report needs at least 2 rows with a subjective score, got " +
                    std::to_string(scored.size()));
  }

  std::vector<double> subjective;
  std::vector<int> group;
  std::map<std::string, int> group_ids;
  for (const auto* r : scored) {
    subjective.push_back(*r->subjective);
    group.push_back(group_ids.emplace(r->scene_id, static_cast<int>(group_ids.size())).first->second);
  }

  std::vector<std::pair<std::string, std::vector<double>>> columns;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<double> col;
    for (const auto* r : scored) col.push_back(r->features.values()[f]);
    columns.emplace_back(std::string(kFeatureNames[f]), std::move(col));
  }
  {
    std::vector<double> p, s;
    for (const auto* r : scored) {
      p.push_back(r->psnr);
      s.push_back(r->ssim);
    }
    columns.emplace_back("psnr", std::move(p));
    columns.emplace_back("ssim", std::move(s));
  }
  if (std::all_of(scored.begin(), scored.end(), [](const BenchRecord* r) { return r->predicted.has_value(); })) {
    std::vector<double> col;
    for (const auto* r : scored) col.push_back(*r->predicted);
    columns.emplace_back("predicted", std::move(col));
  }

  CorrelationReport report;
  report.n = scored.size();
  for (const auto& [name, col] : columns) {
    MetricCorrelation m;
    m.metric = name;
    try {
      m.pooled = correlations(col, subjective);
    } catch (const Error& e) {
      m.pooled_error = e.what();
    }
    try {
      m.per_group = grouped_correlations(col, subjective, group);
    } catch (const Error& e) {
      m.per_group_error = e.what();
    }
    report.metrics.push_back(std::move(m));
  }
  return report;
}

std::string to_json(const CorrelationReport& report) {
  using nlohmann::ordered_json;
  auto triple = [](const CorrelationTriple& t) {
    ordered_json j;
    j["plcc"] = t.plcc;
    j["srcc"] = t.srcc;
    j["krcc"] = t.krcc;
    return j;
  };
  ordered_json doc;
  doc["n"] = report.n;
  ordered_json pooled = ordered_json::object();
  ordered_json grouped = ordered_json::object();
  for (const auto& m : report.metrics) {
    if (m.pooled) {
      pooled[m.metric] = triple(*m.pooled);
    } else {
      pooled[m.metric] = {{"error", m.pooled_error}};
    }
    if (m.per_group) {
      ordered_json g = triple(m.per_group->mean);
      g["groups"] = m.per_group->groups_used;
      grouped[m.metric] = std::move(g);
    } else {
      grouped[m.metric] = {{"error", m.per_group_error}};
    }
  }
  doc["pooled"] = std::move(pooled);
  doc["per_group"] = std::move(grouped);
  doc["external"] = kExternalMetrics;
  return doc.dump(2) + "\n";
}

std::string to_markdown(const CorrelationReport& report) {
  std::ostringstream out;
  out << "| Metric | PLCC | SRCC | KRCC | PLCC (per scene) | SRCC (per scene) | KRCC (per scene) |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& m : report.metrics) {
    out << "| " << m.metric;
    if (m.pooled) {
      out << " | " << fixed4(m.pooled->plcc) << " | " << fixed4(m.pooled->srcc) << " | "
          << fixed4(m.pooled->krcc);
    } else {
      out << " | n/a | n/a | n/a";
    }
    if (m.per_group) {
      out << " | " << fixed4(m.per_group->mean.plcc) << " | " << fixed4(m.per_group->mean.srcc)
          << " | " << fixed4(m.per_group->mean.krcc);
    } else {
      out << " | n/a | n/a | n/a";
    }
    out << " |\n";
  }
  for (const auto& ext : kExternalMetrics) {
    out << "| " << ext << " | external | external | external | external | external | external |\n";
  }
  out << "\nn = " << report.n << "\n";
  return out.str();
}

std::string to_markdown(const std::vector<LeaderboardRow>& leaderboard) {
  std::ostringstream out;
  out << "| Method | Predicted | PSNR | SSIM | SSIM-M | LPIPS | ERQA | Crops |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : leaderboard) {
    out << "| " << r.method << " | " << (r.predicted ? fixed4(*r.predicted) : "n/a") << " | "
        << fixed4(r.psnr) << " | " << fixed4(r.ssim) << " | " << fixed4(r.ssim_m)
        << " | external | external | " << r.n_crops << " |\n";
  }
  return out.str();
}

// --- Feature CSV -------------------------------------------------------------

std::string features_csv_header() {
  std::string h = "crop_id,method";
  for (auto name : kFeatureNames) h += "," + std::string(name);
  return h + ",subjective";
}

void write_features_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  out << features_csv_header() << '\n';
  for (const auto& r : records) {
    if (!r.ok()) continue;
    out << csv_field(r.crop_id) << ',' << csv_field(r.method);
    for (double v : r.features.values()) out << ',' << format_double(v);
    out << ',';
    if (r.subjective) out << format_double(*r.subjective);
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<FeatureRow> read_features_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::vector<std::string> expected = {"crop_id", "method"};
  for (auto name : kFeatureNames) expected.emplace_back(name);
  expected.emplace_back("subjective");
  require_header(table, expected, path.string());

  std::vector<FeatureRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where = path.string() + " row " + std::to_string(table.line_numbers[r]);
    std::array<double, kFeatureCount> v{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) v[k] = parse_double(f[2 + k], where);
    rows.push_back({f[0], f[1], FeatureVector::from_values(v),
                    parse_optional_double(f[2 + kFeatureCount], where)});
  }
  return rows;
}

void write_benchmark_outputs(const std::filesystem::path& dir, const BenchResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_features_csv(dir / "features.csv", result.records);
  write_text(dir / "leaderboard.md", to_markdown(result.leaderboard));

  std::string json;
  std::string md;
  try {
    const CorrelationReport report = correlation_report(result.records);
    json = to_json(report);
    md = to_markdown(report);
  } catch (const DataError& e) {
    nlohmann::ordered_json doc;
    doc["n"] = 0;
    doc["error"] = e.what();
    doc["external"] = kExternalMetrics;
    json = doc.dump(2) + "\n";
    md = std::string("No correlations: ") + e.what() + "\n";
  }
  write_text(dir / "correlations.json", json);
  write_text(dir / "correlations.md", md);
}

}  // namespace based
