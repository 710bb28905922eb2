#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "based/correlation.hpp"
#include "based/features.hpp"
#include "based/forest.hpp"

namespace based {

struct ManifestRow {
  std::string crop_id;
  std::string scene_id;
  std::filesystem::path blurred_path;
  std::filesystem::path deblurred_path;
  std::string method;
  std::optional<double> subjective;
  std::size_t line = 0;  // 1-based line in the manifest file
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;
};

/// Parses `crop_id,scene_id,blurred_path,deblurred_path,method,subjective`.
/// Relative image paths are resolved against the manifest's directory.
/// Throws ValidationError for header mismatches, duplicate (crop_id, method)
/// keys, malformed scores and empty manifests.
DatasetManifest ingest(const std::filesystem::path& manifest_path);

struct BenchRecord {
  std::string crop_id;
  std::string scene_id;
  std::string method;
  std::optional<double> subjective;
  FeatureVector features;
  double psnr = 0.0;  // luma, capped at kPsnrCap for identical pairs
  double ssim = 0.0;  // luma
  std::optional<double> predicted;
  std::string error;  // non-empty when the row failed

  bool ok() const noexcept { return error.empty(); }
};

struct LeaderboardRow {
  std::string method;
  std::optional<double> predicted;
  double psnr = 0.0;
  double ssim = 0.0;
  double ssim_m = 0.0;
  std::size_t n_crops = 0;
};

struct BenchResult {
  std::vector<BenchRecord> records;  // sorted by (crop_id, method)
  std::vector<LeaderboardRow> leaderboard;
  std::size_t failures = 0;
};

/// Features, baselines and (with a model) predicted scores for every row.
/// Row failures are recorded on the row and left out of the leaderboard.
BenchResult run_benchmark(const DatasetManifest& manifest, const RandomForestModel* model,
                          const FeatureParams& params = {}, unsigned jobs = 0);

/// Per-method means over successful rows, ordered by predicted score
/// (descending) when present, then by method name.
std::vector<LeaderboardRow> make_leaderboard(const std::vector<BenchRecord>& records);

struct MetricCorrelation {
  std::string metric;
  std::optional<CorrelationTriple> pooled;
  std::string pooled_error;
  std::optional<GroupedCorrelation> per_group;  // grouped by scene_id
  std::string per_group_error;
};

struct CorrelationReport {
  std::size_t n = 0;
  std::vector<MetricCorrelation> metrics;
};

/// Correlates every metric column (nine features, psnr, ssim and, when all
/// rows carry one, predicted) with the subjective score. Throws DataError
/// with fewer than two scored rows; per-column failures are recorded.
CorrelationReport correlation_report(const std::vector<BenchRecord>& records);

/// Metrics of the reference tables that need external networks.
inline const std::vector<std::string> kExternalMetrics = {"lpips", "erqa", "cpbd"};

std::string to_json(const CorrelationReport& report);
std::string to_markdown(const CorrelationReport& report);
std::string to_markdown(const std::vector<LeaderboardRow>& leaderboard);

// --- Feature CSV -------------------------------------------------------------

struct FeatureRow {
  std::string crop_id;
  std::string method;
  FeatureVector features;
  std::optional<double> subjective;
};

/// `crop_id,method,laplacian,...,reblur,subjective`, 17 significant digits.
std::string features_csv_header();
void write_features_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records);
std::vector<FeatureRow> read_features_csv(const std::filesystem::path& path);

/// Writes features.csv, leaderboard.md, correlations.json and correlations.md.
void write_benchmark_outputs(const std::filesystem::path& dir, const BenchResult& result);

}  // namespace based
