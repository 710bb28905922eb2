#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "based/baselines.hpp"
#include "based/bench.hpp"
#include "based/errors.hpp"
#include "based/filter.hpp"
#include "based/png_io.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace based;
using namespace based::testing;

namespace {

constexpr const char* kHeader = "crop_id,scene_id,blurred_path,deblurred_path,method,subjective\n";

// A small blur ladder: per scene a blurred input, a sharp output and an
// identity output, written as PNGs with a manifest next to them.
struct LadderFixture {
  TempDir dir{"bench"};
  std::vector<std::string> scenes;

  explicit LadderFixture(int n_scenes, int size = 96) {
    std::string manifest = kHeader;
    for (int s = 0; s < n_scenes; ++s) {
      const std::string id = "s" + std::to_string(s);
      scenes.push_back(id);
      const RgbImage sharp = detailed_scene(size, size, 100 + s);
      const RgbImage blurred = gaussian_blur(sharp, 3.0);
      save_png(dir / (id + "_sharp.png"), sharp);
      save_png(dir / (id + "_blur.png"), blurred);
      manifest += id + "," + id + "," + id + "_blur.png," + id + "_sharp.png,sharp,2\n";
      manifest += id + "," + id + "," + id + "_blur.png," + id + "_blur.png,identity,0\n";
    }
    dir.write("manifest.csv", manifest);
  }
};

BenchRecord record(const std::string& crop, const std::string& scene, const std::string& method,
                   std::optional<double> subjective, const FeatureVector& fv, double psnr, double ssim,
                   std::optional<double> predicted = std::nullopt) {
  BenchRecord r;
  r.crop_id = crop;
  r.scene_id = scene;
  r.method = method;
  r.subjective = subjective;
  r.features = fv;
  r.psnr = psnr;
  r.ssim = ssim;
  r.predicted = predicted;
  return r;
}

const MetricCorrelation& metric(const CorrelationReport& report, const std::string& name) {
  for (const auto& m : report.metrics) {
    if (m.metric == name) return m;
  }
  throw std::runtime_error("no metric " + name);
}

}  // namespace

TEST(Ingest, ValidManifest) {
  TempDir dir("ingest");
  dir.write("m.csv", std::string(kHeader) + "c1,s1,b.png,/abs/d.png,m1,0.5\nc1,s1,b.png,d2.png,m2,\n");
  const auto m = ingest(dir / "m.csv");
  ASSERT_EQ(m.rows.size(), 2u);
  EXPECT_EQ(m.rows[0].blurred_path, dir / "b.png");
  EXPECT_EQ(m.rows[0].deblurred_path, std::filesystem::path("/abs/d.png"));
  EXPECT_EQ(m.rows[0].subjective, 0.5);
  EXPECT_FALSE(m.rows[1].subjective.has_value());
  EXPECT_EQ(m.rows[1].line, 3u);
}

TEST(Ingest, DuplicateKeyNamesRow) {
  TempDir dir("ingest");
  dir.write("m.csv", std::string(kHeader) + "c1,s1,b.png,d.png,m1,1\nc1,s1,b.png,e.png,m1,2\n");
  try {
    ingest(dir / "m.csv");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, HeaderTypoNamesColumn) {
  TempDir dir("ingest");
  dir.write("m.csv", "crop_id,scene_id,blured_path,deblurred_path,method,subjective\nc,s,b,d,m,\n");
  try {
    ingest(dir / "m.csv");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("blured_path"), std::string::npos) << e.what();
  }
}

TEST(Ingest, EmptyMalformedAndMissing) {
  TempDir dir("ingest");
  dir.write("empty.csv", kHeader);
  EXPECT_THROW(ingest(dir / "empty.csv"), ValidationError);
  dir.write("bad.csv", std::string(kHeader) + "c,s,b,d,m,abc\n");
  EXPECT_THROW(ingest(dir / "bad.csv"), ValidationError);
  EXPECT_THROW(ingest(dir / "absent.csv"), IoError);
  EXPECT_THROW(run_benchmark(DatasetManifest{}, nullptr), ValidationError);
}

TEST(Benchmark, IdentityPassThroughAndRowFailures) {
  LadderFixture fx(3);
  std::string manifest = read_file(fx.dir / "manifest.csv");
  manifest += "s0,s0,s0_blur.png,missing.png,broken,\n";
  fx.dir.write("manifest.csv", manifest);

  std::vector<TrainingRow> rows;
  Xoshiro256 rng(60);
  for (int i = 0; i < 40; ++i) {
    std::array<double, kFeatureCount> v{};
    for (double& x : v) x = rng.uniform();
    rows.push_back({FeatureVector::from_values(v), v[0] + v[5]});
  }
  TrainConfig c;
  c.n_estimators = 20;
  const auto model = fit(rows, c);
  const double identity_score = model.predict(FeatureVector::from_values(std::array<double, kFeatureCount>{0, 0, 0, 0, 0, 1, 0, 0, 0}));

  const auto result = run_benchmark(ingest(fx.dir / "manifest.csv"), &model, {}, 2);
  ASSERT_EQ(result.records.size(), 7u);
  EXPECT_EQ(result.failures, 1u);
  for (std::size_t i = 1; i < result.records.size(); ++i) {
    const auto& a = result.records[i - 1];
    const auto& b = result.records[i];
    EXPECT_LT(std::tie(a.crop_id, a.method), std::tie(b.crop_id, b.method));
  }
  for (const auto& r : result.records) {
    if (r.method == "broken") {
      EXPECT_FALSE(r.ok());
      EXPECT_NE(r.error.find("row 8"), std::string::npos) << r.error;
    } else if (r.method == "identity") {
      ASSERT_TRUE(r.ok()) << r.error;
      EXPECT_EQ(*r.predicted, identity_score);
      EXPECT_EQ(r.psnr, kPsnrCap);
      EXPECT_DOUBLE_EQ(r.ssim, 1.0);
    }
  }
  ASSERT_EQ(result.leaderboard.size(), 2u);
  for (const auto& row : result.leaderboard) EXPECT_EQ(row.n_crops, 3u);
}

TEST(Benchmark, LeaderboardMeansMatchRecords) {
  LadderFixture fx(4);
  const auto result = run_benchmark(ingest(fx.dir / "manifest.csv"), nullptr, {}, 1);
  for (const auto& row : result.leaderboard) {
    double psnr = 0, ssim = 0, ssim_m = 0;
    std::size_t n = 0;
    for (const auto& r : result.records) {
      if (r.method != row.method) continue;
      psnr += r.psnr;
      ssim += r.ssim;
      ssim_m += r.features.ssim_m;
      ++n;
    }
    EXPECT_EQ(row.n_crops, n);
    EXPECT_NEAR(row.psnr, psnr / n, 1e-12);
    EXPECT_NEAR(row.ssim, ssim / n, 1e-12);
    EXPECT_NEAR(row.ssim_m, ssim_m / n, 1e-12);
    EXPECT_FALSE(row.predicted.has_value());
  }
  EXPECT_EQ(result.leaderboard[0].method, "identity");
}

TEST(Benchmark, LadderTrainedModelRanksSharpFirst) {
  LadderFixture fx(8);
  const auto manifest = ingest(fx.dir / "manifest.csv");
  const auto unscored = run_benchmark(manifest, nullptr, {}, 0);
  std::vector<TrainingRow> rows;
  for (const auto& r : unscored.records) rows.push_back({r.features, *r.subjective});
  TrainConfig c;
  c.n_estimators = 30;
  const auto model = fit(rows, c);
  const auto result = run_benchmark(manifest, &model, {}, 0);
  ASSERT_EQ(result.leaderboard.size(), 2u);
  EXPECT_EQ(result.leaderboard[0].method, "sharp");
  EXPECT_GT(*result.leaderboard[0].predicted, *result.leaderboard[1].predicted);
}

TEST(Benchmark, RerunsAreByteIdentical) {
  LadderFixture fx(3);
  const auto manifest = ingest(fx.dir / "manifest.csv");
  TempDir a("out"), b("out");
  write_benchmark_outputs(a.path(), run_benchmark(manifest, nullptr, {}, 1));
  write_benchmark_outputs(b.path(), run_benchmark(manifest, nullptr, {}, 3));
  for (const char* name : {"features.csv", "leaderboard.md", "correlations.json", "correlations.md"}) {
    ASSERT_TRUE(std::filesystem::exists(a / name)) << name;
    EXPECT_EQ(read_file(a / name), read_file(b / name)) << name;
  }
  const auto rows = read_features_csv(a / "features.csv");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].crop_id, "s0");
  EXPECT_EQ(rows[0].method, "identity");
  EXPECT_EQ(rows[0].subjective, 0.0);
}

TEST(FeaturesCsv, RoundTripIsExact) {
  TempDir dir("fcsv");
  Xoshiro256 rng(61);
  std::vector<BenchRecord> recs;
  for (int i = 0; i < 5; ++i) {
    std::array<double, kFeatureCount> v{};
    for (double& x : v) x = rng.uniform() * 1e3 - 500.0;
    recs.push_back(record("c" + std::to_string(i), "s", "m", i == 2 ? std::nullopt : std::optional<double>(i / 3.0),
                          FeatureVector::from_values(v), 0, 0));
  }
  write_features_csv(dir / "f.csv", recs);
  const auto rows = read_features_csv(dir / "f.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].features, recs[i].features);
    EXPECT_EQ(rows[i].subjective, recs[i].subjective);
  }
  EXPECT_EQ(features_csv_header(),
            "crop_id,method,laplacian,fft,gabor,hough,hog,ssim_m,sobel,lbp,reblur,subjective");
}

TEST(CorrelationReport, PredictedEqualsSubjective) {
  std::vector<BenchRecord> recs;
  Xoshiro256 rng(62);
  for (int i = 0; i < 12; ++i) {
    std::array<double, kFeatureCount> v{};
    for (double& x : v) x = rng.uniform();
    const double s = rng.uniform();
    recs.push_back(record("c" + std::to_string(i), "g" + std::to_string(i % 3), "m", s, FeatureVector::from_values(v),
                          rng.uniform(), rng.uniform(), s));
  }
  const auto report = correlation_report(recs);
  EXPECT_EQ(report.n, 12u);
  const auto& p = metric(report, "predicted");
  ASSERT_TRUE(p.pooled.has_value());
  EXPECT_DOUBLE_EQ(p.pooled->plcc, 1.0);
  EXPECT_DOUBLE_EQ(p.pooled->srcc, 1.0);
  EXPECT_DOUBLE_EQ(p.pooled->krcc, 1.0);
  ASSERT_TRUE(p.per_group.has_value());
  EXPECT_EQ(p.per_group->groups_used, 3u);
  EXPECT_EQ(report.metrics.size(), kFeatureCount + 3);
}

TEST(CorrelationReport, ConstantSubjectiveIsReportedPerColumn) {
  std::vector<BenchRecord> recs;
  for (int i = 0; i < 4; ++i) {
    recs.push_back(record("c" + std::to_string(i), "g", "m", 1.0, FeatureVector::from_values(std::array<double, kFeatureCount>{1.0 * i, 0, 0, 0, 0, 0, 0, 0, 0}), i, i));
  }
  const auto report = correlation_report(recs);
  for (const auto& m : report.metrics) {
    EXPECT_FALSE(m.pooled.has_value()) << m.metric;
    EXPECT_FALSE(m.pooled_error.empty()) << m.metric;
  }
  EXPECT_NE(to_json(report).find("error"), std::string::npos);
}

TEST(CorrelationReport, LaplacianTarget) {
  std::vector<BenchRecord> recs;
  Xoshiro256 rng(63);
  for (int i = 0; i < 30; ++i) {
    std::array<double, kFeatureCount> v{};
    for (double& x : v) x = rng.uniform();
    recs.push_back(record("c" + std::to_string(i), "g", "m", v[0], FeatureVector::from_values(v), 0, 0));
  }
  const auto report = correlation_report(recs);
  EXPECT_GE(metric(report, "laplacian").pooled->plcc, 0.999);
  EXPECT_THROW(correlation_report({recs[0]}), DataError);
}

TEST(Markdown, LeaderboardMarksExternalMetrics) {
  const std::vector<LeaderboardRow> rows = {{"a", 0.5, 30.0, 0.9, 0.95, 3}};
  const std::string md = to_markdown(rows);
  EXPECT_NE(md.find("| Method |"), std::string::npos);
  EXPECT_NE(md.find("external"), std::string::npos);
  EXPECT_NE(md.find("| a |"), std::string::npos);
}
