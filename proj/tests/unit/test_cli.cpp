#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "based/bench.hpp"
#include "based/filter.hpp"
#include "based/forest.hpp"
#include "based/png_io.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace based;
using namespace based::testing;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and returns exit status and stdout.
CliRun based_cli(const std::string& args) {
  const std::string cmd = std::string(BASED_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

void write_manifest_fixture(const TempDir& dir, int scenes, bool with_scores = true) {
  std::string manifest = "crop_id,scene_id,blurred_path,deblurred_path,method,subjective\n";
  for (int s = 0; s < scenes; ++s) {
    const std::string id = "c" + std::to_string(s);
    const RgbImage sharp = detailed_scene(80, 80, 200 + s);
    save_png(dir / (id + "_b.png"), gaussian_blur(sharp, 2.5));
    save_png(dir / (id + "_d.png"), sharp);
    const std::string hi = with_scores ? "1" : "", lo = with_scores ? "0" : "";
    manifest += id + ",scene" + std::to_string(s % 2) + "," + id + "_b.png," + id + "_d.png,sharp," + hi + "\n";
    manifest += id + ",scene" + std::to_string(s % 2) + "," + id + "_b.png," + id + "_b.png,identity," + lo + "\n";
  }
  dir.write("manifest.csv", manifest);
}

// Features CSV whose subjective score equals the laplacian column.
void write_learnable_features(const std::filesystem::path& path, int n) {
  Xoshiro256 rng(70);
  std::vector<BenchRecord> recs;
  for (int i = 0; i < n; ++i) {
    std::array<double, kFeatureCount> v{};
    for (double& x : v) x = rng.uniform();
    BenchRecord r;
    r.crop_id = "crop" + std::to_string(i / 2);
    r.method = i % 2 ? "m1" : "m0";
    r.features = FeatureVector::from_values(v);
    r.subjective = v[0];
    recs.push_back(r);
  }
  write_features_csv(path, recs);
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(based_cli("--help").code, 0);
  for (const char* sub : {"extract", "train", "predict", "crossval", "btfit", "benchmark"}) {
    const CliRun r = based_cli(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  EXPECT_EQ(based_cli("").code, 64);
  EXPECT_EQ(based_cli("frobnicate").code, 64);
  EXPECT_EQ(based_cli("btfit --pairs /dev/null --out x --unknown-flag").code, 64);
  TempDir dir("cli");
  write_learnable_features(dir / "f.csv", 20);
  EXPECT_EQ(based_cli("crossval --features " + q(dir / "f.csv") + " --folds 1").code, 64);
  EXPECT_EQ(based_cli("crossval --features " + q(dir / "f.csv") + " --group-by scene_id").code, 64);
}

TEST(Cli, ExtractTrainPredictBenchmark) {
  TempDir dir("cli");
  write_manifest_fixture(dir, 6);
  const auto manifest = q(dir / "manifest.csv");

  ASSERT_EQ(based_cli("extract --manifest " + manifest + " --out " + q(dir / "f1.csv")).code, 0);
  ASSERT_EQ(based_cli("extract --jobs 1 --manifest " + manifest + " --out " + q(dir / "f2.csv")).code, 0);
  const std::string f1 = read_file(dir / "f1.csv");
  EXPECT_EQ(count_lines(f1), 13u);
  EXPECT_EQ(f1, read_file(dir / "f2.csv"));

  ASSERT_EQ(based_cli("train --features " + q(dir / "f1.csv") + " --out " + q(dir / "m1.json")).code, 0);
  ASSERT_EQ(based_cli("train --jobs 1 --features " + q(dir / "f1.csv") + " --out " + q(dir / "m2.json")).code, 0);
  EXPECT_EQ(read_file(dir / "m1.json"), read_file(dir / "m2.json"));
  const auto model = load(dir / "m1.json");
  EXPECT_EQ(model.config().n_estimators, 220);
  EXPECT_EQ(model.trees().size(), 220u);
  ASSERT_EQ(based_cli("train --seed 7 --trees 5 --no-bootstrap --features " + q(dir / "f1.csv") + " --out " +
                      q(dir / "m3.json"))
                .code,
            0);
  EXPECT_EQ(load(dir / "m3.json").config().seed, 7u);
  EXPECT_FALSE(load(dir / "m3.json").config().bootstrap);

  const CliRun same = based_cli("predict --model " + q(dir / "m1.json") + " --blurred " + q(dir / "c0_b.png") +
                             " --deblurred " + q(dir / "c0_b.png"));
  ASSERT_EQ(same.code, 0);
  std::size_t used = 0;
  const double value = std::stod(same.out, &used);
  EXPECT_EQ(same.out.substr(used), "\n");
  EXPECT_EQ(value, model.predict(FeatureVector::from_values(std::array<double, kFeatureCount>{0, 0, 0, 0, 0, 1, 0, 0, 0})));

  save_png(dir / "small.png", RgbImage(64, 64));
  EXPECT_EQ(based_cli("predict --model " + q(dir / "m1.json") + " --blurred " + q(dir / "c0_b.png") +
                      " --deblurred " + q(dir / "small.png"))
                .code,
            1);

  const CliRun bench = based_cli("benchmark --manifest " + manifest + " --model " + q(dir / "m1.json") + " --out-dir " +
                              q(dir / "out1"));
  ASSERT_EQ(bench.code, 0);
  EXPECT_NE(bench.out.find("| sharp |"), std::string::npos);
  ASSERT_EQ(based_cli("benchmark --jobs 1 --manifest " + manifest + " --model " + q(dir / "m1.json") +
                      " --out-dir " + q(dir / "out2"))
                .code,
            0);
  for (const char* name : {"features.csv", "leaderboard.md", "correlations.json"}) {
    ASSERT_TRUE(std::filesystem::exists(dir / "out1" / name)) << name;
    EXPECT_EQ(read_file(dir / "out1" / name), read_file(dir / "out2" / name)) << name;
  }
  EXPECT_EQ(based_cli("benchmark --manifest " + manifest + " --model " + q(dir / "absent.json") + " --out-dir " +
                      q(dir / "out3"))
                .code,
            1);
}

TEST(Cli, PartialFailuresExitTwo) {
  TempDir dir("cli");
  write_manifest_fixture(dir, 2);
  std::string manifest = read_file(dir / "manifest.csv");
  manifest += "c0,scene0,c0_b.png,nowhere.png,ghost,\n";
  dir.write("manifest.csv", manifest);
  EXPECT_EQ(based_cli("extract --manifest " + q(dir / "manifest.csv") + " --out " + q(dir / "f.csv")).code, 2);
  EXPECT_EQ(count_lines(read_file(dir / "f.csv")), 5u);
}

TEST(Cli, TrainNeedsSubjectiveColumn) {
  TempDir dir("cli");
  dir.write("f.csv", "crop_id,method,laplacian,fft,gabor,hough,hog,ssim_m,sobel,lbp,reblur\nc,m,1,2,3,4,5,6,7,8,9\n");
  EXPECT_EQ(based_cli("train --features " + q(dir / "f.csv") + " --out " + q(dir / "m.json")).code, 1);
  EXPECT_FALSE(std::filesystem::exists(dir / "m.json"));
}

TEST(Cli, CrossvalSweep) {
  TempDir dir("cli");
  write_learnable_features(dir / "f.csv", 120);
  const CliRun r = based_cli("crossval --features " + q(dir / "f.csv") + " --trees 20,40 --folds 4 --out " + q(dir / "cv.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(r.out), 3u);
  const auto doc = nlohmann::json::parse(read_file(dir / "cv.json"));
  ASSERT_EQ(doc["runs"].size(), 2u);
  for (const auto& run : doc["runs"]) {
    EXPECT_GE(run["srcc"].get<double>(), 0.99);
    EXPECT_EQ(run["folds"].size(), 4u);
  }
  EXPECT_EQ(doc["runs"][1]["trees"], 40);
}

TEST(Cli, CrossvalGroupsByScene) {
  TempDir dir("cli");
  write_manifest_fixture(dir, 6);
  ASSERT_EQ(based_cli("extract --manifest " + q(dir / "manifest.csv") + " --out " + q(dir / "f.csv")).code, 0);
  const CliRun r = based_cli("crossval --features " + q(dir / "f.csv") + " --folds 2 --trees 10 --group-by scene_id --manifest " +
                          q(dir / "manifest.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(based_cli("crossval --features " + q(dir / "f.csv") + " --folds 3 --trees 10 --group-by scene_id --manifest " +
                      q(dir / "manifest.csv"))
                .code,
            1);
}

TEST(Cli, Btfit) {
  TempDir dir("cli");
  dir.write("p.csv", "a,b,wins_a,wins_b,ties\nA,B,3,1,0\n");
  ASSERT_EQ(based_cli("btfit --pairs " + q(dir / "p.csv") + " --out " + q(dir / "s.csv")).code, 0);
  std::istringstream in(read_file(dir / "s.csv"));
  std::string header, a, b;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(header, "method,score");
  EXPECT_EQ(a.substr(0, 2), "A,");
  EXPECT_EQ(b, "B,0");
  EXPECT_NEAR(std::stod(a.substr(2)), std::log(3.0), 1e-6);

  dir.write("d.csv", "a,b,wins_a,wins_b,ties\nA,B,3,1,0\nC,D,1,1,0\n");
  const std::string cmd = std::string(BASED_CLI_PATH) + " btfit --pairs " + q(dir / "d.csv") + " --out " +
                          q(dir / "s2.csv") + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string err;
  std::array<char, 512> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) err.append(buf.data(), n);
  const int status = ::pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 1);
  EXPECT_NE(err.find("{A, B}"), std::string::npos) << err;
  EXPECT_NE(err.find("{C, D}"), std::string::npos) << err;
}
