// based: feature extraction, training, evaluation and benchmarking.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "based/bench.hpp"
#include "based/crossval.hpp"
#include "based/errors.hpp"
#include "based/features.hpp"
#include "based/forest.hpp"
#include "based/params_io.hpp"
#include "based/png_io.hpp"
#include "based/subjective.hpp"

namespace fs = std::filesystem;
using namespace based;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("based");
  logger->set_pattern("based: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("BASED_LOG");
  if (!env || !*env) return;
  static const std::map<std::string, spdlog::level::level_enum> levels = {
      {"error", spdlog::level::err},
      {"warn", spdlog::level::warn},
      {"info", spdlog::level::info},
      {"debug", spdlog::level::debug}};
  auto it = levels.find(env);
  if (it == levels.end()) {
    spdlog::warn("ignoring BASED_LOG={} (expected error, warn, info or debug)", env);
    return;
  }
  spdlog::set_level(it->second);
}

FeatureParams params_or_default(const std::string& path) {
  if (path.empty()) return {};
  spdlog::info("feature parameters from {}", path);
  return load_params(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// Forest flags shared by train and crossval.
struct ForestFlags {
  int max_features = static_cast<int>(kFeatureCount);
  int min_samples_leaf = 1;
  int max_depth = 0;
  bool no_bootstrap = false;
  std::uint64_t seed = 42;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_flag("--no-bootstrap", no_bootstrap, "Grow every tree on all rows");
    app->add_option("--max-features", max_features, "Features tried per split")
        ->check(CLI::Range(1, static_cast<int>(kFeatureCount)))
        ->capture_default_str();
    app->add_option("--min-samples-leaf", min_samples_leaf, "Minimum rows per leaf")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-depth", max_depth, "Maximum tree depth (0 = unlimited)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  TrainConfig config(int trees) const {
    TrainConfig c;
    c.n_estimators = trees;
    c.max_features = max_features;
    c.min_samples_leaf = min_samples_leaf;
    if (max_depth > 0) c.max_depth = max_depth;
    c.bootstrap = !no_bootstrap;
    c.seed = seed;
    return c;
  }
};

// Rows of a features CSV that carry a subjective score.
std::vector<TrainingRow> training_rows(const std::vector<FeatureRow>& rows, std::vector<const FeatureRow*>* used) {
  std::vector<TrainingRow> out;
  std::size_t skipped = 0;
  for (const auto& r : rows) {
    if (!r.subjective) {
      ++skipped;
      continue;
    }
    out.push_back({r.features, *r.subjective});
    if (used) used->push_back(&r);
  }
  if (skipped) spdlog::warn("{} rows without a subjective score skipped", skipped);
  if (out.size() < 2) {
    throw DataError("need at least 2 rows with a subjective score, found " + std::to_string(out.size()));
  }
  return out;
}

int report_failures(const BenchResult& result) {
  for (const auto& r : result.records) {
    if (!r.ok()) spdlog::error("{}", r.error);
  }
  if (result.failures) {
    spdlog::warn("{} of {} rows failed", result.failures, result.records.size());
    return kExitPartial;
  }
  return kExitOk;
}

// --- subcommands --------------------------------------------------------------

int run_extract(const fs::path& manifest_path, const fs::path& out, const std::string& params_path, unsigned jobs) {
  const FeatureParams params = params_or_default(params_path);
  const DatasetManifest manifest = ingest(manifest_path);
  spdlog::info("{} manifest rows", manifest.rows.size());
  const BenchResult result = run_benchmark(manifest, nullptr, params, jobs);
  write_features_csv(out, result.records);
  std::printf("extracted %zu of %zu rows to %s\n", result.records.size() - result.failures, result.records.size(),
              out.string().c_str());
  return report_failures(result);
}

int run_train(const fs::path& features, const fs::path& out, int trees, const ForestFlags& flags, unsigned jobs) {
  const auto rows = training_rows(read_features_csv(features), nullptr);
  const TrainConfig config = flags.config(trees);
  config.validate();
  spdlog::info("training {} trees on {} rows", config.n_estimators, rows.size());
  const RandomForestModel model = fit(rows, config, jobs);
  save(model, out);
  std::printf("trained %d trees on %zu rows, saved to %s\n", config.n_estimators, rows.size(), out.string().c_str());
  if (config.bootstrap && rows.size() >= 10) {
    std::printf("out-of-bag R2: %.4f\n", oob_r2(rows, config, jobs));
  }
  return kExitOk;
}

int run_predict(const fs::path& model_path, const fs::path& blurred, const fs::path& deblurred,
                const std::string& params_path) {
  const FeatureParams params = params_or_default(params_path);
  const RandomForestModel model = load(model_path);
  const FeatureVector fv = extract_all(load_png(blurred), load_png(deblurred), params);
  for (std::size_t i = 0; i < kFeatureCount; ++i) spdlog::debug("{} = {}", kFeatureNames[i], fv.values()[i]);
  std::printf("%.17g\n", model.predict(fv));
  return kExitOk;
}

std::vector<std::string> group_keys(const std::vector<const FeatureRow*>& rows, const std::string& group_by,
                                    const std::string& manifest_path) {
  std::vector<std::string> keys;
  if (group_by == "none") return keys;
  if (group_by == "crop_id" || group_by == "method") {
    for (const auto* r : rows) keys.push_back(group_by == "crop_id" ? r->crop_id : r->method);
    return keys;
  }
  if (manifest_path.empty()) throw UsageError("--group-by scene_id needs --manifest to map crops to scenes");
  std::map<std::string, std::string> scene_of;
  for (const auto& m : ingest(manifest_path).rows) scene_of.emplace(m.crop_id, m.scene_id);
  for (const auto* r : rows) {
    auto it = scene_of.find(r->crop_id);
    if (it == scene_of.end()) throw DataError("crop '" + r->crop_id + "' is not in " + manifest_path);
    keys.push_back(it->second);
  }
  return keys;
}

int run_crossval(const fs::path& features, int folds, const std::vector<int>& tree_counts, const std::string& group_by,
                 const std::string& manifest_path, const ForestFlags& flags, const std::string& out, unsigned jobs) {
  std::vector<const FeatureRow*> used;
  const auto all = read_features_csv(features);
  const auto rows = training_rows(all, &used);
  const auto keys = group_keys(used, group_by, manifest_path);

  nlohmann::ordered_json doc = {{"folds", folds}, {"group_by", group_by}, {"seed", flags.seed}, {"runs", nlohmann::ordered_json::array()}};
  std::printf("%-8s %-8s %-8s %-8s\n", "trees", "plcc", "srcc", "krcc");
  for (int trees : tree_counts) {
    const TrainConfig config = flags.config(trees);
    config.validate();
    spdlog::info("{}-fold cross-validation with {} trees", folds, trees);
    const CrossValResult result = kfold_cv(rows, folds, config, keys, flags.seed, jobs);
    std::printf("%-8d %-8.4f %-8.4f %-8.4f\n", trees, result.mean.plcc, result.mean.srcc, result.mean.krcc);
    auto run = nlohmann::ordered_json::parse(to_json(result));
    nlohmann::ordered_json entry = {{"trees", trees}};
    entry.update(run);
    doc["runs"].push_back(std::move(entry));
  }
  if (!out.empty()) write_text(out, doc.dump(2) + "\n");
  return kExitOk;
}

int run_btfit(const fs::path& pairs, const fs::path& out) {
  const BtScores scores = bt_fit(read_pairs_csv(pairs));
  write_scores_csv(out, scores);
  for (const auto& [method, score] : ranked(scores)) std::printf("%-24s %.6f\n", method.c_str(), score);
  return kExitOk;
}

int run_bench(const fs::path& manifest_path, const fs::path& model_path, const fs::path& out_dir,
              const std::string& params_path, unsigned jobs) {
  const FeatureParams params = params_or_default(params_path);
  const RandomForestModel model = load(model_path);
  const DatasetManifest manifest = ingest(manifest_path);
  const BenchResult result = run_benchmark(manifest, &model, params, jobs);
  write_benchmark_outputs(out_dir, result);
  std::fputs(to_markdown(result.leaderboard).c_str(), stdout);
  return report_failures(result);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Reduced-reference deblurring quality: features, forest training and benchmarking", "based"};
  app.require_subcommand(1);
  unsigned jobs = 0;
  app.add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");
  std::string params;

  auto* extract = app.add_subcommand("extract", "Compute the nine features for every manifest row");
  std::string manifest, out;
  extract->add_option("--manifest", manifest, "Dataset manifest CSV")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out, "Output features CSV")->required();
  extract->add_option("--params", params, "Feature parameter JSON")->check(CLI::ExistingFile);
  extract->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");

  auto* train = app.add_subcommand("train", "Train a random forest on a features CSV");
  std::string features;
  int trees = 220;
  ForestFlags forest;
  train->add_option("--features", features, "Features CSV with subjective scores")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Output model JSON")->required();
  train->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
  forest.add_to(train);
  train->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");

  auto* predict = app.add_subcommand("predict", "Score one blurred/deblurred pair");
  std::string model, blurred, deblurred;
  predict->add_option("--model", model, "Model JSON")->required();
  predict->add_option("--blurred", blurred, "Blurred input PNG")->required();
  predict->add_option("--deblurred", deblurred, "Deblurred output PNG")->required();
  predict->add_option("--params", params, "Feature parameter JSON")->check(CLI::ExistingFile);

  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation, optionally sweeping tree counts");
  int folds = 5;
  std::vector<int> tree_counts = {220};
  std::string group_by = "crop_id";
  crossval->add_option("--features", features, "Features CSV with subjective scores")->required()->check(CLI::ExistingFile);
  crossval->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
  crossval->add_option("--trees", tree_counts, "Tree counts to evaluate (space or comma separated)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  crossval->add_option("--group-by", group_by, "Keep rows sharing this key in one fold")
      ->check(CLI::IsMember({"crop_id", "scene_id", "method", "none"}))
      ->capture_default_str();
  crossval->add_option("--manifest", manifest, "Manifest mapping crop_id to scene_id")->check(CLI::ExistingFile);
  crossval->add_option("--out", out, "Write per-fold results as JSON");
  forest.add_to(crossval);
  crossval->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");

  auto* btfit = app.add_subcommand("btfit", "Bradley-Terry scores from pairwise votes");
  std::string pairs;
  btfit->add_option("--pairs", pairs, "Pairs CSV (a,b,wins_a,wins_b,ties)")->required()->check(CLI::ExistingFile);
  btfit->add_option("--out", out, "Output scores CSV")->required();

  auto* benchmark = app.add_subcommand("benchmark", "Features, baselines, leaderboard and correlations");
  std::string out_dir;
  benchmark->add_option("--manifest", manifest, "Dataset manifest CSV")->required()->check(CLI::ExistingFile);
  benchmark->add_option("--model", model, "Model JSON")->required();
  benchmark->add_option("--out-dir", out_dir, "Output directory")->required();
  benchmark->add_option("--params", params, "Feature parameter JSON")->check(CLI::ExistingFile);
  benchmark->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*extract) return run_extract(manifest, out, params, jobs);
    if (*train) return run_train(features, out, trees, forest, jobs);
    if (*predict) return run_predict(model, blurred, deblurred, params);
    if (*crossval) return run_crossval(features, folds, tree_counts, group_by, manifest, forest, out, jobs);
    if (*btfit) return run_btfit(pairs, out);
    if (*benchmark) return run_bench(manifest, model, out_dir, params, jobs);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFatal;
  }
  return kExitUsage;
}
