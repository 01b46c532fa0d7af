// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "salbench/confusion.hpp"
#include "salbench/evaluation.hpp"
#include "salbench/metrics.hpp"
#include "salbench/mosaic.hpp"
#include "salbench/parallel.hpp"
#include "salbench/random.hpp"
#include "salbench/reliability.hpp"
#include "salbench/saliency.hpp"
#include "salbench/synthetic.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace salbench;

namespace {

constexpr std::uint64_t kSeed = 20240501;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

bool near(std::optional<double> v, double want, double tol) { return v && std::abs(*v - want) <= tol; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<MosaicSpec> synthetic_specs(std::size_t n, std::uint64_t seed) {
  std::vector<ImageRecord> pool;
  for (const char* cls : {"tabby", "sports_car", "golden_retriever", "speedboat"}) {
    for (int i = 0; i < 25; ++i) pool.push_back({std::string(cls) + "/" + std::to_string(i), cls, {}});
  }
  std::vector<MosaicSpec> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sample_mosaic_spec(pool, "tabby", OtherClassPolicy::random_distinct(),
                                     mosaic_seed(seed, "tabby", i), make_mosaic_id("tabby", i)));
  }
  return out;
}

// --- criteria --------------------------------------------------------------

Check perfect_oracle_saturation() {
  Check c;
  for (const MosaicSpec& spec : synthetic_specs(50, kSeed)) {
    const MetricVector p =
        compute_metrics(tally_confusion(gen_oracle_map(spec, {OracleMode::perfect}), spec), SignCapability::signed_values);
    for (Metric m : {Metric::precision, Metric::sensitivity, Metric::specificity, Metric::accuracy, Metric::f1}) {
      c.expect(near(p.get(m), 1.0, 1e-9), "perfect " + std::string(metric_name(m)) + " on " + spec.mosaic_id);
    }
    for (Metric m : {Metric::false_negative_rate, Metric::false_positive_rate}) {
      c.expect(near(p.get(m), 0.0, 1e-9), "perfect " + std::string(metric_name(m)) + " on " + spec.mosaic_id);
    }
    const MetricVector i =
        compute_metrics(tally_confusion(gen_oracle_map(spec, {OracleMode::inverted}), spec), SignCapability::signed_values);
    for (Metric m : {Metric::precision, Metric::sensitivity, Metric::specificity, Metric::accuracy}) {
      c.expect(near(i.get(m), 0.0, 1e-9), "inverted " + std::string(metric_name(m)) + " on " + spec.mosaic_id);
    }
  }
  c.detail << "50 mosaics, perfect at ideal values, inverted at 0";
  return c;
}

Check random_noise_null() {
  Check c;
  const auto specs = synthetic_specs(200, kSeed + 1);
  std::vector<MetricVector> metrics(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    const SaliencyMap map = gen_oracle_map(specs[i], {OracleMode::uniform_signed_noise, 1.0, kSeed});
    metrics[i] = compute_metrics(tally_confusion(map, specs[i]), SignCapability::signed_values);
  });
  for (Metric m : {Metric::accuracy, Metric::precision, Metric::sensitivity, Metric::specificity}) {
    double sum = 0;
    for (const auto& v : metrics) sum += *v.get(m);
    const double mean = sum / static_cast<double>(metrics.size());
    c.expect(std::abs(mean - 0.5) <= 0.02, std::string(metric_name(m)));
    c.detail << metric_name(m) << "=" << mean << " ";
  }
  return c;
}

Check brute_force_tally() {
  Check c;
  Rng rng(kSeed + 2);
  const std::array<std::string, 3> classes{"tabby", "car", "dog"};
  int matched = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<std::string, 4> labels;
    for (auto& l : labels) l = classes[uniform_below(rng, 3)];
    labels[uniform_below(rng, 4)] = "tabby";
    const MosaicSpec spec = testing::make_spec("toy", "tabby", labels);
    SaliencyMap map = testing::blank_map(spec, 4);
    for (double& v : map.values) v = (static_cast<double>(uniform_below(rng, 257)) - 128.0) / 64.0;
    const bool same = tally_confusion(map, spec) == oracle::tally(map, spec);
    matched += same;
    c.expect(same, "grid " + std::to_string(trial));
  }
  c.detail << matched << "/1000 grids equal";
  return c;
}

Check scale_invariance() {
  Check c;
  Rng rng(kSeed + 3);
  const auto specs = synthetic_specs(100, kSeed + 3);
  double worst = 0;
  for (const MosaicSpec& spec : specs) {
    SaliencyMap map = testing::blank_map(spec, kMosaicPixels);
    for (double& v : map.values) v = uniform_below(rng, 10) == 0 ? 0.0 : 2.0 * uniform01(rng) - 1.0;
    const MetricVector base = compute_metrics(tally_confusion(map, spec), map.sign_capability);
    auto compare = [&](const SaliencyMap& other, const std::string& what) {
      const MetricVector v = compute_metrics(tally_confusion(other, spec), other.sign_capability);
      for (Metric m : kAllMetrics) {
        c.expect(v.get(m).has_value() == base.get(m).has_value(), what + " definedness");
        if (!v.get(m) || !base.get(m)) continue;
        const double d = std::abs(*v.get(m) - *base.get(m));
        worst = std::max(worst, d);
        c.expect(d <= 1e-12, what + " " + std::string(metric_name(m)));
      }
    };
    for (int k = 0; k < 10; ++k) {
      const double scale = std::exp(24.0 * uniform01(rng) - 12.0);
      compare(scaled(map, scale), "scale");
    }
    compare(normalize_max_scale(map), "normalize");
  }
  c.detail << "max |delta|=" << worst;
  return c;
}

Check f1_identity() {
  Check c;
  Rng rng(kSeed + 4);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    ConfusionTally t{};
    for (double* f : {&t.tp, &t.fp, &t.fn, &t.tn}) *f = std::exp(20.0 * uniform01(rng) - 10.0);
    const MetricVector v = compute_metrics(t, SignCapability::signed_values);
    const double d = std::abs(*v.f1 - 2 * t.tp / (2 * t.tp + t.fp + t.fn));
    worst = std::max(worst, d);
    c.expect(d <= 1e-12, "tally " + std::to_string(i));
  }
  c.detail << "max |delta|=" << worst;
  return c;
}

RatingMatrix make_matrix(std::size_t raters, std::size_t units) {
  std::vector<std::string> r, u;
  for (std::size_t i = 0; i < raters; ++i) r.push_back("r" + std::to_string(i));
  for (std::size_t i = 0; i < units; ++i) u.push_back("u" + std::to_string(i));
  return RatingMatrix::make(r, u);
}

Check alpha_corner_cases() {
  Check c;
  RatingMatrix same = make_matrix(10, 4);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t u = 0; u < 4; ++u) same.at(r, u) = 0.1 * static_cast<double>(u + 1) + 0.01 * static_cast<double>(r);
  }
  const AlphaResult a1 = krippendorff_alpha(same);
  c.expect(a1.alpha && *a1.alpha == 1.0, "identical rankings");

  Rng rng(kSeed + 5);
  RatingMatrix random = make_matrix(500, 8);
  for (Score& s : random.scores) s = uniform01(rng);
  const AlphaResult a2 = krippendorff_alpha(random);
  c.expect(a2.alpha && std::abs(*a2.alpha) < 0.05, "random rankings");

  RatingMatrix reversed = make_matrix(2, 4);
  for (std::size_t u = 0; u < 4; ++u) {
    reversed.at(0, u) = static_cast<double>(u);
    reversed.at(1, u) = static_cast<double>(3 - u);
  }
  const AlphaResult a3 = krippendorff_alpha(reversed);
  c.expect(a3.alpha && *a3.alpha < 0.0, "reversed raters");

  c.detail << "identical=" << a1.alpha.value_or(NAN) << " random=" << a2.alpha.value_or(NAN)
           << " reversed=" << a3.alpha.value_or(NAN);
  return c;
}

Check rho_corner_cases() {
  Check c;
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> inc{10, 20, 35, 41, 90};
  const std::vector<double> dec{9, 7, 3, 1, -4};
  const std::vector<double> y{2, 1, 4, 3, 5};
  const auto up = spearman_rho(x, inc);
  const auto down = spearman_rho(x, dec);
  const auto worked = spearman_rho(x, y);
  const auto brute = oracle::spearman(std::vector<Score>(x.begin(), x.end()), std::vector<Score>(y.begin(), y.end()));
  c.expect(up && *up == 1.0, "increasing");
  c.expect(down && *down == -1.0, "decreasing");
  c.expect(near(worked, 0.8, 1e-12), "worked pair");
  c.expect(worked && brute && std::abs(*worked - *brute) <= 1e-12, "oracle agreement");
  c.detail << "rho(x,y)=" << worked.value_or(NAN) << " oracle=" << brute.value_or(NAN);
  return c;
}

struct PipelineOutputs {
  std::string records_csv;
  std::string summary_csv;
  std::string alpha_json;
  std::string rho_json;
  std::optional<double> accuracy_alpha;
  std::size_t records = 0;
  bool clean = true;
};

/// Writes the family's interchange files, evaluates them from disk and
/// writes every report; the bulky saliency directory is removed afterwards.
PipelineOutputs run_pipeline(const MosaicManifest& manifest, std::span<const double> fidelities, const fs::path& dir) {
  fs::remove_all(dir);
  const fs::path saliency = dir / "saliency";
  gen_method_family(manifest.mosaics, fidelity_family(fidelities), kSeed, saliency);
  const auto registry = discover_methods(saliency);
  const EvaluationResult result = evaluate(manifest, saliency, registry);
  fs::remove_all(saliency);

  const std::vector<Metric> metrics(kAllMetrics.begin(), kAllMetrics.end());
  const ReliabilityReport report = reliability_report(result.records, metrics);
  write_records_csv(result.records, dir / "records.csv");
  write_text_file(dir / "summary.csv", summary_to_csv(summarize(result.records)));
  write_text_file(dir / "alpha.json", alpha_to_json(report));
  write_text_file(dir / "rho.json", rho_to_json(report));

  PipelineOutputs out;
  out.records_csv = read_file(dir / "records.csv");
  out.summary_csv = read_file(dir / "summary.csv");
  out.alpha_json = read_file(dir / "alpha.json");
  out.rho_json = read_file(dir / "rho.json");
  out.records = result.records.size();
  out.clean = result.ok() && result.missing.empty();
  for (const AlphaRow& row : report.alpha) {
    if (row.metric == Metric::accuracy) out.accuracy_alpha = row.result.alpha;
  }
  return out;
}

MosaicManifest build_manifest(const fs::path& dir) {
  std::vector<ImageRecord> pool;
  const std::vector<std::pair<std::string, std::array<std::uint8_t, 3>>> classes{
      {"tabby", {200, 120, 40}}, {"sports_car", {200, 20, 20}}, {"golden_retriever", {220, 180, 90}},
      {"speedboat", {30, 60, 200}}};
  for (const auto& [cls, rgb] : classes) {
    for (int i = 0; i < 25; ++i) pool.push_back({cls + "/" + std::to_string(i), cls, {}});
  }
  const ImageLoader loader = [&](const ImageRecord& rec) {
    for (const auto& [cls, rgb] : classes) {
      if (cls == rec.class_label) return RgbImage::filled(16, 12, rgb);
    }
    throw Error(ErrorCode::decode_failure, rec.image_id);
  };
  DatasetConfig cfg;
  cfg.dataset_name = "acceptance";
  cfg.targets = {{"tabby", 300, OtherClassPolicy::random_distinct()}};
  cfg.global_seed = kSeed;
  cfg.out_dir = dir / "mosaics";
  build_dataset(cfg, pool, loader);
  return read_manifest(cfg.out_dir / "manifest.json");
}

Check end_to_end(const fs::path& work, const fs::path& golden, bool update_golden) {
  Check c;
  const MosaicManifest manifest = build_manifest(work);
  const std::vector<double> graded{0.9, 0.7, 0.5, 0.3};
  const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};

  const PipelineOutputs first = run_pipeline(manifest, graded, work / "graded_run1");
  const PipelineOutputs second = run_pipeline(manifest, graded, work / "graded_run2");
  const PipelineOutputs null = run_pipeline(manifest, flat, work / "flat");

  c.expect(first.clean && first.records == 1200 && null.clean && null.records == 1200, "all 1200 pairs evaluated");
  c.expect(first.accuracy_alpha && *first.accuracy_alpha >= 0.8, "graded family alpha >= 0.8");
  c.expect(null.accuracy_alpha && std::abs(*null.accuracy_alpha) < 0.05, "flat family |alpha| < 0.05");
  c.expect(first.records_csv == second.records_csv && first.summary_csv == second.summary_csv &&
               first.alpha_json == second.alpha_json && first.rho_json == second.rho_json,
           "outputs byte-identical across runs");

  if (update_golden) {
    fs::create_directories(golden.parent_path());
    write_text_file(golden, first.alpha_json);
  }
  const bool golden_match = fs::exists(golden) && read_file(golden) == first.alpha_json;
  c.expect(golden_match, "alpha.json equals golden " + golden.string());

  c.detail << "graded alpha=" << first.accuracy_alpha.value_or(NAN) << " flat alpha=" << null.accuracy_alpha.value_or(NAN)
           << " golden=" << (golden_match ? "match" : "differs");
  return c;
}

Check positive_only_gating(const fs::path& work) {
  Check c;
  const fs::path dir = work / "gating";
  fs::remove_all(dir);
  MosaicManifest manifest;
  manifest.dataset_name = "gating";
  manifest.cell_pixels = 32;
  manifest.mosaic_pixels = 64;
  manifest.mosaics = synthetic_specs(40, kSeed + 6);

  auto run = [&](const std::vector<std::string>& tokens) {
    std::vector<SimulatedMethod> methods;
    for (std::size_t i = 0; i < tokens.size(); ++i) methods.push_back(parse_method_token(tokens[i], i));
    fs::remove_all(dir);
    gen_method_family(manifest.mosaics, methods, kSeed, dir, manifest.mosaic_pixels);
    const auto registry = discover_methods(dir);
    const EvaluationResult result = evaluate(manifest, dir, registry);
    write_records_csv(result.records, dir / "records.csv");
    return read_records_csv(dir / "records.csv");
  };
  const std::vector<Metric> metrics(kAllMetrics.begin(), kAllMetrics.end());

  const auto pair = run({"gradcam:p=0.8", "lime:positive_noise"});
  for (const auto& r : pair) {
    if (r.method_id != "lime") continue;
    c.expect(r.metrics.precision.has_value(), "positive-only precision defined");
    for (Metric m : kAllMetrics) {
      if (m != Metric::precision) c.expect(!r.metrics.get(m).has_value(), "positive-only " + std::string(metric_name(m)));
    }
  }
  const ReliabilityReport two = reliability_report(pair, metrics);
  c.expect(two.alpha.size() == 1 && two.alpha[0].metric == Metric::precision && two.alpha[0].methods.size() == 2,
           "signed + positive-only gives exactly one precision row");

  const auto mixed = run({"gradcam:p=0.8", "intgrad:p=0.6", "lime:positive_noise"});
  const ReliabilityReport three = reliability_report(mixed, metrics);
  std::size_t covering = 0;
  for (const AlphaRow& row : three.alpha) {
    if (row.methods.size() == 3) {
      ++covering;
      c.expect(row.metric == Metric::precision, "row covering all methods is precision");
    } else {
      c.expect(std::find(row.methods.begin(), row.methods.end(), "lime") == row.methods.end(),
               "positive-only method excluded from " + std::string(metric_name(row.metric)));
    }
  }
  c.expect(covering == 1, "exactly one row covers the mixed set");
  fs::remove_all(dir);
  c.detail << "2-method rows=" << two.alpha.size() << ", 3-method rows covering all=" << covering;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"salbench acceptance suite"};
  fs::path golden = "tests/golden/fidelity_alpha.json";
  fs::path work = fs::temp_directory_path() / "salbench_acceptance";
  bool update_golden = false;
  app.add_option("--golden", golden, "Reference alpha.json of the graded fidelity family");
  app.add_option("--work", work, "Scratch directory");
  app.add_flag("--update-golden", update_golden, "Rewrite the golden file from this run");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria{
      {"perfect-oracle-saturation", 5, perfect_oracle_saturation},
      {"random-noise-null", 30, random_noise_null},
      {"brute-force-tally-equivalence", 0, brute_force_tally},
      {"scale-invariance", 0, scale_invariance},
      {"f1-identity", 0, f1_identity},
      {"alpha-corner-cases", 10, alpha_corner_cases},
      {"rho-corner-cases", 0, rho_corner_cases},
      {"end-to-end-reliability-separation", 120, [&] { return end_to_end(work, golden, update_golden); }},
      {"positive-only-gating", 0, [&] { return positive_only_gating(work); }},
  };

  int failures = 0;
  for (const Criterion& crit : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = crit.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << "exception: " << e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (crit.budget_s > 0 && elapsed >= crit.budget_s) {
      check.ok = false;
      check.detail << " over time budget";
    }
    failures += !check.ok;
    char timing[64];
    if (crit.budget_s > 0) {
      std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", elapsed, crit.budget_s);
    } else {
      std::snprintf(timing, sizeof timing, "%.2f s", elapsed);
    }
    std::printf("%s %-36s (%s) %s\n", check.ok ? "PASS" : "FAIL", crit.name, timing, check.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
