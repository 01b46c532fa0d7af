// salbench: command-line front end for mosaic building, saliency validation,
// synthetic maps, evaluation and reliability reporting.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "salbench/error.hpp"
#include "salbench/evaluation.hpp"
#include "salbench/metrics.hpp"
#include "salbench/mosaic.hpp"
#include "salbench/saliency.hpp"
#include "salbench/synthetic.hpp"

namespace fs = std::filesystem;
using namespace salbench;

namespace {

constexpr int kExitPairErrors = 1;
constexpr int kExitFatal = 2;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + dir.string() + ": " + ec.message());
}

struct BuildArgs {
  fs::path classes;
  std::vector<std::string> targets;
  std::size_t count = 0;
  std::vector<std::string> policies{"random"};
  std::uint64_t seed = 0;
  fs::path out;
  std::string name = "mosaics";
};

int run_build(const BuildArgs& a) {
  if (a.policies.size() != 1 && a.policies.size() != a.targets.size()) {
    throw Error(ErrorCode::invalid_argument, "give one --policy, or one per --target");
  }
  DatasetConfig config;
  config.dataset_name = a.name;
  config.classes_dir = a.classes;
  config.global_seed = a.seed;
  config.out_dir = a.out;
  for (std::size_t i = 0; i < a.targets.size(); ++i) {
    const auto& policy = a.policies.size() == 1 ? a.policies.front() : a.policies[i];
    config.targets.push_back({a.targets[i], a.count, OtherClassPolicy::parse(policy)});
  }
  const auto manifest = build_dataset(config);
  std::cout << "built " << manifest.mosaics.size() << " mosaics";
  if (!manifest.mosaics.empty()) std::cout << " in " << a.out.string();
  std::cout << "\n";
  return 0;
}

int run_validate(const fs::path& dir, const fs::path& manifest_path) {
  const auto manifest = read_manifest(manifest_path);
  const auto findings = validate_saliency_dir(dir, manifest);
  for (const auto& f : findings) {
    std::cout << f.path.string() << ": " << to_string(f.code) << ": " << f.message << "\n";
  }
  std::cout << findings.size() << " finding(s)\n";
  return findings.empty() ? 0 : kExitPairErrors;
}

int run_synth(const fs::path& manifest_path, const std::vector<std::string>& tokens, std::uint64_t seed,
              const fs::path& out) {
  const auto manifest = read_manifest(manifest_path);
  std::vector<SimulatedMethod> methods;
  for (std::size_t i = 0; i < tokens.size(); ++i) methods.push_back(parse_method_token(tokens[i], i));
  const auto registry = gen_method_family(manifest.mosaics, methods, seed, out, manifest.mosaic_pixels);
  std::cout << "wrote " << manifest.mosaics.size() * registry.size() << " maps for " << registry.size()
            << " method(s) to " << out.string() << "\n";
  return 0;
}

int run_evaluate(const fs::path& manifest_path, const fs::path& saliency_dir, const fs::path& out) {
  const auto manifest = read_manifest(manifest_path);
  const auto methods = discover_methods(saliency_dir);
  if (methods.empty()) throw Error(ErrorCode::cross_reference, "no methods found in " + saliency_dir.string());

  const auto result = evaluate(manifest, saliency_dir, methods);
  ensure_dir(out);
  write_records_csv(result.records, out / "records.csv");
  write_text_file(out / "errors.json", errors_to_json(result.errors));

  for (const auto& m : result.missing) {
    std::cerr << "absent: " << m.mosaic_id << " / " << m.method_id << "\n";
  }
  for (const auto& e : result.errors) {
    std::cerr << "error: " << e.mosaic_id << " / " << e.method_id << ": " << e.message << "\n";
  }
  std::cout << result.records.size() << " record(s), " << result.missing.size() << " absent, "
            << result.errors.size() << " error(s)\n";
  return result.ok() ? 0 : kExitPairErrors;
}

int run_reliability(const fs::path& records_path, const std::vector<std::string>& metric_names,
                    const std::string& level, const fs::path& out) {
  const auto records = read_records_csv(records_path);
  std::vector<Metric> metrics;
  if (metric_names.empty()) {
    metrics.assign(kAllMetrics.begin(), kAllMetrics.end());
  } else {
    for (const auto& name : metric_names) metrics.push_back(parse_metric(name));
  }
  const auto report = reliability_report(records, metrics, parse_measurement_level(level));
  ensure_dir(out);
  write_text_file(out / "alpha.json", alpha_to_json(report));
  write_text_file(out / "rho.json", rho_to_json(report));
  for (const auto& row : report.alpha) {
    std::cout << metric_name(row.metric) << ": alpha = ";
    if (row.result.alpha) {
      std::cout << *row.result.alpha;
    } else {
      std::cout << "undefined";
    }
    std::cout << " (" << row.methods.size() << " methods, " << row.raters << " mosaics)\n";
  }
  return 0;
}

int run_report(const fs::path& records_path, const fs::path& out) {
  const auto records = read_records_csv(records_path);
  if (records.empty()) throw Error(ErrorCode::too_few_values, "no records in " + records_path.string());
  const auto rows = summarize(records);
  ensure_dir(out);
  write_text_file(out / "summary.csv", summary_to_csv(rows));
  std::cout << rows.size() << " summary row(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saliency-method evaluation on 2x2 image mosaics"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-mosaics", "Sample and assemble 2x2 mosaics from class folders");
  build_cmd->add_option("--classes", build.classes, "Directory with one subdirectory per class")->required();
  build_cmd->add_option("--target", build.targets, "Target class (repeatable)")->required();
  build_cmd->add_option("--count", build.count, "Mosaics per target class")->required();
  build_cmd->add_option("--policy", build.policies, "fixed:<class> or random (once, or once per target)");
  build_cmd->add_option("--seed", build.seed, "Global seed")->required();
  build_cmd->add_option("--out", build.out, "Output directory")->required();
  build_cmd->add_option("--name", build.name, "Dataset name recorded in the manifest");

  fs::path validate_dir, validate_manifest;
  auto* validate_cmd = app.add_subcommand("validate-saliency", "Check saliency files against a manifest");
  validate_cmd->add_option("dir", validate_dir, "Saliency directory")->required();
  validate_cmd->add_option("--manifest", validate_manifest, "manifest.json")->required();

  fs::path synth_manifest, synth_out;
  std::vector<std::string> synth_methods;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic saliency maps with known behaviour");
  synth_cmd->add_option("--manifest", synth_manifest, "manifest.json")->required();
  synth_cmd->add_option("--methods", synth_methods, "e.g. p=0.9,p=0.7 or perfect,noise,positive_noise")
      ->required()
      ->delimiter(',');
  synth_cmd->add_option("--seed", synth_seed, "Seed")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  fs::path eval_manifest, eval_saliency, eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "Tally and score every (mosaic, method) pair");
  eval_cmd->add_option("--manifest", eval_manifest, "manifest.json")->required();
  eval_cmd->add_option("--saliency", eval_saliency, "Saliency directory")->required();
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();

  fs::path rel_records, rel_out;
  std::vector<std::string> rel_metrics;
  std::string rel_level = "ordinal";
  auto* rel_cmd = app.add_subcommand("reliability", "Krippendorff's alpha and Spearman's rho per metric");
  rel_cmd->add_option("--records", rel_records, "records.csv")->required();
  rel_cmd->add_option("--metrics", rel_metrics, "Comma-separated metric names (default: all)")->delimiter(',');
  rel_cmd->add_option("--level", rel_level, "nominal, ordinal or interval")
      ->check(CLI::IsMember({"nominal", "ordinal", "interval"}));
  rel_cmd->add_option("--out", rel_out, "Output directory")->required();

  fs::path report_records, report_out;
  auto* report_cmd = app.add_subcommand("report", "Per-method distribution summaries");
  report_cmd->add_option("--records", report_records, "records.csv")->required();
  report_cmd->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) return run_build(build);
    if (*validate_cmd) return run_validate(validate_dir, validate_manifest);
    if (*synth_cmd) return run_synth(synth_manifest, synth_methods, synth_seed, synth_out);
    if (*eval_cmd) return run_evaluate(eval_manifest, eval_saliency, eval_out);
    if (*rel_cmd) return run_reliability(rel_records, rel_metrics, rel_level, rel_out);
    if (*report_cmd) return run_report(report_records, report_out);
  } catch (const std::exception& e) {
    std::cerr << "salbench: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
