#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salbench/confusion.hpp"
#include "salbench/error.hpp"
#include "salbench/metrics.hpp"
#include "salbench/mosaic.hpp"
#include "salbench/reliability.hpp"
#include "salbench/saliency.hpp"

namespace salbench {

struct EvaluationRecord {
  std::string mosaic_id;
  std::string method_id;
  std::string target_class;
  SignCapability sign_capability = SignCapability::signed_values;
  ConfusionTally tally;
  MetricVector metrics;
};

struct PairError {
  std::string mosaic_id;
  std::string method_id;
  ErrorCode code = ErrorCode::invalid_argument;
  std::string message;
};

struct MissingPair {
  std::string mosaic_id;
  std::string method_id;
};

struct EvaluationResult {
  std::vector<EvaluationRecord> records;
  std::vector<PairError> errors;
  std::vector<MissingPair> missing;

  bool ok() const noexcept { return errors.empty(); }
};

/// Supplies the map of one (mosaic, method) pair; std::nullopt marks the
/// pair as absent. Throwing an Error fails only that pair.
using MapSource = std::function<std::optional<SaliencyMap>(const MosaicSpec&, const MethodDescriptor&)>;

/// Reads "<mosaic_id>__<method_id>.salm" (or ".csv") from dir.
MapSource directory_source(std::filesystem::path dir);

/// Tally and metrics for one pair after checking that the map belongs to the
/// mosaic and method (id_mismatch / cross_reference / dimension_mismatch).
EvaluationRecord evaluate_pair(const MosaicSpec& spec, const MethodDescriptor& method, const SaliencyMap& map,
                               int mosaic_pixels = kMosaicPixels);

/// One record per present pair in manifest order, then method order. Pair
/// failures are collected, never thrown.
EvaluationResult evaluate(const MosaicManifest& manifest, std::span<const MethodDescriptor> methods,
                          const MapSource& source);
EvaluationResult evaluate(const MosaicManifest& manifest, const std::filesystem::path& saliency_dir,
                          std::span<const MethodDescriptor> methods);

// --- records.csv -----------------------------------------------------------

/// Header plus one line per record; undefined metrics are written "NA".
std::string records_to_csv(std::span<const EvaluationRecord> records);
std::vector<EvaluationRecord> records_from_csv(std::string_view text);
void write_records_csv(std::span<const EvaluationRecord> records, const std::filesystem::path& path);
std::vector<EvaluationRecord> read_records_csv(const std::filesystem::path& path);

std::string errors_to_json(std::span<const PairError> errors);

// --- summaries -------------------------------------------------------------

struct SummaryRow {
  std::string method_id;
  Metric metric = Metric::precision;
  std::size_t count_defined = 0;
  double mean = 0.0;
  double median = 0.0;
  double quartile_1 = 0.0;
  double quartile_3 = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
};

/// Linear-interpolation quantile of sorted data (position q * (n - 1)).
double quantile_sorted(std::span<const double> sorted, double q);

/// Distribution of every metric per method over its defined values. Methods
/// appear in first-seen order; groups without a defined value are omitted.
std::vector<SummaryRow> summarize(std::span<const EvaluationRecord> records);
std::string summary_to_csv(std::span<const SummaryRow> rows);

// --- reliability -----------------------------------------------------------

struct AlphaRow {
  Metric metric = Metric::precision;
  std::vector<std::string> methods;
  std::size_t raters = 0;
  AlphaResult result;
};

struct RhoTable {
  Metric metric = Metric::precision;
  std::size_t raters = 0;
  RhoMatrix matrix;
};

struct ReliabilityReport {
  MeasurementLevel level = MeasurementLevel::ordinal;
  std::vector<AlphaRow> alpha;
  std::vector<RhoTable> rho;
};

/// Per requested metric, over the methods the metric applies to (all methods
/// for precision, signed methods otherwise): Krippendorff's alpha of the
/// per-mosaic method rankings and the pairwise Spearman matrix across
/// mosaics. Metrics applicable to fewer than two methods produce no row.
/// Throws too_few_methods unless two methods share at least two mosaics.
ReliabilityReport reliability_report(std::span<const EvaluationRecord> records, std::span<const Metric> metrics,
                                     MeasurementLevel level = MeasurementLevel::ordinal);

/// The rating matrix (mosaics x methods) of one metric, methods restricted
/// to those the metric applies to.
RatingMatrix rating_matrix(std::span<const EvaluationRecord> records, Metric metric);

std::string alpha_to_json(const ReliabilityReport& report);
std::string rho_to_json(const ReliabilityReport& report);

std::string_view to_string(MeasurementLevel level) noexcept;
MeasurementLevel parse_measurement_level(std::string_view text);

/// Writes text to path verbatim; io_failure on error.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace salbench
