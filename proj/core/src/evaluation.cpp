#include "salbench/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <variant>

#include <nlohmann/json.hpp>

#include "salbench/parallel.hpp"
#include "salbench/summation.hpp"

namespace salbench {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// --- evaluation ------------------------------------------------------------

MapSource directory_source(fs::path dir) {
  return [dir = std::move(dir)](const MosaicSpec& spec, const MethodDescriptor& method) -> std::optional<SaliencyMap> {
    fs::path path = dir / saliency_filename(spec.mosaic_id, method.method_id);
    if (!fs::exists(path)) {
      path.replace_extension(".csv");
      if (!fs::exists(path)) return std::nullopt;
    }
    return read_saliency(path);
  };
}

EvaluationRecord evaluate_pair(const MosaicSpec& spec, const MethodDescriptor& method, const SaliencyMap& map,
                               int mosaic_pixels) {
  if (map.method_id != method.method_id) {
    throw Error(ErrorCode::id_mismatch, "file names method '" + map.method_id + "', expected '" + method.method_id + "'");
  }
  if (map.sign_capability != method.sign_capability) {
    throw Error(ErrorCode::cross_reference, "sign capability of '" + method.method_id + "' disagrees with registry");
  }
  if (map.width != mosaic_pixels || map.height != mosaic_pixels) {
    throw Error(ErrorCode::dimension_mismatch, std::to_string(map.width) + "x" + std::to_string(map.height) +
                                                   " map, manifest uses " + std::to_string(mosaic_pixels));
  }
  EvaluationRecord rec;
  rec.mosaic_id = spec.mosaic_id;
  rec.method_id = method.method_id;
  rec.target_class = spec.target_class;
  rec.sign_capability = method.sign_capability;
  rec.tally = tally_confusion(map, spec);
  rec.metrics = compute_metrics(rec.tally, method.sign_capability);
  return rec;
}

EvaluationResult evaluate(const MosaicManifest& manifest, std::span<const MethodDescriptor> methods,
                          const MapSource& source) {
  struct Absent {};
  using Outcome = std::variant<Absent, EvaluationRecord, PairError>;

  const std::size_t jobs = manifest.mosaics.size() * methods.size();
  std::vector<Outcome> outcomes(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const MosaicSpec& spec = manifest.mosaics[job / methods.size()];
    const MethodDescriptor& method = methods[job % methods.size()];
    try {
      auto map = source(spec, method);
      if (!map) {
        outcomes[job] = Absent{};
        return;
      }
      outcomes[job] = evaluate_pair(spec, method, *map, manifest.mosaic_pixels);
    } catch (const Error& e) {
      outcomes[job] = PairError{spec.mosaic_id, method.method_id, e.code(), e.what()};
    } catch (const std::exception& e) {
      outcomes[job] = PairError{spec.mosaic_id, method.method_id, ErrorCode::io_failure, e.what()};
    }
  });

  EvaluationResult result;
  for (std::size_t job = 0; job < jobs; ++job) {
    if (auto* rec = std::get_if<EvaluationRecord>(&outcomes[job])) {
      result.records.push_back(std::move(*rec));
    } else if (auto* err = std::get_if<PairError>(&outcomes[job])) {
      result.errors.push_back(std::move(*err));
    } else {
      result.missing.push_back(
          {manifest.mosaics[job / methods.size()].mosaic_id, methods[job % methods.size()].method_id});
    }
  }
  return result;
}

EvaluationResult evaluate(const MosaicManifest& manifest, const fs::path& saliency_dir,
                          std::span<const MethodDescriptor> methods) {
  return evaluate(manifest, methods, directory_source(saliency_dir));
}

// --- CSV helpers -----------------------------------------------------------

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_score(std::optional<double> v) { return v ? format_number(*v) : "NA"; }

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      row_has_content = false;
    } else {
      field += c;
      row_has_content = true;
    }
  }
  if (quoted) throw Error(ErrorCode::malformed_header, "unterminated quote in CSV");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_number(const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::malformed_header, "bad number '" + text + "'");
  }
  return v;
}

std::optional<double> parse_score(const std::string& text) {
  if (text == "NA") return std::nullopt;
  return parse_number(text);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

constexpr std::string_view kRecordPrefixColumns[] = {"mosaic_id", "method_id", "target_class", "sign_capability",
                                                     "tp",        "fp",        "fn",           "tn"};

}  // namespace

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
}

std::string records_to_csv(std::span<const EvaluationRecord> records) {
  std::string out;
  for (auto col : kRecordPrefixColumns) out.append(col).append(",");
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    out.append(metric_name(kAllMetrics[i])).append(i + 1 < kAllMetrics.size() ? "," : "\n");
  }
  for (const auto& r : records) {
    out += csv_field(r.mosaic_id) + "," + csv_field(r.method_id) + "," + csv_field(r.target_class) + "," +
           std::string(to_string(r.sign_capability)) + "," + format_number(r.tally.tp) + "," +
           format_number(r.tally.fp) + "," + format_number(r.tally.fn) + "," + format_number(r.tally.tn);
    for (Metric m : kAllMetrics) out += "," + format_score(r.metrics.get(m));
    out += "\n";
  }
  return out;
}

std::vector<EvaluationRecord> records_from_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  const std::size_t columns = std::size(kRecordPrefixColumns) + kAllMetrics.size();
  if (rows.empty() || rows.front().size() != columns || rows.front()[0] != "mosaic_id") {
    throw Error(ErrorCode::malformed_header, "records CSV header does not match");
  }
  const auto& header = rows.front();
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    if (header[std::size(kRecordPrefixColumns) + i] != metric_name(kAllMetrics[i])) {
      throw Error(ErrorCode::malformed_header, "unexpected column '" + header[std::size(kRecordPrefixColumns) + i] + "'");
    }
  }
  std::vector<EvaluationRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != columns) {
      throw Error(ErrorCode::malformed_header, "records CSV line " + std::to_string(r + 1) + " has wrong field count");
    }
    EvaluationRecord rec;
    rec.mosaic_id = row[0];
    rec.method_id = row[1];
    rec.target_class = row[2];
    rec.sign_capability = parse_sign_capability(row[3]);
    rec.tally = {parse_number(row[4]), parse_number(row[5]), parse_number(row[6]), parse_number(row[7])};
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) rec.metrics.set(kAllMetrics[i], parse_score(row[8 + i]));
    records.push_back(std::move(rec));
  }
  return records;
}

void write_records_csv(std::span<const EvaluationRecord> records, const fs::path& path) {
  write_text_file(path, records_to_csv(records));
}

std::vector<EvaluationRecord> read_records_csv(const fs::path& path) { return records_from_csv(read_text(path)); }

std::string errors_to_json(std::span<const PairError> errors) {
  json doc = json::array();
  for (const auto& e : errors) {
    doc.push_back({{"mosaic_id", e.mosaic_id},
                   {"method_id", e.method_id},
                   {"code", std::string(to_string(e.code))},
                   {"message", e.message}});
  }
  return doc.dump(2) + "\n";
}

// --- summaries -------------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::too_few_values, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<std::string> methods_in_order(std::span<const EvaluationRecord> records) {
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.method_id) == order.end()) order.push_back(r.method_id);
  }
  return order;
}

}  // namespace

std::vector<SummaryRow> summarize(std::span<const EvaluationRecord> records) {
  std::vector<SummaryRow> rows;
  for (const auto& method : methods_in_order(records)) {
    for (Metric metric : kAllMetrics) {
      std::vector<double> values;
      for (const auto& r : records) {
        if (r.method_id != method) continue;
        if (auto v = r.metrics.get(metric)) values.push_back(*v);
      }
      if (values.empty()) continue;
      std::sort(values.begin(), values.end());
      SummaryRow row;
      row.method_id = method;
      row.metric = metric;
      row.count_defined = values.size();
      CompensatedSum sum;
      for (double v : values) sum.add(v);
      row.mean = sum.value() / static_cast<double>(values.size());
      row.median = quantile_sorted(values, 0.5);
      row.quartile_1 = quantile_sorted(values, 0.25);
      row.quartile_3 = quantile_sorted(values, 0.75);
      row.minimum = values.front();
      row.maximum = values.back();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
  std::string out = "method_id,metric_name,count_defined,mean,median,quartile_1,quartile_3,minimum,maximum\n";
  for (const auto& r : rows) {
    out += csv_field(r.method_id) + "," + std::string(metric_name(r.metric)) + "," + std::to_string(r.count_defined) +
           "," + format_number(r.mean) + "," + format_number(r.median) + "," + format_number(r.quartile_1) + "," +
           format_number(r.quartile_3) + "," + format_number(r.minimum) + "," + format_number(r.maximum) + "\n";
  }
  return out;
}

// --- reliability -----------------------------------------------------------

std::string_view to_string(MeasurementLevel level) noexcept {
  switch (level) {
    case MeasurementLevel::nominal: return "nominal";
    case MeasurementLevel::ordinal: return "ordinal";
    case MeasurementLevel::interval: return "interval";
  }
  return "unknown";
}

MeasurementLevel parse_measurement_level(std::string_view text) {
  for (auto level : {MeasurementLevel::nominal, MeasurementLevel::ordinal, MeasurementLevel::interval}) {
    if (to_string(level) == text) return level;
  }
  throw Error(ErrorCode::invalid_argument, "unknown measurement level '" + std::string(text) + "'");
}

RatingMatrix rating_matrix(std::span<const EvaluationRecord> records, Metric metric) {
  std::map<std::string, SignCapability> capability;
  for (const auto& r : records) capability.emplace(r.method_id, r.sign_capability);

  std::vector<std::string> methods;
  for (const auto& id : methods_in_order(records)) {
    if (metric_applies(metric, capability.at(id))) methods.push_back(id);
  }
  std::vector<std::string> mosaics;
  std::map<std::string, std::size_t> mosaic_index;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method_id) == methods.end()) continue;
    if (mosaic_index.emplace(r.mosaic_id, mosaics.size()).second) mosaics.push_back(r.mosaic_id);
  }
  std::map<std::string, std::size_t> method_index;
  for (std::size_t i = 0; i < methods.size(); ++i) method_index.emplace(methods[i], i);

  RatingMatrix m = RatingMatrix::make(std::move(mosaics), std::move(methods), std::string(metric_name(metric)));
  for (const auto& r : records) {
    auto mi = method_index.find(r.method_id);
    if (mi == method_index.end()) continue;
    m.at(mosaic_index.at(r.mosaic_id), mi->second) = r.metrics.get(metric);
  }
  return m;
}

ReliabilityReport reliability_report(std::span<const EvaluationRecord> records, std::span<const Metric> metrics,
                                     MeasurementLevel level) {
  // Two methods must share two mosaics for any statistic to exist.
  std::map<std::string, std::vector<std::string>> mosaics_of;
  for (const auto& r : records) mosaics_of[r.method_id].push_back(r.mosaic_id);
  if (mosaics_of.size() < 2) {
    throw Error(ErrorCode::too_few_methods, "reliability needs at least two methods, got " +
                                                std::to_string(mosaics_of.size()));
  }
  bool shared = false;
  for (auto a = mosaics_of.begin(); a != mosaics_of.end() && !shared; ++a) {
    std::vector<std::string> sa = a->second;
    std::sort(sa.begin(), sa.end());
    for (auto b = std::next(a); b != mosaics_of.end() && !shared; ++b) {
      std::vector<std::string> sb = b->second;
      std::sort(sb.begin(), sb.end());
      std::vector<std::string> both;
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
      shared = both.size() >= 2;
    }
  }
  if (!shared) throw Error(ErrorCode::too_few_methods, "no two methods share two mosaics");

  ReliabilityReport report;
  report.level = level;
  for (Metric metric : metrics) {
    const RatingMatrix m = rating_matrix(records, metric);
    if (m.units.size() < 2 || m.raters.size() < 2) continue;

    AlphaRow row;
    row.metric = metric;
    row.methods = m.units;
    row.raters = m.raters.size();
    try {
      row.result = krippendorff_alpha(m, level);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::too_few_values) throw;
    }
    report.alpha.push_back(std::move(row));
    report.rho.push_back({metric, m.raters.size(), inter_method_matrix(m)});
  }
  return report;
}

namespace {

json score_json(std::optional<double> v) { return v ? json(*v) : json("undefined"); }

}  // namespace

std::string alpha_to_json(const ReliabilityReport& report) {
  json rows = json::array();
  for (const auto& row : report.alpha) {
    rows.push_back({{"metric", std::string(metric_name(row.metric))},
                    {"methods", row.methods},
                    {"raters", row.raters},
                    {"alpha", score_json(row.result.alpha)},
                    {"observed_disagreement", row.result.observed_disagreement},
                    {"expected_disagreement", row.result.expected_disagreement}});
  }
  json doc;
  doc["level"] = std::string(to_string(report.level));
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string rho_to_json(const ReliabilityReport& report) {
  json tables = json::array();
  for (const auto& table : report.rho) {
    const std::size_t n = table.matrix.method_ids.size();
    json grid = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json line = json::array();
      for (std::size_t j = 0; j < n; ++j) line.push_back(score_json(table.matrix.at(i, j)));
      grid.push_back(std::move(line));
    }
    tables.push_back({{"metric", std::string(metric_name(table.metric))},
                      {"methods", table.matrix.method_ids},
                      {"raters", table.raters},
                      {"rho", std::move(grid)}});
  }
  json doc;
  doc["metrics"] = std::move(tables);
  return doc.dump(2) + "\n";
}

}  // namespace salbench
