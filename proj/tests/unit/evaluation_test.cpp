#include "salbench/evaluation.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <random>

#include "salbench/synthetic.hpp"
#include "support/fixtures.hpp"

namespace salbench {
namespace {

using testing::make_spec;

MosaicManifest small_manifest(std::size_t n, int px = 32) {
  MosaicManifest m;
  m.dataset_name = "unit";
  m.cell_pixels = px / 2;
  m.mosaic_pixels = px;
  const std::array<std::array<std::string, 4>, 2> layouts{{{"t", "t", "a", "b"}, {"a", "t", "b", "t"}}};
  for (std::size_t i = 0; i < n; ++i) m.mosaics.push_back(make_spec("m" + std::to_string(i), "t", layouts[i % 2]));
  return m;
}

std::vector<MethodDescriptor> descriptors(std::span<const SimulatedMethod> methods) {
  std::vector<MethodDescriptor> out;
  for (const auto& m : methods) out.push_back(m.descriptor);
  return out;
}

EvaluationRecord record(std::string mosaic, std::string method, double accuracy,
                        SignCapability cap = SignCapability::signed_values) {
  EvaluationRecord r;
  r.mosaic_id = std::move(mosaic);
  r.method_id = std::move(method);
  r.target_class = "t";
  r.sign_capability = cap;
  r.metrics.precision = accuracy;
  if (cap == SignCapability::signed_values) r.metrics.accuracy = accuracy;
  return r;
}

TEST(Evaluate, PerfectDirectoryGivesOnes) {
  const auto dir = testing::scratch_dir("eval_perfect");
  const MosaicManifest manifest = small_manifest(200);
  const std::vector<SimulatedMethod> methods{parse_method_token("a:perfect", 0), parse_method_token("b:perfect", 1),
                                             parse_method_token("c:perfect", 2), parse_method_token("d:perfect", 3)};
  const auto registry = gen_method_family(manifest.mosaics, methods, 1, dir, 32);
  const EvaluationResult result = evaluate(manifest, dir, registry);
  EXPECT_TRUE(result.ok());
  EXPECT_TRUE(result.missing.empty());
  ASSERT_EQ(result.records.size(), 800u);
  for (const auto& r : result.records) {
    EXPECT_EQ(*r.metrics.accuracy, 1.0);
    EXPECT_EQ(*r.metrics.f1, 1.0);
  }
  EXPECT_EQ(result.records[0].mosaic_id, "m0");
  EXPECT_EQ(result.records[1].method_id, "b");
  EXPECT_EQ(result.records[4].mosaic_id, "m1");
}

TEST(Evaluate, CorruptAndMissingFilesAreIsolated) {
  const auto dir = testing::scratch_dir("eval_corrupt");
  const MosaicManifest manifest = small_manifest(20);
  const std::vector<SimulatedMethod> methods{fidelity_method("a", 0.8), fidelity_method("b", 0.6)};
  const auto registry = gen_method_family(manifest.mosaics, methods, 2, dir, 32);

  const auto victim = dir / saliency_filename("m3", "b");
  std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(20);
  f.put('\x7f');
  f.close();
  std::filesystem::remove(dir / saliency_filename("m7", "a"));

  const EvaluationResult result = evaluate(manifest, dir, registry);
  EXPECT_EQ(result.records.size(), 38u);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].mosaic_id, "m3");
  EXPECT_EQ(result.errors[0].code, ErrorCode::checksum_mismatch);
  ASSERT_EQ(result.missing.size(), 1u);
  EXPECT_EQ(result.missing[0].method_id, "a");

  const auto doc = nlohmann::json::parse(errors_to_json(result.errors));
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc.size(), 1u);
}

TEST(Evaluate, InMemorySourceMatchesDirectory) {
  const auto dir = testing::scratch_dir("eval_memory");
  const MosaicManifest manifest = small_manifest(10);
  const std::vector<SimulatedMethod> methods{fidelity_method("a", 0.7), parse_method_token("n:noise", 1)};
  const auto registry = gen_method_family(manifest.mosaics, methods, 5, dir, 32);
  const MapSource memory = [&](const MosaicSpec& spec, const MethodDescriptor& d) -> std::optional<SaliencyMap> {
    for (const auto& m : methods) {
      if (m.descriptor == d) return simulate(spec, m, 5, 32);
    }
    return std::nullopt;
  };
  EXPECT_EQ(records_to_csv(evaluate(manifest, registry, memory).records),
            records_to_csv(evaluate(manifest, dir, registry).records));
}

TEST(EvaluatePair, RejectsForeignMaps) {
  const MosaicSpec spec = testing::bottom_target_spec();
  const MethodDescriptor method{"x", SignCapability::signed_values, "x"};
  SaliencyMap map = testing::blank_map(spec, 32, "y");
  EXPECT_THROW(evaluate_pair(spec, method, map, 32), Error);
  map.method_id = "x";
  map.sign_capability = SignCapability::positive_only;
  EXPECT_THROW(evaluate_pair(spec, method, map, 32), Error);
  map.sign_capability = SignCapability::signed_values;
  EXPECT_THROW(evaluate_pair(spec, method, map, 64), Error);
  EXPECT_NO_THROW(evaluate_pair(spec, method, map, 32));
}

TEST(RecordsCsv, RoundTripWithUndefinedAndQuoting) {
  std::vector<EvaluationRecord> records;
  EvaluationRecord a = record("m,1", "say \"hi\"", 0.1 + 0.2);
  a.tally = {1.0 / 3.0, 2.5e-300, 0, 123456789.125};
  a.metrics.f1 = 2.0 / 3.0;
  records.push_back(a);
  records.push_back(record("m2", "lime", 0.75, SignCapability::positive_only));
  const std::string csv = records_to_csv(records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "mosaic_id,method_id,target_class,sign_capability,tp,fp,fn,tn,precision,sensitivity,specificity,"
            "false_negative_rate,false_positive_rate,accuracy,f1");
  EXPECT_NE(csv.find("\"m,1\",\"say \"\"hi\"\"\""), std::string::npos);
  EXPECT_NE(csv.find(",NA,"), std::string::npos);

  const auto back = records_from_csv(csv);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].mosaic_id, records[i].mosaic_id);
    EXPECT_EQ(back[i].method_id, records[i].method_id);
    EXPECT_EQ(back[i].sign_capability, records[i].sign_capability);
    EXPECT_EQ(back[i].tally, records[i].tally);
    for (Metric m : kAllMetrics) EXPECT_EQ(back[i].metrics.get(m), records[i].metrics.get(m));
  }
  EXPECT_EQ(records_to_csv(back), csv);
  EXPECT_THROW(records_from_csv("nope\n"), Error);
}

TEST(Quantiles, LinearInterpolation) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(quantile_sorted(v, 0.5), 2.5);
  EXPECT_EQ(quantile_sorted(v, 0.25), 1.75);
  EXPECT_EQ(quantile_sorted(v, 0.0), 1.0);
  EXPECT_EQ(quantile_sorted(v, 1.0), 4.0);
  EXPECT_THROW(quantile_sorted(std::vector<double>{}, 0.5), Error);
}

TEST(Summarize, HandCases) {
  std::vector<EvaluationRecord> records;
  for (int i = 0; i < 4; ++i) records.push_back(record("m" + std::to_string(i), "ones", 1.0));
  records.push_back(record("m0", "pair", 0.0));
  records.push_back(record("m1", "pair", 1.0));
  const auto rows = summarize(records);
  auto find = [&](const std::string& method, Metric metric) {
    return *std::find_if(rows.begin(), rows.end(),
                         [&](const SummaryRow& r) { return r.method_id == method && r.metric == metric; });
  };
  const SummaryRow ones = find("ones", Metric::accuracy);
  EXPECT_EQ(ones.count_defined, 4u);
  EXPECT_EQ(ones.mean, 1.0);
  EXPECT_EQ(ones.median, 1.0);
  EXPECT_EQ(ones.quartile_1, 1.0);
  EXPECT_EQ(ones.minimum, 1.0);
  const SummaryRow pair = find("pair", Metric::accuracy);
  EXPECT_EQ(pair.mean, 0.5);
  EXPECT_EQ(pair.median, 0.5);
  EXPECT_EQ(pair.minimum, 0.0);
  EXPECT_EQ(pair.maximum, 1.0);
  EXPECT_EQ(rows.front().method_id, "ones");
  EXPECT_TRUE(std::none_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.metric == Metric::f1; }));
  const std::string csv = summary_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "method_id,metric_name,count_defined,mean,median,quartile_1,quartile_3,minimum,maximum");
}

TEST(Summarize, MatchesSortingOracle) {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EvaluationRecord> records;
  std::vector<double> values;
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng);
    values.push_back(v);
    records.push_back(record("m" + std::to_string(i), "x", v));
  }
  std::sort(values.begin(), values.end());
  long double sum = 0;
  for (double v : values) sum += v;
  auto at = [&](double q) {
    const double pos = q * (values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - lo;
    return lo + 1 < values.size() ? values[lo] + frac * (values[lo + 1] - values[lo]) : values[lo];
  };
  const auto rows = summarize(records);
  const SummaryRow row = *std::find_if(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.metric == Metric::accuracy; });
  EXPECT_EQ(row.count_defined, 10000u);
  EXPECT_NEAR(row.mean, static_cast<double>(sum / 10000), 1e-12);
  EXPECT_NEAR(row.median, at(0.5), 1e-12);
  EXPECT_NEAR(row.quartile_1, at(0.25), 1e-12);
  EXPECT_NEAR(row.quartile_3, at(0.75), 1e-12);
  EXPECT_EQ(row.minimum, values.front());
  EXPECT_EQ(row.maximum, values.back());
}

TEST(ReliabilityReport, NeedsTwoMethodsSharingMosaics) {
  std::vector<EvaluationRecord> one{record("m0", "a", 0.1), record("m1", "a", 0.2)};
  try {
    reliability_report(one, kAllMetrics);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::too_few_methods);
  }
  std::vector<EvaluationRecord> disjoint{record("m0", "a", 0.1), record("m1", "a", 0.2), record("m2", "b", 0.3),
                                         record("m3", "b", 0.4)};
  EXPECT_THROW(reliability_report(disjoint, kAllMetrics), Error);
}

TEST(ReliabilityReport, DegenerateFamilyAgreesPerfectly) {
  const MosaicManifest manifest = small_manifest(40);
  const std::vector<double> ps{1.0, 0.0};
  const auto family = fidelity_family(ps);
  const MapSource source = [&](const MosaicSpec& spec, const MethodDescriptor& d) -> std::optional<SaliencyMap> {
    return simulate(spec, d.method_id == family[0].descriptor.method_id ? family[0] : family[1], 3, 32);
  };
  const auto result = evaluate(manifest, descriptors(family), source);
  const auto report = reliability_report(result.records, kAllMetrics);
  ASSERT_FALSE(report.alpha.empty());
  for (const AlphaRow& row : report.alpha) {
    if (row.metric == Metric::f1) {
      // F1 of the inverted method is undefined everywhere.
      EXPECT_FALSE(row.result.defined());
      continue;
    }
    ASSERT_TRUE(row.result.defined()) << metric_name(row.metric);
    EXPECT_EQ(*row.result.alpha, 1.0) << metric_name(row.metric);
  }
}

TEST(ReliabilityReport, PositiveOnlyGating) {
  std::vector<EvaluationRecord> records;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    const std::string id = "m" + std::to_string(i);
    records.push_back(record(id, "signed_a", u(rng)));
    records.push_back(record(id, "pos_b", u(rng), SignCapability::positive_only));
  }
  const auto report = reliability_report(records, kAllMetrics);
  ASSERT_EQ(report.alpha.size(), 1u);
  EXPECT_EQ(report.alpha[0].metric, Metric::precision);
  EXPECT_EQ(report.alpha[0].methods, (std::vector<std::string>{"signed_a", "pos_b"}));
  EXPECT_EQ(report.alpha[0].raters, 12u);
  ASSERT_EQ(report.rho.size(), 1u);

  for (int i = 0; i < 12; ++i) records.push_back(record("m" + std::to_string(i), "signed_c", u(rng)));
  const auto mixed = reliability_report(records, kAllMetrics);
  EXPECT_EQ(mixed.alpha[0].methods.size(), 3u);
  const auto acc = std::find_if(mixed.alpha.begin(), mixed.alpha.end(),
                                [](const AlphaRow& r) { return r.metric == Metric::accuracy; });
  ASSERT_NE(acc, mixed.alpha.end());
  EXPECT_EQ(acc->methods, (std::vector<std::string>{"signed_a", "signed_c"}));
}

TEST(ReliabilityReport, JsonIsDeterministicAndWellFormed) {
  std::vector<EvaluationRecord> records;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "m" + std::to_string(i);
    records.push_back(record(id, "a", 0.1 * i));
    records.push_back(record(id, "b", 0.5));
    records.push_back(record(id, "c", 1.0 - 0.1 * i));
  }
  const std::vector<Metric> metrics{Metric::accuracy};
  const auto r1 = reliability_report(records, metrics);
  const auto r2 = reliability_report(records, metrics);
  EXPECT_EQ(alpha_to_json(r1), alpha_to_json(r2));
  EXPECT_EQ(rho_to_json(r1), rho_to_json(r2));

  const auto alpha = nlohmann::json::parse(alpha_to_json(r1));
  EXPECT_EQ(alpha["level"], "ordinal");
  EXPECT_EQ(alpha["rows"][0]["metric"], "accuracy");
  const auto rho = nlohmann::json::parse(rho_to_json(r1));
  const auto& grid = rho["metrics"][0]["rho"];
  EXPECT_EQ(grid[0][0], 1.0);
  EXPECT_EQ(grid[0][1], "undefined");
  EXPECT_EQ(grid[0][2], -1.0);
}

TEST(MeasurementLevelNames, RoundTrip) {
  for (auto level : {MeasurementLevel::nominal, MeasurementLevel::ordinal, MeasurementLevel::interval}) {
    EXPECT_EQ(parse_measurement_level(to_string(level)), level);
  }
  EXPECT_THROW(parse_measurement_level("ratio"), Error);
}

}  // namespace
}  // namespace salbench
