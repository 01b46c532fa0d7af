#include "salbench/metrics.hpp"

#include <string>

#include "salbench/error.hpp"

namespace salbench {

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::precision: return "precision";
    case Metric::sensitivity: return "sensitivity";
    case Metric::specificity: return "specificity";
    case Metric::false_negative_rate: return "false_negative_rate";
    case Metric::false_positive_rate: return "false_positive_rate";
    case Metric::accuracy: return "accuracy";
    case Metric::f1: return "f1";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (metric_name(m) == name) return m;
  }
  throw Error(ErrorCode::invalid_argument, "unknown metric '" + std::string(name) + "'");
}

std::optional<double> MetricVector::get(Metric m) const noexcept {
  switch (m) {
    case Metric::precision: return precision;
    case Metric::sensitivity: return sensitivity;
    case Metric::specificity: return specificity;
    case Metric::false_negative_rate: return false_negative_rate;
    case Metric::false_positive_rate: return false_positive_rate;
    case Metric::accuracy: return accuracy;
    case Metric::f1: return f1;
  }
  return std::nullopt;
}

void MetricVector::set(Metric m, std::optional<double> value) noexcept {
  switch (m) {
    case Metric::precision: precision = value; break;
    case Metric::sensitivity: sensitivity = value; break;
    case Metric::specificity: specificity = value; break;
    case Metric::false_negative_rate: false_negative_rate = value; break;
    case Metric::false_positive_rate: false_positive_rate = value; break;
    case Metric::accuracy: accuracy = value; break;
    case Metric::f1: f1 = value; break;
  }
}

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

MetricVector compute_metrics(const ConfusionTally& t, SignCapability cap) {
  MetricVector v;
  v.precision = ratio(t.tp, t.tp + t.fp);
  if (cap == SignCapability::positive_only) return v;

  v.sensitivity = ratio(t.tp, t.tp + t.fn);
  v.specificity = ratio(t.tn, t.tn + t.fp);
  v.false_negative_rate = ratio(t.fn, t.tp + t.fn);
  v.false_positive_rate = ratio(t.fp, t.tn + t.fp);
  v.accuracy = ratio(t.tp + t.tn, t.tp + t.tn + t.fp + t.fn);
  if (v.precision && v.sensitivity) {
    v.f1 = ratio(2.0 * *v.precision * *v.sensitivity, *v.precision + *v.sensitivity);
  }
  return v;
}

}  // namespace salbench
