#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "salbench/confusion.hpp"
#include "salbench/saliency.hpp"

namespace salbench {

enum class Metric {
  precision,
  sensitivity,
  specificity,
  false_negative_rate,
  false_positive_rate,
  accuracy,
  f1,
};

inline constexpr std::array<Metric, 7> kAllMetrics{
    Metric::precision,           Metric::sensitivity, Metric::specificity, Metric::false_negative_rate,
    Metric::false_positive_rate, Metric::accuracy,    Metric::f1,
};

std::string_view metric_name(Metric m) noexcept;
/// Inverse of metric_name; invalid_argument on unknown names.
Metric parse_metric(std::string_view name);

/// Only precision is meaningful for methods that never emit negative FI.
constexpr bool metric_applies(Metric m, SignCapability cap) noexcept {
  return cap == SignCapability::signed_values || m == Metric::precision;
}

/// The seven scores; std::nullopt means undefined (zero denominator or
/// suppressed by sign capability).
struct MetricVector {
  std::optional<double> precision;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> false_negative_rate;
  std::optional<double> false_positive_rate;
  std::optional<double> accuracy;
  std::optional<double> f1;

  std::optional<double> get(Metric m) const noexcept;
  void set(Metric m, std::optional<double> value) noexcept;
};

MetricVector compute_metrics(const ConfusionTally& tally, SignCapability cap);

}  // namespace salbench
