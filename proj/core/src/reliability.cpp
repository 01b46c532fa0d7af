#include "salbench/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "salbench/error.hpp"

namespace salbench {

RatingMatrix RatingMatrix::make(std::vector<std::string> raters, std::vector<std::string> units,
                                std::string metric_name) {
  RatingMatrix m;
  m.metric_name = std::move(metric_name);
  m.scores.assign(raters.size() * units.size(), std::nullopt);
  m.raters = std::move(raters);
  m.units = std::move(units);
  return m;
}

void validate(const RatingMatrix& m) {
  if (m.raters.size() < 2 || m.units.size() < 2) {
    throw Error(ErrorCode::invariant_violation, "rating matrix needs at least 2 raters and 2 units");
  }
  if (m.scores.size() != m.raters.size() * m.units.size()) {
    throw Error(ErrorCode::invariant_violation, "score grid does not match raters x units");
  }
}

std::vector<Score> rank_row(std::span<const Score> scores) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i]) order.push_back(i);
  }
  if (order.size() < 2) throw Error(ErrorCode::too_few_values, "ranking needs at least two scores");

  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *scores[a] > *scores[b]; });

  std::vector<Score> ranks(scores.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && *scores[order[end]] == *scores[order[start]]) ++end;
    // Positions start..end-1 hold ranks start+1..end; ties share the mean.
    const double shared = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = shared;
    start = end;
  }
  return ranks;
}

AlphaResult alpha_from_values(const RatingMatrix& m, MeasurementLevel level) {
  validate(m);
  const std::size_t raters = m.raters.size();
  const std::size_t units = m.units.size();

  // Value domain over pairable units only.
  std::vector<double> domain;
  std::vector<std::size_t> unit_count(units, 0);
  for (std::size_t u = 0; u < units; ++u) {
    for (std::size_t r = 0; r < raters; ++r) {
      if (m.at(r, u)) ++unit_count[u];
    }
  }
  for (std::size_t u = 0; u < units; ++u) {
    if (unit_count[u] < 2) continue;
    for (std::size_t r = 0; r < raters; ++r) {
      if (auto v = m.at(r, u)) domain.push_back(*v);
    }
  }
  if (domain.empty()) throw Error(ErrorCode::too_few_values, "no unit carries two or more values");
  std::sort(domain.begin(), domain.end());
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
  const std::size_t V = domain.size();
  auto index_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(domain.begin(), domain.end(), v) - domain.begin());
  };

  // Coincidence matrix: o[c][k] = sum over units of n_uc * (n_uk - [c == k]) / (m_u - 1).
  std::vector<double> o(V * V, 0.0);
  std::vector<std::size_t> counts(V);
  std::vector<std::size_t> present;
  for (std::size_t u = 0; u < units; ++u) {
    if (unit_count[u] < 2) continue;
    std::fill(counts.begin(), counts.end(), 0);
    present.clear();
    for (std::size_t r = 0; r < raters; ++r) {
      if (auto v = m.at(r, u)) {
        const std::size_t c = index_of(*v);
        if (counts[c]++ == 0) present.push_back(c);
      }
    }
    const double weight = 1.0 / static_cast<double>(unit_count[u] - 1);
    for (std::size_t c : present) {
      for (std::size_t k : present) {
        const double pairs = static_cast<double>(counts[c]) * static_cast<double>(counts[k] - (c == k ? 1 : 0));
        o[c * V + k] += pairs * weight;
      }
    }
  }

  std::vector<double> marginal(V, 0.0);
  for (std::size_t c = 0; c < V; ++c) {
    for (std::size_t k = 0; k < V; ++k) marginal[c] += o[c * V + k];
  }
  const double n = std::accumulate(marginal.begin(), marginal.end(), 0.0);

  // prefix[i] = marginal[0] + ... + marginal[i-1]
  std::vector<double> prefix(V + 1, 0.0);
  for (std::size_t c = 0; c < V; ++c) prefix[c + 1] = prefix[c] + marginal[c];

  auto delta = [&](std::size_t c, std::size_t k) -> double {
    if (c == k) return 0.0;
    switch (level) {
      case MeasurementLevel::nominal:
        return 1.0;
      case MeasurementLevel::ordinal: {
        const std::size_t lo = std::min(c, k);
        const std::size_t hi = std::max(c, k);
        const double span = prefix[hi + 1] - prefix[lo] - 0.5 * (marginal[lo] + marginal[hi]);
        return span * span;
      }
      case MeasurementLevel::interval: {
        const double d = domain[c] - domain[k];
        return d * d;
      }
    }
    return 0.0;
  };

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < V; ++c) {
    for (std::size_t k = 0; k < V; ++k) {
      if (c == k) continue;
      const double d = delta(c, k);
      observed += o[c * V + k] * d;
      expected += marginal[c] * marginal[k] * d;
    }
  }

  AlphaResult result;
  result.pairable_values = static_cast<std::size_t>(std::llround(n));
  result.observed_disagreement = observed / n;
  result.expected_disagreement = n > 1.0 ? expected / (n * (n - 1.0)) : 0.0;
  if (result.expected_disagreement > 0.0) {
    result.alpha = 1.0 - result.observed_disagreement / result.expected_disagreement;
  }
  return result;
}

AlphaResult krippendorff_alpha(const RatingMatrix& m, MeasurementLevel level) {
  validate(m);
  RatingMatrix ranked = m;
  for (std::size_t r = 0; r < m.raters.size(); ++r) {
    const auto row = m.row(r);
    const auto present = std::count_if(row.begin(), row.end(), [](const Score& s) { return s.has_value(); });
    std::vector<Score> ranks = present >= 2 ? rank_row(row) : std::vector<Score>(row.size());
    std::copy(ranks.begin(), ranks.end(), ranked.scores.begin() + static_cast<std::ptrdiff_t>(r * m.units.size()));
  }
  return alpha_from_values(ranked, level);
}

std::optional<double> spearman_rho(std::span<const Score> x, std::span<const Score> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::too_few_values, "spearman_rho needs equal-length inputs");
  std::vector<Score> kept_x;
  std::vector<Score> kept_y;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      kept_x.push_back(x[i]);
      kept_y.push_back(y[i]);
    }
  }
  if (kept_x.size() < 3) throw Error(ErrorCode::too_few_values, "spearman_rho needs at least three complete pairs");

  const auto rx = rank_row(kept_x);
  const auto ry = rank_row(kept_y);
  // Fractional ranks always average to (n + 1) / 2, so deviations are exact halves.
  const long double mean = 0.5L * static_cast<long double>(kept_x.size() + 1);
  long double cov = 0.0L, var_x = 0.0L, var_y = 0.0L;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const long double dx = static_cast<long double>(*rx[i]) - mean;
    const long double dy = static_cast<long double>(*ry[i]) - mean;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0L || var_y == 0.0L) return std::nullopt;
  const double rho = static_cast<double>(cov / std::sqrt(var_x * var_y));
  return std::clamp(rho, -1.0, 1.0);
}

std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
  std::vector<Score> sx(x.begin(), x.end());
  std::vector<Score> sy(y.begin(), y.end());
  return spearman_rho(std::span<const Score>(sx), std::span<const Score>(sy));
}

RhoMatrix inter_method_matrix(const RatingMatrix& m) {
  validate(m);
  const std::size_t units = m.units.size();
  const std::size_t raters = m.raters.size();
  std::vector<std::vector<Score>> columns(units, std::vector<Score>(raters));
  for (std::size_t r = 0; r < raters; ++r) {
    for (std::size_t u = 0; u < units; ++u) columns[u][r] = m.at(r, u);
  }

  RhoMatrix out;
  out.method_ids = m.units;
  out.rho.assign(units * units, std::nullopt);
  for (std::size_t i = 0; i < units; ++i) {
    out.rho[i * units + i] = 1.0;
    for (std::size_t j = i + 1; j < units; ++j) {
      std::optional<double> rho;
      try {
        rho = spearman_rho(std::span<const Score>(columns[i]), std::span<const Score>(columns[j]));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::too_few_values) throw;
      }
      out.rho[i * units + j] = rho;
      out.rho[j * units + i] = rho;
    }
  }
  return out;
}

}  // namespace salbench
