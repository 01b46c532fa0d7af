#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace salbench {

/// A metric value or an explicit missing marker (never encoded as 0).
using Score = std::optional<double>;

/// Scores of every unit (saliency method) as seen by every rater (mosaic).
/// Row-major: scores[rater * units.size() + unit].
struct RatingMatrix {
  std::string metric_name;
  std::vector<std::string> raters;
  std::vector<std::string> units;
  std::vector<Score> scores;

  static RatingMatrix make(std::vector<std::string> raters, std::vector<std::string> units,
                           std::string metric_name = {});

  Score at(std::size_t rater, std::size_t unit) const { return scores[rater * units.size() + unit]; }
  Score& at(std::size_t rater, std::size_t unit) { return scores[rater * units.size() + unit]; }
  std::span<const Score> row(std::size_t rater) const {
    return std::span<const Score>(scores).subspan(rater * units.size(), units.size());
  }
};

/// Throws invariant_violation unless there are >= 2 raters, >= 2 units and a
/// full score grid.
void validate(const RatingMatrix& m);

/// Fractional ranks: the highest score gets rank 1, tied scores share the
/// mean of the positions they span, missing entries stay missing. Throws
/// too_few_values with fewer than two present scores.
std::vector<Score> rank_row(std::span<const Score> scores);

enum class MeasurementLevel { nominal, ordinal, interval };

struct AlphaResult {
  /// std::nullopt when expected disagreement is zero (no variation at all).
  std::optional<double> alpha;
  double observed_disagreement = 0.0;
  double expected_disagreement = 0.0;
  /// Values in units rated at least twice.
  std::size_t pairable_values = 0;

  bool defined() const noexcept { return alpha.has_value(); }
};

/// Krippendorff's alpha over the values exactly as given, via the
/// coincidence matrix. Units with fewer than two values are not pairable.
/// Throws too_few_values when nothing is pairable.
AlphaResult alpha_from_values(const RatingMatrix& m, MeasurementLevel level);

/// Inter-rater agreement of the rankings the raters induce: every rater's
/// row is replaced by rank_row() (raters with fewer than two scores are
/// skipped), then alpha is computed at the given level.
AlphaResult krippendorff_alpha(const RatingMatrix& m, MeasurementLevel level = MeasurementLevel::ordinal);

/// Pearson correlation of fractional ranks after dropping pairs with a
/// missing side. Throws too_few_values with fewer than three complete pairs
/// or mismatched lengths; std::nullopt when either side has no rank variance.
std::optional<double> spearman_rho(std::span<const Score> x, std::span<const Score> y);
std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y);

struct RhoMatrix {
  std::vector<std::string> method_ids;
  /// Symmetric, unit diagonal; std::nullopt marks an undefined pair.
  std::vector<std::optional<double>> rho;

  std::optional<double> at(std::size_t i, std::size_t j) const { return rho[i * method_ids.size() + j]; }
};

/// Pairwise spearman_rho between the score columns of every unit pair.
/// Pairs with too few shared raters or no variance are left undefined.
RhoMatrix inter_method_matrix(const RatingMatrix& m);

}  // namespace salbench
