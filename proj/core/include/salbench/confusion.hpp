#pragma once

#include <string>

#include "salbench/mosaic.hpp"
#include "salbench/saliency.hpp"

namespace salbench {

/// Attribution mass split by sign and by whether the pixel lies on a
/// target-class image. Negative mass is stored as a magnitude.
///
///   tp  positive FI on target cells      fp  positive FI on other cells
///   fn  |negative FI| on target cells    tn  |negative FI| on other cells
struct ConfusionTally {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tn = 0.0;

  double positive_mass() const noexcept { return tp + fp; }
  double negative_mass() const noexcept { return fn + tn; }
  double total_mass() const noexcept { return tp + fp + fn + tn; }

  friend bool operator==(const ConfusionTally&, const ConfusionTally&) = default;
};

/// Class label of the image covering raster pixel (row, col) of a square
/// mosaic. Throws out_of_range outside [0, mosaic_pixels).
const std::string& quadrant_class(const MosaicSpec& spec, int row, int col, int mosaic_pixels = kMosaicPixels);

/// Sums attribution into the four masses. Zero pixels count nowhere. The map
/// must name the MosaicSpec's mosaic and target class (id_mismatch otherwise) and
/// have even, non-zero dimensions (dimension_mismatch otherwise).
ConfusionTally tally_confusion(const SaliencyMap& map, const MosaicSpec& spec);

}  // namespace salbench
