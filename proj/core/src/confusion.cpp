#include "salbench/confusion.hpp"

#include "salbench/summation.hpp"

namespace salbench {

const std::string& quadrant_class(const MosaicSpec& spec, int row, int col, int mosaic_pixels) {
  return spec.at(cell_at_pixel(row, col, mosaic_pixels, mosaic_pixels)).class_label;
}

ConfusionTally tally_confusion(const SaliencyMap& map, const MosaicSpec& spec) {
  if (map.mosaic_id != spec.mosaic_id) {
    throw Error(ErrorCode::id_mismatch, "map for '" + map.mosaic_id + "' applied to mosaic '" + spec.mosaic_id + "'");
  }
  if (map.target_class != spec.target_class) {
    throw Error(ErrorCode::id_mismatch,
                "map targets '" + map.target_class + "' but mosaic targets '" + spec.target_class + "'");
  }
  if (map.width <= 0 || map.height <= 0 || map.width % 2 != 0 || map.height % 2 != 0 ||
      map.values.size() != static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height)) {
    throw Error(ErrorCode::dimension_mismatch, "map must have even, non-zero dimensions");
  }

  CompensatedSum tp, fp, fn, tn;
  for (std::size_t cell = 0; cell < 4; ++cell) {
    const CellCoord coord = cell_coord(cell);
    const bool target = spec.is_target(coord);
    CompensatedSum& positive = target ? tp : fp;
    CompensatedSum& negative = target ? fn : tn;
    const PixelRect rect = cell_rect(coord, map.height, map.width);
    for (int r = rect.row0; r < rect.row0 + rect.rows; ++r) {
      const double* row = map.values.data() + static_cast<std::size_t>(r) * map.width + rect.col0;
      for (int c = 0; c < rect.cols; ++c) {
        const double v = row[c];
        if (v > 0.0) {
          positive.add(v);
        } else if (v < 0.0) {
          negative.add(-v);
        }
      }
    }
  }
  return {tp.value(), fp.value(), fn.value(), tn.value()};
}

}  // namespace salbench
