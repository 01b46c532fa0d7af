#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salbench/image.hpp"

namespace salbench {

inline constexpr int kCellPixels = 224;
inline constexpr int kMosaicPixels = 2 * kCellPixels;

struct ImageRecord {
  std::string image_id;
  std::string class_label;
  std::filesystem::path source_path;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Position of an image inside the 2x2 grid. x selects the row counted from
/// the bottom and y the column counted from the left:
///
///   (1,0) | (1,1)        top-left    | top-right
///   ------+------
///   (0,0) | (0,1)        bottom-left | bottom-right
struct CellCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

constexpr std::size_t cell_index(CellCoord c) noexcept { return static_cast<std::size_t>(2 * c.x + c.y); }
constexpr CellCoord cell_coord(std::size_t index) noexcept {
  return {static_cast<int>(index / 2), static_cast<int>(index % 2)};
}

/// Half-open pixel rectangle of a cell in a raster whose row 0 is the top.
struct PixelRect {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;
};

PixelRect cell_rect(CellCoord c, int mosaic_height, int mosaic_width);

/// Cell containing raster pixel (row, col); the upper half of the rows is
/// x == 1 and boundary indices belong to the higher-index half.
CellCoord cell_at_pixel(int row, int col, int mosaic_height, int mosaic_width);

struct MosaicSpec {
  std::string mosaic_id;
  std::array<ImageRecord, 4> cells;  // indexed by cell_index()
  std::string target_class;
  std::uint64_t rng_seed = 0;

  const ImageRecord& at(CellCoord c) const { return cells[cell_index(c)]; }
  bool is_target(CellCoord c) const { return at(c).class_label == target_class; }

  friend bool operator==(const MosaicSpec&, const MosaicSpec&) = default;
};

/// Throws invariant_violation unless exactly two of the four cells carry the
/// target class and every label is non-empty.
void validate(const MosaicSpec& spec);

struct MosaicManifest {
  std::string dataset_name;
  std::vector<MosaicSpec> mosaics;
  int cell_pixels = kCellPixels;
  int mosaic_pixels = kMosaicPixels;
  std::uint64_t global_seed = 0;

  const MosaicSpec* find(std::string_view mosaic_id) const;

  friend bool operator==(const MosaicManifest&, const MosaicManifest&) = default;
};

/// Checks mosaic_pixels == 2 * cell_pixels, unique ids and every spec.
void validate(const MosaicManifest& manifest);

std::string manifest_to_json(const MosaicManifest& manifest);
MosaicManifest manifest_from_json(std::string_view text);
void write_manifest(const MosaicManifest& manifest, const std::filesystem::path& path);
MosaicManifest read_manifest(const std::filesystem::path& path);

/// How the two non-target images are chosen.
struct OtherClassPolicy {
  enum class Kind { fixed, random_distinct };

  Kind kind = Kind::random_distinct;
  std::string fixed_class;

  static OtherClassPolicy fixed(std::string cls) { return {Kind::fixed, std::move(cls)}; }
  static OtherClassPolicy random_distinct() { return {}; }

  /// Accepts "fixed:<class>" or "random".
  static OtherClassPolicy parse(std::string_view text);
  std::string to_string() const;
};

/// Draws two target-class and two other-class images without replacement and
/// places them by a uniformly random permutation of the four cells. Fixed
/// policy takes both others from fixed_class; random_distinct takes one image
/// from each of two distinct randomly chosen non-target classes. The result
/// depends only on (pool order, target_class, policy, seed).
MosaicSpec sample_mosaic_spec(std::span<const ImageRecord> pool, std::string_view target_class,
                              const OtherClassPolicy& policy, std::uint64_t seed,
                              std::string mosaic_id = {});

using ImageLoader = std::function<RgbImage(const ImageRecord&)>;

/// Loads from ImageRecord::source_path.
RgbImage load_record(const ImageRecord& record);

/// Resizes each source to cell_pixels square and tiles them into a raster of
/// twice that size. Loader failures are rethrown as decode_failure naming the
/// image_id.
RgbImage assemble_mosaic(const MosaicSpec& spec, const ImageLoader& loader, int cell_pixels = kCellPixels);

/// One ImageRecord per image file in each immediate subdirectory of root;
/// the subdirectory name is the class label and image_id is "<class>/<file>".
/// Sorted by image_id.
std::vector<ImageRecord> scan_class_folders(const std::filesystem::path& root);

struct TargetRequest {
  std::string target_class;
  std::size_t count = 0;
  OtherClassPolicy policy;
};

struct DatasetConfig {
  std::string dataset_name = "mosaics";
  std::filesystem::path classes_dir;
  std::vector<TargetRequest> targets;
  std::uint64_t global_seed = 0;
  std::filesystem::path out_dir;
  int cell_pixels = kCellPixels;
};

/// Samples every requested mosaic, writes "<mosaic_id>.png" for each, then
/// writes manifest.json. Nothing is written when zero mosaics are requested.
MosaicManifest build_dataset(const DatasetConfig& config);

/// Same as above over an explicit pool and loader; classes_dir is ignored.
MosaicManifest build_dataset(const DatasetConfig& config, std::span<const ImageRecord> pool,
                             const ImageLoader& loader);

/// Per-mosaic seed used by build_dataset.
std::uint64_t mosaic_seed(std::uint64_t global_seed, std::string_view target_class, std::size_t index);

/// Filesystem-safe mosaic id: "<target with non-alphanumerics as '_'>_<index, 4 digits>".
std::string make_mosaic_id(std::string_view target_class, std::size_t index);

}  // namespace salbench
