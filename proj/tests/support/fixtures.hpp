#pragma once

#include <array>
#include <filesystem>
#include <random>
#include <string>

#include "salbench/mosaic.hpp"
#include "salbench/saliency.hpp"

namespace salbench::testing {

/// Spec whose cells (in cell_index order: (0,0), (0,1), (1,0), (1,1)) carry the given labels.
inline MosaicSpec make_spec(std::string id, std::string target, std::array<std::string, 4> labels) {
  MosaicSpec spec;
  spec.mosaic_id = std::move(id);
  spec.target_class = std::move(target);
  for (std::size_t i = 0; i < 4; ++i) {
    spec.cells[i] = {labels[i] + "/img" + std::to_string(i), labels[i], "/nonexistent/" + labels[i]};
  }
  return spec;
}

/// Target on the bottom row, "other" on the top row.
inline MosaicSpec bottom_target_spec(std::string id = "m0") {
  return make_spec(std::move(id), "tabby", {"tabby", "tabby", "car", "car"});
}

inline SaliencyMap blank_map(const MosaicSpec& spec, int size, std::string method = "method") {
  SaliencyMap map = SaliencyMap::zeros(size, size);
  map.mosaic_id = spec.mosaic_id;
  map.target_class = spec.target_class;
  map.method_id = std::move(method);
  return map;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("salbench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace salbench::testing
