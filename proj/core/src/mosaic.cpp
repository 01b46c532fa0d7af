#include "salbench/mosaic.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "salbench/error.hpp"
#include "salbench/parallel.hpp"
#include "salbench/random.hpp"

namespace salbench {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

PixelRect cell_rect(CellCoord c, int mosaic_height, int mosaic_width) {
  const int half_rows = mosaic_height / 2;
  const int half_cols = mosaic_width / 2;
  return {c.x == 1 ? 0 : half_rows, c.y == 0 ? 0 : half_cols, half_rows, half_cols};
}

CellCoord cell_at_pixel(int row, int col, int mosaic_height, int mosaic_width) {
  if (row < 0 || col < 0 || row >= mosaic_height || col >= mosaic_width) {
    throw Error(ErrorCode::out_of_range, "pixel (" + std::to_string(row) + "," + std::to_string(col) +
                                             ") outside " + std::to_string(mosaic_height) + "x" +
                                             std::to_string(mosaic_width));
  }
  return {row < mosaic_height / 2 ? 1 : 0, col < mosaic_width / 2 ? 0 : 1};
}

void validate(const MosaicSpec& spec) {
  if (spec.target_class.empty()) throw Error(ErrorCode::invariant_violation, spec.mosaic_id + ": empty target class");
  int targets = 0;
  for (const auto& cell : spec.cells) {
    if (cell.class_label.empty()) {
      throw Error(ErrorCode::invariant_violation, spec.mosaic_id + ": cell without class label");
    }
    if (cell.class_label == spec.target_class) ++targets;
  }
  if (targets != 2) {
    throw Error(ErrorCode::invariant_violation,
                spec.mosaic_id + ": expected 2 target cells, found " + std::to_string(targets));
  }
}

const MosaicSpec* MosaicManifest::find(std::string_view mosaic_id) const {
  auto it = std::find_if(mosaics.begin(), mosaics.end(), [&](const MosaicSpec& s) { return s.mosaic_id == mosaic_id; });
  return it == mosaics.end() ? nullptr : &*it;
}

void validate(const MosaicManifest& manifest) {
  if (manifest.cell_pixels <= 0 || manifest.mosaic_pixels != 2 * manifest.cell_pixels) {
    throw Error(ErrorCode::invariant_violation, "mosaic_pixels must be twice cell_pixels");
  }
  std::unordered_set<std::string> seen;
  for (const auto& spec : manifest.mosaics) {
    if (!seen.insert(spec.mosaic_id).second) {
      throw Error(ErrorCode::invariant_violation, "duplicate mosaic_id " + spec.mosaic_id);
    }
    validate(spec);
  }
}

// --- manifest JSON ---------------------------------------------------------

std::string manifest_to_json(const MosaicManifest& manifest) {
  json doc;
  doc["dataset_name"] = manifest.dataset_name;
  doc["cell_pixels"] = manifest.cell_pixels;
  doc["mosaic_pixels"] = manifest.mosaic_pixels;
  doc["global_seed"] = manifest.global_seed;
  json mosaics = json::array();
  for (const auto& spec : manifest.mosaics) {
    json cells = json::array();
    for (std::size_t i = 0; i < spec.cells.size(); ++i) {
      const CellCoord c = cell_coord(i);
      const ImageRecord& rec = spec.cells[i];
      cells.push_back({{"x", c.x},
                       {"y", c.y},
                       {"image_id", rec.image_id},
                       {"class_label", rec.class_label},
                       {"source_path", rec.source_path.generic_string()}});
    }
    mosaics.push_back({{"mosaic_id", spec.mosaic_id},
                       {"target_class", spec.target_class},
                       {"rng_seed", spec.rng_seed},
                       {"cells", std::move(cells)}});
  }
  doc["mosaics"] = std::move(mosaics);
  return doc.dump(2) + "\n";
}

MosaicManifest manifest_from_json(std::string_view text) {
  MosaicManifest manifest;
  try {
    const json doc = json::parse(text);
    manifest.dataset_name = doc.at("dataset_name").get<std::string>();
    manifest.cell_pixels = doc.at("cell_pixels").get<int>();
    manifest.mosaic_pixels = doc.at("mosaic_pixels").get<int>();
    manifest.global_seed = doc.at("global_seed").get<std::uint64_t>();
    for (const auto& m : doc.at("mosaics")) {
      MosaicSpec spec;
      spec.mosaic_id = m.at("mosaic_id").get<std::string>();
      spec.target_class = m.at("target_class").get<std::string>();
      spec.rng_seed = m.at("rng_seed").get<std::uint64_t>();
      const auto& cells = m.at("cells");
      if (cells.size() != 4) throw Error(ErrorCode::invariant_violation, spec.mosaic_id + ": need 4 cells");
      std::array<bool, 4> filled{};
      for (const auto& c : cells) {
        const CellCoord coord{c.at("x").get<int>(), c.at("y").get<int>()};
        if (coord.x < 0 || coord.x > 1 || coord.y < 0 || coord.y > 1) {
          throw Error(ErrorCode::invariant_violation, spec.mosaic_id + ": cell coordinate out of {0,1}");
        }
        const std::size_t idx = cell_index(coord);
        if (filled[idx]) throw Error(ErrorCode::invariant_violation, spec.mosaic_id + ": duplicate cell");
        filled[idx] = true;
        spec.cells[idx] = {c.at("image_id").get<std::string>(), c.at("class_label").get<std::string>(),
                           fs::path(c.at("source_path").get<std::string>())};
      }
      manifest.mosaics.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_header, std::string("manifest: ") + e.what());
  }
  validate(manifest);
  return manifest;
}

void write_manifest(const MosaicManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest_to_json(manifest);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
}

MosaicManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

// --- sampling --------------------------------------------------------------

OtherClassPolicy OtherClassPolicy::parse(std::string_view text) {
  if (text == "random") return random_distinct();
  constexpr std::string_view prefix = "fixed:";
  if (text.starts_with(prefix) && text.size() > prefix.size()) {
    return fixed(std::string(text.substr(prefix.size())));
  }
  throw Error(ErrorCode::invalid_argument, "policy must be fixed:<class> or random, got '" + std::string(text) + "'");
}

std::string OtherClassPolicy::to_string() const {
  return kind == Kind::fixed ? "fixed:" + fixed_class : "random";
}

namespace {

std::vector<const ImageRecord*> of_class(std::span<const ImageRecord> pool, std::string_view cls) {
  std::vector<const ImageRecord*> out;
  for (const auto& rec : pool) {
    if (rec.class_label == cls) out.push_back(&rec);
  }
  return out;
}

// Partial Fisher-Yates: the first k entries become a uniform k-subset in random order.
template <typename Range>
void draw_prefix(Range& items, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_below(rng, items.size() - i);
    std::swap(items[i], items[j]);
  }
}

}  // namespace

MosaicSpec sample_mosaic_spec(std::span<const ImageRecord> pool, std::string_view target_class,
                              const OtherClassPolicy& policy, std::uint64_t seed, std::string mosaic_id) {
  auto targets = of_class(pool, target_class);
  if (targets.empty()) {
    throw Error(ErrorCode::unknown_target_class, "no images of class '" + std::string(target_class) + "'");
  }
  if (targets.size() < 2) {
    throw Error(ErrorCode::insufficient_pool, "class '" + std::string(target_class) + "' has fewer than 2 images");
  }

  Rng rng(seed);
  draw_prefix(targets, 2, rng);
  std::array<const ImageRecord*, 4> chosen{targets[0], targets[1], nullptr, nullptr};

  if (policy.kind == OtherClassPolicy::Kind::fixed) {
    if (policy.fixed_class == target_class) {
      throw Error(ErrorCode::invalid_argument, "fixed other class equals the target class");
    }
    auto others = of_class(pool, policy.fixed_class);
    if (others.size() < 2) {
      throw Error(ErrorCode::insufficient_pool, "class '" + policy.fixed_class + "' has fewer than 2 images");
    }
    draw_prefix(others, 2, rng);
    chosen[2] = others[0];
    chosen[3] = others[1];
  } else {
    std::set<std::string> labels;
    for (const auto& rec : pool) {
      if (rec.class_label != target_class) labels.insert(rec.class_label);
    }
    std::vector<std::string> classes(labels.begin(), labels.end());
    if (classes.size() < 2) {
      throw Error(ErrorCode::insufficient_pool, "random policy needs at least 2 non-target classes");
    }
    draw_prefix(classes, 2, rng);
    for (std::size_t k = 0; k < 2; ++k) {
      auto members = of_class(pool, classes[k]);
      chosen[2 + k] = members[uniform_below(rng, members.size())];
    }
  }

  draw_prefix(chosen, chosen.size(), rng);

  MosaicSpec spec;
  if (mosaic_id.empty()) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "m%016llx", static_cast<unsigned long long>(seed));
    mosaic_id = buf;
  }
  spec.mosaic_id = std::move(mosaic_id);
  spec.target_class = std::string(target_class);
  spec.rng_seed = seed;
  for (std::size_t i = 0; i < 4; ++i) spec.cells[i] = *chosen[i];
  return spec;
}

// --- assembly --------------------------------------------------------------

RgbImage load_record(const ImageRecord& record) { return load_image(record.source_path); }

RgbImage assemble_mosaic(const MosaicSpec& spec, const ImageLoader& loader, int cell_pixels) {
  const int size = 2 * cell_pixels;
  RgbImage mosaic(size, size);
  for (std::size_t i = 0; i < spec.cells.size(); ++i) {
    const ImageRecord& rec = spec.cells[i];
    RgbImage source;
    try {
      source = loader(rec);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::decode_failure, rec.image_id + ": " + e.what());
    }
    if (source.empty()) throw Error(ErrorCode::decode_failure, rec.image_id + ": empty image");
    const RgbImage resized = resize_bilinear(source, cell_pixels, cell_pixels);
    const PixelRect rect = cell_rect(cell_coord(i), size, size);
    blit(resized, mosaic, rect.row0, rect.col0);
  }
  return mosaic;
}

// --- dataset ---------------------------------------------------------------

std::vector<ImageRecord> scan_class_folders(const fs::path& root) {
  static const std::set<std::string> kExtensions{".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp", ".ppm"};
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::io_failure, "not a directory: " + root.string());
  std::vector<ImageRecord> pool;
  for (const auto& class_dir : fs::directory_iterator(root)) {
    if (!class_dir.is_directory()) continue;
    const std::string label = class_dir.path().filename().string();
    for (const auto& entry : fs::directory_iterator(class_dir.path())) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (!kExtensions.count(ext)) continue;
      pool.push_back({label + "/" + entry.path().filename().string(), label, entry.path()});
    }
  }
  std::sort(pool.begin(), pool.end(), [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  return pool;
}

std::uint64_t mosaic_seed(std::uint64_t global_seed, std::string_view target_class, std::size_t index) {
  return derive_seed(global_seed, {target_class, std::to_string(index)});
}

std::string make_mosaic_id(std::string_view target_class, std::size_t index) {
  std::string id;
  for (unsigned char c : target_class) id.push_back(std::isalnum(c) ? static_cast<char>(c) : '_');
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "_%04zu", index);
  return id + suffix;
}

MosaicManifest build_dataset(const DatasetConfig& config) {
  const auto pool = scan_class_folders(config.classes_dir);
  return build_dataset(config, pool, load_record);
}

MosaicManifest build_dataset(const DatasetConfig& config, std::span<const ImageRecord> pool,
                             const ImageLoader& loader) {
  MosaicManifest manifest;
  manifest.dataset_name = config.dataset_name;
  manifest.cell_pixels = config.cell_pixels;
  manifest.mosaic_pixels = 2 * config.cell_pixels;
  manifest.global_seed = config.global_seed;

  for (const auto& request : config.targets) {
    for (std::size_t i = 0; i < request.count; ++i) {
      manifest.mosaics.push_back(sample_mosaic_spec(pool, request.target_class, request.policy,
                                                    mosaic_seed(config.global_seed, request.target_class, i),
                                                    make_mosaic_id(request.target_class, i)));
    }
  }
  validate(manifest);
  if (manifest.mosaics.empty()) return manifest;

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + config.out_dir.string() + ": " + ec.message());

  parallel_for(manifest.mosaics.size(), [&](std::size_t i) {
    const MosaicSpec& spec = manifest.mosaics[i];
    write_png(assemble_mosaic(spec, loader, config.cell_pixels), config.out_dir / (spec.mosaic_id + ".png"));
  });
  write_manifest(manifest, config.out_dir / "manifest.json");
  return manifest;
}

}  // namespace salbench
