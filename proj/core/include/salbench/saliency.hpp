#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salbench/error.hpp"

namespace salbench {

struct MosaicManifest;

/// Whether a method can emit negative attribution.
enum class SignCapability { signed_values, positive_only };

std::string_view to_string(SignCapability cap) noexcept;
/// Accepts "signed" or "positive_only".
SignCapability parse_sign_capability(std::string_view text);

struct MethodDescriptor {
  std::string method_id;
  SignCapability sign_capability = SignCapability::signed_values;
  std::string display_name;

  friend bool operator==(const MethodDescriptor&, const MethodDescriptor&) = default;
};

/// Dense signed feature-importance grid over one mosaic, row-major with row 0
/// at the top. Values are held in double so that rescaling stays exact to
/// within double rounding; the interchange file stores binary32.
struct SaliencyMap {
  std::string mosaic_id;
  std::string method_id;
  std::string target_class;
  SignCapability sign_capability = SignCapability::signed_values;
  int width = 0;
  int height = 0;
  std::vector<double> values;

  static SaliencyMap zeros(int width, int height);

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;
};

/// Checks finiteness, the positive-only sign rule, grid size, and (if given)
/// the expected square size. Throws the matching ErrorCode.
void validate(const SaliencyMap& map, std::optional<int> expected_size = std::nullopt);

/// Every value divided by the largest magnitude; an all-zero map is returned
/// unchanged. Signs and exact zeros are preserved.
SaliencyMap normalize_max_scale(const SaliencyMap& map);

/// Every value multiplied by factor.
SaliencyMap scaled(const SaliencyMap& map, double factor);

// --- interchange format ----------------------------------------------------
//
//   offset  size      field
//   0       4         magic "SALM"
//   4       2         version (u16, currently 1)
//   6       4         width   (u32)
//   10      4         height  (u32)
//   14      4*w*h     values, binary32, row-major
//   14+4wh  4         CRC-32 of bytes [0, 14+4wh)
//
// All integers and floats little-endian. Identity fields live in a JSON
// sidecar "<file>.meta.json": mosaic_id, method_id, target_class,
// sign_capability.

inline constexpr std::uint16_t kSalmVersion = 1;
inline constexpr std::size_t kSalmHeaderBytes = 14;

/// Encodes only the value grid (narrowed to binary32).
std::vector<std::uint8_t> encode_salm(const SaliencyMap& map);
/// Decodes the value grid into map (identity fields untouched).
void decode_salm(std::span<const std::uint8_t> bytes, SaliencyMap& map);

std::filesystem::path sidecar_path(const std::filesystem::path& data_path);

/// Writes the SALM file and its sidecar. Values are narrowed to binary32, so
/// the round trip is bit-exact for any map whose values are binary32-representable.
void write_saliency(const SaliencyMap& map, const std::filesystem::path& path);

/// Reads a ".salm" file, or a ".csv" fixture (one text line per row, comma
/// separated), together with its sidecar, then validates the result.
SaliencyMap read_saliency(const std::filesystem::path& path);

/// Parses CSV text into the value grid of map.
void parse_saliency_csv(std::string_view text, SaliencyMap& map);

/// "<mosaic_id>__<method_id>.salm".
std::string saliency_filename(std::string_view mosaic_id, std::string_view method_id);

// --- method registry (methods.json) -----------------------------------------

void write_method_registry(std::span<const MethodDescriptor> methods, const std::filesystem::path& path);
std::vector<MethodDescriptor> read_method_registry(const std::filesystem::path& path);

/// Registry of a saliency directory: methods.json when present, otherwise the
/// distinct methods named by sidecars, sorted by method_id.
std::vector<MethodDescriptor> discover_methods(const std::filesystem::path& saliency_dir);

// --- directory validation --------------------------------------------------

struct Finding {
  std::filesystem::path path;
  ErrorCode code;
  std::string message;
};

/// Reads every saliency file under dir and checks it against the manifest:
/// size, finiteness, sign rule, known mosaic_id and matching target_class.
std::vector<Finding> validate_saliency_dir(const std::filesystem::path& dir, const MosaicManifest& manifest);

}  // namespace salbench
