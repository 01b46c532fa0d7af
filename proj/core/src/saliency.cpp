#include "salbench/saliency.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "salbench/mosaic.hpp"

namespace salbench {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(SignCapability cap) noexcept {
  return cap == SignCapability::positive_only ? "positive_only" : "signed";
}

SignCapability parse_sign_capability(std::string_view text) {
  if (text == "signed") return SignCapability::signed_values;
  if (text == "positive_only") return SignCapability::positive_only;
  throw Error(ErrorCode::malformed_header, "unknown sign_capability '" + std::string(text) + "'");
}

SaliencyMap SaliencyMap::zeros(int width, int height) {
  SaliencyMap map;
  map.width = width;
  map.height = height;
  map.values.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  return map;
}

void validate(const SaliencyMap& map, std::optional<int> expected_size) {
  if (map.width <= 0 || map.height <= 0 ||
      map.values.size() != static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height)) {
    throw Error(ErrorCode::dimension_mismatch, "value grid does not match width x height");
  }
  if (expected_size && (map.width != *expected_size || map.height != *expected_size)) {
    throw Error(ErrorCode::dimension_mismatch, std::to_string(map.width) + "x" + std::to_string(map.height) +
                                                   " map, expected " + std::to_string(*expected_size) + " square");
  }
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double v = map.values[i];
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "value at index " + std::to_string(i));
    if (v < 0.0 && map.sign_capability == SignCapability::positive_only) {
      throw Error(ErrorCode::invariant_violation, "negative value in positive_only map at index " + std::to_string(i));
    }
  }
}

SaliencyMap normalize_max_scale(const SaliencyMap& map) {
  double peak = 0.0;
  for (double v : map.values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return map;
  SaliencyMap out = map;
  for (double& v : out.values) v /= peak;
  return out;
}

SaliencyMap scaled(const SaliencyMap& map, double factor) {
  SaliencyMap out = map;
  for (double& v : out.values) v *= factor;
  return out;
}

// --- SALM ------------------------------------------------------------------

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::uint8_t> bytes(size);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw Error(ErrorCode::io_failure, "short read on " + path.string());
  return bytes;
}

void read_sidecar(const fs::path& data_path, SaliencyMap& map) {
  const fs::path meta = sidecar_path(data_path);
  const std::string text = read_text(meta);
  try {
    const json doc = json::parse(text);
    map.mosaic_id = doc.at("mosaic_id").get<std::string>();
    map.method_id = doc.at("method_id").get<std::string>();
    map.target_class = doc.at("target_class").get<std::string>();
    map.sign_capability = parse_sign_capability(doc.at("sign_capability").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_header, meta.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_salm(const SaliencyMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(kSalmHeaderBytes + map.values.size() * 4 + 4);
  for (char c : std::string_view("SALM")) out.push_back(static_cast<std::uint8_t>(c));
  put_u16(out, kSalmVersion);
  put_u32(out, static_cast<std::uint32_t>(map.width));
  put_u32(out, static_cast<std::uint32_t>(map.height));
  for (double v : map.values) {
    const float narrowed = static_cast<float>(v);
    if (!std::isfinite(narrowed)) throw Error(ErrorCode::non_finite_value, "value does not fit binary32");
    put_u32(out, std::bit_cast<std::uint32_t>(narrowed));
  }
  put_u32(out, crc32_of(out));
  return out;
}

void decode_salm(std::span<const std::uint8_t> bytes, SaliencyMap& map) {
  if (bytes.size() < kSalmHeaderBytes + 4 || std::memcmp(bytes.data(), "SALM", 4) != 0) {
    throw Error(ErrorCode::malformed_header, "missing SALM magic");
  }
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
  if (version != kSalmVersion) throw Error(ErrorCode::malformed_header, "unsupported version " + std::to_string(version));
  const std::uint32_t width = get_u32(bytes.data() + 6);
  const std::uint32_t height = get_u32(bytes.data() + 10);
  if (width == 0 || height == 0 || width > (1u << 16) || height > (1u << 16)) {
    throw Error(ErrorCode::malformed_header, "implausible dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() != kSalmHeaderBytes + 4 * count + 4) {
    throw Error(ErrorCode::dimension_mismatch, "payload length does not match " + std::to_string(width) + "x" +
                                                   std::to_string(height));
  }
  const std::size_t body = kSalmHeaderBytes + 4 * count;
  if (crc32_of(bytes.first(body)) != get_u32(bytes.data() + body)) {
    throw Error(ErrorCode::checksum_mismatch, "CRC-32 mismatch");
  }
  map.width = static_cast<int>(width);
  map.height = static_cast<int>(height);
  map.values.resize(count);
  const std::uint8_t* p = bytes.data() + kSalmHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    const float v = std::bit_cast<float>(get_u32(p));
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "value at index " + std::to_string(i));
    map.values[i] = v;
  }
}

fs::path sidecar_path(const fs::path& data_path) {
  fs::path meta = data_path;
  meta += ".meta.json";
  return meta;
}

void write_saliency(const SaliencyMap& map, const fs::path& path) {
  validate(map);
  const auto bytes = encode_salm(map);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  }
  json meta;
  meta["mosaic_id"] = map.mosaic_id;
  meta["method_id"] = map.method_id;
  meta["target_class"] = map.target_class;
  meta["sign_capability"] = to_string(map.sign_capability);
  std::ofstream out(sidecar_path(path), std::ios::binary | std::ios::trunc);
  out << meta.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + sidecar_path(path).string());
}

void parse_saliency_csv(std::string_view text, SaliencyMap& map) {
  std::vector<double> values;
  int width = -1;
  int height = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    int columns = 0;
    while (true) {
      const auto comma = line.find(',');
      std::string_view field = line.substr(0, comma);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::malformed_header, "bad CSV value '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "CSV value '" + std::string(field) + "'");
      values.push_back(v);
      ++columns;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (width >= 0 && columns != width) throw Error(ErrorCode::dimension_mismatch, "ragged CSV rows");
    width = columns;
    ++height;
  }
  if (height == 0) throw Error(ErrorCode::dimension_mismatch, "empty CSV grid");
  map.width = width;
  map.height = height;
  map.values = std::move(values);
}

SaliencyMap read_saliency(const fs::path& path) {
  SaliencyMap map;
  if (path.extension() == ".csv") {
    parse_saliency_csv(read_text(path), map);
  } else {
    decode_salm(read_bytes(path), map);
  }
  read_sidecar(path, map);
  validate(map);
  return map;
}

std::string saliency_filename(std::string_view mosaic_id, std::string_view method_id) {
  return std::string(mosaic_id) + "__" + std::string(method_id) + ".salm";
}

// --- registry --------------------------------------------------------------

void write_method_registry(std::span<const MethodDescriptor> methods, const fs::path& path) {
  json doc = json::array();
  for (const auto& m : methods) {
    doc.push_back({{"method_id", m.method_id},
                   {"display_name", m.display_name},
                   {"sign_capability", to_string(m.sign_capability)}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
}

std::vector<MethodDescriptor> read_method_registry(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<MethodDescriptor> methods;
  try {
    for (const auto& m : json::parse(text)) {
      MethodDescriptor d;
      d.method_id = m.at("method_id").get<std::string>();
      d.display_name = m.value("display_name", d.method_id);
      d.sign_capability = parse_sign_capability(m.at("sign_capability").get<std::string>());
      methods.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_header, path.string() + ": " + e.what());
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i].method_id == methods[j].method_id) {
        throw Error(ErrorCode::invariant_violation, "duplicate method_id " + methods[i].method_id);
      }
    }
  }
  return methods;
}

namespace {

bool is_saliency_file(const fs::path& p) {
  const auto ext = p.extension();
  return ext == ".salm" || ext == ".csv";
}

}  // namespace

std::vector<MethodDescriptor> discover_methods(const fs::path& saliency_dir) {
  const fs::path registry = saliency_dir / "methods.json";
  if (fs::exists(registry)) return read_method_registry(registry);

  std::map<std::string, MethodDescriptor> found;
  for (const auto& entry : fs::directory_iterator(saliency_dir)) {
    if (!entry.is_regular_file() || !is_saliency_file(entry.path())) continue;
    const fs::path meta = sidecar_path(entry.path());
    if (!fs::exists(meta)) continue;
    try {
      const json doc = json::parse(read_text(meta));
      MethodDescriptor d;
      d.method_id = doc.at("method_id").get<std::string>();
      d.display_name = d.method_id;
      d.sign_capability = parse_sign_capability(doc.at("sign_capability").get<std::string>());
      found.emplace(d.method_id, d);
    } catch (const std::exception&) {
      // Unreadable sidecars surface later as pair-level errors.
    }
  }
  std::vector<MethodDescriptor> methods;
  for (auto& [id, d] : found) methods.push_back(std::move(d));
  return methods;
}

std::vector<Finding> validate_saliency_dir(const fs::path& dir, const MosaicManifest& manifest) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_saliency_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Finding> findings;
  for (const auto& path : files) {
    try {
      const SaliencyMap map = read_saliency(path);
      const MosaicSpec* spec = manifest.find(map.mosaic_id);
      if (!spec) {
        findings.push_back({path, ErrorCode::cross_reference, "unknown mosaic_id " + map.mosaic_id});
        continue;
      }
      if (map.target_class != spec->target_class) {
        findings.push_back({path, ErrorCode::id_mismatch,
                            "target_class '" + map.target_class + "' but mosaic targets '" + spec->target_class + "'"});
      }
      if (map.width != manifest.mosaic_pixels || map.height != manifest.mosaic_pixels) {
        findings.push_back({path, ErrorCode::dimension_mismatch,
                            std::to_string(map.width) + "x" + std::to_string(map.height) + " map, manifest uses " +
                                std::to_string(manifest.mosaic_pixels)});
      }
    } catch (const Error& e) {
      findings.push_back({path, e.code(), e.what()});
    }
  }
  return findings;
}

}  // namespace salbench
