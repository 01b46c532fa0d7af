#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salbench/mosaic.hpp"
#include "salbench/saliency.hpp"

namespace salbench {

/// Ground-truth attribution generators. With s(pixel) = +1 on target cells
/// and -1 elsewhere:
///   perfect               amplitude * s
///   inverted              -amplitude * s
///   uniform_signed_noise  U[-amplitude, amplitude]
///   positive_only_noise   U[0, amplitude], flagged positive_only
///   fidelity              amplitude * s with probability p, else -amplitude * s
enum class OracleMode { perfect, inverted, uniform_signed_noise, positive_only_noise, fidelity };

struct OracleConfig {
  OracleMode mode = OracleMode::perfect;
  double fidelity = 1.0;
  std::uint64_t seed = 0;
  double amplitude = 1.0;
};

/// invalid_argument unless fidelity lies in [0, 1] and amplitude is positive and finite.
void validate(const OracleConfig& cfg);

/// Deterministic in (spec.mosaic_id, spec cells, cfg). Values are rounded to
/// binary32 so the map survives the interchange format bit-exactly.
SaliencyMap gen_oracle_map(const MosaicSpec& spec, const OracleConfig& cfg, int mosaic_pixels = kMosaicPixels,
                           std::string method_id = "oracle");

struct SimulatedMethod {
  MethodDescriptor descriptor;
  OracleConfig config;  // seed is replaced per (family seed, mosaic, method)
};

SimulatedMethod fidelity_method(std::string method_id, double p);

/// One fidelity method per p, ids "sim<index>_p<p>".
std::vector<SimulatedMethod> fidelity_family(std::span<const double> fidelities);

/// Parses a command-line token: "[<id>:]p=<x>" or "[<id>:]perfect|inverted|noise|positive_noise".
SimulatedMethod parse_method_token(std::string_view token, std::size_t index);

/// Map of one simulated method on one mosaic, drawn from the stream keyed
/// by (seed, mosaic_id, method_id).
SaliencyMap simulate(const MosaicSpec& spec, const SimulatedMethod& method, std::uint64_t seed,
                     int mosaic_pixels = kMosaicPixels);

/// Writes one interchange file per (spec, method) plus methods.json into
/// out_dir and returns the method registry.
std::vector<MethodDescriptor> gen_method_family(std::span<const MosaicSpec> specs,
                                                std::span<const SimulatedMethod> methods, std::uint64_t seed,
                                                const std::filesystem::path& out_dir,
                                                int mosaic_pixels = kMosaicPixels);

}  // namespace salbench
