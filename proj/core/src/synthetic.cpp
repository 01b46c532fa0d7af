#include "salbench/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "salbench/error.hpp"
#include "salbench/parallel.hpp"
#include "salbench/random.hpp"

namespace salbench {
namespace fs = std::filesystem;

void validate(const OracleConfig& cfg) {
  if (!(cfg.fidelity >= 0.0 && cfg.fidelity <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "fidelity must lie in [0, 1]");
  }
  if (!(cfg.amplitude > 0.0) || !std::isfinite(cfg.amplitude)) {
    throw Error(ErrorCode::invalid_argument, "amplitude must be positive and finite");
  }
}

SaliencyMap gen_oracle_map(const MosaicSpec& spec, const OracleConfig& cfg, int mosaic_pixels,
                           std::string method_id) {
  validate(cfg);
  SaliencyMap map = SaliencyMap::zeros(mosaic_pixels, mosaic_pixels);
  map.mosaic_id = spec.mosaic_id;
  map.method_id = std::move(method_id);
  map.target_class = spec.target_class;
  map.sign_capability =
      cfg.mode == OracleMode::positive_only_noise ? SignCapability::positive_only : SignCapability::signed_values;

  const double amp = static_cast<float>(cfg.amplitude);
  Rng rng(derive_seed(cfg.seed, {spec.mosaic_id}));

  for (std::size_t cell = 0; cell < 4; ++cell) {
    const CellCoord coord = cell_coord(cell);
    const double correct = spec.is_target(coord) ? amp : -amp;
    const PixelRect rect = cell_rect(coord, mosaic_pixels, mosaic_pixels);
    for (int r = rect.row0; r < rect.row0 + rect.rows; ++r) {
      double* row = map.values.data() + static_cast<std::size_t>(r) * mosaic_pixels + rect.col0;
      for (int c = 0; c < rect.cols; ++c) {
        switch (cfg.mode) {
          case OracleMode::perfect:
            row[c] = correct;
            break;
          case OracleMode::inverted:
            row[c] = -correct;
            break;
          case OracleMode::uniform_signed_noise:
            row[c] = static_cast<float>(cfg.amplitude * (2.0 * uniform01(rng) - 1.0));
            break;
          case OracleMode::positive_only_noise:
            row[c] = static_cast<float>(cfg.amplitude * uniform01(rng));
            break;
          case OracleMode::fidelity:
            row[c] = uniform01(rng) < cfg.fidelity ? correct : -correct;
            break;
        }
      }
    }
  }
  return map;
}

SimulatedMethod fidelity_method(std::string method_id, double p) {
  SimulatedMethod m;
  m.descriptor = {method_id, SignCapability::signed_values, method_id};
  m.config.mode = OracleMode::fidelity;
  m.config.fidelity = p;
  validate(m.config);
  return m;
}

namespace {

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

std::vector<SimulatedMethod> fidelity_family(std::span<const double> fidelities) {
  std::vector<SimulatedMethod> out;
  for (std::size_t i = 0; i < fidelities.size(); ++i) {
    out.push_back(fidelity_method("sim" + std::to_string(i) + "_p" + format_p(fidelities[i]), fidelities[i]));
  }
  return out;
}

SimulatedMethod parse_method_token(std::string_view token, std::size_t index) {
  std::string id;
  std::string_view body = token;
  if (const auto colon = token.find(':'); colon != std::string_view::npos) {
    id = std::string(token.substr(0, colon));
    body = token.substr(colon + 1);
  }
  auto default_id = [&](std::string_view suffix) { return "sim" + std::to_string(index) + "_" + std::string(suffix); };

  SimulatedMethod m;
  if (body.starts_with("p=")) {
    double p = 0.0;
    const auto text = body.substr(2);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), p);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::invalid_argument, "bad fidelity in '" + std::string(token) + "'");
    }
    return fidelity_method(id.empty() ? default_id("p" + format_p(p)) : id, p);
  }
  if (body == "perfect") {
    m.config.mode = OracleMode::perfect;
  } else if (body == "inverted") {
    m.config.mode = OracleMode::inverted;
  } else if (body == "noise") {
    m.config.mode = OracleMode::uniform_signed_noise;
  } else if (body == "positive_noise") {
    m.config.mode = OracleMode::positive_only_noise;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown method token '" + std::string(token) + "'");
  }
  if (id.empty()) id = default_id(body);
  m.descriptor = {id,
                  m.config.mode == OracleMode::positive_only_noise ? SignCapability::positive_only
                                                                   : SignCapability::signed_values,
                  id};
  return m;
}

SaliencyMap simulate(const MosaicSpec& spec, const SimulatedMethod& method, std::uint64_t seed, int mosaic_pixels) {
  OracleConfig cfg = method.config;
  cfg.seed = derive_seed(seed, {method.descriptor.method_id});
  SaliencyMap map = gen_oracle_map(spec, cfg, mosaic_pixels, method.descriptor.method_id);
  map.sign_capability = method.descriptor.sign_capability;
  return map;
}

std::vector<MethodDescriptor> gen_method_family(std::span<const MosaicSpec> specs,
                                                std::span<const SimulatedMethod> methods, std::uint64_t seed,
                                                const fs::path& out_dir, int mosaic_pixels) {
  std::vector<MethodDescriptor> registry;
  for (const auto& m : methods) {
    for (const auto& seen : registry) {
      if (seen.method_id == m.descriptor.method_id) {
        throw Error(ErrorCode::invalid_argument, "duplicate method_id " + m.descriptor.method_id);
      }
    }
    registry.push_back(m.descriptor);
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + out_dir.string() + ": " + ec.message());

  const std::size_t jobs = specs.size() * methods.size();
  parallel_for(jobs, [&](std::size_t job) {
    const MosaicSpec& spec = specs[job / methods.size()];
    const SimulatedMethod& method = methods[job % methods.size()];
    write_saliency(simulate(spec, method, seed, mosaic_pixels),
                   out_dir / saliency_filename(spec.mosaic_id, method.descriptor.method_id));
  });
  write_method_registry(registry, out_dir / "methods.json");
  return registry;
}

}  // namespace salbench
