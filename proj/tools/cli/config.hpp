#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpm/casimir.hpp"

namespace vpm::cli {

/// Invalid configuration; `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

enum class ProfileType { fermi_step, fermi_slab, tabulated_fourier, vacuum };

struct ProfileConfig {
  ProfileType type = ProfileType::fermi_step;
  FermiStepParams fermi;
  double period = 2.0 * kPi;
  std::vector<double> z_nodes;
  std::vector<TabulatedComponent> table;
};

struct NumericsConfig {
  int n_trunc = 0;  // resolved: explicit value or the k_max cutoff
  bool n_trunc_auto = true;
  ChannelOptions channel;
  double convergence_rtol = 1e-2;
};

struct SlabConfig {
  double epsilon = 4.0;
  double w = 2.0;
};

struct GeometryGrid {
  std::vector<double> delta_z;
  std::vector<double> delta_x;
};

struct OutputConfig {
  std::string csv;
  std::string json;  // defaults to csv + ".json"
  std::string cache_dir;
};

struct DiagnosticsConfig {
  int channels = 50;
  std::uint64_t seed = 1;
  double k_min = 0.6;
  double k_max = 2.45;
  double kx0_max = 0.5;
  double ky0_max = 0.5;
};

struct RunConfig {
  std::string source;
  ProfileConfig profile;
  GeometryGrid geometry;
  QuadratureSpec quadrature;
  NumericsConfig numerics;
  SlabConfig slab;
  OutputConfig output;
  DiagnosticsConfig diagnostics;
  int workers = 0;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

FourierProfile build_profile(const ProfileConfig& p);

/// Half-width of the profile support (w for Fermi steps, last table node otherwise).
double profile_extent(const ProfileConfig& p);

std::string to_string(ProfileType type);

/// Resolved configuration, every default filled in.
nlohmann::json to_json(const RunConfig& c);

/// FNV-1a 64 of the canonical JSON text, as 16 hex digits.
std::string hash_hex(const nlohmann::json& j);

std::string config_hash(const RunConfig& c);

/// Hash of the sections that determine per-node reflections.
std::string node_cache_key(const RunConfig& c);

}  // namespace vpm::cli
