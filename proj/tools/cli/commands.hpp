#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace vpm::cli {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_error = 2 };

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<int> workers;
  std::optional<int> n_trunc;
  std::optional<double> ode_rtol;
  std::optional<double> ode_atol;
  std::optional<std::string> csv;
  std::optional<std::string> json;
  std::optional<std::string> cache_dir;
};

void apply(const Overrides& o, RunConfig& c);

struct ChannelSample {
  Frequency frequency;
  double kx0 = 0.0;
  double ky0 = 0.0;
};

/// Random channels from the diagnostics section. Real-axis samples keep
/// 1 to 5 propagating harmonics and stay at least 1e-2 k away from every
/// grazing threshold.
std::vector<ChannelSample> sample_channels(Axis axis, const DiagnosticsConfig& d, int n_trunc, double period);

struct ChannelDiagnostic {
  ChannelSample sample;
  int propagating = 0;        // 0 on the imaginary axis
  double unitarity = 0.0;     // NaN on the imaginary axis
  double commutator = 0.0;
  double drift = 0.0;         // fitting points z_fit and 1.5 z_fit
  double condition = 0.0;
};

ChannelDiagnostic diagnose_channel(const FourierProfile& profile, const ChannelSample& sample, int n_trunc,
                                   const ChannelOptions& options);

inline constexpr double kDiagnosticTolerance = 1e-6;

int cmd_validate(const RunConfig& c, std::ostream& out);

struct DiagnosticsRequest {
  Axis axis = Axis::real;
  std::string csv;
};

int cmd_diagnostics(const RunConfig& c, const DiagnosticsRequest& request, std::ostream& out, std::ostream& log);

int cmd_energy(const RunConfig& c, std::ostream& out, std::ostream& log);

int cmd_slab_baseline(const RunConfig& c, std::ostream& out);

/// Shortest round-trip decimal rendering used in every CSV.
std::string format_double(double v);

}  // namespace vpm::cli
