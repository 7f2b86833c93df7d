#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "cache.hpp"

namespace vpm::cli {

void apply(const Overrides& o, RunConfig& c) {
  if (o.workers) {
    if (*o.workers < 0) throw ConfigError("--workers must be non-negative");
    c.workers = *o.workers;
  }
  if (o.n_trunc) {
    if (*o.n_trunc < 0) throw ConfigError("--n-trunc must be non-negative");
    c.numerics.n_trunc = *o.n_trunc;
    c.numerics.n_trunc_auto = false;
  }
  if (o.ode_rtol) c.numerics.channel.ode.rtol = *o.ode_rtol;
  if (o.ode_atol) c.numerics.channel.ode.atol = *o.ode_atol;
  if (!(c.numerics.channel.ode.rtol > 0.0 && c.numerics.channel.ode.atol > 0.0))
    throw ConfigError("ODE tolerances must be positive");
  if (o.csv) c.output.csv = *o.csv;
  if (o.json) c.output.json = *o.json;
  if (o.cache_dir) c.output.cache_dir = *o.cache_dir;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::string channel_label(const ChannelSample& s) {
  std::ostringstream os;
  os << (s.frequency.axis == Axis::real ? "k=" : "kappa=") << s.frequency.magnitude << " kx0=" << s.kx0
     << " ky0=" << s.ky0;
  return os.str();
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  write(f);
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace

std::vector<ChannelSample> sample_channels(Axis axis, const DiagnosticsConfig& d, int n_trunc, double period) {
  std::mt19937_64 rng(d.seed);
  std::uniform_real_distribution<double> kd(d.k_min, d.k_max), kxd(-d.kx0_max, d.kx0_max), kyd(0.0, d.ky0_max);
  std::vector<ChannelSample> out;
  const long max_draws = 1000L * d.channels;
  for (long draw = 0; static_cast<int>(out.size()) < d.channels && draw < max_draws; ++draw) {
    const double k = kd(rng), kx0 = kxd(rng), ky0 = kyd(rng);
    if (axis == Axis::imaginary) {
      out.push_back({Frequency::imaginary(k), kx0, ky0});
      continue;
    }
    const auto b = build_basis(Frequency::real(k), kx0, ky0, n_trunc, period, ThresholdPolicy::allow);
    bool clear = true;
    int propagating = 0;
    for (int i = 0; i < b.harmonics(); ++i) {
      clear = clear && std::abs(b.kz(i)) >= 1e-2 * k;
      if (b.kz(i).real() > 0.0 && b.kz(i).imag() == 0.0) ++propagating;
    }
    if (clear && propagating >= 1 && propagating <= 5) out.push_back({Frequency::real(k), kx0, ky0});
  }
  if (static_cast<int>(out.size()) < d.channels) throw Error("could not sample enough admissible channels");
  return out;
}

ChannelDiagnostic diagnose_channel(const FourierProfile& profile, const ChannelSample& sample, int n_trunc,
                                   const ChannelOptions& options) {
  ChannelDiagnostic d;
  d.sample = sample;
  const auto wa = channel_wronskians(profile, sample.frequency, sample.kx0, sample.ky0, n_trunc, options);
  ChannelOptions shifted = options;
  shifted.z_fit = 1.5 * options.z_fit;
  shifted.z_start = std::max(options.z_start, 2.0 * shifted.z_fit);
  const auto wb = channel_wronskians(profile, sample.frequency, sample.kx0, sample.ky0, n_trunc, shifted);
  for (int parity = 0; parity < 2; ++parity)
    for (int sign = 0; sign < 2; ++sign) {
      const CMatrix& a = wa.w[parity][sign];
      d.drift = std::max(d.drift, max_abs(a - wb.w[parity][sign]) / max_abs(a));
    }

  const auto s = scattering_from_wronskians(wa, options.max_condition);
  d.condition = std::max(s.condition_plus, s.condition_minus);
  const CMatrix p = transverse_projector(s.basis);
  d.commutator = std::max(commutator_defect(s.s_plus, p), commutator_defect(s.s_minus, p));
  if (sample.frequency.axis == Axis::real) {
    const auto mask = propagating_mask(s.basis);
    d.propagating = static_cast<int>(std::count(mask.begin(), mask.end(), true));
    d.unitarity = std::max(unitarity_defect(s.s_plus, s.basis), unitarity_defect(s.s_minus, s.basis));
  } else {
    d.unitarity = std::numeric_limits<double>::quiet_NaN();
  }
  return d;
}

// ---------------------------------------------------------------- validate

namespace {

struct CheckLine {
  std::string name;
  bool pass = true;
  std::string detail;
};

CheckLine check_parity(const FourierProfile& p, double z_max) {
  CheckLine c{"parity in z", true, ""};
  double worst = 0.0;
  for (int n : p.stored_harmonics())
    for (cplx k : {cplx{1.0}, cplx{0.0, 1.0}})
      for (int i = 1; i <= 40; ++i) {
        const double z = z_max * i / 40.0;
        const cplx a = p.component(n, k, z), b = p.component(n, k, -z);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        const cplx da = p.component_dz(n, k, z), db = p.component_dz(n, k, -z);
        worst = std::max(worst, std::abs(da + db) / std::max(1.0, std::abs(da)));
      }
  c.pass = worst < 1e-12;
  c.detail = "max deviation " + format_double(worst);
  return c;
}

CheckLine check_asymptotics(const FourierProfile& p, const ChannelOptions& o) {
  double worst = 0.0;
  for (int n : p.stored_harmonics())
    for (double z : {o.z_start, 1.5 * o.z_start, 4.0 * o.z_start})
      worst = std::max(worst, std::abs(p.component(n, 1.0, z)));
  return {"vacuum beyond z_start", worst <= o.ode.vacuum_threshold,
          "max |eps_n| " + format_double(worst) + " (threshold " + format_double(o.ode.vacuum_threshold) + ")"};
}

CheckLine check_derivatives(const FourierProfile& p, double z_max) {
  const double h = 1e-5;
  double worst = 0.0;
  for (int n : p.stored_harmonics())
    for (int i = 0; i < 97; ++i) {
      const double z = z_max * (i + 0.37) / 97.0;
      const cplx k = 1.0;
      const cplx fd1 = (p.component(n, k, z + h) - p.component(n, k, z - h)) / (2.0 * h);
      const cplx fd2 = (p.component_dz(n, k, z + h) - p.component_dz(n, k, z - h)) / (2.0 * h);
      const cplx d1 = p.component_dz(n, k, z), d2 = p.component_dz2(n, k, z);
      // A kink of a tabulated interpolant inside the stencil makes the difference meaningless.
      const cplx d1l = p.component_dz(n, k, z - h), d1r = p.component_dz(n, k, z + h);
      if (std::abs(d1l - d1) > 1e-3 * std::max(1.0, std::abs(d1)) ||
          std::abs(d1r - d1) > 1e-3 * std::max(1.0, std::abs(d1)))
        continue;
      worst = std::max(worst, std::abs(fd1 - d1) / std::max(1.0, std::abs(d1)));
      worst = std::max(worst, std::abs(fd2 - d2) / std::max(1.0, std::abs(d2)));
    }
  return {"derivatives match finite differences", worst < 1e-5, "max relative error " + format_double(worst)};
}

std::pair<CheckLine, CheckLine> check_real_space(const FourierProfile& p, double z_max) {
  double max_imag = 0.0, min_real = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j <= 40; ++j) {
      const double x = p.period() * i / 64.0, z = z_max * j / 40.0;
      const cplx e = eval_total(p, 1.0, x, z);
      max_imag = std::max(max_imag, std::abs(e.imag()));
      min_real = std::min(min_real, e.real());
    }
  return {{"real dielectric", max_imag < 1e-12, "max |Im eps| " + format_double(max_imag)},
          {"eps >= 1", min_real >= 1.0 - 1e-12, "min eps " + format_double(min_real)}};
}

CheckLine check_quadrature(const QuadratureSpec& q, double period) {
  const auto nodes = quadrature_nodes(q, period);
  double total = 0.0;
  bool positive = true;
  for (const auto& n : nodes) {
    total += n.weight;
    positive = positive && n.weight > 0.0;
  }
  const double volume = 2.0 * (q.kappa_max - q.kappa_min) * (kPi / period) * (q.ky_max - q.ky_min);
  const double err = std::abs(total - volume) / volume;
  return {"quadrature weights", positive && err < 1e-12,
          std::to_string(nodes.size()) + " nodes, weight sum error " + format_double(err)};
}

}  // namespace

int cmd_validate(const RunConfig& c, std::ostream& out) {
  const auto profile = build_profile(c.profile);
  const double z_max = 2.0 * profile_extent(c.profile);
  std::vector<CheckLine> checks;
  checks.push_back(check_parity(profile, z_max));
  checks.push_back(check_asymptotics(profile, c.numerics.channel));
  checks.push_back(check_derivatives(profile, z_max));
  auto [reality, lower] = check_real_space(profile, z_max);
  checks.push_back(reality);
  checks.push_back(lower);
  checks.push_back(check_quadrature(c.quadrature, profile.period()));
  bool ok = true;
  out << "config " << c.source << " (hash " << config_hash(c) << ", n_trunc " << c.numerics.n_trunc << ")\n";
  for (const auto& ch : checks) {
    out << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
    ok = ok && ch.pass;
  }
  return ok ? exit_ok : exit_check_failed;
}

// ------------------------------------------------------------- diagnostics

int cmd_diagnostics(const RunConfig& c, const DiagnosticsRequest& request, std::ostream& out, std::ostream& log) {
  const auto profile = build_profile(c.profile);
  const int n = c.numerics.n_trunc;
  const auto samples = sample_channels(request.axis, c.diagnostics, n, profile.period());
  std::vector<ChannelDiagnostic> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    try {
      rows.push_back(diagnose_channel(profile, s, n, c.numerics.channel));
    } catch (const ChannelError&) {
      throw;
    } catch (const Error& e) {
      throw ChannelError(channel_label(s) + ": " + e.what());
    }
  }

  double worst_u = 0.0, worst_c = 0.0, worst_d = 0.0;
  emit(request.csv, out, [&](std::ostream& os) {
    os << "axis,k,kx0,ky0,propagating,unitarity_defect,commutator_defect,wronskian_drift,condition\n";
    for (const auto& r : rows) {
      os << (request.axis == Axis::real ? "real" : "imaginary") << ',' << format_double(r.sample.frequency.magnitude)
         << ',' << format_double(r.sample.kx0) << ',' << format_double(r.sample.ky0) << ',' << r.propagating << ','
         << (std::isnan(r.unitarity) ? std::string() : format_double(r.unitarity)) << ','
         << format_double(r.commutator) << ',' << format_double(r.drift) << ',' << format_double(r.condition)
         << '\n';
      if (!std::isnan(r.unitarity)) worst_u = std::max(worst_u, r.unitarity);
      worst_c = std::max(worst_c, r.commutator);
      worst_d = std::max(worst_d, r.drift);
    }
  });
  log << rows.size() << " channels; max unitarity defect " << format_double(worst_u) << ", max commutator defect "
      << format_double(worst_c) << ", max wronskian drift " << format_double(worst_d) << '\n';
  const bool ok = worst_u < kDiagnosticTolerance && worst_c < kDiagnosticTolerance && worst_d < kDiagnosticTolerance;
  return ok ? exit_ok : exit_check_failed;
}

// ------------------------------------------------------------------ energy

namespace {

struct SweepRow {
  double delta_z = 0.0;
  double delta_x = 0.0;
  EnergyEstimate energy;
  EnergyEstimate slab;
  double ratio = 0.0;
};

NodeBatch run_nodes(const RunConfig& c, const FourierProfile& profile, const std::vector<QuadratureNode>& nodes,
                    const std::string& cache_file) {
  const int dim = 2 * (2 * c.numerics.n_trunc + 1);
  if (c.output.cache_dir.empty())
    return compute_node_reflections(profile, nodes, c.numerics.n_trunc, c.numerics.channel, c.workers);
  NodeFileCache cache(std::filesystem::path(c.output.cache_dir) / node_cache_key(c) / cache_file, nodes, dim);
  const auto hooks = cache.hooks();
  return compute_node_reflections(profile, nodes, c.numerics.n_trunc, c.numerics.channel, c.workers, &hooks);
}

nlohmann::json check(bool pass, const std::string& detail) { return {{"pass", pass}, {"detail", detail}}; }

/// Indices of rows at each delta_z, in delta_x order.
std::vector<std::vector<const SweepRow*>> by_separation(const std::vector<SweepRow>& rows,
                                                        const std::vector<double>& dzs) {
  std::vector<std::vector<const SweepRow*>> out(dzs.size());
  for (std::size_t i = 0; i < dzs.size(); ++i)
    for (const auto& r : rows)
      if (r.delta_z == dzs[i]) out[i].push_back(&r);
  return out;
}

nlohmann::json evaluate_checks(const RunConfig& c, const std::vector<SweepRow>& rows, const IntegrandStats& stats,
                               double period) {
  nlohmann::json checks;
  if (c.profile.type == ProfileType::vacuum) {
    const bool zero = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.energy.value == 0.0; });
    checks["vacuum"] = check(zero, "energy vanishes on every geometry");
    return checks;
  }
  checks["realness"] = check(stats.max_imag_ratio < 1e-6, "max |Im|/|Re| " + format_double(stats.max_imag_ratio));
  checks["integrand_sign"] = check(stats.max_value <= 0.0, "max integrand " + format_double(stats.max_value));

  bool negative = true, bounded = true, converged = true;
  for (const auto& r : rows) {
    negative = negative && r.energy.value < 0.0;
    bounded = bounded && r.ratio > 0.0 && r.ratio < 1.0;
    converged = converged && r.energy.converged;
  }
  checks["negativity"] = check(negative, "energy < 0 on every geometry");
  checks["ratio_bound"] = check(bounded, "0 < E/E_slab < 1 on every geometry");
  checks["convergence"] =
      check(converged, "|E - E_halved| <= " + format_double(c.numerics.convergence_rtol) + " |E| on every geometry");

  std::vector<double> dzs = c.geometry.delta_z;
  std::sort(dzs.begin(), dzs.end());
  dzs.erase(std::unique(dzs.begin(), dzs.end()), dzs.end());
  const auto groups = by_separation(rows, dzs);

  bool monotone = true;
  for (const double dx : c.geometry.delta_x) {
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& g : groups)
      for (const auto* r : g)
        if (r->delta_x == dx) {
          monotone = monotone && std::abs(r->energy.value) < previous;
          previous = std::abs(r->energy.value);
        }
  }
  checks["monotonicity"] = check(monotone, "|E| strictly decreasing in delta_z at fixed delta_x");

  auto aligned = [&](double dx) {
    const double m = std::remainder(dx, period);
    return std::abs(m) < 1e-12 * period;
  };
  const bool has_aligned = std::any_of(c.geometry.delta_x.begin(), c.geometry.delta_x.end(), aligned);
  if (c.geometry.delta_x.size() > 1 && has_aligned) {
    bool ok = true;
    for (const auto& g : groups) {
      double peak = 0.0, at_zero = 0.0;
      for (const auto* r : g) {
        peak = std::max(peak, std::abs(r->energy.value));
        if (aligned(r->delta_x)) at_zero = std::max(at_zero, std::abs(r->energy.value));
      }
      ok = ok && peak <= at_zero * (1.0 + 1e-12);
    }
    checks["alignment"] = check(ok, "|E| maximal at delta_x = 0 mod L for every delta_z");
  } else {
    checks["alignment"] = check(true, "skipped: needs a delta_x scan including 0 mod L");
  }

  if (c.geometry.delta_x.size() > 1 && groups.size() > 1) {
    bool ok = true;
    double previous = std::numeric_limits<double>::infinity();
    std::string amplitudes;
    for (const auto& g : groups) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto* r : g) {
        lo = std::min(lo, r->energy.value);
        hi = std::max(hi, r->energy.value);
      }
      ok = ok && hi - lo < previous;
      previous = hi - lo;
      amplitudes += (amplitudes.empty() ? "" : " ") + format_double(hi - lo);
    }
    checks["modulation_decay"] = check(ok, "peak-to-trough amplitudes " + amplitudes);
  } else {
    checks["modulation_decay"] = check(true, "skipped: needs several delta_z and delta_x values");
  }
  return checks;
}

}  // namespace

int cmd_energy(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const auto profile = build_profile(c.profile);
  const double period = profile.period();
  const int n = c.numerics.n_trunc;
  const auto fine_nodes = quadrature_nodes(c.quadrature, period);
  const auto coarse_nodes = quadrature_nodes(halved(c.quadrature), period);

  const auto fine = run_nodes(c, profile, fine_nodes, "fine.nodes");
  const auto coarse = run_nodes(c, profile, coarse_nodes, "halved.nodes");
  if (!fine.failures.empty() || !coarse.failures.empty()) {
    log << "node failures:\n";
    for (const auto* batch : {&fine, &coarse})
      for (const auto& f : batch->failures)
        log << "  " << (batch == &fine ? "fine" : "halved") << " node " << f.index << " (kappa=" << f.node.kappa
            << " kx0=" << f.node.kx0 << " ky0=" << f.node.ky0 << "): " << f.message << '\n';
    return exit_error;
  }

  IntegrandStats stats;
  std::vector<SweepRow> rows;
  for (const double dz : c.geometry.delta_z) {
    const auto slab = slab_energy(c.slab.epsilon, c.slab.w, dz, c.quadrature, n, period, c.numerics.convergence_rtol);
    for (const double dx : c.geometry.delta_x) {
      const GeometryConfig g{dz, dx};
      SweepRow r;
      r.delta_z = dz;
      r.delta_x = dx;
      const double e_fine = energy_from_reflections(fine.results, n, period, g, &stats);
      const double e_coarse = energy_from_reflections(coarse.results, n, period, g);
      r.energy.value = e_fine;
      r.energy.coarse_value = e_coarse;
      r.energy.est_error = std::abs(e_fine - e_coarse);
      r.energy.converged = r.energy.est_error <= c.numerics.convergence_rtol * std::abs(e_fine);
      r.slab = slab;
      r.ratio = slab.value != 0.0 ? e_fine / slab.value : 0.0;
      rows.push_back(r);
    }
  }

  emit(c.output.csv, out, [&](std::ostream& os) {
    os << "delta_z,delta_x,energy,slab_energy,ratio,est_error\n";
    for (const auto& r : rows)
      os << format_double(r.delta_z) << ',' << format_double(r.delta_x) << ',' << format_double(r.energy.value)
         << ',' << format_double(r.slab.value) << ',' << format_double(r.ratio) << ','
         << format_double(r.energy.est_error) << '\n';
  });

  const auto checks = evaluate_checks(c, rows, stats, period);
  const std::string json_path = !c.output.json.empty() ? c.output.json
                                : !c.output.csv.empty() ? c.output.csv + ".json"
                                                        : std::string();
  if (!json_path.empty()) {
    nlohmann::json meta{{"schema_version", 1},
                        {"command", "energy"},
                        {"config", to_json(c)},
                        {"config_hash", config_hash(c)},
                        {"node_cache_key", node_cache_key(c)},
                        {"n_trunc", n},
                        {"modes_per_node", 2 * (2 * n + 1)},
                        {"nodes", {{"fine", fine_nodes.size()}, {"halved", coarse_nodes.size()}}},
                        {"integrand",
                         {{"max_imag_ratio", stats.max_imag_ratio},
                          {"max_value", stats.max_value},
                          {"evaluations", stats.evaluations}}},
                        {"checks", checks}};
    emit(json_path, out, [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
  }

  bool ok = true;
  for (const auto& [name, result] : checks.items()) {
    const bool pass = result.at("pass").get<bool>();
    ok = ok && pass;
    log << (pass ? "PASS " : "FAIL ") << name << ": " << result.at("detail").get<std::string>() << '\n';
  }
  log << "cache hits " << fine.cache_hits + coarse.cache_hits << " of " << fine_nodes.size() + coarse_nodes.size()
      << " nodes\n";
  return ok ? exit_ok : exit_check_failed;
}

int cmd_slab_baseline(const RunConfig& c, std::ostream& out) {
  const double period = c.profile.period;
  bool converged = true;
  emit(c.output.csv, out, [&](std::ostream& os) {
    os << "delta_z,slab_energy,est_error\n";
    for (const double dz : c.geometry.delta_z) {
      const auto e = slab_energy(c.slab.epsilon, c.slab.w, dz, c.quadrature, c.numerics.n_trunc, period,
                                 c.numerics.convergence_rtol);
      converged = converged && e.converged;
      os << format_double(dz) << ',' << format_double(e.value) << ',' << format_double(e.est_error) << '\n';
    }
  });
  return converged ? exit_ok : exit_check_failed;
}

}  // namespace vpm::cli
