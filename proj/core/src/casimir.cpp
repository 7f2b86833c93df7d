#include "vpm/casimir.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace vpm {

CVector translation_matrix(const ModeBasis& basis, double delta_z, double delta_x) {
  CVector u(2 * basis.harmonics());
  for (int i = 0; i < basis.harmonics(); ++i) {
    const cplx e = std::exp(kI * (basis.kx[static_cast<std::size_t>(i)] * delta_x + basis.kz(i) * delta_z));
    u(2 * i) = e;
    u(2 * i + 1) = e;
  }
  return u;
}

ModeBasis mirrored_basis(const ModeBasis& basis) {
  // k_z depends on ky0 only through ky0^2, so the (-kx0, |ky0|) basis has the
  // same k_z as the one at (-kx0, -ky0).
  ModeBasis m = build_basis(basis.frequency, -basis.kx0, basis.ky0, basis.n_trunc, basis.period);
  m.ky0 = -basis.ky0;
  std::reverse(m.kx.begin(), m.kx.end());
  m.kz.reverseInPlace();
  const int nh = m.harmonics();
  auto reverse_blocks = [nh](CVector& v) {
    const CVector src = v;
    for (int i = 0; i < nh; ++i) v.segment<3>(3 * i) = src.segment<3>(3 * (nh - 1 - i));
  };
  reverse_blocks(m.kz_diag);
  reverse_blocks(m.m_diag);
  reverse_blocks(m.nflux_diag);
  return m;
}

LogDet round_trip_log_det(const CMatrix& r_transverse, const ModeBasis& basis, const GeometryConfig& geometry) {
  if (basis.frequency.axis != Axis::imaginary) throw Error("round-trip log det is defined on the imaginary axis");
  const CVector u_out = translation_matrix(basis, geometry.delta_z, geometry.delta_x);
  const CVector u_back = translation_matrix(mirrored_basis(basis), geometry.delta_z, geometry.delta_x);
  const auto n = r_transverse.rows();
  const CMatrix m =
      CMatrix::Identity(n, n) - u_out.asDiagonal() * r_transverse * u_back.asDiagonal() * r_transverse;

  const Eigen::PartialPivLU<CMatrix> lu(m);
  const CMatrix& packed = lu.matrixLU();
  double re = 0.0;
  double phase = lu.permutationP().determinant() < 0 ? kPi : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    re += std::log(std::abs(packed(i, i)));
    phase += std::arg(packed(i, i));
  }
  return {re, std::remainder(phase, 2.0 * kPi)};
}

double checked_real(const LogDet& value, const ModeBasis& basis) {
  if (!(std::abs(value.imag) < 1e-6 * std::abs(value.real) + 1e-12)) {
    std::ostringstream os;
    os << "complex log det (re=" << value.real << ", im=" << value.imag << ") at kappa=" << basis.frequency.magnitude
       << " kx0=" << basis.kx0 << " ky0=" << basis.ky0;
    throw ChannelError(os.str());
  }
  return value.real;
}

double integrand(const FourierProfile& profile, double kappa, double kx0, double ky0, int n_trunc,
                 const GeometryConfig& geometry, const ChannelOptions& options) {
  const auto s = compute_scattering(profile, Frequency::imaginary(kappa), kx0, ky0, n_trunc, options);
  return checked_real(round_trip_log_det(s.r_transverse, s.basis, geometry), s.basis);
}

SlabReflection slab_reflection(double epsilon, double w, const Frequency& frequency, double rho) {
  const cplx k = frequency.k();
  const double sgn = frequency.sign >= 0 ? 1.0 : -1.0;
  const double m = frequency.magnitude;
  cplx kz, beta;
  if (frequency.axis == Axis::imaginary) {
    kz = kI * std::sqrt(m * m + rho * rho);
    beta = kI * std::sqrt(epsilon * m * m + rho * rho);
  } else {
    const double d = m * m - rho * rho;
    const double db = epsilon * m * m - rho * rho;
    kz = d >= 0.0 ? cplx{std::sqrt(d), 0.0} : kI * std::sqrt(-d);
    beta = db >= 0.0 ? cplx{std::sqrt(db), 0.0} : kI * std::sqrt(-db);
  }
  kz *= sgn;
  beta *= sgn;

  // cos(phi_i) = kz/k, sqrt(eps) cos(phi_t) = beta/k.
  const cplx cos_i = kz / k;
  const cplx root_eps_cos_t = beta / k;
  const cplx gamma_te = (cos_i - root_eps_cos_t) / (cos_i + root_eps_cos_t);
  const cplx gamma_tm = (cos_i - root_eps_cos_t / epsilon) / (cos_i + root_eps_cos_t / epsilon);
  const cplx round = std::exp(4.0 * kI * beta * w);
  const cplx ref = std::exp(-2.0 * kI * kz * w);
  auto slab = [&](cplx g) { return g * (1.0 - round) / (1.0 - g * g * round) * ref; };
  return {slab(gamma_te), -slab(gamma_tm)};
}

double slab_integrand(double epsilon, double w, double kappa, double kx0, double ky0, int n_trunc,
                      double period, double delta_z) {
  if (epsilon == 1.0) return 0.0;
  double sum = 0.0;
  for (int n = -n_trunc; n <= n_trunc; ++n) {
    const double kx = kx0 + 2.0 * kPi * n / period;
    const double rho = std::hypot(kx, ky0);
    const double q = std::sqrt(kappa * kappa + rho * rho);
    const auto r = slab_reflection(epsilon, w, Frequency::imaginary(kappa), rho);
    const double decay = std::exp(-2.0 * q * delta_z);
    sum += std::log1p(-(r.te * r.te).real() * decay) + std::log1p(-(r.tm * r.tm).real() * decay);
  }
  return sum;
}

NodeBatch compute_node_reflections(const FourierProfile& profile, const std::vector<QuadratureNode>& nodes,
                                   int n_trunc, const ChannelOptions& options, int workers,
                                   const NodeCache* cache) {
  NodeBatch batch;
  batch.results.resize(nodes.size());
  std::vector<std::optional<std::string>> errors(nodes.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> hits{0};
  std::mutex store_mutex;

  auto work = [&]() {
    for (std::size_t i = next++; i < nodes.size(); i = next++) {
      auto& out = batch.results[i];
      out.node = nodes[i];
      if (cache && cache->lookup) {
        if (auto r = cache->lookup(i)) {
          out.r_transverse = std::move(*r);
          ++hits;
          continue;
        }
      }
      try {
        const auto s = compute_scattering(profile, Frequency::imaginary(nodes[i].kappa), nodes[i].kx0,
                                          nodes[i].ky0, n_trunc, options);
        out.r_transverse = s.r_transverse;
        out.condition = std::max(s.condition_plus, s.condition_minus);
        out.ode_steps = s.ode_steps;
        if (cache && cache->store) {
          const std::lock_guard<std::mutex> lock(store_mutex);
          cache->store(i, out);
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  int n_workers = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_workers = std::min<int>(n_workers, static_cast<int>(std::max<std::size_t>(1, nodes.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (errors[i]) batch.failures.push_back({i, nodes[i], *errors[i]});
  batch.cache_hits = hits;
  return batch;
}

double energy_from_reflections(const std::vector<NodeReflection>& reflections, int n_trunc, double period,
                               const GeometryConfig& geometry, IntegrandStats* stats) {
  double sum = 0.0;
  for (const auto& r : reflections) {
    const auto basis = build_basis(Frequency::imaginary(r.node.kappa), r.node.kx0, r.node.ky0, n_trunc, period);
    const auto ld = round_trip_log_det(r.r_transverse, basis, geometry);
    const double value = checked_real(ld, basis);
    if (stats) {
      stats->max_imag_ratio = std::max(stats->max_imag_ratio, std::abs(ld.imag) / std::max(std::abs(ld.real), 1e-12));
      stats->max_value = std::max(stats->max_value, value);
      ++stats->evaluations;
    }
    sum += r.node.weight * value;
  }
  return kEnergyPrefactor * sum;
}

double slab_energy_from_nodes(double epsilon, double w, const std::vector<QuadratureNode>& nodes, int n_trunc,
                              double period, double delta_z) {
  double sum = 0.0;
  for (const auto& n : nodes)
    sum += n.weight * slab_integrand(epsilon, w, n.kappa, n.kx0, n.ky0, n_trunc, period, delta_z);
  return kEnergyPrefactor * sum;
}

namespace {

EnergyEstimate estimate(double fine, double coarse, double rtol) {
  EnergyEstimate e;
  e.value = fine;
  e.coarse_value = coarse;
  e.est_error = std::abs(fine - coarse);
  e.converged = e.est_error <= rtol * std::abs(fine);
  return e;
}

}  // namespace

EnergyEstimate slab_energy(double epsilon, double w, double delta_z, const QuadratureSpec& quadrature,
                           int n_trunc, double period, double convergence_rtol) {
  validate(quadrature);
  if (!(epsilon >= 1.0)) throw Error("slab dielectric constant must be at least 1");
  const auto fine = quadrature_nodes(quadrature, period);
  const auto coarse = quadrature_nodes(halved(quadrature), period);
  return estimate(slab_energy_from_nodes(epsilon, w, fine, n_trunc, period, delta_z),
                  slab_energy_from_nodes(epsilon, w, coarse, n_trunc, period, delta_z), convergence_rtol);
}

EnergyResult energy_per_area(const FourierProfile& profile, const GeometryConfig& geometry,
                             const QuadratureSpec& quadrature, int n_trunc, const ChannelOptions& options,
                             double slab_epsilon, double slab_w, double convergence_rtol, int workers) {
  validate(quadrature);
  const double period = profile.period();
  auto run = [&](const QuadratureSpec& q) {
    auto batch = compute_node_reflections(profile, quadrature_nodes(q, period), n_trunc, options, workers);
    if (!batch.failures.empty())
      throw ChannelError("node " + std::to_string(batch.failures.front().index) + " failed: " +
                         batch.failures.front().message);
    return batch.results;
  };
  EnergyResult out;
  out.geometry = geometry;
  const auto fine = run(quadrature);
  const auto coarse = run(halved(quadrature));
  out.energy = estimate(energy_from_reflections(fine, n_trunc, period, geometry, &out.stats),
                        energy_from_reflections(coarse, n_trunc, period, geometry), convergence_rtol);
  out.slab = slab_energy(slab_epsilon, slab_w, geometry.delta_z, quadrature, n_trunc, period, convergence_rtol);
  out.ratio = out.slab.value != 0.0 ? out.energy.value / out.slab.value : 0.0;
  return out;
}

}  // namespace vpm
