#include "vpm/smatrix.hpp"

#include <sstream>

namespace vpm {

namespace {

std::string describe(const ModeBasis& b) {
  std::ostringstream os;
  os << (b.frequency.axis == Axis::real ? "k=" : "kappa=") << b.frequency.magnitude << " kx0=" << b.kx0
     << " ky0=" << b.ky0 << " N=" << b.n_trunc;
  return os.str();
}

double equilibrated_condition(const CMatrix& a) {
  CMatrix m = a;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double r = m.row(i).cwiseAbs().maxCoeff();
    if (r > 0.0) m.row(i) /= r;
  }
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double c = m.col(j).cwiseAbs().maxCoeff();
    if (c > 0.0) m.col(j) /= c;
  }
  const Eigen::PartialPivLU<CMatrix> lu(m);
  const double rc = lu.rcond();
  return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

}  // namespace

CMatrix wronskian(Parity parity, const CoupledSolution& regular, const CoupledSolution& outgoing,
                  const CouplingMatrices& coupling, const ModeBasis& basis) {
  if (parity == Parity::outgoing || regular.parity != parity)
    throw Error("wronskian needs a regular solution of the requested parity");
  const double z = outgoing.at_z;
  if (std::abs(regular.at_z - z) > 1e-12 * (1.0 + std::abs(z)) ||
      std::abs(coupling.evaluated_at - z) > 1e-12 * (1.0 + std::abs(z)))
    throw Error("wronskian inputs are evaluated at different z");

  const double sgn = parity == Parity::plus ? 1.0 : -1.0;
  const CVector ikz = kI * basis.kz_diag;
  const CVector phase_reg = sgn * kI * basis.m_diag.cwiseProduct(basis.kz_diag);  // +/- i M kz

  const CMatrix& h = regular.value;
  const CMatrix& hp = regular.derivative;
  const CMatrix& g = outgoing.value;
  const CMatrix& gp = outgoing.derivative;

  // E^{-1} Phi^t = H,  E^{-1} (Phi^t)' = (+/- i M kz) H + H',
  // F e^{-1} = G,      F' e^{-1} = G' + G i kz.
  CMatrix core = h * (gp + g * ikz.asDiagonal());
  core.noalias() -= (phase_reg.asDiagonal() * h + hp) * g;
  core.noalias() -= h * (coupling.d1 * g);

  const CVector left = (phase_reg * z).array().exp();
  const CVector right = (ikz * z).array().exp().matrix().cwiseProduct(basis.nflux_diag);
  return left.asDiagonal() * core * right.asDiagonal();
}

SMatrix s_matrix(const CMatrix& w_k, const CMatrix& w_minus_k, const ModeBasis& basis, double max_condition) {
  SMatrix out;
  out.condition = equilibrated_condition(w_k);
  if (!(out.condition <= max_condition)) {
    std::ostringstream os;
    os << "ill-conditioned Wronskian (cond=" << out.condition << "): " << describe(basis);
    throw ChannelError(os.str());
  }
  const auto m = basis.m_diag.asDiagonal();
  const CMatrix rhs = m * w_minus_k * m;
  out.s = Eigen::PartialPivLU<CMatrix>(w_k).solve(rhs);
  return out;
}

CMatrix reflection(const CMatrix& s_plus, const CMatrix& s_minus) { return 0.5 * (s_plus - s_minus); }

CMatrix transverse_dual(const ModeBasis& basis) {
  const int d = basis.dim();
  const int nt = 2 * basis.harmonics();
  CMatrix full(d, d);
  full.leftCols(nt) = transverse_basis(basis);
  full.rightCols(d - nt) = longitudinal_basis(basis);
  const CMatrix inv = Eigen::PartialPivLU<CMatrix>(full).inverse();
  return inv.topRows(nt);
}

CMatrix project_reflection(const CMatrix& r_full, const CMatrix& transverse, const CMatrix& dual) {
  return dual * r_full * transverse;
}

CMatrix project_reflection(const CMatrix& r_full, const ModeBasis& basis) {
  return project_reflection(r_full, transverse_basis(basis), transverse_dual(basis));
}

ChannelWronskians channel_wronskians(const FourierProfile& profile, const Frequency& frequency, double kx0,
                                     double ky0, int n_trunc, const ChannelOptions& options) {
  ChannelWronskians out;
  Frequency f = frequency;
  f.sign = 1;
  out.basis = build_basis(f, kx0, ky0, n_trunc, profile.period());
  out.basis_minus = build_basis(f.flipped(), kx0, ky0, n_trunc, profile.period());

  // D0, D1 depend on k only through k^2, so one evaluation serves both signs.
  const auto coupling = build_coupling_matrices(profile, out.basis, options.z_fit);
  for (int sign = 0; sign < 2; ++sign) {
    const ModeBasis& b = sign == 0 ? out.basis : out.basis_minus;
    const auto g = integrate_outgoing(profile, b, options.z_start, options.z_fit, options.ode);
    out.ode_steps += g.steps;
    for (int parity = 0; parity < 2; ++parity) {
      const Parity p = parity == 0 ? Parity::plus : Parity::minus;
      const auto h = integrate_regular(p, profile, b, options.z_fit, options.ode);
      out.ode_steps += h.steps;
      out.w[static_cast<std::size_t>(parity)][static_cast<std::size_t>(sign)] = wronskian(p, h, g, coupling, b);
    }
  }
  return out;
}

ScatteringResult scattering_from_wronskians(const ChannelWronskians& w, double max_condition) {
  ScatteringResult r;
  r.frequency = w.basis.frequency;
  r.kx0 = w.basis.kx0;
  r.ky0 = w.basis.ky0;
  r.n_trunc = w.basis.n_trunc;
  r.basis = w.basis;
  const auto sp = s_matrix(w.w[0][0], w.w[0][1], w.basis, max_condition);
  const auto sm = s_matrix(w.w[1][0], w.w[1][1], w.basis, max_condition);
  r.s_plus = sp.s;
  r.s_minus = sm.s;
  r.condition_plus = sp.condition;
  r.condition_minus = sm.condition;
  r.r_full = reflection(r.s_plus, r.s_minus);
  r.r_transverse = project_reflection(r.r_full, w.basis);
  r.ode_steps = w.ode_steps;
  return r;
}

ScatteringResult compute_scattering(const FourierProfile& profile, const Frequency& frequency, double kx0,
                                    double ky0, int n_trunc, const ChannelOptions& options) {
  return scattering_from_wronskians(channel_wronskians(profile, frequency, kx0, ky0, n_trunc, options),
                                    options.max_condition);
}

std::vector<int> propagating_indices(const ModeBasis& basis) {
  std::vector<int> idx;
  const auto mask = propagating_mask(basis);
  for (int n = -basis.n_trunc; n <= basis.n_trunc; ++n)
    if (mask[static_cast<std::size_t>(n + basis.n_trunc)])
      for (int c = 0; c < 3; ++c) idx.push_back(basis.index(n, c));
  return idx;
}

double unitarity_defect(const CMatrix& s, const ModeBasis& basis) {
  const auto idx = propagating_indices(basis);
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n == 0) return 0.0;
  CMatrix block(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) block(i, j) = s(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return (block.adjoint() * block - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

double commutator_defect(const CMatrix& s, const CMatrix& projector) {
  const double scale = s.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (s * projector - projector * s).cwiseAbs().maxCoeff() / scale;
}

}  // namespace vpm
