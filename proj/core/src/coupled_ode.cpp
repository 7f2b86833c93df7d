#include "vpm/coupled_ode.hpp"

#include <cmath>
#include <sstream>

#include "ode_driver.hpp"

namespace vpm {

OdeMethod parse_ode_method(const std::string& name) {
  if (name == "fehlberg78") return OdeMethod::fehlberg78;
  if (name == "dopri5") return OdeMethod::dopri5;
  throw Error("unknown ODE method '" + name + "'");
}

std::string to_string(OdeMethod method) { return method == OdeMethod::dopri5 ? "dopri5" : "fehlberg78"; }

namespace {

// Truncated Toeplitz matrices of eps, eps' and eps'' on [-N, N]. Every
// product with eps uses the same truncated matrix, so grad phi with
// div(T grad phi) + k^2 phi = 0 stays an exact solution of the truncated
// system and the longitudinal sector decouples.
struct ConvolutionSet {
  int nh = 0;
  CMatrix t0, t1, t2;
};

ConvolutionSet convolutions(const FourierProfile& profile, const ModeBasis& basis, double z) {
  const auto sample = profile.sample(basis.frequency.k(), z);
  const int p = profile.max_harmonic();
  ConvolutionSet c;
  c.nh = basis.harmonics();
  c.t0 = CMatrix::Identity(c.nh, c.nh);
  c.t1 = CMatrix::Zero(c.nh, c.nh);
  c.t2 = CMatrix::Zero(c.nh, c.nh);
  for (int a = 0; a < c.nh; ++a) {
    for (int b = 0; b < c.nh; ++b) {
      const int j = a - b;
      if (std::abs(j) > p) continue;
      c.t0(a, b) += sample.at(sample.value, j);
      c.t1(a, b) = sample.at(sample.dz, j);
      c.t2(a, b) = sample.at(sample.dz2, j);
    }
  }
  return c;
}

// Views of the (r, c) component block and of the component-r rows inside the
// interleaved layout 3 (n + N) + c.
struct Blocks {
  using Strided = Eigen::Map<CMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
  int nh;
  CMatrix m;
  explicit Blocks(int nh_) : nh(nh_), m(CMatrix::Zero(3 * nh_, 3 * nh_)) {}
  Strided block(int r, int c) {
    return Strided(m.data() + r + c * m.rows(), nh, nh, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(3 * m.rows(), 3));
  }
  Strided rows(int r) {
    return Strided(m.data() + r, nh, m.cols(), Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(m.rows(), 3));
  }
};

struct Assembly {
  Blocks a2, a1, a0, a1_dz;
  CMatrix lambda_z;     // leading coefficient of Fz'' (sign flipped)
  CMatrix lambda_z_dz;
  explicit Assembly(int nh) : a2(nh), a1(nh), a0(nh), a1_dz(nh) {}
};

Assembly assemble(const FourierProfile& profile, const ModeBasis& basis, double z) {
  if (std::abs(profile.period() - basis.period) > 1e-12 * basis.period)
    throw Error("profile and basis have different periods");

  const auto cv = convolutions(profile, basis, z);
  const int nh = cv.nh;
  const cplx k2 = basis.frequency.k_squared();
  const cplx y = kI * basis.ky0;
  const CMatrix id = CMatrix::Identity(nh, nh);

  CVector xv(nh);
  for (int i = 0; i < nh; ++i) xv(i) = kI * basis.kx[static_cast<std::size_t>(i)];
  const auto x = xv.asDiagonal();
  const CMatrix x2 = xv.array().square().matrix().asDiagonal();

  const CMatrix x_t0 = x * cv.t0;
  const CMatrix p00 = cv.t0 * cv.t0;
  const CMatrix px0 = cv.t0 * x_t0;
  const CMatrix pxx = cv.t0 * (x * x_t0);
  const CMatrix p01 = cv.t0 * cv.t1;
  const CMatrix px1 = cv.t0 * (x * cv.t1);
  const CMatrix p02 = cv.t0 * cv.t2;
  const CMatrix p10 = cv.t1 * cv.t0;
  const CMatrix p11 = cv.t1 * cv.t1;
  const CMatrix p1x0 = cv.t1 * x_t0;
  const CMatrix& e0 = cv.t0;

  Assembly s(nh);
  s.a2.block(cx, cx) = -id;
  s.a2.block(cy, cy) = -id;
  s.a2.block(cz, cz) = -p00;

  const CMatrix xd = x;
  s.a1.block(cx, cz) = xd - px0;
  s.a1.block(cy, cz) = y * (id - p00);
  s.a1.block(cz, cx) = xd - px0;
  s.a1.block(cz, cy) = y * (id - p00);
  s.a1.block(cz, cz) = -2.0 * p01;

  s.a0.block(cx, cx) = -(y * y) * id - pxx - k2 * e0;
  s.a0.block(cx, cy) = y * (xd - px0);
  s.a0.block(cx, cz) = -px1;
  s.a0.block(cy, cx) = y * (xd - px0);
  s.a0.block(cy, cy) = -x2 - (y * y) * p00 - k2 * e0;
  s.a0.block(cy, cz) = -y * p01;
  s.a0.block(cz, cx) = -px1;
  s.a0.block(cz, cy) = -y * p01;
  s.a0.block(cz, cz) = -x2 - (y * y) * id - p02 - k2 * e0;

  s.a1_dz.block(cx, cz) = -(p1x0 + px1);
  s.a1_dz.block(cy, cz) = -y * (p10 + p01);
  s.a1_dz.block(cz, cx) = -(p1x0 + px1);
  s.a1_dz.block(cz, cy) = -y * (p10 + p01);
  s.a1_dz.block(cz, cz) = -2.0 * (p11 + p02);

  s.lambda_z = p00;
  s.lambda_z_dz = p10 + p01;
  return s;
}

}  // namespace

HelmholtzOperator build_helmholtz_operator(const FourierProfile& profile, const ModeBasis& basis, double z) {
  const auto s = assemble(profile, basis, z);
  return {s.a2.m, s.a1.m, s.a0.m, z};
}

CouplingMatrices build_coupling_matrices(const FourierProfile& profile, const ModeBasis& basis, double z) {
  auto s = assemble(profile, basis, z);

  // Divide the z rows by their leading coefficient lambda_z; the x, y rows
  // already have -1 in front of F''.
  const Eigen::PartialPivLU<CMatrix> lu(s.lambda_z);
  const CMatrix a1_z = s.a1.rows(cz);
  const CMatrix d1_z = lu.solve(a1_z);
  s.a1.rows(cz) = d1_z;
  const CMatrix a0_z = s.a0.rows(cz);
  s.a0.rows(cz) = lu.solve(a0_z);

  // (lambda^{-1} a1)' = lambda^{-1} (a1' - lambda' d1) on the z rows.
  const CMatrix a1_dz_z = s.a1_dz.rows(cz);
  s.a1_dz.rows(cz) = lu.solve(a1_dz_z - s.lambda_z_dz * d1_z);

  return {std::move(s.a0.m), std::move(s.a1.m), std::move(s.a1_dz.m), z};
}

namespace {

std::string channel_context(const ModeBasis& b, const char* what) {
  std::ostringstream os;
  os << what << ", " << (b.frequency.axis == Axis::real ? "k=" : "kappa=") << b.frequency.sign * b.frequency.magnitude
     << " kx0=" << b.kx0 << " ky0=" << b.ky0 << " N=" << b.n_trunc;
  return os.str();
}

bool numerically_vacuum(const FourierProfile& profile, cplx k, double z) {
  for (int n : profile.stored_harmonics())
    if (std::abs(profile.component(n, k, z)) >= 1e-8) return false;
  return true;
}

using detail::OdeState;

// Step control restarts a few dozen widths before, at and after every feature.
std::vector<detail::Breakpoint> feature_breaks(const FourierProfile& profile) {
  std::vector<detail::Breakpoint> out;
  for (const auto& f : profile.features())
    for (double offset : {-30.0, 0.0, 30.0})
      if (f.center + offset * f.width > 0.0) out.push_back({f.center + offset * f.width, 0.1 * f.width});
  return out;
}

void pack(const CMatrix& a, const CMatrix& b, OdeState& y) {
  const auto sz = static_cast<std::size_t>(a.size());
  y.resize(2 * sz);
  Eigen::Map<CMatrix>(y.data(), a.rows(), a.cols()) = a;
  Eigen::Map<CMatrix>(y.data() + sz, b.rows(), b.cols()) = b;
}

}  // namespace

CVector regular_boundary_h(Parity parity, const ModeBasis& basis) {
  if (parity == Parity::outgoing) throw Error("regular boundary data needs a parity");
  CVector h = CVector::Zero(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    const bool is_z = (i % 3) == cz;
    if ((parity == Parity::plus) != is_z) h(i) = 1.0 / (-kI * basis.kz_diag(i));
  }
  return h;
}

CoupledSolution integrate_outgoing_from(const FourierProfile& profile, const ModeBasis& basis,
                                        const CMatrix& g0, const CMatrix& dg0, double z_start,
                                        double z_fit, const OdeOptions& options) {
  if (!(z_start >= z_fit && z_fit > 0.0)) throw Error("outgoing integration needs z_start >= z_fit > 0");
  const int d = basis.dim();
  const CVector ikz = kI * basis.kz_diag;
  const CVector kz2 = basis.kz_diag.array().square();

  auto rhs = [&](double z, const OdeState& y, OdeState& dy) {
    const auto c = build_coupling_matrices(profile, basis, z);
    const Eigen::Map<const CMatrix> g(y.data(), d, d);
    const Eigen::Map<const CMatrix> gp(y.data() + d * d, d, d);
    Eigen::Map<CMatrix> dg(dy.data(), d, d);
    Eigen::Map<CMatrix> dgp(dy.data() + d * d, d, d);
    dg = gp;
    CMatrix t = c.d1 * g - 2.0 * gp;
    dgp.noalias() = c.d1 * gp;
    dgp.noalias() += c.d0 * g;
    dgp += t * ikz.asDiagonal();
    dgp += g * kz2.asDiagonal();
  };

  OdeState y;
  pack(g0, dg0, y);
  const auto stats = detail::integrate_state(rhs, y, z_start, z_fit, options, channel_context(basis, "outgoing"),
                                             feature_breaks(profile));

  CoupledSolution out;
  out.parity = Parity::outgoing;
  out.value = Eigen::Map<const CMatrix>(y.data(), d, d);
  out.derivative = Eigen::Map<const CMatrix>(y.data() + d * d, d, d);
  out.at_z = z_fit;
  out.steps = stats.accepted;
  return out;
}

double vacuum_start(const FourierProfile& profile, cplx k, double z_fit, double z_start, double threshold) {
  if (!(z_start >= z_fit)) throw Error("vacuum_start needs z_start >= z_fit");
  constexpr int kGrid = 1024;
  const double dz = (z_start - z_fit) / kGrid;
  auto is_vacuum = [&](double z) {
    for (int n : profile.stored_harmonics())
      if (std::abs(profile.component(n, k, z)) >= threshold) return false;
    return true;
  };
  for (int i = kGrid; i >= 0; --i) {
    const double z = z_fit + i * dz;
    if (!is_vacuum(z)) return std::min(z_start, z + dz);
  }
  return z_fit;
}

CoupledSolution integrate_outgoing(const FourierProfile& profile, const ModeBasis& basis, double z_start,
                                   double z_fit, const OdeOptions& options) {
  if (!numerically_vacuum(profile, basis.frequency.k(), z_start))
    throw Error("profile is not numerically vacuum at z_start=" + std::to_string(z_start));
  if (!(z_start >= z_fit && z_fit > 0.0)) throw Error("outgoing integration needs z_start >= z_fit > 0");
  const int d = basis.dim();
  const double from = vacuum_start(profile, basis.frequency.k(), z_fit, z_start, options.vacuum_threshold);
  if (from <= z_fit) {
    CoupledSolution out;
    out.value = CMatrix::Identity(d, d);
    out.derivative = CMatrix::Zero(d, d);
    out.at_z = z_fit;
    return out;
  }
  return integrate_outgoing_from(profile, basis, CMatrix::Identity(d, d), CMatrix::Zero(d, d), from, z_fit,
                                 options);
}

CoupledSolution integrate_regular_from(Parity parity, const FourierProfile& profile, const ModeBasis& basis,
                                       const CMatrix& h0, const CMatrix& dh0, double z_fit,
                                       const OdeOptions& options) {
  if (parity == Parity::outgoing) throw Error("regular solution needs a parity");
  if (!(z_fit > 0.0)) throw Error("fitting point must be positive");
  const int d = basis.dim();
  const double sgn = parity == Parity::plus ? 1.0 : -1.0;
  // Left factor -/+ i M kz of the regular equation.
  const CVector lead = -sgn * kI * basis.m_diag.cwiseProduct(basis.kz_diag);
  const CVector kz2 = basis.kz_diag.array().square();

  auto rhs = [&](double z, const OdeState& y, OdeState& dy) {
    const auto c = build_coupling_matrices(profile, basis, z);
    const Eigen::Map<const CMatrix> h(y.data(), d, d);
    const Eigen::Map<const CMatrix> hp(y.data() + d * d, d, d);
    Eigen::Map<CMatrix> dh(dy.data(), d, d);
    Eigen::Map<CMatrix> dhp(dy.data() + d * d, d, d);
    dh = hp;
    CMatrix t = h * c.d1 + 2.0 * hp;
    dhp.noalias() = lead.asDiagonal() * t;
    dhp.noalias() -= hp * c.d1;
    dhp.noalias() -= h * c.d1_dz;
    dhp.noalias() += h * c.d0;
    dhp += kz2.asDiagonal() * h;
  };

  OdeState y;
  pack(h0, dh0, y);
  const auto stats = detail::integrate_state(rhs, y, 0.0, z_fit, options,
                                             channel_context(basis, parity == Parity::plus ? "regular+" : "regular-"),
                                             feature_breaks(profile));

  CoupledSolution out;
  out.parity = parity;
  out.value = Eigen::Map<const CMatrix>(y.data(), d, d);
  out.derivative = Eigen::Map<const CMatrix>(y.data() + d * d, d, d);
  out.at_z = z_fit;
  out.steps = stats.accepted;
  return out;
}

CoupledSolution integrate_regular(Parity parity, const FourierProfile& profile, const ModeBasis& basis,
                                  double z_fit, const OdeOptions& options) {
  const int d = basis.dim();
  const CVector h = regular_boundary_h(parity, basis);
  if (profile.is_vacuum()) {
    if (!(z_fit > 0.0)) throw Error("fitting point must be positive");
    // Diagonal data stays diagonal: h'' = 2 a h' with a = -/+ i M kz.
    const double sgn = parity == Parity::plus ? 1.0 : -1.0;
    const CVector a = -sgn * kI * basis.m_diag.cwiseProduct(basis.kz_diag);
    const CVector growth = (2.0 * z_fit * a).array().exp();
    CoupledSolution out;
    out.parity = parity;
    out.value = (h.array() + (growth.array() - 1.0) / (2.0 * a.array())).matrix().asDiagonal();
    out.derivative = growth.asDiagonal();
    out.at_z = z_fit;
    return out;
  }
  return integrate_regular_from(parity, profile, basis, h.asDiagonal(), CMatrix::Identity(d, d), z_fit, options);
}

}  // namespace vpm
