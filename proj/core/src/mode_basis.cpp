#include "vpm/mode_basis.hpp"

#include <cmath>
#include <sstream>

namespace vpm {

cplx Frequency::k() const {
  const double s = sign >= 0 ? 1.0 : -1.0;
  return axis == Axis::real ? cplx{s * magnitude, 0.0} : cplx{0.0, s * magnitude};
}

namespace {

std::string describe(const Frequency& f, double kx0, double ky0) {
  std::ostringstream os;
  os << (f.axis == Axis::real ? "k=" : "kappa=") << f.sign * f.magnitude << " kx0=" << kx0
     << " ky0=" << ky0;
  return os.str();
}

}  // namespace

ModeBasis build_basis(const Frequency& frequency, double kx0, double ky0, int n_trunc, double period,
                      ThresholdPolicy thresholds) {
  if (!(frequency.magnitude > 0.0)) throw Error("frequency magnitude must be positive");
  if (!(period > 0.0)) throw Error("period must be positive");
  if (n_trunc < 0) throw Error("harmonic truncation must be non-negative");
  if (ky0 < 0.0) throw Error("ky0 must be non-negative");
  if (std::abs(kx0) > kPi / period * (1.0 + 1e-12))
    throw Error("kx0 must lie in the first Brillouin zone [-pi/L, pi/L]");

  ModeBasis b;
  b.frequency = frequency;
  b.kx0 = kx0;
  b.ky0 = ky0;
  b.n_trunc = n_trunc;
  b.period = period;

  const int nh = b.harmonics();
  const double sgn = frequency.sign >= 0 ? 1.0 : -1.0;
  const double kk = frequency.magnitude;
  b.kx.resize(static_cast<std::size_t>(nh));
  b.kz.resize(nh);
  for (int n = -n_trunc; n <= n_trunc; ++n) {
    const double kx = kx0 + 2.0 * kPi * n / period;
    const double rho2 = kx * kx + ky0 * ky0;
    cplx kz;
    if (frequency.axis == Axis::imaginary) {
      kz = cplx{0.0, std::sqrt(kk * kk + rho2)};
    } else {
      const double d = kk * kk - rho2;
      if (d == 0.0 && thresholds == ThresholdPolicy::reject)
        throw ChannelError("grazing threshold (k_z = 0) at harmonic " + std::to_string(n) + ": " +
                           describe(frequency, kx0, ky0));
      kz = d >= 0.0 ? cplx{std::sqrt(d), 0.0} : cplx{0.0, std::sqrt(-d)};
    }
    b.kx[static_cast<std::size_t>(n + n_trunc)] = kx;
    b.kz(n + n_trunc) = sgn * kz;
  }

  const cplx k = frequency.k();
  b.kz_diag.resize(b.dim());
  b.m_diag.resize(b.dim());
  b.nflux_diag.resize(b.dim());
  for (int i = 0; i < nh; ++i) {
    const cplx kz = b.kz(i);
    // Imaginary axis: k/kz = kappa/q > 0, so the principal root is real.
    const cplx nflux = std::sqrt(k / kz);
    for (int c = 0; c < 3; ++c) {
      b.kz_diag(3 * i + c) = kz;
      b.m_diag(3 * i + c) = c == cz ? -1.0 : 1.0;
      b.nflux_diag(3 * i + c) = nflux;
    }
  }
  return b;
}

std::vector<bool> propagating_mask(const ModeBasis& basis) {
  if (basis.frequency.axis != Axis::real)
    throw Error("propagating modes exist only on the real frequency axis");
  std::vector<bool> mask(static_cast<std::size_t>(basis.harmonics()));
  for (int i = 0; i < basis.harmonics(); ++i) {
    const cplx kz = basis.kz(i) * static_cast<double>(basis.frequency.sign >= 0 ? 1 : -1);
    mask[static_cast<std::size_t>(i)] = kz.imag() == 0.0 && kz.real() > 0.0;
  }
  return mask;
}

int harmonic_cutoff(double period, double k_max) {
  return static_cast<int>(std::floor(period * k_max / (2.0 * kPi) + 1e-12));
}

ModeTriad mode_triad(const ModeBasis& basis, int n) {
  const cplx k = basis.frequency.k();
  const double kx = basis.kx_of(n);
  const double ky = basis.ky0;
  const cplx kz = basis.kz(n + basis.n_trunc);
  const double rho = std::hypot(kx, ky);

  ModeTriad t;
  t.longitudinal = Eigen::Vector3cd(kx / k, ky / k, kz / k);
  if (rho == 0.0) {
    t.te = Eigen::Vector3cd(1.0, 0.0, 0.0);
    t.tm = Eigen::Vector3cd(0.0, kz / k, 0.0);
  } else {
    t.te = Eigen::Vector3cd(ky / rho, -kx / rho, 0.0);
    t.tm = Eigen::Vector3cd(kz * kx / (k * rho), kz * ky / (k * rho), -rho / k);
  }
  return t;
}

CMatrix transverse_basis(const ModeBasis& basis) {
  CMatrix t = CMatrix::Zero(basis.dim(), 2 * basis.harmonics());
  for (int n = -basis.n_trunc; n <= basis.n_trunc; ++n) {
    const auto triad = mode_triad(basis, n);
    const int row = basis.index(n, cx);
    const int col = 2 * (n + basis.n_trunc);
    t.block<3, 1>(row, col) = triad.te;
    t.block<3, 1>(row, col + 1) = triad.tm;
  }
  return t;
}

CMatrix longitudinal_basis(const ModeBasis& basis) {
  CMatrix l = CMatrix::Zero(basis.dim(), basis.harmonics());
  for (int n = -basis.n_trunc; n <= basis.n_trunc; ++n)
    l.block<3, 1>(basis.index(n, cx), n + basis.n_trunc) = mode_triad(basis, n).longitudinal;
  return l;
}

CMatrix transverse_projector(const ModeBasis& basis) {
  const CMatrix l = longitudinal_basis(basis);
  return CMatrix::Identity(basis.dim(), basis.dim()) - l * l.transpose();
}

}  // namespace vpm
