#pragma once

#include <vector>

#include "vpm/types.hpp"

namespace vpm {

enum class Axis { real, imaginary };

/// Frequency argument of one scattering problem: k on the real axis or
/// i*kappa on the imaginary axis, with an overall sign so that the -k
/// solutions needed by the Wronskian can be built from the same value.
struct Frequency {
  Axis axis = Axis::imaginary;
  double magnitude = 1.0;
  int sign = 1;

  static Frequency real(double k) { return {Axis::real, k, 1}; }
  static Frequency imaginary(double kappa) { return {Axis::imaginary, kappa, 1}; }

  cplx k() const;
  cplx k_squared() const { return k() * k(); }
  Frequency flipped() const { return {axis, magnitude, -sign}; }
};

/// Vector component order inside one harmonic block.
enum Component : int { cx = 0, cy = 1, cz = 2 };

/// Discrete coupled-channel basis for fixed (frequency, kx0, ky0): harmonics
/// n in [-N, N] with k_x = kx0 + 2 pi n / L, three vector components each.
/// Flattened index = 3 (n + N) + c.
struct ModeBasis {
  Frequency frequency;
  double kx0 = 0.0;
  double ky0 = 0.0;
  int n_trunc = 0;
  double period = 2.0 * kPi;

  std::vector<double> kx;  // per harmonic
  CVector kz;              // per harmonic, sign already applied

  CVector kz_diag;     // per flattened index
  CVector m_diag;      // +1 for x, y; -1 for z
  CVector nflux_diag;  // sqrt(k / k_z)

  int harmonics() const { return 2 * n_trunc + 1; }
  int dim() const { return 3 * harmonics(); }
  int index(int n, int c) const { return 3 * (n + n_trunc) + c; }
  double kx_of(int n) const { return kx[static_cast<std::size_t>(n + n_trunc)]; }
};

enum class ThresholdPolicy { reject, allow };

/// Throws ChannelError on a real-axis grazing threshold (some k_z = 0)
/// unless the policy allows it; such a basis is only good for mode counting.
ModeBasis build_basis(const Frequency& frequency, double kx0, double ky0, int n_trunc, double period,
                      ThresholdPolicy thresholds = ThresholdPolicy::reject);

/// True for harmonics with real positive k_z. Throws on the imaginary axis.
std::vector<bool> propagating_mask(const ModeBasis& basis);

/// Harmonics n whose k_x lies within k_max of kx0: |n| <= L k_max / 2 pi.
int harmonic_cutoff(double period, double k_max);

/// Asymptotic TE (M), TM (N) and longitudinal (L) vectors of one harmonic.
struct ModeTriad {
  Eigen::Vector3cd te;
  Eigen::Vector3cd tm;
  Eigen::Vector3cd longitudinal;
};

/// At k_x = k_y = 0 the limit k_y -> 0+ is used: TE = x, TM = (k_z/k) y.
ModeTriad mode_triad(const ModeBasis& basis, int n);

/// dim x 2(2N+1) matrix; columns 2(n+N) and 2(n+N)+1 hold TE and TM of harmonic n.
CMatrix transverse_basis(const ModeBasis& basis);

/// dim x (2N+1) matrix of longitudinal vectors.
CMatrix longitudinal_basis(const ModeBasis& basis);

/// Projector onto the transverse modes along the longitudinal ones,
/// P = 1 - sum_n L_n L_n^T (bilinear, no conjugation).
CMatrix transverse_projector(const ModeBasis& basis);

}  // namespace vpm
