#pragma once

#include <array>

#include "vpm/coupled_ode.hpp"

namespace vpm {

/// z-independent generalized Wronskian of the regular and outgoing solutions,
///   W = [Phi^t F' - (Phi^t)' F - Phi^t D1 F] N,
/// with Phi^t = exp(+/- i M kz z) H and F = G exp(i kz z).
CMatrix wronskian(Parity parity, const CoupledSolution& regular, const CoupledSolution& outgoing,
                  const CouplingMatrices& coupling, const ModeBasis& basis);

struct SMatrix {
  CMatrix s;
  double condition = 1.0;  // of the row/column-equilibrated W(k)
};

/// S = W(k)^{-1} M W(-k) M by LU solve. Throws ChannelError if the
/// equilibrated condition number of W(k) exceeds max_condition.
SMatrix s_matrix(const CMatrix& w_k, const CMatrix& w_minus_k, const ModeBasis& basis,
                 double max_condition = 1e12);

CMatrix reflection(const CMatrix& s_plus, const CMatrix& s_minus);

/// Dual of the transverse columns: the left inverse of T that annihilates
/// the longitudinal vectors. Equals T^T for the bilinear-orthonormal triad.
CMatrix transverse_dual(const ModeBasis& basis);

/// r_bar = T_dual r T in TE/TM coordinates, 2(2N+1) square.
CMatrix project_reflection(const CMatrix& r_full, const CMatrix& transverse, const CMatrix& dual);
CMatrix project_reflection(const CMatrix& r_full, const ModeBasis& basis);

struct ChannelOptions {
  OdeOptions ode;
  double z_start = 8.0;
  double z_fit = 2.0;
  double max_condition = 1e12;
};

/// Wronskians of one channel at a fitting point, for both parities and both
/// frequency signs: w[parity][sign], parity 0 = plus, sign 0 = +k.
struct ChannelWronskians {
  ModeBasis basis;        // +k
  ModeBasis basis_minus;  // -k
  std::array<std::array<CMatrix, 2>, 2> w;
  long ode_steps = 0;
};

ChannelWronskians channel_wronskians(const FourierProfile& profile, const Frequency& frequency, double kx0,
                                     double ky0, int n_trunc, const ChannelOptions& options);

struct ScatteringResult {
  Frequency frequency;
  double kx0 = 0.0;
  double ky0 = 0.0;
  int n_trunc = 0;
  ModeBasis basis;
  CMatrix s_plus;
  CMatrix s_minus;
  CMatrix r_full;
  CMatrix r_transverse;
  double condition_plus = 1.0;
  double condition_minus = 1.0;
  long ode_steps = 0;
};

ScatteringResult scattering_from_wronskians(const ChannelWronskians& w, double max_condition = 1e12);

/// Full per-channel pipeline: basis, six ODE integrations, Wronskians,
/// S-matrices and the projected reflection matrix.
ScatteringResult compute_scattering(const FourierProfile& profile, const Frequency& frequency, double kx0,
                                    double ky0, int n_trunc, const ChannelOptions& options);

/// max |(S^dagger S - 1)_ij| over all components of the propagating harmonics.
double unitarity_defect(const CMatrix& s, const ModeBasis& basis);

/// max |[S, P]_ij| / max |S_ij|.
double commutator_defect(const CMatrix& s, const CMatrix& projector);

/// Flattened indices of the propagating harmonics (all three components).
std::vector<int> propagating_indices(const ModeBasis& basis);

}  // namespace vpm
