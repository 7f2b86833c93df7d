#pragma once

#include <string>

#include "vpm/dielectric_profile.hpp"
#include "vpm/mode_basis.hpp"

namespace vpm {

/// Generalized Helmholtz operator curl curl E - eps grad div(eps E) - k^2 eps E
/// restricted to one channel and written in terms of mode coefficients F(z):
/// O F = a2 F'' + a1 F' + a0 F. Every multiplication by eps is the
/// truncated Toeplitz matrix of its harmonics on [-N, N].
struct HelmholtzOperator {
  CMatrix a2;
  CMatrix a1;
  CMatrix a0;
  double evaluated_at = 0.0;
};

/// The same operator normalized to unit leading coefficient:
/// -F'' + d1 F' + d0 F = 0.
struct CouplingMatrices {
  CMatrix d0;
  CMatrix d1;
  CMatrix d1_dz;
  double evaluated_at = 0.0;
};

HelmholtzOperator build_helmholtz_operator(const FourierProfile& profile, const ModeBasis& basis, double z);

/// Requires profile.period() == basis.period.
CouplingMatrices build_coupling_matrices(const FourierProfile& profile, const ModeBasis& basis, double z);

enum class Parity { plus, minus, outgoing };

struct CoupledSolution {
  Parity parity = Parity::outgoing;
  CMatrix value;
  CMatrix derivative;
  double at_z = 0.0;
  int steps = 0;
};

enum class OdeMethod { fehlberg78, dopri5 };

OdeMethod parse_ode_method(const std::string& name);
std::string to_string(OdeMethod method);

struct OdeOptions {
  OdeMethod method = OdeMethod::fehlberg78;
  double rtol = 1e-9;
  double atol = 1e-11;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  long max_steps = 200000;
  // Profile components below this magnitude count as vacuum when choosing
  // where the inward integration starts.
  double vacuum_threshold = 1e-15;
};

/// Diagonal regular-solution data at z = 0: (-i k_z)^{-1} on the x, y
/// entries for parity plus (z entries for parity minus), zero elsewhere.
CVector regular_boundary_h(Parity parity, const ModeBasis& basis);

/// Lowest z in [z_fit, z_start] above which every component stays below
/// `threshold` (sampled on a uniform grid).
double vacuum_start(const FourierProfile& profile, cplx k, double z_fit, double z_start, double threshold);

/// Integrates G'' = D1 G' + D0 G + (D1 G - 2 G') i kz + G kz^2 inward from
/// z_start (G = 1, G' = 0) to z_fit. G is taken as 1 on the vacuum stretch
/// above vacuum_start(options.vacuum_threshold), so the numerical integration
/// begins there; starting further out lets roundoff seed the decaying branch
/// of the growing evanescent solutions.
CoupledSolution integrate_outgoing(const FourierProfile& profile, const ModeBasis& basis, double z_start,
                                   double z_fit, const OdeOptions& options = {});

/// Integrates the parity-projected regular equation for H outward from
/// z = 0 (H = h, H' = 1) to z_fit. A vacuum profile uses the closed-form
/// free solution.
CoupledSolution integrate_regular(Parity parity, const FourierProfile& profile, const ModeBasis& basis,
                                  double z_fit, const OdeOptions& options = {});

/// Same integration but with caller-supplied initial data; used to check linearity.
CoupledSolution integrate_regular_from(Parity parity, const FourierProfile& profile, const ModeBasis& basis,
                                       const CMatrix& h0, const CMatrix& dh0, double z_fit,
                                       const OdeOptions& options = {});
CoupledSolution integrate_outgoing_from(const FourierProfile& profile, const ModeBasis& basis,
                                        const CMatrix& g0, const CMatrix& dg0, double z_start,
                                        double z_fit, const OdeOptions& options = {});

}  // namespace vpm
