#pragma once

// Reflection of a smooth, z-even planar dielectric layer from direct scalar
// ODE integration (GSL rk8pd), one polarization at a time.

#include <complex>
#include <functional>

namespace oracle {

using cplx = std::complex<double>;

struct SlabAmplitudes {
  cplx te;  // E_y amplitude ratio
  cplx tm;  // H_y amplitude ratio
};

/// eps(z) real and even; k on either axis, rho the transverse wavenumber.
/// r = outgoing / incoming amplitude referenced to z = 0, averaged over the
/// even and odd solutions. Integration runs out to z_max, which must lie in vacuum.
SlabAmplitudes layer_reflection(const std::function<double(double)>& eps, cplx k, double rho, double z_max,
                                double rtol = 1e-12);

}  // namespace oracle
