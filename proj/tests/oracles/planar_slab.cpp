#include "planar_slab.hpp"

#include <array>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

namespace oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

enum class Pol { te, tm };

struct Params {
  const std::function<double(double)>* eps;
  cplx k2;
  double rho2;
  Pol pol;
};

// State (Re u, Im u, Re v, Im v). TE: u = E, v = E'. TM: u = H, v = H'/eps.
int rhs(double z, const double y[], double dydt[], void* p) {
  const auto& prm = *static_cast<Params*>(p);
  const double e = (*prm.eps)(z);
  const cplx u{y[0], y[1]};
  const cplx v{y[2], y[3]};
  cplx du, dv;
  if (prm.pol == Pol::te) {
    du = v;
    dv = -(prm.k2 * e - prm.rho2) * u;
  } else {
    du = e * v;
    dv = -(prm.k2 - prm.rho2 / e) * u;
  }
  dydt[0] = du.real();
  dydt[1] = du.imag();
  dydt[2] = dv.real();
  dydt[3] = dv.imag();
  return GSL_SUCCESS;
}

cplx parity_ratio(Params prm, cplx kz, bool even, double z_max, double rtol) {
  gsl_odeiv2_system sys{rhs, nullptr, 4, &prm};
  gsl_odeiv2_driver* drv = gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_rk8pd, 1e-4, 0.0, rtol);
  std::array<double, 4> y{};
  if (even) {
    y[0] = 1.0;
  } else {
    // v(0) = u'(0) for TE and u'(0) / eps(0) for TM.
    y[2] = prm.pol == Pol::te ? 1.0 : 1.0 / (*prm.eps)(0.0);
  }
  double z = 0.0;
  const int status = gsl_odeiv2_driver_apply(drv, &z, z_max, y.data());
  gsl_odeiv2_driver_free(drv);
  if (status != GSL_SUCCESS) throw std::runtime_error("slab oracle integration failed");

  // In vacuum v = u' for both polarizations.
  const cplx u{y[0], y[1]};
  const cplx du{y[2], y[3]};
  const cplx incoming = 0.5 * (u - du / (kI * kz)) * std::exp(kI * kz * z_max);
  const cplx outgoing = 0.5 * (u + du / (kI * kz)) * std::exp(-kI * kz * z_max);
  return outgoing / incoming;
}

}  // namespace

SlabAmplitudes layer_reflection(const std::function<double(double)>& eps, cplx k, double rho, double z_max,
                                double rtol) {
  const cplx k2 = k * k;
  cplx kz = std::sqrt(k2 - rho * rho);
  if (kz.imag() < 0.0 || (kz.imag() == 0.0 && kz.real() < 0.0)) kz = -kz;
  SlabAmplitudes out;
  for (Pol pol : {Pol::te, Pol::tm}) {
    const Params prm{&eps, k2, rho * rho, pol};
    const cplx r = 0.5 * (parity_ratio(prm, kz, true, z_max, rtol) + parity_ratio(prm, kz, false, z_max, rtol));
    (pol == Pol::te ? out.te : out.tm) = r;
  }
  return out;
}

}  // namespace oracle
