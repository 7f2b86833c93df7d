#pragma once

// Adaptive embedded Runge-Kutta driver for complex matrix ODEs, built on
// Boost.Odeint's controlled steppers. Integration always runs forward in an
// internal variable tau = |z - z0| so inward sweeps need no special casing.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "vpm/coupled_ode.hpp"

namespace vpm::detail {

using OdeState = std::vector<cplx>;

/// On reaching z the step size is cut back to at most `step`.
struct Breakpoint {
  double z = 0.0;
  double step = 0.0;
};

struct OdeStats {
  int accepted = 0;
  int rejected = 0;
};

template <class Stepper, class Rhs>
OdeStats integrate_with(Rhs&& rhs, OdeState& y, double z0, double z1, const OdeOptions& opt,
                        const std::string& context, const std::vector<Breakpoint>& breaks) {
  namespace odeint = boost::numeric::odeint;

  OdeStats stats;
  const double span = std::abs(z1 - z0);
  if (span == 0.0) return stats;
  const double dir = z1 >= z0 ? 1.0 : -1.0;

  auto system = [&](const OdeState& x, OdeState& dxdt, double tau) {
    dxdt.resize(x.size());
    rhs(z0 + dir * tau, x, dxdt);
    if (dir < 0.0)
      for (auto& v : dxdt) v = -v;
  };

  // Breakpoints in tau, ascending; the end point closes the list.
  std::vector<Breakpoint> stops;
  for (const auto& b : breaks) {
    const double t = dir * (b.z - z0);
    if (t > 1e-14 * span && t < span * (1.0 - 1e-14)) stops.push_back({t, b.step});
  }
  std::sort(stops.begin(), stops.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.z < b.z; });
  stops.push_back({span, 0.0});

  auto stepper = odeint::make_controlled(opt.atol, opt.rtol, Stepper());
  double tau = 0.0;
  double dt = std::min(opt.initial_step, span);
  std::size_t next = 0;
  while (span - tau > 1e-14 * span) {
    if (stops[next].z - tau <= 1e-14 * span) {
      tau = stops[next].z;
      dt = std::min(dt, stops[next].step);
      ++next;
      continue;
    }
    if (tau + dt > stops[next].z) dt = stops[next].z - tau;
    if (stepper.try_step(system, y, tau, dt) == odeint::fail) {
      ++stats.rejected;
      if (dt < opt.min_step)
        throw ChannelError("ODE step size underflow at z=" + std::to_string(z0 + dir * tau) + " (" +
                           context + ")");
      continue;
    }
    if (++stats.accepted > opt.max_steps)
      throw ChannelError("ODE step limit exceeded at z=" + std::to_string(z0 + dir * tau) + " (" +
                         context + ")");
  }
  return stats;
}

/// rhs(z, y, dydz) must fill dydz (already sized like y).
template <class Rhs>
OdeStats integrate_state(Rhs&& rhs, OdeState& y, double z0, double z1, const OdeOptions& opt,
                         const std::string& context, const std::vector<Breakpoint>& breaks = {}) {
  namespace odeint = boost::numeric::odeint;
  if (opt.method == OdeMethod::dopri5)
    return integrate_with<odeint::runge_kutta_dopri5<OdeState, double, OdeState, double>>(rhs, y, z0, z1, opt,
                                                                                          context, breaks);
  return integrate_with<odeint::runge_kutta_fehlberg78<OdeState, double, OdeState, double>>(rhs, y, z0, z1, opt,
                                                                                           context, breaks);
}

}  // namespace vpm::detail
