#include "vpm/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <memory>

#include "vpm/types.hpp"

namespace vpm {

QuadratureRule parse_quadrature_rule(const std::string& name) {
  if (name == "gauss_legendre_panels") return QuadratureRule::gauss_legendre_panels;
  if (name == "trapezoid") return QuadratureRule::trapezoid;
  throw Error("unknown quadrature rule '" + name + "'");
}

std::string to_string(QuadratureRule rule) {
  return rule == QuadratureRule::trapezoid ? "trapezoid" : "gauss_legendre_panels";
}

void validate(const QuadratureSpec& q) {
  if (!(q.kappa_min > 0.0 && q.kappa_max > q.kappa_min)) throw Error("need 0 < kappa_min < kappa_max");
  if (!(q.ky_min >= 0.0 && q.ky_max > q.ky_min)) throw Error("need 0 <= ky_min < ky_max");
  if (q.n_kappa < 2 || q.n_kx < 2 || q.n_ky < 2) throw Error("node counts must be at least 2");
  if (q.panels < 1) throw Error("panel count must be at least 1");
}

QuadratureSpec halved(const QuadratureSpec& q) {
  const int floor_n = q.rule == QuadratureRule::trapezoid ? 2 : 1;
  auto half = [&](int n) { return std::max(floor_n, n / 2); };
  QuadratureSpec h = q;
  h.n_kappa = half(q.n_kappa);
  h.n_kx = half(q.n_kx);
  h.n_ky = half(q.n_ky);
  return h;
}

Rule1D gauss_legendre(double a, double b, int n) {
  if (n < 1) throw Error("Gauss-Legendre rule needs at least one node");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)), &gsl_integration_glfixed_table_free);
  if (!table) throw Error("could not build Gauss-Legendre table");
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &r.nodes[static_cast<std::size_t>(i)],
                                  &r.weights[static_cast<std::size_t>(i)], table.get());
  return r;
}

Rule1D gauss_legendre_panels(double a, double b, int panels, int n_per_panel) {
  Rule1D r;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const auto g = gauss_legendre(a + p * width, a + (p + 1) * width, n_per_panel);
    r.nodes.insert(r.nodes.end(), g.nodes.begin(), g.nodes.end());
    r.weights.insert(r.weights.end(), g.weights.begin(), g.weights.end());
  }
  return r;
}

Rule1D trapezoid(double a, double b, int n) {
  if (n < 2) throw Error("trapezoid rule needs at least two nodes");
  Rule1D r;
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(a + i * h);
    r.weights.push_back((i == 0 || i == n - 1) ? 0.5 * h : h);
  }
  return r;
}

std::vector<QuadratureNode> quadrature_nodes(const QuadratureSpec& q, double period) {
  const double kx_max = kPi / period;
  Rule1D kappa, kx, ky;
  if (q.rule == QuadratureRule::gauss_legendre_panels) {
    kappa = gauss_legendre_panels(q.kappa_min, q.kappa_max, q.panels, q.n_kappa);
    ky = gauss_legendre_panels(q.ky_min, q.ky_max, q.panels, q.n_ky);
    kx = gauss_legendre(0.0, kx_max, q.n_kx);
  } else {
    kappa = trapezoid(q.kappa_min, q.kappa_max, q.panels * q.n_kappa);
    ky = trapezoid(q.ky_min, q.ky_max, q.panels * q.n_ky);
    kx = trapezoid(0.0, kx_max, q.n_kx);
  }

  std::vector<QuadratureNode> nodes;
  nodes.reserve(kappa.nodes.size() * kx.nodes.size() * ky.nodes.size());
  for (std::size_t i = 0; i < kappa.nodes.size(); ++i)
    for (std::size_t j = 0; j < kx.nodes.size(); ++j)
      for (std::size_t l = 0; l < ky.nodes.size(); ++l)
        nodes.push_back({kappa.nodes[i], kx.nodes[j], ky.nodes[l],
                         2.0 * kappa.weights[i] * kx.weights[j] * ky.weights[l]});
  return nodes;
}

}  // namespace vpm
