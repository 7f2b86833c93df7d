#pragma once

#include <string>
#include <vector>

namespace vpm {

enum class QuadratureRule { gauss_legendre_panels, trapezoid };

QuadratureRule parse_quadrature_rule(const std::string& name);
std::string to_string(QuadratureRule rule);

/// Integration domain and node counts for the (kappa, kx0, ky0) integral.
/// kappa and ky0 use `panels` equal panels with n_kappa / n_ky nodes each;
/// kx0 uses a single panel of n_kx nodes on (0, pi/L].
struct QuadratureSpec {
  double kappa_min = 0.0078125;
  double kappa_max = 2.5;
  double ky_min = 0.0078125;
  double ky_max = 2.5;
  int n_kappa = 8;
  int n_kx = 8;
  int n_ky = 8;
  int panels = 4;
  QuadratureRule rule = QuadratureRule::gauss_legendre_panels;
};

/// Throws vpm::Error on inconsistent bounds or node counts < 2.
void validate(const QuadratureSpec& q);

/// Same domain with every per-panel node count halved (minimum 1 for
/// Gauss-Legendre, 2 for trapezoid); the difference to the full rule is
/// the error estimate.
QuadratureSpec halved(const QuadratureSpec& q);

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule1D gauss_legendre(double a, double b, int n);
Rule1D gauss_legendre_panels(double a, double b, int panels, int n_per_panel);
Rule1D trapezoid(double a, double b, int n);

struct QuadratureNode {
  double kappa = 0.0;
  double kx0 = 0.0;
  double ky0 = 0.0;
  double weight = 0.0;  // product weight including the factor 2 from kx0 evenness
};

/// Tensor-product nodes in fixed order (kappa outermost, then kx0, then ky0).
std::vector<QuadratureNode> quadrature_nodes(const QuadratureSpec& q, double period);

}  // namespace vpm
