#include <doctest.h>

#include <cmath>
#include <numeric>

#include "vpm/quadrature.hpp"
#include "vpm/types.hpp"

using namespace vpm;

namespace {

double integrate(const Rule1D& r, double (*f)(double)) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  return s;
}

}  // namespace

TEST_CASE("gauss-legendre is exact for polynomials") {
  const auto r = gauss_legendre(-1.0, 2.0, 5);
  CHECK(r.nodes.size() == 5);
  // Degree 9 is the highest exact degree for 5 nodes.
  const double exact = (std::pow(2.0, 10) - 1.0) / 10.0;
  CHECK(integrate(r, [](double x) { return std::pow(x, 9); }) == doctest::Approx(exact).epsilon(1e-13));
  const auto p = gauss_legendre_panels(0.0, 3.0, 3, 4);
  CHECK(p.nodes.size() == 12);
  CHECK(integrate(p, [](double x) { return std::exp(x); }) == doctest::Approx(std::exp(3.0) - 1.0).epsilon(1e-6));
}

TEST_CASE("trapezoid rule") {
  const auto t = trapezoid(0.0, 1.0, 11);
  CHECK(t.nodes.front() == 0.0);
  CHECK(t.nodes.back() == doctest::Approx(1.0));
  CHECK(integrate(t, [](double x) { return x; }) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(trapezoid(0.0, 1.0, 1), Error);
}

TEST_CASE("tensor nodes and weights") {
  QuadratureSpec q;
  q.n_kappa = 3;
  q.n_kx = 4;
  q.n_ky = 5;
  q.panels = 2;
  const double period = 2.0 * kPi;
  const auto nodes = quadrature_nodes(q, period);
  CHECK(nodes.size() == static_cast<std::size_t>(6 * 4 * 10));
  const double total = std::accumulate(nodes.begin(), nodes.end(), 0.0,
                                       [](double s, const QuadratureNode& n) { return s + n.weight; });
  const double volume = 2.0 * (q.kappa_max - q.kappa_min) * (kPi / period) * (q.ky_max - q.ky_min);
  CHECK(total == doctest::Approx(volume).epsilon(1e-13));
  for (const auto& n : nodes) {
    CHECK(n.kappa > q.kappa_min);
    CHECK(n.kappa < q.kappa_max);
    CHECK(n.kx0 > 0.0);
    CHECK(n.kx0 < kPi / period);
    CHECK(n.ky0 > q.ky_min);
  }
  // kappa outermost, ky innermost.
  CHECK(nodes[0].kappa == nodes[39].kappa);
  CHECK(nodes[0].kx0 == nodes[9].kx0);
  CHECK(nodes[0].ky0 != nodes[1].ky0);
}

TEST_CASE("halved rule") {
  QuadratureSpec q;
  const auto h = halved(q);
  CHECK(h.n_kappa == 4);
  CHECK(h.n_kx == 4);
  CHECK(h.n_ky == 4);
  CHECK(h.panels == q.panels);
  q.rule = QuadratureRule::trapezoid;
  q.n_kx = 3;
  CHECK(halved(q).n_kx == 2);
}

TEST_CASE("validation and names") {
  QuadratureSpec q;
  CHECK_NOTHROW(validate(q));
  q.kappa_min = 0.0;
  CHECK_THROWS_AS(validate(q), Error);
  q = {};
  q.n_ky = 1;
  CHECK_THROWS_AS(validate(q), Error);
  q = {};
  q.ky_max = q.ky_min;
  CHECK_THROWS_AS(validate(q), Error);
  CHECK(parse_quadrature_rule("trapezoid") == QuadratureRule::trapezoid);
  CHECK(to_string(QuadratureRule::gauss_legendre_panels) == "gauss_legendre_panels");
  CHECK_THROWS_AS(parse_quadrature_rule("simpson"), Error);
}
