#include <doctest.h>

#include <cmath>
#include <random>

#include "vpm/dielectric_profile.hpp"

using namespace vpm;

namespace {

FourierProfile reference_profile() { return make_fermi_step({2.0, 2.0, 16.0, 2.0 * kPi}); }

double fd5(const std::function<cplx(double)>& f, double z, double h) {
  return ((-f(z + 2 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2 * h)) / (12.0 * h)).real();
}

}  // namespace

TEST_CASE("fermi step component values") {
  const auto p = reference_profile();
  const cplx k{1.0, 0.0};
  CHECK(eval_component(p, 0, k, 0.0).real() == doctest::Approx(2.0 / (1.0 + std::exp(-32.0))).epsilon(1e-15));
  CHECK(eval_component(p, 1, k, 2.0).real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_component(p, -1, k, 2.0).real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_component(p, 99, k, 0.3) == cplx{});
  CHECK(eval_component(p, 2, k, 0.3) == cplx{});
  CHECK(p.max_harmonic() == 1);
}

TEST_CASE("fermi step derivative values") {
  const auto p = reference_profile();
  const cplx k{0.0, 0.7};
  CHECK(std::abs(eval_component_dz(p, 0, k, 0.0)) < 1e-12);
  CHECK(eval_component_dz(p, 0, k, 2.0).real() == doctest::Approx(-8.0).epsilon(1e-14));
  CHECK(eval_component_dz(p, 0, k, -2.0).real() == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(eval_component_dz(p, 1, k, 2.0).real() == doctest::Approx(-4.0).epsilon(1e-14));
}

TEST_CASE("derivatives match finite differences") {
  const auto p = reference_profile();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> zd(0.05, 3.5);
  const cplx k{1.3, 0.0};
  const double h = 1e-4;
  for (int trial = 0; trial < 200; ++trial) {
    const double z = (trial % 2 ? 1.0 : -1.0) * zd(rng);
    for (int n : {-1, 0, 1}) {
      const double d = fd5([&](double x) { return eval_component(p, n, k, x); }, z, h);
      const double d2 = fd5([&](double x) { return eval_component_dz(p, n, k, x); }, z, h);
      const double scale = 2.0 * std::abs(eval_component(p, n, k, 2.0));
      CHECK(std::abs(eval_component_dz(p, n, k, z).real() - d) <= 1e-6 * std::max(std::abs(d), 1e-3 * scale));
      CHECK(std::abs(eval_component_dz2(p, n, k, z).real() - d2) <= 1e-6 * std::max(std::abs(d2), 1e-3 * scale));
    }
  }
}

TEST_CASE("z parity, reality and vacuum asymptotics") {
  const auto p = reference_profile();
  const cplx k{0.0, 1.0};
  for (double z = 0.0; z < 12.0; z += 0.0371) {
    for (int n : {-1, 0, 1}) {
      CHECK(eval_component(p, n, k, z) == eval_component(p, n, k, -z));
      CHECK(eval_component(p, -n, k, z) == std::conj(eval_component(p, n, k, z)));
      if (z >= 8.0) CHECK(std::abs(eval_component(p, n, k, z)) < 1e-8);
    }
  }
}

TEST_CASE("total dielectric") {
  const auto p = reference_profile();
  const cplx k{1.0, 0.0};
  CHECK(eval_total(p, k, 0.0, 0.0).real() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(eval_total(p, k, kPi, 0.0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval_total(make_vacuum(2.0 * kPi), k, 0.3, 0.1) == cplx{1.0, 0.0});
  for (double x = 0.0; x < 2.0 * kPi; x += 0.05)
    for (double z = -5.0; z <= 5.0; z += 0.05) {
      const cplx e = eval_total(p, k, x, z);
      CHECK(std::abs(e.imag()) < 1e-14);
      CHECK(e.real() >= 1.0 - 1e-12);
    }
}

TEST_CASE("slab profile has only the zeroth harmonic") {
  const auto p = make_fermi_slab(3.0, 2.0, 64.0, 2.0 * kPi);
  CHECK(p.stored_harmonics() == std::vector<int>{0});
  CHECK(eval_component(p, 0, cplx{1.0, 0.0}, 0.0).real() == doctest::Approx(3.0));
  CHECK(eval_component(p, 1, cplx{1.0, 0.0}, 0.0) == cplx{});
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_WITH_AS(make_fermi_step({2.0, 2.0, -1.0, 2.0 * kPi}), "steepness must be positive", Error);
  CHECK_THROWS_AS(make_fermi_step({0.0, 2.0, 16.0, 2.0 * kPi}), Error);
  CHECK_THROWS_AS(make_fermi_step({2.0, -2.0, 16.0, 2.0 * kPi}), Error);
  CHECK_THROWS_AS(make_fermi_step({2.0, 2.0, 16.0, 0.0}), Error);
}

TEST_CASE("tabulated profile") {
  const std::vector<double> z = {0.0, 1.0, 2.0, 3.0};
  const auto p = make_tabulated(2.0 * kPi, z,
                                {{0, {2.0, 2.0, 1.0, 0.0}}, {1, {cplx{1.0, 0.5}, cplx{1.0, 0.5}, 0.5, 0.0}}});
  const cplx k{1.0, 0.0};
  CHECK(eval_component(p, 0, k, 2.5).real() == doctest::Approx(0.5));
  CHECK(eval_component(p, 0, k, -2.5).real() == doctest::Approx(0.5));
  CHECK(eval_component(p, 0, k, 3.5) == cplx{});
  CHECK(eval_component(p, -1, k, 0.5) == std::conj(eval_component(p, 1, k, 0.5)));
  CHECK(eval_component_dz(p, 0, k, 1.5).real() == doctest::Approx(-1.0));
  CHECK(eval_component_dz(p, 0, k, -1.5).real() == doctest::Approx(1.0));
  CHECK(std::abs(eval_total(p, k, 0.7, 0.4).imag()) < 1e-14);

  CHECK_THROWS_AS(make_tabulated(2.0 * kPi, {0.0, 1.0}, {{-1, {1.0, 0.0}}}), Error);
  CHECK_THROWS_AS(make_tabulated(2.0 * kPi, {0.5, 1.0}, {{0, {1.0, 0.0}}}), Error);
  CHECK_THROWS_AS(make_tabulated(2.0 * kPi, {0.0, 1.0}, {{0, {cplx{1.0, 1.0}, 0.0}}}), Error);
}

TEST_CASE("profile features") {
  const auto p = make_fermi_step({2.0, 2.0, 16.0, 2.0 * kPi});
  REQUIRE(p.features().size() == 1);
  CHECK(p.features()[0].center == 2.0);
  CHECK(p.features()[0].width == 1.0 / 16.0);
  CHECK(make_fermi_slab(3.0, 1.5, 64.0, 1.0).features()[0].width == 1.0 / 64.0);
  CHECK(make_vacuum(1.0).features().empty());
  const auto t = make_tabulated(1.0, {0.0, 1.0, 3.0}, {{0, {1.0, 1.0, 0.0}}});
  REQUIRE(t.features().size() == 3);
  CHECK(t.features()[2].center == 3.0);
  CHECK(t.features()[2].width == doctest::Approx(0.2));
  CHECK_THROWS_AS(FourierProfile(1.0, {}, {{1.0, 0.0}}), Error);
}
