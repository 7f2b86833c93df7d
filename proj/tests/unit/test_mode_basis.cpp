#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vpm/mode_basis.hpp"

using namespace vpm;
using testing::max_abs;

namespace {

constexpr double L = 2.0 * kPi;

std::vector<int> mask_indices(const ModeBasis& b) {
  const auto m = propagating_mask(b);
  std::vector<int> out;
  for (int n = -b.n_trunc; n <= b.n_trunc; ++n)
    if (m[static_cast<std::size_t>(n + b.n_trunc)]) out.push_back(n);
  return out;
}

}  // namespace

TEST_CASE("single mode at normal incidence") {
  const auto b = build_basis(Frequency::real(1.0), 0.0, 0.0, 0, L);
  CHECK(b.dim() == 3);
  CHECK(max_abs(b.kz_diag - CVector::Ones(3)) < 1e-15);
  CHECK(b.m_diag(0) == cplx{1.0});
  CHECK(b.m_diag(1) == cplx{1.0});
  CHECK(b.m_diag(2) == cplx{-1.0});
}

TEST_CASE("imaginary axis branch") {
  const auto b = build_basis(Frequency::imaginary(1.0), 0.25, 0.5, 1, L);
  CHECK(b.dim() == 9);
  const cplx kz0 = b.kz(1);
  CHECK(std::abs(kz0.real()) < 1e-15);
  CHECK(kz0.imag() == doctest::Approx(std::sqrt(1.0 + 0.0625 + 0.25)).epsilon(1e-14));
  CHECK(kz0.imag() == doctest::Approx(1.1456).epsilon(1e-4));
  for (int i = 0; i < b.harmonics(); ++i) CHECK(b.kz(i).imag() > 0.0);
  // sqrt(k / kz) = sqrt(kappa / q), real positive.
  CHECK(std::abs(b.nflux_diag(3).imag()) < 1e-15);
  CHECK(b.nflux_diag(3).real() == doctest::Approx(std::sqrt(1.0 / kz0.imag())));
}

TEST_CASE("sign flip negates kz") {
  for (auto f : {Frequency::real(1.7), Frequency::imaginary(0.4)}) {
    const auto b = build_basis(f, -0.3, 0.2, 2, L);
    const auto m = build_basis(f.flipped(), -0.3, 0.2, 2, L);
    CHECK(max_abs(b.kz_diag + m.kz_diag) < 1e-15);
    CHECK(std::abs(b.frequency.k() + m.frequency.k()) < 1e-15);
  }
}

TEST_CASE("propagating masks") {
  CHECK(mask_indices(build_basis(Frequency::real(1.0), 0.0, 0.0, 3, L, ThresholdPolicy::allow)) ==
        std::vector<int>{0});
  CHECK(mask_indices(build_basis(Frequency::real(5.0), 0.0, 0.0, 6, L, ThresholdPolicy::allow)) ==
        std::vector<int>{-4, -3, -2, -1, 0, 1, 2, 3, 4});
  CHECK(mask_indices(build_basis(Frequency::real(1.0), 0.0, 0.0, 2, L, ThresholdPolicy::allow)) ==
        std::vector<int>{0});
  CHECK_THROWS_AS(propagating_mask(build_basis(Frequency::imaginary(1.0), 0.0, 0.0, 1, L)), Error);
}

TEST_CASE("grazing threshold is rejected") {
  CHECK_THROWS_AS(build_basis(Frequency::real(1.0), 0.0, 0.0, 1, L), ChannelError);
  CHECK_NOTHROW(build_basis(Frequency::real(1.0), 0.0, 0.0, 1, L, ThresholdPolicy::allow));
}

TEST_CASE("invalid channels") {
  CHECK_THROWS_AS(build_basis(Frequency::real(1.0), 0.6, 0.0, 1, L), Error);
  CHECK_THROWS_AS(build_basis(Frequency::real(1.0), 0.1, -0.1, 1, L), Error);
  CHECK_THROWS_AS(build_basis(Frequency::real(1.0), 0.1, 0.1, -1, L), Error);
}

TEST_CASE("harmonic cutoff") {
  CHECK(harmonic_cutoff(L, 2.5) == 2);
  CHECK(harmonic_cutoff(L, 1.0) == 1);
  CHECK(harmonic_cutoff(L, 0.99) == 0);
}

TEST_CASE("longitudinal direction is annihilated") {
  // Single harmonic, kx = 0, ky = 1, k = sqrt 2: L = (0, 1, 1) / sqrt 2.
  const auto b = build_basis(Frequency::real(std::sqrt(2.0)), 0.0, 1.0, 0, L);
  const CMatrix p = transverse_projector(b);
  const Eigen::Vector3cd l(0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  CHECK(max_abs(p * l) < 1e-14);
  const auto t = mode_triad(b, 0);
  CHECK(max_abs(t.longitudinal - l) < 1e-14);
}

TEST_CASE("projector properties on random channels") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> kxd(-0.5, 0.5), kyd(0.0, 0.8), kd(0.2, 2.4);
  for (int trial = 0; trial < 40; ++trial) {
    const Frequency f = trial % 2 ? Frequency::real(kd(rng)) : Frequency::imaginary(kd(rng));
    const int nt = trial % 4;
    const auto b = build_basis(f, kxd(rng), kyd(rng), nt, L);
    const CMatrix p = transverse_projector(b);
    // Entries grow like (rho / kappa)^2 on the imaginary axis; roundoff scales with them.
    CHECK(max_abs(p * p - p) < 1e-12 * std::max(1.0, max_abs(p) * max_abs(p)));
    CHECK(Eigen::FullPivLU<CMatrix>(p).rank() == 2 * b.harmonics());

    const CMatrix t = transverse_basis(b);
    const CMatrix l = longitudinal_basis(b);
    CHECK(max_abs(p * t - t) < 1e-12);
    CHECK(max_abs(p * l) < 1e-12);
    for (int n = -nt; n <= nt; ++n) {
      const auto tri = mode_triad(b, n);
      Eigen::Matrix3cd m;
      m << tri.te, tri.tm, tri.longitudinal;
      CHECK(std::abs(m.determinant()) > 1e-8);
      // Bilinear orthonormality of the triad.
      CHECK(max_abs(m.transpose() * m - Eigen::Matrix3cd::Identity()) < 1e-12);
    }

    if (f.axis == Axis::real) {
      const auto prop = propagating_mask(b);
      for (int i = 0; i < b.harmonics(); ++i) {
        if (!prop[static_cast<std::size_t>(i)]) continue;
        for (int c = 0; c < 3; ++c) {
          const int j = 3 * i + c;
          CHECK(std::abs(b.nflux_diag(j) * b.nflux_diag(j) * b.kz_diag(j) - f.k()) < 1e-12);
        }
        const auto tri = mode_triad(b, i - nt);
        CHECK(tri.te.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(tri.tm.norm() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("normal incidence convention") {
  const auto b = build_basis(Frequency::real(0.8), 0.0, 0.0, 0, L);
  const auto t = mode_triad(b, 0);
  CHECK(max_abs(t.te - Eigen::Vector3cd(1.0, 0.0, 0.0)) < 1e-15);
  CHECK(max_abs(t.tm - Eigen::Vector3cd(0.0, 1.0, 0.0)) < 1e-15);
  CHECK(max_abs(t.longitudinal - Eigen::Vector3cd(0.0, 0.0, 1.0)) < 1e-15);
}
