#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "pce/linalg.hpp"
#include "quadrature.hpp"

using namespace pce;
using fixtures::sphere_crystal;
using fixtures::sphere_radius;

namespace {

// (1/V) * integral over the ball of exp(-i g.y), by tensor Gauss quadrature in
// spherical coordinates around the center.
cplx ball_transform(const Vec3& g, const Vec3& center, double radius, double volume) {
  const auto [rho, wr] = quadrature::gauss_legendre(40, 0.0, radius);
  const auto [ct, wt] = quadrature::gauss_legendre(40, -1.0, 1.0);
  const int nphi = 80;
  cplx sum = 0.0;
  for (std::size_t a = 0; a < rho.size(); ++a) {
    for (std::size_t b = 0; b < ct.size(); ++b) {
      const double st = std::sqrt(1.0 - ct[b] * ct[b]);
      for (int c = 0; c < nphi; ++c) {
        const double phi = kTwoPi * c / nphi;
        const Vec3 y = center + rho[a] * Vec3(st * std::cos(phi), st * std::sin(phi), ct[b]);
        sum += wr[a] * wt[b] * (kTwoPi / nphi) * rho[a] * rho[a] * std::exp(-kI * g.dot(y));
      }
    }
  }
  return sum / volume;
}

// Cell-averaged eps of the sphere crystal around y (s^3 sub-samples).
double averaged_sphere_eps(const Vec3& y, double h, int s) {
  double acc = 0.0;
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b)
      for (int c = 0; c < s; ++c) {
        Vec3 p = y + h * Vec3((a + 0.5) / s - 0.5, (b + 0.5) / s - 0.5, (c + 0.5) / s - 0.5);
        for (int j = 0; j < 3; ++j) p(j) -= std::floor(p(j));
        acc += (p - Vec3(0.5, 0.5, 0.5)).norm() < sphere_radius() ? 13.0 : 1.0;
      }
  return acc / (s * s * s);
}

double fd_check(const ModulationProfile& prof, const Vec3& r) {
  const double h = 1e-5;
  const ScalarJet j = evaluate(prof, r);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    const Vec3 e = h * Vec3::Unit(a);
    const double fd = (evaluate(prof, r + e).value - evaluate(prof, r - e).value) / (2 * h);
    worst = std::max(worst, std::abs(fd - j.gradient(a)) / std::max(1e-3, j.gradient.norm()));
    const Vec3 gfd = (evaluate(prof, r + e).gradient - evaluate(prof, r - e).gradient) / (2 * h);
    worst = std::max(worst, (gfd - j.hessian.col(a)).norm() / std::max(1e-3, j.hessian.norm()));
  }
  return worst;
}

}  // namespace

TEST_SUITE("material") {
  TEST_CASE("background only") {
    const Lattice lat = Lattice::cubic(1.0);
    const ModeSet modes = cutoff_modes(dual_basis(lat), 2 * kTwoPi);
    const auto w = coefficients_from_primitives({GeometryPrimitive::background(CMat3::Identity(), CMat3::Identity())},
                                                lat, modes);
    CHECK(w.eps.at({0, 0, 0}) == CMat3::Identity());
    for (const auto& n : modes.indices()) {
      if (n != Index3{0, 0, 0}) CHECK(w.eps.at(n).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("sphere coefficients against quadrature") {
    const Lattice lat = Lattice::cubic(1.0);
    const DualLattice dual = dual_basis(lat);
    const ModeSet modes = cutoff_modes(dual, 2 * kTwoPi);
    const auto w = coefficients_from_primitives(sphere_crystal(), lat, modes);
    CHECK(std::abs(w.eps.at({0, 0, 0})(0, 0) - (0.25 * 13 + 0.75)) < 1e-12);
    CHECK(std::abs(w.inv_eps.at({0, 0, 0})(0, 0) - (0.25 / 13 + 0.75)) < 1e-12);
    CHECK(std::abs(w.eps.at({0, 0, 0})(0, 1)) == 0.0);
    for (const Index3 n : {Index3{1, 0, 0}, Index3{1, 1, 0}, Index3{-1, 1, 1}, Index3{0, 0, 2}}) {
      REQUIRE(modes.contains(n));
      const cplx q = 12.0 * ball_transform(dual.vector(n), Vec3(0.5, 0.5, 0.5), sphere_radius(), 1.0);
      CHECK(std::abs(w.eps.at(n)(0, 0) - q) <= 1e-6 * std::abs(q));
      const cplx qi = (1.0 / 13 - 1.0) * ball_transform(dual.vector(n), Vec3(0.5, 0.5, 0.5), sphere_radius(), 1.0);
      CHECK(std::abs(w.inv_eps.at(n)(1, 1) - qi) <= 1e-6 * std::abs(qi));
      CHECK(w.mu.at(n).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("cylinder and slab against quadrature") {
    const Lattice lat = Lattice::cubic(1.0);
    const DualLattice dual = dual_basis(lat);
    const ModeSet modes = cutoff_modes(dual, 2 * kTwoPi);
    GeometryPrimitive rod;
    rod.kind = GeometryPrimitive::Kind::Cylinder;
    rod.center = Vec3(0.3, 0.4, 0.0);
    rod.radius = 0.2;
    rod.axis = 2;
    rod.eps = 5.0 * CMat3::Identity();
    GeometryPrimitive slab;
    slab.kind = GeometryPrimitive::Kind::Slab;
    slab.center = Vec3(0.0, 0.0, 0.6);
    slab.thickness = 0.3;
    slab.normal = 2;
    slab.eps = 3.0 * CMat3::Identity();
    const auto bg = GeometryPrimitive::background(CMat3::Identity(), CMat3::Identity());

    const auto wr = coefficients_from_primitives({bg, rod}, lat, modes);
    const auto [rho, wrh] = quadrature::gauss_legendre(40, 0.0, 0.2);
    for (const Index3 n : {Index3{1, 0, 0}, Index3{1, 1, 0}, Index3{0, 0, 1}}) {
      const Vec3 g = dual.vector(n);
      cplx q = 0.0;
      if (n[2] == 0) {
        for (std::size_t a = 0; a < rho.size(); ++a)
          for (int c = 0; c < 120; ++c) {
            const double phi = kTwoPi * c / 120;
            const Vec3 y = Vec3(0.3, 0.4, 0) + rho[a] * Vec3(std::cos(phi), std::sin(phi), 0);
            q += wrh[a] * (kTwoPi / 120) * rho[a] * std::exp(-kI * g.dot(y));
          }
      }
      q *= 4.0;
      CHECK(std::abs(wr.eps.at(n)(2, 2) - q) <= 1e-10 + 1e-8 * std::abs(q));
    }

    const auto ws = coefficients_from_primitives({bg, slab}, lat, modes);
    const auto [zs, wz] = quadrature::gauss_legendre(30, 0.45, 0.75);
    for (const Index3 n : {Index3{0, 0, 1}, Index3{0, 0, 2}, Index3{1, 0, 0}}) {
      cplx q = 0.0;
      if (n[0] == 0 && n[1] == 0) {
        for (std::size_t a = 0; a < zs.size(); ++a) q += wz[a] * std::exp(-kI * dual.vector(n)(2) * zs[a]);
      }
      q *= 2.0;
      CHECK(std::abs(ws.eps.at(n)(0, 0) - q) <= 1e-10 + 1e-8 * std::abs(q));
    }
  }

  TEST_CASE("overlap policy") {
    const Lattice lat = Lattice::cubic(1.0);
    const ModeSet modes = cutoff_modes(dual_basis(lat), kTwoPi);
    auto prims = sphere_crystal();
    prims.push_back(GeometryPrimitive::sphere(Vec3(0.55, 0.5, 0.5), 0.1, 2.0 * CMat3::Identity(), CMat3::Identity()));
    CHECK_THROWS_AS(coefficients_from_primitives(prims, lat, modes, OverlapPolicy::Reject), ConfigError);
    // Inside the big sphere the small one overwrites eps 13 with 2.
    const auto w = coefficients_from_primitives(prims, lat, modes, OverlapPolicy::ExplicitOverwrite);
    const double f_small = 4.0 / 3.0 * kPi * 0.001;
    CHECK(w.eps.at({0, 0, 0})(0, 0).real() == doctest::Approx(0.75 + 0.25 * 13 + f_small * (2 - 13)).epsilon(1e-12));
    prims.back().center = Vec3(0.5 + sphere_radius(), 0.5, 0.5);  // straddles the surface
    CHECK_THROWS_AS(coefficients_from_primitives(prims, lat, modes, OverlapPolicy::ExplicitOverwrite), ConfigError);
    CHECK_THROWS_AS(coefficients_from_primitives({prims[1]}, lat, modes), ConfigError);
  }

  TEST_CASE("non-positive primitive weights name the invariant") {
    const Lattice lat = Lattice::cubic(1.0);
    const ModeSet modes = cutoff_modes(dual_basis(lat), kTwoPi);
    try {
      coefficients_from_primitives({GeometryPrimitive::background(-CMat3::Identity(), CMat3::Identity())}, lat, modes);
      FAIL("expected rejection");
    } catch (const InvariantViolation& e) {
      CHECK(e.invariant() == "positivity");
    }
  }

  TEST_CASE("sampled weights") {
    const Lattice lat = Lattice::cubic(1.0);
    const DualLattice dual = dual_basis(lat);
    SampleGrid g;
    g.n = 16;
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b)
        for (int c = 0; c < 16; ++c) {
          g.eps.push_back(3.0 * CMat3::Identity());
          g.mu.push_back(CMat3::Identity());
        }
    auto w = coefficients_from_samples(g, dual);
    CHECK(std::abs(w.eps.at({0, 0, 0})(0, 0) - 3.0) < 1e-14);
    double off = 0.0;
    for (const auto& [n, v] : w.eps.entries()) {
      if (n != Index3{0, 0, 0}) off = std::max(off, v.cwiseAbs().maxCoeff());
    }
    CHECK(off < 1e-14);

    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b)
        for (int c = 0; c < 16; ++c) g.eps[g.flat(a, b, c)] = (2.0 + std::cos(kTwoPi * a / 16)) * CMat3::Identity();
    w = coefficients_from_samples(g, dual);
    CHECK(std::abs(w.eps.at({0, 0, 0})(0, 0) - 2.0) < 1e-12);
    CHECK(std::abs(w.eps.at({1, 0, 0})(0, 0) - 0.5) < 1e-12);
    CHECK(std::abs(w.eps.at({-1, 0, 0})(0, 0) - 0.5) < 1e-12);
    CHECK(std::abs(w.eps.at({0, 1, 0})(0, 0)) < 1e-12);

    g.eps[g.flat(3, 4, 5)] = -CMat3::Identity();
    try {
      coefficients_from_samples(g, dual);
      FAIL("expected rejection");
    } catch (const InvariantViolation& e) {
      CHECK(e.invariant() == "positivity");
      CHECK(std::string(e.what()).find("(3,4,5)") != std::string::npos);
    }
  }

  TEST_CASE("sampled sphere agrees with closed form") {
    const Lattice lat = Lattice::cubic(1.0);
    const DualLattice dual = dual_basis(lat);
    const int n = 64;
    SampleGrid g;
    g.n = n;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          g.eps.push_back(averaged_sphere_eps(Vec3(a, b, c) / n, 1.0 / n, 4) * CMat3::Identity());
          g.mu.push_back(CMat3::Identity());
        }
    const ModeSet modes = cutoff_modes(dual, 2 * kTwoPi);
    const auto ws = coefficients_from_samples(g, dual, 2 * kTwoPi);
    const auto wp = coefficients_from_primitives(sphere_crystal(), lat, modes);
    double worst = 0.0;
    for (const auto& m : modes.indices()) worst = std::max(worst, (ws.eps.at(m) - wp.eps.at(m)).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-3);
    CHECK(ws.eps.size() == modes.size());
  }

  TEST_CASE("band-limited round trip through samples") {
    const Lattice lat = Lattice::from_vectors(Vec3(1, 0, 0), Vec3(0.3, 1.1, 0), Vec3(0.1, 0.2, 0.9));
    const DualLattice dual = dual_basis(lat);
    MaterialWeights w = MaterialWeights::vacuum();
    w.eps.set({0, 0, 0}, 3.0 * CMat3::Identity());
    CMat3 c = CMat3::Zero();
    c(0, 1) = cplx(0.2, 0.1);
    c(1, 0) = cplx(0.3, -0.05);
    w.eps.set({1, -1, 0}, c);
    w.eps.set({-1, 1, 0}, c.adjoint());
    w.real_weights = false;
    const auto back = coefficients_from_samples(sample_weights(w, lat, 8), dual);
    for (const auto& [n, v] : w.eps.entries()) CHECK((back.eps.at(n) - v).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.eps.at({2, 0, 0})).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("weight validation") {
    const Lattice lat = Lattice::cubic(1.0);
    auto rep = validate_weights(MaterialWeights::vacuum(), lat, 64);
    CHECK(rep.ok);
    CHECK(rep.min_eigenvalue == doctest::Approx(1.0));
    CHECK(rep.max_eigenvalue == doctest::Approx(1.0));

    MaterialWeights neg = MaterialWeights::vacuum();
    neg.eps.set({0, 0, 0}, -CMat3::Identity());
    rep = validate_weights(neg, lat, 64);
    CHECK(!rep.ok);
    CHECK(rep.failed_invariant == "positivity");
    CHECK_THROWS_AS(require_valid(rep), InvariantViolation);

    MaterialWeights herm = MaterialWeights::vacuum();
    herm.eps.set({1, 0, 0}, 0.1 * CMat3::Identity());
    herm.eps.set({-1, 0, 0}, 0.2 * CMat3::Identity());
    rep = validate_weights(herm, lat, 64);
    CHECK(!rep.ok);
    CHECK(rep.failed_invariant == "hermiticity");

    // Hermitian at every point but with an imaginary off-diagonal entry.
    MaterialWeights cplxw = MaterialWeights::vacuum();
    CMat3 e0 = CMat3::Identity();
    e0(0, 1) = cplx(0, 0.1);
    e0(1, 0) = cplx(0, -0.1);
    cplxw.eps.set({0, 0, 0}, e0);
    rep = validate_weights(cplxw, lat, 64);
    CHECK(!rep.ok);
    CHECK(rep.failed_invariant == "realness");
    cplxw.real_weights = false;
    CHECK(validate_weights(cplxw, lat, 64).ok);
  }

  TEST_CASE("modulation profiles") {
    const ModulationProfile gauss = GaussianProfile{0.3, Vec3(0.2, -0.1, 0.4), 1.5};
    const ModulationProfile sine = SineProfile{-0.4, Vec3(0.5, 0.2, -0.3)};
    for (const auto& p : {ModulationProfile{ConstantProfile{}}, gauss, sine}) {
      CHECK(evaluate(p, Vec3::Zero()).value == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(evaluate(ConstantProfile{}, Vec3(1, 2, 3)).gradient == Vec3::Zero());
    CHECK(evaluate(gauss, Vec3(0.2, -0.1, 0.4)).gradient.norm() == 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 20; ++i) {
      const Vec3 r(u(rng), u(rng), u(rng));
      CHECK(fd_check(gauss, r) < 1e-8);
      CHECK(fd_check(sine, r) < 1e-8);
      const double t = evaluate(sine, r).value;
      CHECK(t >= 0.6);
      CHECK(t <= 1.4);
    }
    CHECK_THROWS_AS(check_profile(GaussianProfile{1.0, Vec3::Zero(), 1.0}), ConfigError);
    CHECK_THROWS_AS(check_profile(GaussianProfile{0.5, Vec3::Zero(), 0.0}), ConfigError);
    CHECK_THROWS_AS(check_profile(SineProfile{-1.2, Vec3::UnitX()}), ConfigError);
  }

  TEST_CASE("inverse tables act as inverses on low modes as the cutoff grows") {
    // The operator norm of W B - I does not decay for a discontinuous eps;
    // its action on a fixed low-order vector does.
    double prev = std::numeric_limits<double>::infinity();
    for (double c : {1.0, 2.0, 3.0}) {
      const auto s = fixtures::sphere_setup(c);
      const CMat w = assemble_weight_operator(s.weights, s.basis).matrix;
      const auto z = FiberBasis::offset(s.basis.modes().zero_mode());
      const double dev = (w * s.gram.col(z) - CMat::Identity(s.basis.dim(), s.basis.dim()).col(z)).norm();
      CHECK(dev < prev);
      prev = dev;
    }
  }
}
