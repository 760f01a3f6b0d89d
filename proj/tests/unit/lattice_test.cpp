#include <doctest.h>

#include <random>
#include <set>

#include "pce/lattice.hpp"

using namespace pce;

namespace {

double duality_residual(const Lattice& l, const DualLattice& d) {
  return (l.basis.transpose() * d.basis - kTwoPi * Mat3::Identity()).cwiseAbs().maxCoeff() / kTwoPi;
}

// Every n in a box with |sum n_j e*_j| <= radius.
std::set<Index3> enumerate_ball(const DualLattice& d, double radius, int box) {
  std::set<Index3> out;
  for (int a = -box; a <= box; ++a) {
    for (int b = -box; b <= box; ++b) {
      for (int c = -box; c <= box; ++c) {
        if (d.vector({a, b, c}).norm() <= radius * (1 + 1e-12)) out.insert({a, b, c});
      }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("cubic and scaled duals") {
    auto d = dual_basis(Lattice::cubic(1.0));
    CHECK((d.basis - kTwoPi * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    d = dual_basis(Lattice::cubic(2.5));
    CHECK((d.basis - (kTwoPi / 2.5) * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("fcc dual against an independent linear solve") {
    const Lattice fcc = Lattice::from_vectors(Vec3(0, 0.5, 0.5), Vec3(0.5, 0, 0.5), Vec3(0.5, 0.5, 0));
    const DualLattice d = dual_basis(fcc);
    // Solve E^T X = 2 pi I column by column with a full-pivot LU.
    const Mat3 x = fcc.basis.transpose().fullPivLu().solve(kTwoPi * Mat3::Identity());
    CHECK((d.basis - x).cwiseAbs().maxCoeff() < 1e-12 * kTwoPi);
    Mat3 expected;
    expected.col(0) = kTwoPi * Vec3(-1, 1, 1);
    expected.col(1) = kTwoPi * Vec3(1, -1, 1);
    expected.col(2) = kTwoPi * Vec3(1, 1, -1);
    CHECK((d.basis - expected).cwiseAbs().maxCoeff() < 1e-12 * kTwoPi);
    CHECK(duality_residual(fcc, d) < 1e-12);
  }

  TEST_CASE("duality holds for random lattices and round-trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 20; ++i) {
      Mat3 b;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) b(r, c) = u(rng) + (r == c ? 2.0 : 0.0);
      const Lattice l = Lattice::from_vectors(b.col(0), b.col(1), b.col(2));
      const DualLattice d = dual_basis(l);
      CHECK(duality_residual(l, d) < 1e-12);
      CHECK((lattice_of(d).basis - l.basis).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("singular basis is rejected") {
    bool thrown = false;
    try {
      Lattice l;
      l.basis << 1, 2, 3, 0, 1, 1, 1, 3, 4;  // third column = first + second
      dual_basis(l);
    } catch (const NumericalError& e) {
      thrown = e.kind() == NumericalError::Kind::SingularLattice;
      CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
    CHECK(thrown);
  }

  TEST_CASE("cutoff modes match exhaustive enumeration") {
    const DualLattice d = dual_basis(Lattice::cubic(1.0));
    CHECK(cutoff_modes(d, 0.0).size() == 1);
    CHECK(cutoff_modes(d, kTwoPi).size() == 7);
    CHECK(cutoff_modes(d, 3 * kTwoPi).size() == 123);
    CHECK_THROWS_AS(cutoff_modes(d, -1.0), ConfigError);

    const Lattice fcc = Lattice::from_vectors(Vec3(0, 0.5, 0.5), Vec3(0.5, 0, 0.5), Vec3(0.5, 0.5, 0));
    for (const auto& dual : {d, dual_basis(fcc)}) {
      for (double r : {0.5, 1.0, 2.3, 3.0}) {
        const double radius = r * dual.basis.col(0).norm();
        const ModeSet m = cutoff_modes(dual, radius);
        const auto brute = enumerate_ball(dual, radius, 8);
        CHECK(std::set<Index3>(m.indices().begin(), m.indices().end()) == brute);
        CHECK(m.size() == brute.size());
        CHECK(m.index(m.zero_mode()) == Index3{0, 0, 0});
        for (std::size_t i = 0; i < m.size(); ++i) {
          CHECK(m.contains(-m.index(i)));
          CHECK(*m.find(m.index(i)) == i);
          if (i > 0) CHECK(m.vector(i).norm() >= m.vector(i - 1).norm() * (1 - 1e-12));
        }
      }
    }
  }

  TEST_CASE("cutoff modes are nested and deterministic") {
    const DualLattice d = dual_basis(Lattice::cubic(1.0));
    const ModeSet small = cutoff_modes(d, 2 * kTwoPi);
    const ModeSet large = cutoff_modes(d, 3 * kTwoPi);
    for (const auto& n : small.indices()) CHECK(large.contains(n));
    CHECK(cutoff_modes(d, 3 * kTwoPi).indices() == large.indices());
    CHECK(!large.contains({9, 9, 9}));
  }

  TEST_CASE("difference modes contain all differences") {
    const DualLattice d = dual_basis(Lattice::cubic(1.0));
    const ModeSet m = cutoff_modes(d, 1.5 * kTwoPi);
    const ModeSet diff = difference_modes(d, m);
    for (const auto& a : m.indices())
      for (const auto& b : m.indices()) CHECK(diff.contains(a - b));
  }

  TEST_CASE("kpath sampling") {
    const std::vector<Vec3> two{Vec3::Zero(), Vec3(kPi, 0, 0)};
    auto p = kpath(two, 2);
    REQUIRE(p.samples.size() == 3);
    CHECK(p.samples[1] == Vec3(kPi / 2, 0, 0));
    CHECK(p.samples[2] == Vec3(kPi, 0, 0));
    CHECK(kpath(two, 1).samples.size() == 2);

    const std::vector<Vec3> gxm{Vec3::Zero(), Vec3(kPi, 0, 0), Vec3(kPi, kPi, 0)};
    p = kpath(gxm, 10);
    CHECK(p.samples.size() == 21);
    CHECK(p.samples[10] == gxm[1]);
    CHECK(p.samples[20] == gxm[2]);
    for (std::size_t i = 1; i < p.samples.size(); ++i) {
      CHECK((p.samples[i] - p.samples[i - 1]).norm() == doctest::Approx(kPi / 10).epsilon(1e-12));
      CHECK(p.arclength[i] > p.arclength[i - 1]);
    }
    CHECK_THROWS_AS(kpath(std::vector<Vec3>{}, 3), ConfigError);
    CHECK_THROWS_AS(kpath(std::vector<Vec3>{Vec3::Zero()}, 3), ConfigError);
    CHECK_THROWS_AS(kpath(two, 0), ConfigError);
  }

  TEST_CASE("nearest dual vector and zone wrapping") {
    const Lattice fcc = Lattice::from_vectors(Vec3(0, 0.5, 0.5), Vec3(0.5, 0, 0.5), Vec3(0.5, 0.5, 0));
    const DualLattice d = dual_basis(fcc);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 50; ++i) {
      const Vec3 k = d.basis * Vec3(u(rng), u(rng), u(rng));
      // brute-force nearest over a generous box
      double best = 1e300;
      for (int a = -6; a <= 6; ++a)
        for (int b = -6; b <= 6; ++b)
          for (int c = -6; c <= 6; ++c) best = std::min(best, (k - d.vector({a, b, c})).norm());
      CHECK(distance_to_dual_lattice(d, k) == doctest::Approx(best).epsilon(1e-12));
      CHECK(wrap_to_zone(d, k).norm() == doctest::Approx(best).epsilon(1e-12));
    }
    const Vec3 g = d.vector({1, -2, 0});
    CHECK(on_dual_lattice(d, g + Vec3(1e-12, 0, 0)));
    CHECK(snap_to_dual(d, g + Vec3(1e-12, 0, 0)) == g);
    CHECK(!on_dual_lattice(d, g + Vec3(1e-3, 0, 0)));
  }
}
