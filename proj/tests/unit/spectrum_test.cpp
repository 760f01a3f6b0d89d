#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "pce/spectrum.hpp"

using namespace pce;

TEST_SUITE("spectrum") {
  TEST_CASE("free spectrum matches the analytic oracle") {
    const auto s = fixtures::vacuum_setup(2.0);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5; ++i) {
      const Vec3 k = fixtures::random_k(rng, s.dual);
      const auto sp = solve_fiber(make_problem(k, s.basis, s.gram));
      const auto exact = analytic_free_spectrum(k, s.basis.modes());
      std::vector<double> all(sp.eigenvalues.data(), sp.eigenvalues.data() + sp.eigenvalues.size());
      CHECK(multiset_deviation(all, exact, 1.0) < 1e-12);
      CHECK(sp.zero_count == kernel_dimension(k, s.basis.modes()));
      CHECK(sp.zero_count == 2 * s.basis.mode_count());
    }
    const auto sp0 = solve_fiber(make_problem(Vec3::Zero(), s.basis, s.gram));
    CHECK(sp0.zero_count == 2 * s.basis.mode_count() + 4);
    CHECK(kernel_dimension(Vec3::Zero(), s.basis.modes()) == 2 * s.basis.mode_count() + 4);
  }

  TEST_CASE("constant media scale the free spectrum") {
    const auto vac = fixtures::vacuum_setup(2.0);
    const auto med = fixtures::Setup(2.0, MaterialWeights::constant(4.0 * CMat3::Identity(), CMat3::Identity()));
    const Vec3 k(0.4, 1.3, -0.2);
    const auto a = solve_fiber(make_problem(k, vac.basis, vac.gram));
    const auto b = solve_fiber(make_problem(k, med.basis, med.gram));
    const auto na = a.nonzero(), nb = b.nonzero();
    REQUIRE(na.size() == nb.size());
    for (std::size_t i = 0; i < na.size(); ++i) CHECK(std::abs(nb[i] - na[i] / 2) <= 1e-12 * std::abs(na[i]));
  }

  TEST_CASE("generalized 6x6 problem against a direct solver") {
    const DualLattice d = dual_basis(Lattice::cubic(1.0));
    const FiberBasis b = FiberBasis::with_cutoff(d, 0.0);
    CMat3 eps;
    eps << 3.0, cplx(0.2, 0.1), 0.1, cplx(0.2, -0.1), 2.0, 0.0, 0.1, 0.0, 4.0;
    const CMat3 mu = CMat3::Identity() * 1.5;
    const auto w = MaterialWeights::constant(eps, mu);
    const CMat gram = assemble_gram(w, b).matrix;
    const Vec3 k(0.3, -0.8, 0.5);
    const auto sp = solve_fiber(make_problem(k, b, gram));
    Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ref(assemble_rot(k, b), gram);
    CHECK((sp.eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("eigenvectors are B-orthonormal and satisfy the pencil") {
    const auto s = fixtures::sphere_setup(1.5);
    const Vec3 k(0.9, 0.2, -0.4);
    const FiberProblem p = make_problem(k, s.basis, s.gram);
    const auto sp = solve_fiber(p);
    const CMat& v = sp.eigenvectors;
    const CMat ortho = v.adjoint() * s.gram * v - CMat::Identity(v.cols(), v.cols());
    CHECK(ortho.cwiseAbs().maxCoeff() < 1e-10);
    const CMat res = p.a * v - s.gram * v * sp.eigenvalues.cast<cplx>().asDiagonal();
    CHECK(res.cwiseAbs().maxCoeff() < 1e-10 * sp.scale);
  }

  TEST_CASE("parallel and serial solves agree bit for bit") {
    const auto s = fixtures::sphere_setup(1.5);
    std::mt19937_64 rng(4);
    std::vector<Vec3> ks;
    for (int i = 0; i < 7; ++i) ks.push_back(fixtures::random_k(rng, s.dual));
    const auto serial = solve_many(ks, s.basis, s.gram, SolveOptions{1e-8, false}, 1);
    const auto par = solve_many(ks, s.basis, s.gram, SolveOptions{1e-8, false}, 3);
    for (std::size_t i = 0; i < ks.size(); ++i) CHECK(serial[i].eigenvalues == par[i].eigenvalues);
  }

  TEST_CASE("particle-hole symmetry for real weights") {
    const auto s = fixtures::sphere_setup(1.5);
    CHECK(ph_symmetry_check(s.weights, Vec3(0.3, 1.0, -0.7), s.basis, s.gram) < 1e-10);
    MaterialWeights c = s.weights;
    c.real_weights = false;
    try {
      ph_symmetry_check(c, Vec3(0.3, 1.0, -0.7), s.basis, s.gram);
      FAIL("expected refusal");
    } catch (const InvariantViolation& e) {
      CHECK(e.invariant() == "realness");
    }
  }

  TEST_CASE("band labels") {
    const auto s = fixtures::vacuum_setup(1.0);
    const std::vector<Vec3> verts{Vec3::Zero(), Vec3(kPi, 0, 0), Vec3(kPi, kPi, 0)};
    const KPath path = kpath(verts, 10);
    const auto spectra = solve_many(path.samples, s.basis, s.gram, SolveOptions{1e-8, false});
    const auto bands = label_bands(spectra, s.basis, path.arclength);
    CHECK(bands.k.size() == 21);
    CHECK(bands.on_dual_lattice[0]);
    CHECK(!bands.on_dual_lattice[5]);
    // At k = 0 the ground-state bands sit at zero, split evenly.
    CHECK(bands.at(0, 1) == 0.0);
    CHECK(bands.at(0, 2) == 0.0);
    CHECK(bands.at(0, -1) == 0.0);
    CHECK(bands.at(0, 3) == doctest::Approx(kTwoPi));
    for (std::size_t i = 1; i < 11; ++i) {
      CHECK(bands.at(i, 1) == doctest::Approx(path.samples[i].norm()).epsilon(1e-12));
      CHECK(bands.at(i, -2) == doctest::Approx(-path.samples[i].norm()).epsilon(1e-12));
    }
    CHECK(BandStructure::is_ground_state(-2));
    CHECK(!BandStructure::is_ground_state(3));
    for (std::size_t i = 0; i < bands.k.size(); ++i)
      for (int n = 1; n < bands.n_max; ++n) CHECK(bands.at(i, n) <= bands.at(i, n + 1));
  }

  TEST_CASE("multiset deviation") {
    const std::vector<double> a{-2, 1, 3}, b{-2, 1, 3.3};
    CHECK(multiset_deviation(a, a) == 0.0);
    CHECK(multiset_deviation(a, b) == doctest::Approx(0.3 / 3.3));
  }
}
