#pragma once

#include <random>

#include "pce/planewave.hpp"

namespace fixtures {

using namespace pce;

inline double sphere_radius(double fill = 0.25) { return std::cbrt(3.0 * fill / (4.0 * kPi)); }

/// eps = 13 sphere at fill 0.25 centered in the cubic cell, mu = 1.
inline std::vector<GeometryPrimitive> sphere_crystal(double eps_in = 13.0) {
  return {GeometryPrimitive::background(CMat3::Identity(), CMat3::Identity()),
          GeometryPrimitive::sphere(Vec3(0.5, 0.5, 0.5), sphere_radius(), eps_in * CMat3::Identity(),
                                    CMat3::Identity())};
}

struct Setup {
  Lattice lattice = Lattice::cubic(1.0);
  DualLattice dual = dual_basis(lattice);
  FiberBasis basis;
  MaterialWeights weights;
  CMat gram;

  Setup(double cutoff_units, MaterialWeights w)
      : basis(FiberBasis::with_cutoff(dual, cutoff_units * kTwoPi)), weights(std::move(w)),
        gram(assemble_gram(weights, basis).matrix) {}
};

inline Setup sphere_setup(double cutoff_units) {
  const Lattice lat = Lattice::cubic(1.0);
  const DualLattice dual = dual_basis(lat);
  const FiberBasis b = FiberBasis::with_cutoff(dual, cutoff_units * kTwoPi);
  return Setup(cutoff_units, coefficients_from_primitives(sphere_crystal(), lat, difference_modes(dual, b.modes())));
}

inline Setup vacuum_setup(double cutoff_units) { return Setup(cutoff_units, MaterialWeights::vacuum()); }

inline Vec3 random_k(std::mt19937_64& rng, const DualLattice& dual) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  return dual.basis * Vec3(u(rng), u(rng), u(rng));
}

}  // namespace fixtures
