#pragma once

#include <span>

#include "pce/lattice.hpp"
#include "pce/material.hpp"

namespace pce {

/// Truncated plane-wave basis {exp(i g.y) (x) C^6 : g in modes}. Each mode
/// owns a contiguous 6-block ordered (E1, E2, E3, H1, H2, H3).
class FiberBasis {
 public:
  FiberBasis(DualLattice dual, ModeSet modes) : dual_(std::move(dual)), modes_(std::move(modes)) {}

  static FiberBasis with_cutoff(const DualLattice& dual, double radius) {
    return FiberBasis(dual, cutoff_modes(dual, radius));
  }

  const DualLattice& dual() const { return dual_; }
  const ModeSet& modes() const { return modes_; }
  std::size_t mode_count() const { return modes_.size(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(6 * modes_.size()); }
  static Eigen::Index offset(std::size_t mode) { return static_cast<Eigen::Index>(6 * mode); }

 private:
  DualLattice dual_;
  ModeSet modes_;
};

/// Generalized Hermitian pair A u = omega B u for one crystal momentum.
struct FiberProblem {
  CMat a;  // Rot(k)
  CMat b;  // weighted Gram matrix
  Vec3 k = Vec3::Zero();
};

/// 6x6 block [[0, -xi^x], [xi^x, 0]].
CMat6 rot_block(const Vec3& xi);

/// Rot(k) on the basis: block diagonal with rot_block(g + k) per mode.
CMat assemble_rot(const Vec3& k, const FiberBasis& basis);

/// The constant derivative dRot/dk_j, i.e. rot_block(e_j) on every mode.
CMat rot_derivative(int j, const FiberBasis& basis);

struct Assembled {
  CMat matrix;
  std::size_t missing_coefficients = 0;  // differences absent from the tables (taken as 0)
};

/// Block-Toeplitz matrix with 6x6 blocks diag(e_hat(g - g'), h_hat(g - g')).
Assembled assemble_multiplier(const CoefficientTable& e_slot, const CoefficientTable& h_slot,
                              const FiberBasis& basis);

/// Gram matrix of the (eps, mu)-weighted product. Throws
/// NumericalError(IndefiniteGram) when B is not positive definite.
Assembled assemble_gram(const MaterialWeights& w, const FiberBasis& basis);

/// Multiplier of the pointwise inverse weights, W = diag(eps^-1, mu^-1).
Assembled assemble_weight_operator(const MaterialWeights& w, const FiberBasis& basis);

FiberProblem make_problem(const Vec3& k, const FiberBasis& basis, const CMat& gram);

template <class T>
struct Shifted {
  T value;
  std::size_t dropped = 0;  // modes whose image left the mode set
};

/// Multiplication by exp(+i g.y): the coefficient at mode g' moves to g' + g.
Shifted<CVec> translate(const CVec& x, const Index3& shift, const FiberBasis& basis);

/// exp(+i g.y) X exp(-i g.y): entry blocks (g1, g2) move to (g1 + g, g2 + g).
Shifted<CMat> translate_conjugate(const CMat& x, const Index3& shift, const FiberBasis& basis);

/// Modes g' whose preimage g' - shift is in the mode set.
std::vector<std::size_t> interior_modes(const Index3& shift, const FiberBasis& basis);

/// Max entrywise |x - y| restricted to blocks (m1, m2) with m1, m2 in `modes`.
double block_mismatch(const CMat& x, const CMat& y, std::span<const std::size_t> modes);

}  // namespace pce
