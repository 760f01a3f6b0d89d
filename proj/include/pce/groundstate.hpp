#pragma once

#include <array>
#include <vector>

#include "pce/planewave.hpp"

namespace pce {

/// Six B-orthonormal zero modes at k = 0 spanning ker Rot(0) cap J_reg(0),
/// obtained from the constant fields by P_reg(0) and ordered Gram-Schmidt
/// (three E constants first, then three H constants).
struct GroundStateBasis {
  CMat psi;      // N x 6
  CMat6 lambda;  // column j is a_(j), the g = 0 block of psi.col(j)
};

GroundStateBasis ground_space(const FiberBasis& basis, const CMat& gram);

/// k.A restricted to the ground space, from the zeroth coefficients alone:
/// (k.A)_{lj} = k . (conj(a_l^E) x a_j^H - conj(a_l^H) x a_j^E).
struct PerturbationMatrices {
  Vec3 k = Vec3::Zero();
  CMat6 ka;
  CMat3 kb;  // upper-right block, rows E, columns H
};

PerturbationMatrices perturbation_matrices(const GroundStateBasis& gs, const Vec3& k);

/// The same matrix as <Psi_l, (Rot(k) - Rot(0)) Psi_j> summed over every mode.
CMat6 full_expectation_matrix(const GroundStateBasis& gs, const Vec3& k, const FiberBasis& basis);

/// Signed slopes {-c1, -c2, c2, c1} for a unit direction, ascending, from the
/// singular values of k.B.
std::array<double, 4> ground_slopes(const GroundStateBasis& gs, const Vec3& direction);

/// Same slopes from the nonzero eigenvalues of k.A.
std::array<double, 4> ground_slopes_from_eigenvalues(const GroundStateBasis& gs, const Vec3& direction);

struct SlopeRow {
  double t = 0.0;
  std::array<double, 4> omega{};      // the four ground-state eigenvalues at k = t d
  std::array<double, 4> predicted{};  // t * slopes
  std::array<double, 4> rel_err{};
  double max_rel_err() const;
};

struct SlopeReport {
  Vec3 direction = Vec3::UnitX();
  std::array<double, 4> slopes{};
  std::vector<SlopeRow> rows;
  bool errors_decrease = true;
};

/// Errors below this are treated as exact when checking the decreasing trend.
inline constexpr double kSlopeNoiseFloor = 1e-10;

/// Compares the four eigenvalues in the annulus c_min t / 2 < |omega| < 2 c_max t
/// with t * slopes for each t (absolute |k|). Throws NumericalError(Isolation)
/// when the annulus does not hold exactly four eigenvalues.
SlopeReport slope_validation(const GroundStateBasis& gs, const FiberBasis& basis, const CMat& gram,
                             const Vec3& direction, const std::vector<double>& ts);

}  // namespace pce
