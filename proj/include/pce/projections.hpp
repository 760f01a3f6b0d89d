#pragma once

#include <vector>

#include "pce/planewave.hpp"

namespace pce {

enum class GradientKind { Plain, Regularized };

/// Spanning set of the gradient fields G_per(k) or G_reg(k): for each
/// included mode the columns (xi, 0) and (0, xi) with xi = g + k, normalized.
struct SubspaceBasis {
  Vec3 k = Vec3::Zero();
  GradientKind kind = GradientKind::Plain;
  CMat columns;
};

/// Plain: every mode with g + k != 0. Regularized: every mode except g = 0.
/// Throws NumericalError(RankDeficient) if a regularized column vanishes,
/// which happens only for k in the dual lattice away from 0.
SubspaceBasis gradient_basis(const Vec3& k, const FiberBasis& basis, GradientKind kind);

/// B-orthogonal projector; satisfies P P = P and B P = P^dagger B.
struct Projector {
  CMat p;

  Projector complement() const;
  double idempotency_residual() const;
  double selfadjointness_residual(const CMat& gram) const;
};

/// P = S (S^dagger B S)^-1 S^dagger B.
Projector weighted_projector(const SubspaceBasis& s, const CMat& gram);

/// Operator norm in the B-weighted product, ||B^1/2 X B^-1/2||_2.
double weighted_norm(const CMat& x, const CMat& gram);

inline constexpr double kRankTol = 1e-8;

struct RankReport {
  int rank = 0;
  RVec singular_values;
};

/// Rank of P_reg(k) applied to the constant fields (k beta^E, k beta^H).
RankReport intersection_dimension(const Vec3& k, const FiberBasis& basis, const CMat& gram);

struct DiscontinuityRow {
  double t = 0.0;
  double norm_plain = 0.0;  // ||Q_per(t d) - Q_per(0)||
  double norm_reg = 0.0;    // ||Q_reg(t d) - Q_reg(0)||
};

/// Norms (B-weighted) of projector jumps along k = t * direction.
std::vector<DiscontinuityRow> discontinuity_probe(const Vec3& direction, const std::vector<double>& ts,
                                                  const FiberBasis& basis, const CMat& gram);

}  // namespace pce
