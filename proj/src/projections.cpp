#include "pce/projections.hpp"

#include <sstream>

#include "pce/linalg.hpp"

namespace pce {

SubspaceBasis gradient_basis(const Vec3& k, const FiberBasis& basis, GradientKind kind) {
  const auto& modes = basis.modes();
  const std::size_t zero = modes.zero_mode();
  const double tiny = 1e-12 * std::max(1.0, basis.dual().basis.col(0).norm());
  std::vector<std::pair<std::size_t, Vec3>> included;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const Vec3 xi = modes.vector(m) + k;
    if (kind == GradientKind::Regularized) {
      if (m == zero) continue;
      if (xi.norm() <= tiny) {
        std::ostringstream msg;
        msg << "regularized gradient column vanishes at mode (" << modes.index(m)[0] << "," << modes.index(m)[1] << ","
            << modes.index(m)[2] << "); wrap k into the zone first";
        throw NumericalError(NumericalError::Kind::RankDeficient, msg.str());
      }
    } else if (xi.norm() <= tiny) {
      continue;
    }
    included.emplace_back(m, xi.normalized());
  }
  SubspaceBasis s;
  s.k = k;
  s.kind = kind;
  s.columns = CMat::Zero(basis.dim(), static_cast<Eigen::Index>(2 * included.size()));
  Eigen::Index col = 0;
  for (const auto& [m, dir] : included) {
    s.columns.block<3, 1>(FiberBasis::offset(m), col++) = dir.cast<cplx>();
    s.columns.block<3, 1>(FiberBasis::offset(m) + 3, col++) = dir.cast<cplx>();
  }
  return s;
}

Projector Projector::complement() const { return Projector{CMat::Identity(p.rows(), p.cols()) - p}; }

double Projector::idempotency_residual() const { return (p * p - p).cwiseAbs().maxCoeff(); }

double Projector::selfadjointness_residual(const CMat& gram) const {
  return (gram * p - p.adjoint() * gram).cwiseAbs().maxCoeff();
}

Projector weighted_projector(const SubspaceBasis& s, const CMat& gram) {
  const CMat bs = gram * s.columns;
  if (s.columns.cols() == 0) return Projector{CMat::Zero(gram.rows(), gram.cols())};
  const CMat small = s.columns.adjoint() * bs;
  Eigen::LLT<CMat> llt(small);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(NumericalError::Kind::RankDeficient, "S^dagger B S is singular; columns are dependent");
  }
  // (S^dagger B S)^-1 S^dagger B
  const CMat coeff = llt.solve(CMat(bs.adjoint()));
  return Projector{s.columns * coeff};
}

double weighted_norm(const CMat& x, const CMat& gram) {
  Eigen::LLT<CMat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(NumericalError::Kind::IndefiniteGram, "Gram matrix is not positive definite");
  }
  // With B = L L^H, ||X||_B = ||L^H X L^-H||_2.
  const CMat lhx = llt.matrixU() * x;
  const CMat y = llt.matrixL().solve(CMat(lhx.adjoint())).adjoint();
  return linalg::spectral_norm(y);
}

RankReport intersection_dimension(const Vec3& k, const FiberBasis& basis, const CMat& gram) {
  const Projector q = weighted_projector(gradient_basis(k, basis, GradientKind::Regularized), gram);
  const Projector p = q.complement();
  const auto zero = FiberBasis::offset(basis.modes().zero_mode());
  CMat constants = CMat::Zero(basis.dim(), 2);
  constants.block<3, 1>(zero, 0) = k.cast<cplx>();
  constants.block<3, 1>(zero + 3, 1) = k.cast<cplx>();
  RankReport rep;
  rep.singular_values = linalg::singular_values(p.p * constants);
  // k = 0 gives exactly zero columns and hence rank 0.
  rep.rank = linalg::numerical_rank(rep.singular_values, kRankTol);
  return rep;
}

std::vector<DiscontinuityRow> discontinuity_probe(const Vec3& direction, const std::vector<double>& ts,
                                                  const FiberBasis& basis, const CMat& gram) {
  const Vec3 d = direction.normalized();
  const CMat q_plain0 = weighted_projector(gradient_basis(Vec3::Zero(), basis, GradientKind::Plain), gram).p;
  const CMat q_reg0 = weighted_projector(gradient_basis(Vec3::Zero(), basis, GradientKind::Regularized), gram).p;
  std::vector<DiscontinuityRow> rows;
  for (double t : ts) {
    const Vec3 k = t * d;
    DiscontinuityRow row;
    row.t = t;
    const CMat qp = weighted_projector(gradient_basis(k, basis, GradientKind::Plain), gram).p;
    const CMat qr = weighted_projector(gradient_basis(k, basis, GradientKind::Regularized), gram).p;
    row.norm_plain = weighted_norm(qp - q_plain0, gram);
    row.norm_reg = weighted_norm(qr - q_reg0, gram);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pce
