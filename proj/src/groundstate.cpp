#include "pce/groundstate.hpp"

#include <algorithm>
#include <sstream>

#include "pce/projections.hpp"
#include "pce/spectrum.hpp"

namespace pce {

GroundStateBasis ground_space(const FiberBasis& basis, const CMat& gram) {
  const Projector p_reg =
      weighted_projector(gradient_basis(Vec3::Zero(), basis, GradientKind::Regularized), gram).complement();
  const auto zero = FiberBasis::offset(basis.modes().zero_mode());

  CMat raw = CMat::Zero(basis.dim(), 6);
  for (int j = 0; j < 6; ++j) raw.col(j) = p_reg.p.col(zero + j);  // P_reg(0) applied to unit constants

  GroundStateBasis gs;
  gs.psi = CMat::Zero(basis.dim(), 6);
  for (int j = 0; j < 6; ++j) {
    CVec w = raw.col(j);
    const double start = std::sqrt(std::abs(w.dot(gram * w)));
    for (int pass = 0; pass < 2; ++pass) {
      const CVec bw = gram * w;
      for (int l = 0; l < j; ++l) w -= gs.psi.col(l) * gs.psi.col(l).dot(bw);
    }
    const double norm = std::sqrt(std::abs(w.dot(gram * w)));
    if (!(norm > 1e-8 * start) || start == 0.0) {
      std::ostringstream msg;
      msg << "projected constant fields have rank < 6 (vector " << j << " collapsed)";
      throw NumericalError(NumericalError::Kind::RankDeficient, msg.str());
    }
    gs.psi.col(j) = w / norm;
  }
  gs.lambda = gs.psi.middleRows<6>(zero);
  return gs;
}

PerturbationMatrices perturbation_matrices(const GroundStateBasis& gs, const Vec3& k) {
  PerturbationMatrices pm;
  pm.k = k;
  for (int l = 0; l < 6; ++l) {
    const CVec3 le = gs.lambda.col(l).head<3>().conjugate();
    const CVec3 lh = gs.lambda.col(l).tail<3>().conjugate();
    for (int j = 0; j < 6; ++j) {
      const CVec3 je = gs.lambda.col(j).head<3>();
      const CVec3 jh = gs.lambda.col(j).tail<3>();
      const CVec3 v = le.cross(jh) - lh.cross(je);
      pm.ka(l, j) = k(0) * v(0) + k(1) * v(1) + k(2) * v(2);
    }
  }
  pm.kb = pm.ka.topRightCorner<3, 3>();
  return pm;
}

CMat6 full_expectation_matrix(const GroundStateBasis& gs, const Vec3& k, const FiberBasis& basis) {
  const CMat delta = assemble_rot(k, basis) - assemble_rot(Vec3::Zero(), basis);
  return gs.psi.adjoint() * delta * gs.psi;
}

std::array<double, 4> ground_slopes(const GroundStateBasis& gs, const Vec3& direction) {
  const CMat3 kb = perturbation_matrices(gs, direction.normalized()).kb;
  Eigen::JacobiSVD<CMat3> svd(kb);
  const auto& s = svd.singularValues();  // descending
  return {-s(0), -s(1), s(1), s(0)};
}

std::array<double, 4> ground_slopes_from_eigenvalues(const GroundStateBasis& gs, const Vec3& direction) {
  const CMat6 ka = perturbation_matrices(gs, direction.normalized()).ka;
  Eigen::SelfAdjointEigenSolver<CMat6> es(CMat6(0.5 * (ka + ka.adjoint())), Eigen::EigenvaluesOnly);
  const auto& e = es.eigenvalues();  // ascending; the middle two are the zero pair
  return {e(0), e(1), e(4), e(5)};
}

double SlopeRow::max_rel_err() const { return *std::max_element(rel_err.begin(), rel_err.end()); }

SlopeReport slope_validation(const GroundStateBasis& gs, const FiberBasis& basis, const CMat& gram,
                             const Vec3& direction, const std::vector<double>& ts) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0)) throw ConfigError("slope validation needs positive t values");
    if (i > 0 && !(ts[i] < ts[i - 1])) throw ConfigError("slope validation t values must be strictly decreasing");
  }
  SlopeReport rep;
  rep.direction = direction.normalized();
  rep.slopes = ground_slopes(gs, rep.direction);
  const double c_max = rep.slopes[3];
  const double c_min = rep.slopes[2];

  for (double t : ts) {
    const auto spec = solve_fiber(make_problem(t * rep.direction, basis, gram), SolveOptions{1e-8, false});
    std::vector<double> cand;
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
      const double a = std::abs(spec.eigenvalues(i));
      if (a > 0.5 * c_min * t && a < 2.0 * c_max * t) cand.push_back(spec.eigenvalues(i));
    }
    if (cand.size() != 4) {
      std::ostringstream msg;
      msg << "expected 4 ground-state eigenvalues near |omega| ~ c t at t=" << t << ", found " << cand.size();
      throw NumericalError(NumericalError::Kind::Isolation, msg.str());
    }
    std::sort(cand.begin(), cand.end());
    SlopeRow row;
    row.t = t;
    for (int i = 0; i < 4; ++i) {
      row.omega[i] = cand[static_cast<std::size_t>(i)];
      row.predicted[i] = t * rep.slopes[i];
      row.rel_err[i] = std::abs(row.omega[i] - row.predicted[i]) / std::abs(row.predicted[i]);
    }
    rep.rows.push_back(row);
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double prev = rep.rows[i - 1].max_rel_err();
    const double cur = rep.rows[i].max_rel_err();
    if (!(cur < prev || cur <= kSlopeNoiseFloor)) rep.errors_decrease = false;
  }
  return rep;
}

}  // namespace pce
