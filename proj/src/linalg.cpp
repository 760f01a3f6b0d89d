#include "pce/linalg.hpp"

#include <lapacke.h>

#include <string>

namespace pce::linalg {

namespace {
lapack_complex_double* as_lapack(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }
}  // namespace

HermitianEigen hermitian_eig(CMat a, bool with_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  HermitianEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'L', n, as_lapack(a.data()), n, out.values.data());
  if (info != 0) {
    throw NumericalError(NumericalError::Kind::NoConvergence,
                         "zheevd failed with info=" + std::to_string(info));
  }
  if (with_vectors) out.vectors = std::move(a);
  return out;
}

RVec singular_values(CMat a) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  RVec s(std::min(m, n));
  if (s.size() == 0) return s;
  const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, as_lapack(a.data()), m, s.data(), nullptr, 1,
                                         nullptr, 1);
  if (info != 0) {
    throw NumericalError(NumericalError::Kind::NoConvergence, "zgesdd failed with info=" + std::to_string(info));
  }
  return s;
}

double spectral_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

int numerical_rank(const RVec& s, double rel_tol) {
  if (s.size() == 0) return 0;
  const double top = s.maxCoeff();
  if (top <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * top) ++rank;
  }
  return rank;
}

double hermiticity_residual(const CMat& a) {
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / scale;
}

}  // namespace pce::linalg
