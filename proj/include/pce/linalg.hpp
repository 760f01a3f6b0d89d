#pragma once

#include "pce/common.hpp"

namespace pce::linalg {

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // columns, empty when values only were requested
};

/// Dense Hermitian eigensolve (LAPACK zheevd). Only the lower triangle of `a` is read.
HermitianEigen hermitian_eig(CMat a, bool with_vectors);

/// Singular values in descending order (LAPACK zgesdd).
RVec singular_values(CMat a);

/// Largest singular value.
double spectral_norm(const CMat& a);

/// Numerical rank: count of singular values above rel_tol * largest.
int numerical_rank(const RVec& singular_values, double rel_tol);

double hermiticity_residual(const CMat& a);

}  // namespace pce::linalg
