#include "pce/planewave.hpp"

#include <sstream>

namespace pce {

CMat6 rot_block(const Vec3& xi) {
  const Mat3 x = cross_matrix(xi);
  CMat6 b = CMat6::Zero();
  b.topRightCorner<3, 3>() = (-x).cast<cplx>();
  b.bottomLeftCorner<3, 3>() = x.cast<cplx>();
  return b;
}

CMat assemble_rot(const Vec3& k, const FiberBasis& basis) {
  CMat a = CMat::Zero(basis.dim(), basis.dim());
  for (std::size_t m = 0; m < basis.mode_count(); ++m) {
    a.block<6, 6>(FiberBasis::offset(m), FiberBasis::offset(m)) = rot_block(basis.modes().vector(m) + k);
  }
  return a;
}

CMat rot_derivative(int j, const FiberBasis& basis) {
  const CMat6 block = rot_block(Vec3::Unit(j));
  CMat a = CMat::Zero(basis.dim(), basis.dim());
  for (std::size_t m = 0; m < basis.mode_count(); ++m) {
    a.block<6, 6>(FiberBasis::offset(m), FiberBasis::offset(m)) = block;
  }
  return a;
}

Assembled assemble_multiplier(const CoefficientTable& e_slot, const CoefficientTable& h_slot,
                              const FiberBasis& basis) {
  Assembled out;
  out.matrix = CMat::Zero(basis.dim(), basis.dim());
  const auto& modes = basis.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const Index3 d = modes.index(i) - modes.index(j);
      const CMat3* e = e_slot.find(d);
      const CMat3* h = h_slot.find(d);
      if (!e) ++out.missing_coefficients;
      if (!h) ++out.missing_coefficients;
      const auto r = FiberBasis::offset(i);
      const auto c = FiberBasis::offset(j);
      if (e) out.matrix.block<3, 3>(r, c) = *e;
      if (h) out.matrix.block<3, 3>(r + 3, c + 3) = *h;
    }
  }
  return out;
}

Assembled assemble_gram(const MaterialWeights& w, const FiberBasis& basis) {
  Assembled out = assemble_multiplier(w.eps, w.mu, basis);
  Eigen::LLT<CMat> llt(out.matrix);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "Gram matrix of dimension " << out.matrix.rows()
        << " is not positive definite; the weights violate positivity at this truncation";
    throw NumericalError(NumericalError::Kind::IndefiniteGram, msg.str());
  }
  return out;
}

Assembled assemble_weight_operator(const MaterialWeights& w, const FiberBasis& basis) {
  return assemble_multiplier(w.inv_eps, w.inv_mu, basis);
}

FiberProblem make_problem(const Vec3& k, const FiberBasis& basis, const CMat& gram) {
  return FiberProblem{assemble_rot(k, basis), gram, k};
}

namespace {

// target[m] = position of mode(m) + shift, or -1 when it leaves the set.
std::vector<std::ptrdiff_t> shift_map(const Index3& shift, const FiberBasis& basis, std::size_t& dropped) {
  const auto& modes = basis.modes();
  std::vector<std::ptrdiff_t> target(modes.size(), -1);
  dropped = 0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (auto t = modes.find(modes.index(m) + shift)) {
      target[m] = static_cast<std::ptrdiff_t>(*t);
    } else {
      ++dropped;
    }
  }
  return target;
}

}  // namespace

Shifted<CVec> translate(const CVec& x, const Index3& shift, const FiberBasis& basis) {
  Shifted<CVec> out;
  const auto target = shift_map(shift, basis, out.dropped);
  out.value = CVec::Zero(x.size());
  for (std::size_t m = 0; m < target.size(); ++m) {
    if (target[m] < 0) continue;
    out.value.segment<6>(FiberBasis::offset(static_cast<std::size_t>(target[m]))) = x.segment<6>(FiberBasis::offset(m));
  }
  return out;
}

Shifted<CMat> translate_conjugate(const CMat& x, const Index3& shift, const FiberBasis& basis) {
  Shifted<CMat> out;
  const auto target = shift_map(shift, basis, out.dropped);
  out.value = CMat::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] < 0) continue;
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (target[j] < 0) continue;
      out.value.block<6, 6>(FiberBasis::offset(static_cast<std::size_t>(target[i])),
                            FiberBasis::offset(static_cast<std::size_t>(target[j]))) =
          x.block<6, 6>(FiberBasis::offset(i), FiberBasis::offset(j));
    }
  }
  return out;
}

std::vector<std::size_t> interior_modes(const Index3& shift, const FiberBasis& basis) {
  std::vector<std::size_t> out;
  const auto& modes = basis.modes();
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (modes.contains(modes.index(m) - shift)) out.push_back(m);
  }
  return out;
}

double block_mismatch(const CMat& x, const CMat& y, std::span<const std::size_t> modes) {
  double r = 0.0;
  for (std::size_t i : modes) {
    for (std::size_t j : modes) {
      const auto bx = x.block<6, 6>(FiberBasis::offset(i), FiberBasis::offset(j));
      const auto by = y.block<6, 6>(FiberBasis::offset(i), FiberBasis::offset(j));
      r = std::max(r, (bx - by).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

}  // namespace pce
