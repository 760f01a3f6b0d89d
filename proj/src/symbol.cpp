#include "pce/symbol.hpp"

#include <cmath>
#include <stdexcept>

namespace pce {

namespace {

// w times the block diagonal matrix whose 6x6 block on mode m is block(m).
template <class F>
CMat times_block_diagonal(const CMat& w, const FiberBasis& basis, F block) {
  CMat out(w.rows(), w.cols());
  for (std::size_t m = 0; m < basis.mode_count(); ++m) {
    const auto o = FiberBasis::offset(m);
    out.middleCols<6>(o).noalias() = w.middleCols<6>(o) * block(m);
  }
  return out;
}

CMat times_repeated(const CMat& w, const CMat6& b, const FiberBasis& basis) {
  return times_block_diagonal(w, basis, [&](std::size_t) { return b; });
}

// Left multiplication by diag(a I_E, b I_H) on every mode.
CMat scale_rows(const CMat& x, double a, double b) {
  CMat out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) *= (i % 6 < 3) ? a : b;
  return out;
}

CMat6 off_diagonal(const CMat3& upper, const CMat3& lower) {
  CMat6 b = CMat6::Zero();
  b.topRightCorner<3, 3>() = upper;
  b.bottomLeftCorner<3, 3>() = lower;
  return b;
}

CMat3 cross3(const Vec3& v) { return cross_matrix(v).cast<cplx>(); }

bool empty(const CMat& m) { return m.size() == 0; }

bool exactly_diagonal(const CMat& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r != c && m(r, c) != cplx(0.0)) return false;
    }
  }
  return true;
}

// Product where an empty factor is an exact zero. Scaling matrices are
// diagonal, so those products reduce to row or column scaling.
CMat mul(const CMat& a, const CMat& b) {
  if (empty(a) || empty(b)) return CMat();
  if (exactly_diagonal(a)) return a.diagonal().asDiagonal() * b;
  if (exactly_diagonal(b)) return a * b.diagonal().asDiagonal();
  return a * b;
}

void accumulate(CMat& acc, const CMat& term, cplx scale = 1.0) {
  if (empty(term)) return;
  if (empty(acc)) {
    acc = scale * term;
  } else {
    acc += scale * term;
  }
}

CMat dense(const CMat& m, Eigen::Index n) { return empty(m) ? CMat(CMat::Zero(n, n)) : m; }

}  // namespace

SymbolContext::SymbolContext(const MaterialWeights& weights, const ModulationPair& m, const FiberBasis& b)
    : basis(&b), w(assemble_weight_operator(weights, b).matrix), modulation(m) {
  check_profile(m.eps);
  check_profile(m.mu);
}

CMat SymbolContext::mper(const Vec3& k) const {
  return times_block_diagonal(w, *basis, [&](std::size_t m) { return rot_block(basis->modes().vector(m) + k); });
}

SymbolMatrix eval_symbol_physical(const SymbolPoint& p, const SymbolContext& ctx) {
  if (p.lambda < 0.0) throw ConfigError("symbol point needs lambda >= 0");
  const ModulationValue v = modulation_eval(ctx.modulation, p.r);
  SymbolMatrix s;
  s.lambda = p.lambda;
  s.m0 = scale_rows(ctx.mper(p.k), v.tau_eps * v.tau_eps, v.tau_mu * v.tau_mu);
  const CMat6 b = off_diagonal(-kI * v.tau_eps * cross3(v.grad_eps), kI * v.tau_mu * cross3(v.grad_mu));
  s.m1 = times_repeated(ctx.w, b, *ctx.basis);
  return s;
}

SymbolMatrix eval_symbol_rescaled(const SymbolPoint& p, const SymbolContext& ctx) {
  if (p.lambda < 0.0) throw ConfigError("symbol point needs lambda >= 0");
  const ModulationValue v = modulation_eval(ctx.modulation, p.r);
  const double tau = v.tau_eps * v.tau_mu;
  if (!(v.tau_eps > 0.0 && v.tau_mu > 0.0)) throw ConfigError("modulation must stay positive");
  const Vec3 l = v.grad_eps / v.tau_eps - v.grad_mu / v.tau_mu;
  SymbolMatrix s;
  s.lambda = p.lambda;
  s.m0 = tau * ctx.mper(p.k);
  const CMat3 c = 0.5 * kI * cross3(l);
  s.m1 = -tau * times_repeated(ctx.w, off_diagonal(c, c), *ctx.basis);
  return s;
}

bool SymbolJet::k_independent() const {
  for (int j = 0; j < 3; ++j) {
    if (!empty(dk[j])) return false;
    for (int l = 0; l < 3; ++l) {
      if (!empty(drk[j][l])) return false;
    }
  }
  return k_affine();
}

bool SymbolJet::k_affine() const {
  for (const auto& row : dkk) {
    for (const auto& m : row) {
      if (!empty(m)) return false;
    }
  }
  return true;
}

SymbolJet scaling_jet(const ScalarJet& tau_eps, const ScalarJet& tau_mu, int power, const FiberBasis& basis) {
  // tau^q with q = -power: derivative q tau^(q-1) tau', Hessian
  // q (q-1) tau^(q-2) tau' tau'^T + q tau^(q-1) tau''.
  const double q = -static_cast<double>(power);
  auto diag = [&](double a, double b) {
    CMat out = CMat::Zero(basis.dim(), basis.dim());
    for (Eigen::Index i = 0; i < basis.dim(); ++i) out(i, i) = (i % 6 < 3) ? a : b;
    return out;
  };
  const double te = tau_eps.value, tm = tau_mu.value;
  if (!(te > 0.0 && tm > 0.0)) throw ConfigError("modulation must stay positive");
  SymbolJet j;
  j.value = diag(std::pow(te, q), std::pow(tm, q));
  for (int a = 0; a < 3; ++a) {
    j.dr[a] = diag(q * std::pow(te, q - 1) * tau_eps.gradient(a), q * std::pow(tm, q - 1) * tau_mu.gradient(a));
    for (int b = 0; b < 3; ++b) {
      j.drr[a][b] = diag(q * (q - 1) * std::pow(te, q - 2) * tau_eps.gradient(a) * tau_eps.gradient(b) +
                             q * std::pow(te, q - 1) * tau_eps.hessian(a, b),
                         q * (q - 1) * std::pow(tm, q - 2) * tau_mu.gradient(a) * tau_mu.gradient(b) +
                             q * std::pow(tm, q - 1) * tau_mu.hessian(a, b));
    }
  }
  return j;
}

SymbolJet scaling_jet(const ModulationPair& m, const Vec3& r, int power, const FiberBasis& basis) {
  return scaling_jet(evaluate(m.eps, r), evaluate(m.mu, r), power, basis);
}

SymbolJet mper_jet(const SymbolContext& ctx, const Vec3& k) {
  SymbolJet j;
  j.value = ctx.mper(k);
  for (int a = 0; a < 3; ++a) j.dk[a] = times_repeated(ctx.w, rot_block(Vec3::Unit(a)), *ctx.basis);
  return j;
}

SymbolJet moyal_two_term(const SymbolJet& f, const SymbolJet& g, double lambda) {
  const bool terminates = (f.k_independent() && g.k_affine()) || (f.k_affine() && g.k_independent());
  if (!terminates) {
    throw std::invalid_argument("Moyal product needs one k-independent factor and one factor affine in k");
  }
  const cplx c = 0.5 * kI * lambda;
  const Eigen::Index n = f.value.rows();
  SymbolJet h;
  h.drr_known = false;
  h.value = mul(f.value, g.value);
  for (int j = 0; j < 3; ++j) {
    accumulate(h.value, mul(f.dr[j], g.dk[j]), c);
    accumulate(h.value, mul(f.dk[j], g.dr[j]), -c);
  }
  // Derivatives of the result. Terms needing third derivatives of either
  // factor vanish because one factor is k-independent and the other affine.
  for (int l = 0; l < 3; ++l) {
    accumulate(h.dk[l], mul(f.dk[l], g.value));
    accumulate(h.dk[l], mul(f.value, g.dk[l]));
    // d_k of the correction: f_{r_j} g_{k_j k_l} - f_{k_j k_l} g_{r_j}, both zero.

    accumulate(h.dr[l], mul(f.dr[l], g.value));
    accumulate(h.dr[l], mul(f.value, g.dr[l]));
    for (int j = 0; j < 3; ++j) {
      if ((!f.drr_known && !empty(g.dk[j])) || (!g.drr_known && !empty(f.dk[j]))) {
        throw std::invalid_argument("Moyal product needs second r-derivatives that were not propagated");
      }
      accumulate(h.dr[l], mul(f.drr[l][j], g.dk[j]), c);
      accumulate(h.dr[l], mul(f.dr[j], g.drk[l][j]), c);
      accumulate(h.dr[l], mul(f.drk[l][j], g.dr[j]), -c);
      accumulate(h.dr[l], mul(f.dk[j], g.drr[l][j]), -c);
    }
    for (int j = 0; j < 3; ++j) {
      // d_{r_l} d_{k_j} of f g; correction terms again need vanishing third derivatives.
      accumulate(h.drk[l][j], mul(f.drk[l][j], g.value));
      accumulate(h.drk[l][j], mul(f.dr[l], g.dk[j]));
      accumulate(h.drk[l][j], mul(f.dk[j], g.dr[l]));
      accumulate(h.drk[l][j], mul(f.value, g.drk[l][j]));
    }
  }
  if (empty(h.value)) h.value = CMat::Zero(n, n);
  return h;
}

CMat moyal_second_order(const SymbolJet& f, const SymbolJet& g, double lambda) {
  const cplx c = 0.5 * kI * lambda;
  const cplx pref = 0.5 * c * c;
  CMat acc;
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) {
      if ((!f.drr_known && !empty(g.dkk[j][l])) || (!g.drr_known && !empty(f.dkk[j][l]))) {
        throw std::invalid_argument("second-order Moyal term needs unpropagated second r-derivatives");
      }
      accumulate(acc, mul(f.drr[j][l], g.dkk[j][l]), pref);
      accumulate(acc, mul(f.drk[j][l], g.drk[l][j]), -2.0 * pref);
      accumulate(acc, mul(f.dkk[j][l], g.drr[j][l]), pref);
    }
  }
  return dense(acc, f.value.rows());
}

double symbol_equivariance_check(const std::function<CMat(const Vec3&)>& sym, const Vec3& k, const Index3& shift,
                                 const FiberBasis& basis) {
  const Vec3 g = basis.dual().vector(shift);
  const CMat shifted = translate_conjugate(sym(k), shift, basis).value;
  const CMat direct = sym(k - g);
  return block_mismatch(direct, shifted, interior_modes(shift, basis));
}

}  // namespace pce
