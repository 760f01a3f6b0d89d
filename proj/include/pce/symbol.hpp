#pragma once

#include <array>
#include <functional>

#include "pce/planewave.hpp"

namespace pce {

struct SymbolPoint {
  Vec3 r = Vec3::Zero();
  Vec3 k = Vec3::Zero();
  double lambda = 0.0;
};

/// value = m0 + lambda * m1 over the plane-wave basis.
struct SymbolMatrix {
  CMat m0;
  CMat m1;
  double lambda = 0.0;
  CMat value() const { return m0 + lambda * m1; }
};

/// Fields used to build the symbols: W = diag(eps^-1, mu^-1) as a multiplier
/// and the modulation pair. W is assembled once per basis.
struct SymbolContext {
  const FiberBasis* basis = nullptr;
  CMat w;
  ModulationPair modulation;

  SymbolContext(const MaterialWeights& weights, const ModulationPair& m, const FiberBasis& b);
  /// Mper(k) = W Rot(k).
  CMat mper(const Vec3& k) const;
};

/// m0 = diag(tau_eps^2, tau_mu^2) Mper(k),
/// m1 = W [[0, -i tau_eps (grad tau_eps)^x], [i tau_mu (grad tau_mu)^x, 0]].
SymbolMatrix eval_symbol_physical(const SymbolPoint& p, const SymbolContext& ctx);

/// m0 = tau_eps tau_mu Mper(k),
/// m1 = -tau_eps tau_mu W [[0, (i/2) L^x], [(i/2) L^x, 0]] with L = grad ln(tau_eps / tau_mu).
SymbolMatrix eval_symbol_rescaled(const SymbolPoint& p, const SymbolContext& ctx);

// ---------------------------------------------------------------------------
// Local Taylor data of a matrix-valued symbol at one point (r, k). An empty
// matrix stands for an exactly vanishing derivative. drk[j][l] is d_{r_j} d_{k_l}.

struct SymbolJet {
  CMat value;
  std::array<CMat, 3> dr;
  std::array<CMat, 3> dk;
  std::array<std::array<CMat, 3>, 3> drr;
  std::array<std::array<CMat, 3>, 3> dkk;
  std::array<std::array<CMat, 3>, 3> drk;
  bool drr_known = true;  // false when second r-derivatives were not propagated

  bool k_independent() const;
  /// Affine in k: no second k-derivatives.
  bool k_affine() const;
};

/// S^p = diag(tau_eps^-p I, tau_mu^-p I) on every mode, from explicit scalar jets.
SymbolJet scaling_jet(const ScalarJet& tau_eps, const ScalarJet& tau_mu, int power, const FiberBasis& basis);
SymbolJet scaling_jet(const ModulationPair& m, const Vec3& r, int power, const FiberBasis& basis);

/// Mper as a jet in k: value W Rot(k), dk_j = W dRot/dk_j.
SymbolJet mper_jet(const SymbolContext& ctx, const Vec3& k);

/// f # g up to first order in lambda:
///   f g + (i lambda / 2) sum_j (d_{r_j} f d_{k_j} g - d_{k_j} f d_{r_j} g).
/// Requires one factor k-independent and the other affine in k, where the
/// expansion stops exactly; throws std::invalid_argument otherwise. The result
/// carries value, first derivatives and d_r d_k; second r-derivatives are not
/// propagated.
SymbolJet moyal_two_term(const SymbolJet& f, const SymbolJet& g, double lambda);

/// The formal second-order term
///   (1/2)(i lambda/2)^2 sum_{jl} (f_{r_j r_l} g_{k_j k_l} - 2 f_{r_j k_l} g_{k_j r_l} + f_{k_j k_l} g_{r_j r_l}).
/// Throws std::invalid_argument when an unpropagated derivative meets a nonzero partner.
CMat moyal_second_order(const SymbolJet& f, const SymbolJet& g, double lambda);

/// Max blockwise mismatch between sym(k - g) and exp(i g.y) sym(k) exp(-i g.y),
/// restricted to modes whose preimage stays in the basis.
double symbol_equivariance_check(const std::function<CMat(const Vec3&)>& sym, const Vec3& k, const Index3& shift,
                                 const FiberBasis& basis);

}  // namespace pce
