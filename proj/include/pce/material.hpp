#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pce/common.hpp"
#include "pce/lattice.hpp"

namespace pce {

/// Fourier coefficients of a Gamma-periodic 3x3 matrix field,
/// f(y) = sum_g f_hat(g) exp(i g.y). Missing entries are zero.
class CoefficientTable {
 public:
  void set(const Index3& n, const CMat3& value) { entries_[n] = value; }
  CMat3 at(const Index3& n) const;
  const CMat3* find(const Index3& n) const;
  bool contains(const Index3& n) const { return entries_.count(n) != 0; }
  std::size_t size() const { return entries_.size(); }
  const std::map<Index3, CMat3>& entries() const { return entries_; }

  /// Evaluates the truncated series at a cartesian point.
  CMat3 reconstruct(const DualLattice& dual, const Vec3& y) const;

  /// max |f(-g) - f(g)^dagger| over tabulated g (absent partner counts as 0).
  double hermiticity_residual() const;
  /// max |f(-g) - conj(f(g))| over tabulated g.
  double realness_residual() const;

  static CoefficientTable constant(const CMat3& value);

 private:
  std::map<Index3, CMat3> entries_;
};

struct MaterialWeights {
  CoefficientTable eps;
  CoefficientTable mu;
  CoefficientTable inv_eps;
  CoefficientTable inv_mu;
  bool real_weights = true;
  double lower_bound = 1.0;  // c
  double upper_bound = 1.0;  // C

  static MaterialWeights vacuum();
  /// Spatially constant weights; inverses are the matrix inverses.
  static MaterialWeights constant(const CMat3& eps, const CMat3& mu);
};

/// Piecewise-constant inclusion. Positions are fractional coordinates of the
/// lattice basis; lengths are in the cartesian units of the lattice vectors.
struct GeometryPrimitive {
  enum class Kind { Background, Sphere, Cylinder, Slab };

  Kind kind = Kind::Background;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;     // sphere, cylinder
  int axis = 2;            // cylinder: rod along lattice vector e_axis
  int normal = 2;          // slab: normal along dual vector e*_normal
  double thickness = 0.0;  // slab
  CMat3 eps = CMat3::Identity();
  CMat3 mu = CMat3::Identity();

  static GeometryPrimitive background(const CMat3& eps, const CMat3& mu);
  static GeometryPrimitive sphere(const Vec3& center, double radius, const CMat3& eps, const CMat3& mu);
};

/// How overlapping primitives are treated: rejected, or painted in list
/// order (a later primitive must lie entirely inside one earlier region).
enum class OverlapPolicy { Reject, ExplicitOverwrite };

/// Closed-form Fourier coefficients of a background-first primitive list,
/// tabulated on `modes`.
MaterialWeights coefficients_from_primitives(const std::vector<GeometryPrimitive>& primitives, const Lattice& lattice,
                                             const ModeSet& modes,
                                             OverlapPolicy policy = OverlapPolicy::Reject);

/// Samples of eps and mu on an n^3 grid over the unit cell; sample (i0,i1,i2)
/// sits at y = sum_j (i_j / n) e_j and has flat index (i0 * n + i1) * n + i2.
struct SampleGrid {
  int n = 0;
  std::vector<CMat3> eps;
  std::vector<CMat3> mu;

  std::size_t flat(int i0, int i1, int i2) const {
    return (static_cast<std::size_t>(i0) * n + i1) * n + i2;
  }
};

/// Discrete Fourier transform of sampled weights. Integer indices with
/// |n_j| <= n/2 are kept (Nyquist entries split evenly between +-n/2); when
/// `retain_radius` is set only |g| <= radius is tabulated.
MaterialWeights coefficients_from_samples(const SampleGrid& grid, const DualLattice& dual,
                                          std::optional<double> retain_radius = std::nullopt);

/// Pointwise values of the truncated weight series on an n^3 grid.
SampleGrid sample_weights(const MaterialWeights& w, const Lattice& lattice, int n);

struct WeightReport {
  bool ok = true;
  std::string failed_invariant;  // empty when ok
  std::string message;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double hermiticity_residual = 0.0;
  double realness_residual = 0.0;
  int probes = 0;
};

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kRealnessTol = 1e-10;

/// Reconstructs eps and mu at n_probe pseudo-random cell points (fixed seed)
/// and checks Hermiticity, realness (when claimed) and positivity.
WeightReport validate_weights(const MaterialWeights& w, const Lattice& lattice, int n_probe,
                              std::uint64_t seed = 0x5eed);

/// Throws InvariantViolation naming the first failed invariant.
void require_valid(const WeightReport& report);

// ---------------------------------------------------------------------------
// Slow modulation functions tau(r) with tau(0) = 1.

struct ConstantProfile {};

/// 1 + alpha * (exp(-|r-r0|^2/sigma^2) - exp(-|r0|^2/sigma^2)); extremum at r0.
struct GaussianProfile {
  double alpha = 0.0;
  Vec3 center = Vec3::Zero();
  double sigma = 1.0;
};

/// 1 + alpha * sin(q.r).
struct SineProfile {
  double alpha = 0.0;
  Vec3 wavevector = Vec3::Zero();
};

using ModulationProfile = std::variant<ConstantProfile, GaussianProfile, SineProfile>;

struct ScalarJet {
  double value = 1.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

ScalarJet evaluate(const ModulationProfile& profile, const Vec3& r);

/// Throws ConfigError when |alpha| >= 1 or sigma <= 0.
void check_profile(const ModulationProfile& profile);

struct ModulationPair {
  ModulationProfile eps = ConstantProfile{};
  ModulationProfile mu = ConstantProfile{};
};

struct ModulationValue {
  double tau_eps = 1.0;
  double tau_mu = 1.0;
  Vec3 grad_eps = Vec3::Zero();
  Vec3 grad_mu = Vec3::Zero();
};

ModulationValue modulation_eval(const ModulationPair& m, const Vec3& r);

}  // namespace pce
