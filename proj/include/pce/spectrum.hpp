#pragma once

#include <span>
#include <vector>

#include "pce/planewave.hpp"

namespace pce {

struct SolveOptions {
  double zero_tol = 1e-8;  // relative to the spectral radius
  bool vectors = true;
};

struct FiberSpectrum {
  Vec3 k = Vec3::Zero();
  RVec eigenvalues;   // ascending
  CMat eigenvectors;  // B-orthonormal columns; empty when not requested
  double zero_tol = 1e-8;
  double scale = 0.0;  // largest |omega|
  std::size_t zero_count = 0;

  bool is_zero(double omega) const { return std::abs(omega) < zero_tol * scale; }
  /// Eigenvalues outside the zero window, ascending.
  std::vector<double> nonzero() const;
};

/// Cholesky reduction of B followed by a dense Hermitian eigensolve.
/// Throws NumericalError(IndefiniteGram) when B is not positive definite.
FiberSpectrum solve_fiber(const FiberProblem& problem, const SolveOptions& options = {});

/// Solves every k independently on `threads` workers; results are stored by index.
std::vector<FiberSpectrum> solve_many(std::span<const Vec3> ks, const FiberBasis& basis, const CMat& gram,
                                      const SolveOptions& options, int threads = 1);

/// Spectrum of Rot(k) on the truncated basis: +-|g + k| twice per mode and
/// zeros of multiplicity 2 per mode with g + k != 0 and 6 for g + k = 0.
std::vector<double> analytic_free_spectrum(const Vec3& k, const ModeSet& modes);

/// dim ker Rot(k) on the truncated basis.
std::size_t kernel_dimension(const Vec3& k, const ModeSet& modes, double tol = 1e-12);

/// Max relative deviation between two sorted multisets of equal size,
/// |a_i - b_i| / max(|b_i|, floor).
double multiset_deviation(std::span<const double> a, std::span<const double> b, double floor = 1e-300);

/// Bands omega_n(k) along a sampled path, n in {-n_max..-1, 1..n_max}.
struct BandStructure {
  std::vector<Vec3> k;
  std::vector<double> s;
  int n_max = 0;
  Eigen::MatrixXd omega;  // rows: samples; columns: n = -n_max..-1, 1..n_max
  std::vector<std::size_t> zero_counts;
  std::vector<bool> on_dual_lattice;

  static Eigen::Index column(int n, int n_max) { return n < 0 ? n + n_max : n_max + n - 1; }
  double at(std::size_t sample, int n) const { return omega(static_cast<Eigen::Index>(sample), column(n, n_max)); }
  /// Ground-state labels: the two lowest positive and negative bands.
  static bool is_ground_state(int n) { return n == 1 || n == 2 || n == -1 || n == -2; }
};

/// Labels nonzero eigenvalues by sorted order at each k. Zeros in excess of
/// the generic kernel (at k in the dual lattice) are the ground-state bands
/// at their limit 0 and are split evenly between the +- labels.
BandStructure label_bands(std::span<const FiberSpectrum> spectra, const FiberBasis& basis,
                          std::span<const double> s);

/// max_i |sigma(k)_i + sigma(-k)_{N-1-i}|; refuses complex weights.
double ph_symmetry_check(const MaterialWeights& w, const Vec3& k, const FiberBasis& basis, const CMat& gram);

}  // namespace pce
