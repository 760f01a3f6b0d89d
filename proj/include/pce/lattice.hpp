#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pce/common.hpp"

namespace pce {

/// Bravais lattice; columns of `basis` are e_1, e_2, e_3.
struct Lattice {
  Mat3 basis;

  static Lattice from_vectors(const Vec3& e1, const Vec3& e2, const Vec3& e3);
  static Lattice cubic(double a = 1.0);

  double cell_volume() const { return std::abs(basis.determinant()); }
  /// Cartesian position of fractional coordinates.
  Vec3 position(const Vec3& fractional) const { return basis * fractional; }
};

/// Dual lattice; columns satisfy e_j . e*_n = 2 pi delta_jn.
struct DualLattice {
  Mat3 basis;

  Vec3 vector(const Index3& n) const {
    return basis.col(0) * n[0] + basis.col(1) * n[1] + basis.col(2) * n[2];
  }
  /// Coordinates of k in the dual basis (not rounded).
  Vec3 reduced(const Vec3& k) const { return basis.inverse() * k; }
};

/// Condition numbers above this are rejected as numerically singular.
inline constexpr double kMaxLatticeCondition = 1e12;

DualLattice dual_basis(const Lattice& lattice);

/// Inverse of dual_basis: dual_basis(lattice_of(d)) recovers d.
Lattice lattice_of(const DualLattice& dual);

/// Dual-lattice vectors inside a Euclidean ball, ordered by length then by
/// integer coordinates. Always contains 0 and is closed under negation.
class ModeSet {
 public:
  ModeSet() = default;
  ModeSet(const DualLattice& dual, std::vector<Index3> indices);

  std::size_t size() const { return indices_.size(); }
  const std::vector<Index3>& indices() const { return indices_; }
  const Index3& index(std::size_t m) const { return indices_[m]; }
  const Vec3& vector(std::size_t m) const { return vectors_[m]; }
  std::optional<std::size_t> find(const Index3& n) const;
  bool contains(const Index3& n) const { return find(n).has_value(); }
  /// Position of gamma* = 0.
  std::size_t zero_mode() const;

 private:
  std::vector<Index3> indices_;
  std::vector<Vec3> vectors_;
  int bound_ = 0;                      // max |n_j| over the set
  std::vector<std::int32_t> lookup_;   // dense cube, -1 for absent
  std::size_t slot(const Index3& n) const;
};

ModeSet cutoff_modes(const DualLattice& dual, double radius);

/// All differences g - g' of members of `modes`, ordered like cutoff_modes.
ModeSet difference_modes(const DualLattice& dual, const ModeSet& modes);

struct KPath {
  std::vector<Vec3> vertices;
  int samples_per_segment = 1;
  std::vector<Vec3> samples;
  std::vector<double> arclength;  // cumulative path parameter s per sample
};

KPath kpath(std::span<const Vec3> vertices, int samples_per_segment);

/// Nearest dual-lattice vector to k.
Index3 nearest_dual_vector(const DualLattice& dual, const Vec3& k);

double distance_to_dual_lattice(const DualLattice& dual, const Vec3& k);

/// k - gamma* with gamma* the nearest dual vector (Wigner-Seitz representative).
Vec3 wrap_to_zone(const DualLattice& dual, const Vec3& k);

/// Returns the exact dual vector when dist(k, dual) < rel_tol * |e*_1|, else k.
Vec3 snap_to_dual(const DualLattice& dual, const Vec3& k, double rel_tol = 1e-9);

bool on_dual_lattice(const DualLattice& dual, const Vec3& k, double rel_tol = 1e-9);

}  // namespace pce
