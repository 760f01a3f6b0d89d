#include "pce/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace pce {

namespace {

double condition_number(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m);
  const auto& s = svd.singularValues();
  if (s(2) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(2);
}

Mat3 dual_of(const Mat3& basis, const char* what) {
  const double cond = condition_number(basis);
  if (!(cond < kMaxLatticeCondition)) {
    std::ostringstream msg;
    msg << what << " basis is singular (condition number " << cond << ")";
    throw NumericalError(NumericalError::Kind::SingularLattice, msg.str());
  }
  return kTwoPi * basis.inverse().transpose();
}

// Length first, then integer coordinates. Lengths closer than the relative
// tolerance count as equal so the order does not depend on rounding.
void sort_modes(std::vector<Index3>& idx, const DualLattice& dual) {
  std::vector<std::pair<double, Index3>> keyed;
  keyed.reserve(idx.size());
  for (const auto& n : idx) keyed.emplace_back(dual.vector(n).squaredNorm(), n);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    const double scale = std::max({a.first, b.first, 1e-300});
    if (std::abs(a.first - b.first) > 1e-12 * scale) return a.first < b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = keyed[i].second;
}

}  // namespace

Lattice Lattice::from_vectors(const Vec3& e1, const Vec3& e2, const Vec3& e3) {
  Lattice l;
  l.basis.col(0) = e1;
  l.basis.col(1) = e2;
  l.basis.col(2) = e3;
  const double cond = condition_number(l.basis);
  if (!(cond < kMaxLatticeCondition)) {
    std::ostringstream msg;
    msg << "lattice basis is singular (condition number " << cond << ")";
    throw NumericalError(NumericalError::Kind::SingularLattice, msg.str());
  }
  return l;
}

Lattice Lattice::cubic(double a) { return from_vectors(Vec3(a, 0, 0), Vec3(0, a, 0), Vec3(0, 0, a)); }

DualLattice dual_basis(const Lattice& lattice) { return DualLattice{dual_of(lattice.basis, "lattice")}; }

Lattice lattice_of(const DualLattice& dual) { return Lattice{dual_of(dual.basis, "dual")}; }

ModeSet::ModeSet(const DualLattice& dual, std::vector<Index3> indices) : indices_(std::move(indices)) {
  vectors_.reserve(indices_.size());
  for (const auto& n : indices_) {
    vectors_.push_back(dual.vector(n));
    bound_ = std::max({bound_, std::abs(n[0]), std::abs(n[1]), std::abs(n[2])});
  }
  const std::size_t side = 2 * static_cast<std::size_t>(bound_) + 1;
  lookup_.assign(side * side * side, -1);
  for (std::size_t m = 0; m < indices_.size(); ++m) {
    auto& cell = lookup_[slot(indices_[m])];
    if (cell >= 0) throw ConfigError("duplicate mode in mode set");
    cell = static_cast<std::int32_t>(m);
  }
}

std::size_t ModeSet::slot(const Index3& n) const {
  const std::size_t side = 2 * static_cast<std::size_t>(bound_) + 1;
  return (static_cast<std::size_t>(n[0] + bound_) * side + static_cast<std::size_t>(n[1] + bound_)) * side +
         static_cast<std::size_t>(n[2] + bound_);
}

std::optional<std::size_t> ModeSet::find(const Index3& n) const {
  for (int c : n) {
    if (std::abs(c) > bound_) return std::nullopt;
  }
  if (lookup_.empty()) return std::nullopt;
  const auto v = lookup_[slot(n)];
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

std::size_t ModeSet::zero_mode() const {
  auto z = find({0, 0, 0});
  if (!z) throw ConfigError("mode set does not contain gamma* = 0");
  return *z;
}

ModeSet cutoff_modes(const DualLattice& dual, double radius) {
  if (radius < 0.0) throw ConfigError("cutoff radius must be non-negative");
  // |n_j| <= |row_j(B^-1)| * |gamma|
  const Mat3 inv = dual.basis.inverse();
  Index3 bound{};
  for (int j = 0; j < 3; ++j) bound[j] = static_cast<int>(std::floor(inv.row(j).norm() * radius + 1e-9));
  const double limit = radius * (1.0 + 1e-12) + 1e-300;
  std::vector<Index3> idx;
  for (int a = -bound[0]; a <= bound[0]; ++a) {
    for (int b = -bound[1]; b <= bound[1]; ++b) {
      for (int c = -bound[2]; c <= bound[2]; ++c) {
        const Index3 n{a, b, c};
        if (dual.vector(n).norm() <= limit) idx.push_back(n);
      }
    }
  }
  sort_modes(idx, dual);
  return ModeSet(dual, std::move(idx));
}

ModeSet difference_modes(const DualLattice& dual, const ModeSet& modes) {
  std::vector<Index3> idx;
  int bound = 0;
  for (const auto& n : modes.indices()) bound = std::max({bound, std::abs(n[0]), std::abs(n[1]), std::abs(n[2])});
  const int side = 4 * bound + 1;
  std::vector<char> seen(static_cast<std::size_t>(side) * side * side, 0);
  for (const auto& a : modes.indices()) {
    for (const auto& b : modes.indices()) {
      const Index3 d = a - b;
      const auto s = (static_cast<std::size_t>(d[0] + 2 * bound) * side + (d[1] + 2 * bound)) * side + (d[2] + 2 * bound);
      if (!seen[s]) {
        seen[s] = 1;
        idx.push_back(d);
      }
    }
  }
  sort_modes(idx, dual);
  return ModeSet(dual, std::move(idx));
}

KPath kpath(std::span<const Vec3> vertices, int samples_per_segment) {
  if (vertices.empty()) throw ConfigError("k-path needs at least one vertex");
  if (vertices.size() < 2) throw ConfigError("k-path needs at least two vertices");
  if (samples_per_segment < 1) throw ConfigError("samples per segment must be positive");
  KPath path;
  path.vertices.assign(vertices.begin(), vertices.end());
  path.samples_per_segment = samples_per_segment;
  double s = 0.0;
  path.samples.push_back(vertices[0]);
  path.arclength.push_back(0.0);
  for (std::size_t seg = 0; seg + 1 < vertices.size(); ++seg) {
    const Vec3& a = vertices[seg];
    const Vec3& b = vertices[seg + 1];
    const double len = (b - a).norm();
    for (int i = 1; i <= samples_per_segment; ++i) {
      const double t = static_cast<double>(i) / samples_per_segment;
      // exact endpoint at t = 1
      path.samples.push_back(i == samples_per_segment ? b : Vec3(a + t * (b - a)));
      path.arclength.push_back(s + t * len);
    }
    s += len;
  }
  return path;
}

Index3 nearest_dual_vector(const DualLattice& dual, const Vec3& k) {
  const Vec3 r = dual.reduced(k);
  const Index3 base{static_cast<int>(std::lround(r(0))), static_cast<int>(std::lround(r(1))),
                    static_cast<int>(std::lround(r(2)))};
  // Rounding in skewed bases can miss the closest point; search the neighbours.
  Index3 best = base;
  double best_d = (k - dual.vector(base)).squaredNorm();
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      for (int c = -1; c <= 1; ++c) {
        const Index3 n = base + Index3{a, b, c};
        const double d = (k - dual.vector(n)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = n;
        }
      }
    }
  }
  return best;
}

double distance_to_dual_lattice(const DualLattice& dual, const Vec3& k) {
  return (k - dual.vector(nearest_dual_vector(dual, k))).norm();
}

Vec3 wrap_to_zone(const DualLattice& dual, const Vec3& k) { return k - dual.vector(nearest_dual_vector(dual, k)); }

bool on_dual_lattice(const DualLattice& dual, const Vec3& k, double rel_tol) {
  return distance_to_dual_lattice(dual, k) < rel_tol * dual.basis.col(0).norm();
}

Vec3 snap_to_dual(const DualLattice& dual, const Vec3& k, double rel_tol) {
  if (on_dual_lattice(dual, k, rel_tol)) return dual.vector(nearest_dual_vector(dual, k));
  return k;
}

}  // namespace pce
