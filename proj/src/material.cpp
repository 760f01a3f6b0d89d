#include "pce/material.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace pce {

// ---------------------------------------------------------------------------
// CoefficientTable

CMat3 CoefficientTable::at(const Index3& n) const {
  auto it = entries_.find(n);
  return it == entries_.end() ? CMat3::Zero() : it->second;
}

const CMat3* CoefficientTable::find(const Index3& n) const {
  auto it = entries_.find(n);
  return it == entries_.end() ? nullptr : &it->second;
}

CMat3 CoefficientTable::reconstruct(const DualLattice& dual, const Vec3& y) const {
  CMat3 sum = CMat3::Zero();
  for (const auto& [n, c] : entries_) sum += c * std::exp(kI * dual.vector(n).dot(y));
  return sum;
}

double CoefficientTable::hermiticity_residual() const {
  double r = 0.0;
  for (const auto& [n, c] : entries_) r = std::max(r, (at(-n) - c.adjoint()).cwiseAbs().maxCoeff());
  return r;
}

double CoefficientTable::realness_residual() const {
  double r = 0.0;
  for (const auto& [n, c] : entries_) r = std::max(r, (at(-n) - c.conjugate()).cwiseAbs().maxCoeff());
  return r;
}

CoefficientTable CoefficientTable::constant(const CMat3& value) {
  CoefficientTable t;
  t.set({0, 0, 0}, value);
  return t;
}

namespace {

bool is_real(const CMat3& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

void check_positive(const CMat3& m, const std::string& what) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvariantViolation("hermiticity", what + " is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMat3> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= 0.0) throw InvariantViolation("positivity", what + " is not positive definite");
}

std::pair<double, double> eig_range(const CMat3& m) {
  Eigen::SelfAdjointEigenSolver<CMat3> es(CMat3(0.5 * (m + m.adjoint())), Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(2)};
}

// 3 (sin x - x cos x) / x^3
double sphere_form(double x) {
  if (x < 1e-3) {
    const double x2 = x * x;
    return 1.0 - x2 / 10.0 + x2 * x2 / 280.0;
  }
  return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

// 2 J1(x) / x
double disc_form(double x) {
  if (x < 1e-3) {
    const double x2 = x * x;
    return 1.0 - x2 / 8.0 + x2 * x2 / 192.0;
  }
  return 2.0 * std::cyl_bessel_j(1.0, x) / x;
}

double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Shortest nonzero lattice vector, optionally projected perpendicular to `axis`.
double shortest_period(const Lattice& lattice, const Vec3* axis) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) {
      for (int c = -2; c <= 2; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        Vec3 v = lattice.basis * Vec3(a, b, c);
        if (axis) v -= axis->dot(v) * *axis;
        const double len = v.norm();
        if (len > 1e-12) best = std::min(best, len);
      }
    }
  }
  return best;
}

// Cartesian displacement from the nearest periodic image of `center`.
Vec3 min_image(const Lattice& lattice, const Vec3& y, const Vec3& center) {
  const Mat3 inv = lattice.basis.inverse();
  Vec3 f = inv * (y - center);
  for (int j = 0; j < 3; ++j) f(j) -= std::round(f(j));
  Vec3 best = lattice.basis * f;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      for (int c = -1; c <= 1; ++c) {
        const Vec3 d = lattice.basis * (f + Vec3(a, b, c));
        if (d.squaredNorm() < best.squaredNorm()) best = d;
      }
    }
  }
  return best;
}

bool inside(const GeometryPrimitive& p, const Lattice& lattice, const DualLattice& dual, const Vec3& y) {
  using K = GeometryPrimitive::Kind;
  const Vec3 c = lattice.position(p.center);
  switch (p.kind) {
    case K::Background:
      return true;
    case K::Sphere:
      return min_image(lattice, y, c).norm() <= p.radius;
    case K::Cylinder: {
      const Vec3 axis = lattice.basis.col(p.axis).normalized();
      Vec3 d = min_image(lattice, y, c);
      d -= axis.dot(d) * axis;
      // a perpendicular image may be closer once the axial part is removed
      double best = d.norm();
      for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) {
          for (int e = -1; e <= 1; ++e) {
            Vec3 v = d + lattice.basis * Vec3(a, b, e);
            v -= axis.dot(v) * axis;
            best = std::min(best, v.norm());
          }
        }
      }
      return best <= p.radius;
    }
    case K::Slab: {
      const Vec3 g = dual.basis.col(p.normal);
      const double h = kTwoPi / g.norm();
      double s = (y - c).dot(g.normalized());
      s -= h * std::round(s / h);
      return std::abs(s) <= 0.5 * p.thickness;
    }
  }
  return false;
}

// Fourier coefficient of the indicator function of a primitive's support.
cplx indicator_coefficient(const GeometryPrimitive& p, const Lattice& lattice, const DualLattice& dual,
                           const Index3& n) {
  using K = GeometryPrimitive::Kind;
  const Vec3 g = dual.vector(n);
  const double gn = g.norm();
  const Vec3 c = lattice.position(p.center);
  const cplx phase = std::exp(-kI * g.dot(c));
  const double volume = lattice.cell_volume();
  switch (p.kind) {
    case K::Background:
      return (n == Index3{0, 0, 0}) ? 1.0 : 0.0;
    case K::Sphere: {
      const double f = 4.0 / 3.0 * kPi * std::pow(p.radius, 3) / volume;
      return phase * f * sphere_form(gn * p.radius);
    }
    case K::Cylinder: {
      if (n[p.axis] != 0) return 0.0;
      const double len = lattice.basis.col(p.axis).norm();
      const Vec3 axis = lattice.basis.col(p.axis) / len;
      const double gperp = (g - axis.dot(g) * axis).norm();
      const double f = kPi * p.radius * p.radius * len / volume;
      return phase * f * disc_form(gperp * p.radius);
    }
    case K::Slab: {
      for (int j = 0; j < 3; ++j) {
        if (j != p.normal && n[j] != 0) return 0.0;
      }
      const double h = kTwoPi / dual.basis.col(p.normal).norm();
      return phase * (p.thickness / h) * sinc(0.5 * gn * p.thickness);
    }
  }
  return 0.0;
}

void check_geometry(const GeometryPrimitive& p, const Lattice& lattice, const DualLattice& dual) {
  using K = GeometryPrimitive::Kind;
  if (p.radius < 0.0 || p.thickness < 0.0) throw ConfigError("geometric parameters must be non-negative");
  switch (p.kind) {
    case K::Background:
      break;
    case K::Sphere:
      if (2.0 * p.radius > shortest_period(lattice, nullptr)) {
        throw ConfigError("sphere overlaps its own periodic images");
      }
      break;
    case K::Cylinder: {
      if (p.axis < 0 || p.axis > 2) throw ConfigError("cylinder axis must be 0, 1 or 2");
      const Vec3 axis = lattice.basis.col(p.axis).normalized();
      if (2.0 * p.radius > shortest_period(lattice, &axis)) {
        throw ConfigError("cylinder overlaps its own periodic images");
      }
      break;
    }
    case K::Slab:
      if (p.normal < 0 || p.normal > 2) throw ConfigError("slab normal must be 0, 1 or 2");
      if (p.thickness > kTwoPi / dual.basis.col(p.normal).norm()) {
        throw ConfigError("slab is thicker than the interplanar spacing");
      }
      break;
  }
}

// Membership of each primitive on a probe grid, used for overlap/containment.
struct Coverage {
  std::vector<std::vector<char>> in;  // [primitive][point]
};

Coverage sample_coverage(const std::vector<GeometryPrimitive>& prims, const Lattice& lattice,
                         const DualLattice& dual, int n) {
  Coverage cov;
  cov.in.resize(prims.size());
  for (std::size_t p = 0; p < prims.size(); ++p) {
    cov.in[p].resize(static_cast<std::size_t>(n) * n * n);
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          const Vec3 y = lattice.position(Vec3((a + 0.5) / n, (b + 0.5) / n, (c + 0.5) / n));
          cov.in[p][idx++] = inside(prims[p], lattice, dual, y) ? 1 : 0;
        }
      }
    }
  }
  return cov;
}

bool spheres_overlap(const GeometryPrimitive& a, const GeometryPrimitive& b, const Lattice& lattice) {
  const double d = min_image(lattice, lattice.position(b.center), lattice.position(a.center)).norm();
  return d < a.radius + b.radius;
}

bool sphere_contains(const GeometryPrimitive& outer, const GeometryPrimitive& inner, const Lattice& lattice) {
  const double d = min_image(lattice, lattice.position(inner.center), lattice.position(outer.center)).norm();
  return d + inner.radius <= outer.radius;
}

}  // namespace

MaterialWeights MaterialWeights::vacuum() { return constant(CMat3::Identity(), CMat3::Identity()); }

MaterialWeights MaterialWeights::constant(const CMat3& eps, const CMat3& mu) {
  check_positive(eps, "eps");
  check_positive(mu, "mu");
  MaterialWeights w;
  w.eps = CoefficientTable::constant(eps);
  w.mu = CoefficientTable::constant(mu);
  w.inv_eps = CoefficientTable::constant(eps.inverse());
  w.inv_mu = CoefficientTable::constant(mu.inverse());
  w.real_weights = is_real(eps) && is_real(mu);
  const auto [e0, e1] = eig_range(eps);
  const auto [m0, m1] = eig_range(mu);
  w.lower_bound = std::min(e0, m0);
  w.upper_bound = std::max(e1, m1);
  return w;
}

GeometryPrimitive GeometryPrimitive::background(const CMat3& eps, const CMat3& mu) {
  GeometryPrimitive p;
  p.kind = Kind::Background;
  p.eps = eps;
  p.mu = mu;
  return p;
}

GeometryPrimitive GeometryPrimitive::sphere(const Vec3& center, double radius, const CMat3& eps, const CMat3& mu) {
  GeometryPrimitive p;
  p.kind = Kind::Sphere;
  p.center = center;
  p.radius = radius;
  p.eps = eps;
  p.mu = mu;
  return p;
}

MaterialWeights coefficients_from_primitives(const std::vector<GeometryPrimitive>& prims, const Lattice& lattice,
                                             const ModeSet& modes, OverlapPolicy policy) {
  using K = GeometryPrimitive::Kind;
  if (prims.empty() || prims.front().kind != K::Background) {
    throw ConfigError("primitive list must start with a background");
  }
  const DualLattice dual = dual_basis(lattice);
  for (std::size_t i = 0; i < prims.size(); ++i) {
    if (i > 0 && prims[i].kind == K::Background) throw ConfigError("only the first primitive may be a background");
    check_geometry(prims[i], lattice, dual);
    check_positive(prims[i].eps, "eps of primitive " + std::to_string(i));
    check_positive(prims[i].mu, "mu of primitive " + std::to_string(i));
  }

  // parent[i]: the region primitive i is painted over (0 = background).
  std::vector<std::size_t> parent(prims.size(), 0);
  if (prims.size() > 2) {
    const bool all_spheres = std::all_of(prims.begin() + 1, prims.end(), [](const auto& p) { return p.kind == K::Sphere; });
    std::optional<Coverage> cov;
    if (!all_spheres) cov = sample_coverage(prims, lattice, dual, 48);
    for (std::size_t j = 2; j < prims.size(); ++j) {
      for (std::size_t i = 1; i < j; ++i) {
        bool overlap = false;
        bool contained = false;
        if (all_spheres) {
          overlap = spheres_overlap(prims[i], prims[j], lattice);
          contained = sphere_contains(prims[i], prims[j], lattice);
        } else {
          const auto& a = cov->in[i];
          const auto& b = cov->in[j];
          bool any_b = false;
          contained = true;
          for (std::size_t q = 0; q < a.size(); ++q) {
            if (a[q] && b[q]) overlap = true;
            if (b[q]) {
              any_b = true;
              if (!a[q]) contained = false;
            }
          }
          contained = contained && any_b;
        }
        if (!overlap) continue;
        if (policy == OverlapPolicy::Reject) {
          throw ConfigError("primitives " + std::to_string(i) + " and " + std::to_string(j) +
                            " overlap; set an explicit overwrite order");
        }
        if (!contained) {
          throw ConfigError("primitive " + std::to_string(j) + " partially overlaps primitive " + std::to_string(i) +
                            "; only full containment can be painted in closed form");
        }
        parent[j] = i;
      }
    }
  }

  MaterialWeights w;
  w.real_weights = true;
  w.lower_bound = std::numeric_limits<double>::infinity();
  w.upper_bound = 0.0;
  for (const auto& p : prims) {
    w.real_weights = w.real_weights && is_real(p.eps) && is_real(p.mu);
    for (const CMat3* m : {&p.eps, &p.mu}) {
      const auto [lo, hi] = eig_range(*m);
      w.lower_bound = std::min(w.lower_bound, lo);
      w.upper_bound = std::max(w.upper_bound, hi);
    }
  }

  std::vector<CMat3> inv_eps(prims.size()), inv_mu(prims.size());
  for (std::size_t i = 0; i < prims.size(); ++i) {
    inv_eps[i] = prims[i].eps.inverse();
    inv_mu[i] = prims[i].mu.inverse();
  }

  for (const auto& n : modes.indices()) {
    CMat3 e = CMat3::Zero(), m = CMat3::Zero(), ie = CMat3::Zero(), im = CMat3::Zero();
    for (std::size_t i = 0; i < prims.size(); ++i) {
      const cplx chi = indicator_coefficient(prims[i], lattice, dual, n);
      if (chi == 0.0) continue;
      if (i == 0) {
        e += chi * prims[0].eps;
        m += chi * prims[0].mu;
        ie += chi * inv_eps[0];
        im += chi * inv_mu[0];
      } else {
        const std::size_t q = parent[i];
        e += chi * (prims[i].eps - prims[q].eps);
        m += chi * (prims[i].mu - prims[q].mu);
        ie += chi * (inv_eps[i] - inv_eps[q]);
        im += chi * (inv_mu[i] - inv_mu[q]);
      }
    }
    w.eps.set(n, e);
    w.mu.set(n, m);
    w.inv_eps.set(n, ie);
    w.inv_mu.set(n, im);
  }
  return w;
}

namespace {

class Fft3 {
 public:
  explicit Fft3(int n) : n_(n), size_(static_cast<std::size_t>(n) * n * n) {
    buf_ = fftw_alloc_complex(size_);
    plan_ = fftw_plan_dft_3d(n, n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Fft3() {
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  // Forward transform of one matrix entry across the grid, normalized by n^3.
  std::vector<cplx> transform(const std::vector<CMat3>& samples, int r, int c) {
    for (std::size_t i = 0; i < size_; ++i) {
      buf_[i][0] = samples[i](r, c).real();
      buf_[i][1] = samples[i](r, c).imag();
    }
    fftw_execute(plan_);
    std::vector<cplx> out(size_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = cplx(buf_[i][0], buf_[i][1]) * scale;
    return out;
  }

 private:
  int n_;
  std::size_t size_;
  fftw_complex* buf_;
  fftw_plan plan_;
};

CoefficientTable table_from_samples(const std::vector<CMat3>& samples, int n, const DualLattice& dual,
                                    std::optional<double> radius) {
  Fft3 fft(n);
  std::array<std::vector<cplx>, 9> entries;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) entries[3 * r + c] = fft.transform(samples, r, c);
  }
  const int half = n / 2;
  const bool even = n % 2 == 0;
  CoefficientTable table;
  for (int a = -half; a <= half; ++a) {
    for (int b = -half; b <= half; ++b) {
      for (int c = -half; c <= half; ++c) {
        const Index3 idx{a, b, c};
        if (radius && dual.vector(idx).norm() > *radius * (1.0 + 1e-12)) continue;
        double weight = 1.0;
        for (int v : idx) {
          if (even && std::abs(v) == half) weight *= 0.5;
        }
        const auto wrap = [n](int v) { return static_cast<std::size_t>(((v % n) + n) % n); };
        const std::size_t flat = (wrap(a) * n + wrap(b)) * n + wrap(c);
        CMat3 m;
        for (int r = 0; r < 3; ++r) {
          for (int cc = 0; cc < 3; ++cc) m(r, cc) = weight * entries[3 * r + cc][flat];
        }
        table.set(idx, m);
      }
    }
  }
  return table;
}

}  // namespace

MaterialWeights coefficients_from_samples(const SampleGrid& grid, const DualLattice& dual,
                                          std::optional<double> retain_radius) {
  const int n = grid.n;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  if (n <= 0 || grid.eps.size() != total || grid.mu.size() != total) {
    throw ConfigError("sample grid size does not match n^3");
  }
  MaterialWeights w;
  w.real_weights = true;
  w.lower_bound = std::numeric_limits<double>::infinity();
  w.upper_bound = 0.0;
  std::vector<CMat3> inv_eps(total), inv_mu(total);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        const std::size_t i = grid.flat(a, b, c);
        for (const auto* field : {&grid.eps, &grid.mu}) {
          const CMat3& m = (*field)[i];
          const auto [lo, hi] = eig_range(m);
          const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
          if (lo <= 0.0 || herm > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
            std::ostringstream msg;
            msg << (field == &grid.eps ? "eps" : "mu") << " sample at grid point (" << a << "," << b << "," << c
                << ") is not Hermitian positive definite (min eigenvalue " << lo << ")";
            throw InvariantViolation("positivity", msg.str());
          }
          w.lower_bound = std::min(w.lower_bound, lo);
          w.upper_bound = std::max(w.upper_bound, hi);
          w.real_weights = w.real_weights && is_real(m);
        }
        inv_eps[i] = grid.eps[i].inverse();
        inv_mu[i] = grid.mu[i].inverse();
      }
    }
  }
  w.eps = table_from_samples(grid.eps, n, dual, retain_radius);
  w.mu = table_from_samples(grid.mu, n, dual, retain_radius);
  w.inv_eps = table_from_samples(inv_eps, n, dual, retain_radius);
  w.inv_mu = table_from_samples(inv_mu, n, dual, retain_radius);
  return w;
}

SampleGrid sample_weights(const MaterialWeights& w, const Lattice& lattice, int n) {
  const DualLattice dual = dual_basis(lattice);
  SampleGrid grid;
  grid.n = n;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  grid.eps.resize(total);
  grid.mu.resize(total);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        const Vec3 y = lattice.position(Vec3(double(a) / n, double(b) / n, double(c) / n));
        grid.eps[grid.flat(a, b, c)] = w.eps.reconstruct(dual, y);
        grid.mu[grid.flat(a, b, c)] = w.mu.reconstruct(dual, y);
      }
    }
  }
  return grid;
}

WeightReport validate_weights(const MaterialWeights& w, const Lattice& lattice, int n_probe, std::uint64_t seed) {
  const DualLattice dual = dual_basis(lattice);
  WeightReport rep;
  rep.probes = n_probe;

  double scale = 1.0;
  for (const auto* t : {&w.eps, &w.mu, &w.inv_eps, &w.inv_mu}) {
    for (const auto& [n, c] : t->entries()) scale = std::max(scale, c.cwiseAbs().maxCoeff());
    rep.hermiticity_residual = std::max(rep.hermiticity_residual, t->hermiticity_residual());
    if (w.real_weights) rep.realness_residual = std::max(rep.realness_residual, t->realness_residual());
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  rep.max_eigenvalue = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < n_probe; ++p) {
    const Vec3 y = lattice.position(Vec3(unit(rng), unit(rng), unit(rng)));
    for (const auto* t : {&w.eps, &w.mu}) {
      const CMat3 m = t->reconstruct(dual, y);
      if (w.real_weights) rep.realness_residual = std::max(rep.realness_residual, m.imag().cwiseAbs().maxCoeff());
      const auto [lo, hi] = eig_range(m);
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, lo);
      rep.max_eigenvalue = std::max(rep.max_eigenvalue, hi);
    }
  }

  if (rep.hermiticity_residual > kHermiticityTol * scale) {
    rep.ok = false;
    rep.failed_invariant = "hermiticity";
    rep.message = "coefficient table violates f(-g) = f(g)^dagger";
  } else if (w.real_weights && rep.realness_residual > kRealnessTol * scale) {
    rep.ok = false;
    rep.failed_invariant = "realness";
    rep.message = "weights flagged real but coefficients are not conjugate-symmetric";
  } else if (n_probe > 0 && rep.min_eigenvalue <= 0.0) {
    rep.ok = false;
    rep.failed_invariant = "positivity";
    std::ostringstream msg;
    msg << "minimum sampled eigenvalue " << rep.min_eigenvalue << " is not positive";
    rep.message = msg.str();
  }
  return rep;
}

void require_valid(const WeightReport& report) {
  if (!report.ok) throw InvariantViolation(report.failed_invariant, report.message);
}

// ---------------------------------------------------------------------------
// Modulation profiles

ScalarJet evaluate(const ModulationProfile& profile, const Vec3& r) {
  return std::visit(
      [&r](const auto& p) -> ScalarJet {
        using T = std::decay_t<decltype(p)>;
        ScalarJet j;
        if constexpr (std::is_same_v<T, GaussianProfile>) {
          const Vec3 u = r - p.center;
          const double s2 = p.sigma * p.sigma;
          const double e = std::exp(-u.squaredNorm() / s2);
          const double e0 = std::exp(-p.center.squaredNorm() / s2);
          j.value = 1.0 + p.alpha * (e - e0);
          j.gradient = p.alpha * e * (-2.0 / s2) * u;
          j.hessian = p.alpha * e * (4.0 / (s2 * s2) * u * u.transpose() - 2.0 / s2 * Mat3::Identity());
        } else if constexpr (std::is_same_v<T, SineProfile>) {
          const double phase = p.wavevector.dot(r);
          j.value = 1.0 + p.alpha * std::sin(phase);
          j.gradient = p.alpha * std::cos(phase) * p.wavevector;
          j.hessian = -p.alpha * std::sin(phase) * p.wavevector * p.wavevector.transpose();
        }
        return j;
      },
      profile);
}

void check_profile(const ModulationProfile& profile) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (!std::is_same_v<T, ConstantProfile>) {
          if (!(std::abs(p.alpha) < 1.0)) throw ConfigError("modulation amplitude must satisfy |alpha| < 1");
        }
        if constexpr (std::is_same_v<T, GaussianProfile>) {
          if (!(p.sigma > 0.0)) throw ConfigError("gaussian modulation needs sigma > 0");
        }
      },
      profile);
}

ModulationValue modulation_eval(const ModulationPair& m, const Vec3& r) {
  const ScalarJet e = evaluate(m.eps, r);
  const ScalarJet h = evaluate(m.mu, r);
  return {e.value, h.value, e.gradient, h.gradient};
}

}  // namespace pce
