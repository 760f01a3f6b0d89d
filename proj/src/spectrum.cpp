#include "pce/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "pce/linalg.hpp"

namespace pce {

std::vector<double> FiberSpectrum::nonzero() const {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (!is_zero(eigenvalues(i))) out.push_back(eigenvalues(i));
  }
  return out;
}

FiberSpectrum solve_fiber(const FiberProblem& problem, const SolveOptions& options) {
  if (problem.a.rows() != problem.b.rows() || problem.a.rows() != problem.a.cols()) {
    throw ConfigError("fiber problem matrices have mismatched dimensions");
  }
  Eigen::LLT<CMat> llt(problem.b);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(NumericalError::Kind::IndefiniteGram, "Gram matrix is not positive definite");
  }
  // C = L^-1 A L^-H
  const auto lower = llt.matrixL();
  CMat c = lower.solve(problem.a);
  c = lower.solve(CMat(c.adjoint())).adjoint();
  c = 0.5 * (c + c.adjoint()).eval();

  auto eig = linalg::hermitian_eig(std::move(c), options.vectors);
  FiberSpectrum out;
  out.k = problem.k;
  out.zero_tol = options.zero_tol;
  out.eigenvalues = std::move(eig.values);
  if (options.vectors) out.eigenvectors = llt.matrixU().solve(eig.vectors);
  out.scale = out.eigenvalues.size() ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    if (out.is_zero(out.eigenvalues(i))) ++out.zero_count;
  }
  return out;
}

std::vector<FiberSpectrum> solve_many(std::span<const Vec3> ks, const FiberBasis& basis, const CMat& gram,
                                      const SolveOptions& options, int threads) {
  std::vector<FiberSpectrum> out(ks.size());
  const auto work = [&](std::size_t i) { out[i] = solve_fiber(make_problem(ks[i], basis, gram), options); };
  threads = std::max(1, std::min<int>(threads, static_cast<int>(ks.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < ks.size(); ++i) work(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = static_cast<std::size_t>(t); i < ks.size(); i += static_cast<std::size_t>(threads)) work(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<double> analytic_free_spectrum(const Vec3& k, const ModeSet& modes) {
  std::vector<double> out;
  out.reserve(6 * modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double r = (modes.vector(m) + k).norm();
    if (r == 0.0) {
      out.insert(out.end(), 6, 0.0);
    } else {
      out.insert(out.end(), {r, r, -r, -r, 0.0, 0.0});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t kernel_dimension(const Vec3& k, const ModeSet& modes, double tol) {
  std::size_t dim = 0;
  const double scale = std::max(1.0, k.norm());
  for (std::size_t m = 0; m < modes.size(); ++m) dim += (modes.vector(m) + k).norm() <= tol * scale ? 6 : 2;
  return dim;
}

double multiset_deviation(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  return r;
}

BandStructure label_bands(std::span<const FiberSpectrum> spectra, const FiberBasis& basis,
                          std::span<const double> s) {
  if (spectra.empty()) throw ConfigError("no spectra to label");
  if (s.size() != spectra.size()) throw ConfigError("path parameter count does not match spectra");
  const auto dim = spectra.front().eigenvalues.size();
  const std::size_t generic_kernel = 2 * basis.mode_count();

  std::vector<std::vector<double>> pos(spectra.size()), neg(spectra.size());
  BandStructure bands;
  int n_max = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto& sp = spectra[i];
    if (sp.eigenvalues.size() != dim) throw ConfigError("spectra along the path have inconsistent dimensions");
    const std::size_t extra = sp.zero_count > generic_kernel ? sp.zero_count - generic_kernel : 0;
    if (extra % 2 != 0) {
      std::ostringstream msg;
      msg << "odd number of excess zero modes (" << extra << ") at sample " << i;
      throw NumericalError(NumericalError::Kind::Isolation, msg.str());
    }
    pos[i].assign(extra / 2, 0.0);
    neg[i].assign(extra / 2, 0.0);
    for (double w : sp.nonzero()) (w > 0 ? pos[i] : neg[i]).push_back(w);
    std::sort(pos[i].begin(), pos[i].end());
    std::sort(neg[i].begin(), neg[i].end(), std::greater<>());
    n_max = std::min({n_max, static_cast<int>(pos[i].size()), static_cast<int>(neg[i].size())});
    bands.k.push_back(sp.k);
    bands.zero_counts.push_back(sp.zero_count);
    bands.on_dual_lattice.push_back(on_dual_lattice(basis.dual(), sp.k));
  }
  bands.s.assign(s.begin(), s.end());
  bands.n_max = n_max;
  bands.omega.resize(static_cast<Eigen::Index>(spectra.size()), 2 * n_max);
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (int n = 1; n <= n_max; ++n) {
      bands.omega(static_cast<Eigen::Index>(i), BandStructure::column(n, n_max)) = pos[i][static_cast<std::size_t>(n - 1)];
      bands.omega(static_cast<Eigen::Index>(i), BandStructure::column(-n, n_max)) = neg[i][static_cast<std::size_t>(n - 1)];
    }
  }
  return bands;
}

double ph_symmetry_check(const MaterialWeights& w, const Vec3& k, const FiberBasis& basis, const CMat& gram) {
  if (!w.real_weights) {
    throw InvariantViolation("realness", "reflection symmetry of the spectrum is only expected for real weights");
  }
  const SolveOptions opts{1e-8, false};
  const auto plus = solve_fiber(make_problem(k, basis, gram), opts).eigenvalues;
  const auto minus = solve_fiber(make_problem(-k, basis, gram), opts).eigenvalues;
  const auto n = plus.size();
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) r = std::max(r, std::abs(plus(i) + minus(n - 1 - i)));
  return r;
}

}  // namespace pce
