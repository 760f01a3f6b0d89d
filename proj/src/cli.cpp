#include "pce/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ostream>
#include <random>
#include <sstream>

#include "pce/groundstate.hpp"
#include "pce/io.hpp"
#include "pce/linalg.hpp"
#include "pce/projections.hpp"
#include "pce/spectrum.hpp"
#include "pce/symbol.hpp"

namespace pce::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

// Scalar, nested 3x3 real array, or 9 [re, im] pairs.
CMat3 mat3(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>() * CMat3::Identity();
  if (j.is_array() && j.size() == 3 && j[0].is_array() && j[0].size() == 3 && j[0][0].is_number()) {
    CMat3 m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  }
  if (j.is_array() && j.size() == 9) {
    CMat3 m;
    for (int i = 0; i < 9; ++i) {
      const auto& e = j[static_cast<std::size_t>(i)];
      m(i / 3, i % 3) = e.is_number() ? cplx(e.get<double>(), 0.0) : cplx(e.at(0).get<double>(), e.at(1).get<double>());
    }
    return m;
  }
  throw ConfigError(std::string(what) + " must be a scalar, a 3x3 array or 9 [re, im] pairs");
}

Vec3 to_cartesian(const DualLattice& dual, const Vec3& v, const std::string& units) {
  if (units == "reduced") return dual.basis * v;
  if (units == "absolute") return v;
  throw ConfigError("units must be 'reduced' or 'absolute', got '" + units + "'");
}

ModulationProfile parse_profile(const json& j) {
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") return ConstantProfile{};
  if (kind == "gaussian") {
    GaussianProfile p;
    p.alpha = j.at("alpha").get<double>();
    p.center = j.contains("center") ? vec3(j["center"], "gaussian center") : Vec3::Zero();
    p.sigma = j.at("sigma").get<double>();
    return p;
  }
  if (kind == "sine") {
    SineProfile p;
    p.alpha = j.at("alpha").get<double>();
    p.wavevector = vec3(j.at("wavevector"), "sine wavevector");
    return p;
  }
  throw ConfigError("unknown modulation kind '" + kind + "'");
}

GeometryPrimitive parse_primitive(const json& j, const Lattice& lattice) {
  GeometryPrimitive p;
  const std::string kind = j.at("kind").get<std::string>();
  p.eps = j.contains("eps") ? mat3(j["eps"], "eps") : CMat3::Identity();
  p.mu = j.contains("mu") ? mat3(j["mu"], "mu") : CMat3::Identity();
  if (j.contains("center")) p.center = vec3(j["center"], "center");
  if (kind == "background") {
    p.kind = GeometryPrimitive::Kind::Background;
  } else if (kind == "sphere") {
    p.kind = GeometryPrimitive::Kind::Sphere;
    if (j.contains("fill_fraction")) {
      p.radius = std::cbrt(3.0 * j["fill_fraction"].get<double>() * lattice.cell_volume() / (4.0 * kPi));
    } else {
      p.radius = j.at("radius").get<double>();
    }
  } else if (kind == "cylinder") {
    p.kind = GeometryPrimitive::Kind::Cylinder;
    p.radius = j.at("radius").get<double>();
    p.axis = j.value("axis", 2);
  } else if (kind == "slab") {
    p.kind = GeometryPrimitive::Kind::Slab;
    p.thickness = j.at("thickness").get<double>();
    p.normal = j.value("normal", 2);
  } else {
    throw ConfigError("unknown primitive kind '" + kind + "'");
  }
  return p;
}

std::vector<Vec3> random_kpoints(const DualLattice& dual, int count, double min_distance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double unit = dual.basis.col(0).norm();
  std::vector<Vec3> out;
  for (int tries = 0; static_cast<int>(out.size()) < count; ++tries) {
    if (tries > 1000 * count) throw ConfigError("could not place random k-points at the requested distance");
    const Vec3 k = dual.basis * Vec3(u(rng), u(rng), u(rng));
    if (distance_to_dual_lattice(dual, k) >= min_distance * unit) out.push_back(k);
  }
  return out;
}

bool is_vacuum(const RunConfig& cfg) {
  using S = WeightsSpec::Source;
  if (cfg.weights.source == S::Vacuum) return true;
  return cfg.weights.source == S::Constant && cfg.weights.eps == CMat3::Identity() &&
         cfg.weights.mu == CMat3::Identity();
}

double unit_length(const RunConfig& cfg) { return dual_basis(cfg.lattice).basis.col(0).norm(); }

json vec_json(const Vec3& v) { return {v(0), v(1), v(2)}; }

struct Outcome {
  int code = kOk;
  std::size_t mode_count = 0;
  json summary = json::object();
  std::vector<std::pair<std::string, std::string>> files;
};

std::vector<double> analytic_nonzero(const Vec3& k, const ModeSet& modes, double scale, double zero_tol) {
  std::vector<double> out;
  for (double w : analytic_free_spectrum(k, modes)) {
    if (std::abs(w) >= zero_tol * scale) out.push_back(w);
  }
  return out;
}

// Max relative deviation of a solved spectrum from the free oracle; +inf when
// the nonzero counts disagree.
double free_oracle_deviation(const FiberSpectrum& sp, const ModeSet& modes) {
  const auto solved = sp.nonzero();
  const auto exact = analytic_nonzero(sp.k, modes, sp.scale, sp.zero_tol);
  if (solved.size() != exact.size()) return std::numeric_limits<double>::infinity();
  return multiset_deviation(solved, exact);
}

std::vector<Vec3> sample_ks(const RunConfig& cfg, std::vector<double>* s) {
  const DualLattice dual = dual_basis(cfg.lattice);
  std::vector<Vec3> ks;
  if (!cfg.path.empty()) {
    const KPath p = kpath(cfg.path, cfg.samples_per_segment);
    ks = p.samples;
    if (s) *s = p.arclength;
  } else {
    ks = cfg.kpoints;
    if (s) {
      s->clear();
      for (std::size_t i = 0; i < ks.size(); ++i) s->push_back(static_cast<double>(i));
    }
  }
  if (ks.empty()) throw ConfigError("command needs 'kpath' or 'kpoints'");
  for (auto& k : ks) k = snap_to_dual(dual, k);
  return ks;
}

// Points for checks that need generic k: the configured list, else random.
std::vector<Vec3> check_ks(const RunConfig& cfg, int count) {
  if (!cfg.kpoints.empty()) return cfg.kpoints;
  return random_kpoints(dual_basis(cfg.lattice), count, 0.1, cfg.seed);
}

Outcome cmd_bands(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const FiberBasis basis = build_basis(cfg, cfg.cutoff);
  out.mode_count = basis.mode_count();
  const MaterialWeights w = build_weights(cfg, basis);
  const CMat gram = assemble_gram(w, basis).matrix;
  std::vector<double> s;
  const auto ks = sample_ks(cfg, &s);
  const auto spectra = solve_many(ks, basis, gram, SolveOptions{cfg.tol.zero_tol, false}, cfg.threads);
  const BandStructure bands = label_bands(spectra, basis, s);
  const int n = std::min(cfg.n_bands, bands.n_max);

  std::vector<std::string> header{"index", "s", "kx", "ky", "kz", "zero_count"};
  for (int m = -n; m <= n; ++m) {
    if (m != 0) header.push_back("omega_" + std::to_string(m));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    std::vector<double> row{static_cast<double>(i), bands.s[i], ks[i](0), ks[i](1), ks[i](2),
                            static_cast<double>(bands.zero_counts[i])};
    for (int m = -n; m <= n; ++m) {
      if (m != 0) row.push_back(bands.at(i, m));
    }
    rows.push_back(std::move(row));
  }
  out.files.emplace_back("bands.csv", io::csv(header, rows));

  json labels = json::array();
  for (int m = -n; m <= n; ++m) {
    if (m != 0) labels.push_back({{"n", m}, {"ground_state", BandStructure::is_ground_state(m)}});
  }
  json side = {{"bands", labels},
               {"zero_counts", bands.zero_counts},
               {"on_dual_lattice", bands.on_dual_lattice},
               {"generic_kernel_dimension", 2 * basis.mode_count()},
               {"mode_count", basis.mode_count()}};

  if (is_vacuum(cfg)) {
    double dev = 0.0;
    for (const auto& sp : spectra) dev = std::max(dev, free_oracle_deviation(sp, basis.modes()));
    side["oracle_max_rel_deviation"] = dev;
    out.summary["oracle_max_rel_deviation"] = dev;
    log << "free-operator oracle: max relative deviation " << dev << "\n";
    if (!(dev <= cfg.tol.residual_tol)) out.code = kAcceptanceFailure;
  }
  out.files.emplace_back("bands.json", side.dump(2) + "\n");

  std::ostringstream gp;
  gp << "set datafile separator ','\nset key off\nset xlabel 'path'\nset ylabel 'omega'\nplot";
  for (std::size_t c = 6; c < header.size(); ++c) {
    gp << (c > 6 ? "," : "") << " 'bands.csv' using 2:" << c + 1 << " with lines";
  }
  gp << "\n";
  out.files.emplace_back("bands.gp", gp.str());
  out.summary["samples"] = ks.size();
  out.summary["bands_written"] = 2 * n;
  log << "bands: " << ks.size() << " samples, " << 2 * n << " bands, " << basis.mode_count() << " modes\n";
  return out;
}

Outcome cmd_groundstate(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const FiberBasis basis = build_basis(cfg, cfg.cutoff);
  out.mode_count = basis.mode_count();
  const MaterialWeights w = build_weights(cfg, basis);
  const CMat gram = assemble_gram(w, basis).matrix;
  const GroundStateBasis gs = ground_space(basis, gram);
  bool ok = true;

  json ranks = json::array();
  double collapse = 0.0;
  for (const Vec3& k : check_ks(cfg, 10)) {
    const auto pm = perturbation_matrices(gs, k);
    const int rank = linalg::numerical_rank(linalg::singular_values(pm.ka), 1e-8);
    const double res = (full_expectation_matrix(gs, k, basis) - pm.ka).cwiseAbs().maxCoeff();
    collapse = std::max(collapse, res);
    ranks.push_back({{"k", vec_json(k)}, {"rank_kA", rank}, {"collapse_residual", res}});
    ok = ok && rank == 4;
  }
  ok = ok && collapse <= cfg.tol.residual_tol;

  std::vector<double> ts;
  for (double t : cfg.t_list) ts.push_back(t * unit_length(cfg));
  const SlopeReport rep = slope_validation(gs, basis, gram, cfg.direction, ts);
  json table = json::array();
  for (const auto& row : rep.rows) {
    table.push_back({{"t", row.t},
                     {"omega", row.omega},
                     {"predicted", row.predicted},
                     {"rel_err", row.rel_err},
                     {"max_rel_err", row.max_rel_err()}});
  }
  const double last = rep.rows.empty() ? 0.0 : rep.rows.back().max_rel_err();
  ok = ok && rep.errors_decrease && last <= cfg.tol.slope_tol;

  const json doc = {{"ground_state_dimension", gs.psi.cols()},
                    {"direction", vec_json(rep.direction)},
                    {"slopes", rep.slopes},
                    {"slopes_from_eigenvalues", ground_slopes_from_eigenvalues(gs, rep.direction)},
                    {"slope_table", table},
                    {"errors_decrease", rep.errors_decrease},
                    {"rank_checks", ranks},
                    {"max_collapse_residual", collapse}};
  out.files.emplace_back("groundstate.json", doc.dump(2) + "\n");
  out.summary = {{"slopes", rep.slopes}, {"errors_decrease", rep.errors_decrease}, {"smallest_t_error", last}};
  log << "ground state: slopes " << rep.slopes[2] << ", " << rep.slopes[3] << "; error at smallest t " << last
      << (rep.errors_decrease ? " (decreasing)" : " (not decreasing)") << "\n";
  if (!ok) out.code = kAcceptanceFailure;
  return out;
}

Outcome cmd_projections(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const FiberBasis basis = build_basis(cfg, cfg.cutoff);
  out.mode_count = basis.mode_count();
  const MaterialWeights w = build_weights(cfg, basis);
  const CMat gram = assemble_gram(w, basis).matrix;
  const DualLattice& dual = basis.dual();
  bool ok = true;

  json inter = json::array();
  auto probe = [&](const Vec3& k) {
    const Vec3 kz = wrap_to_zone(dual, k);
    const auto rep = intersection_dimension(kz, basis, gram);
    const int expected = on_dual_lattice(dual, kz) ? 0 : 2;
    ok = ok && rep.rank == expected;
    inter.push_back({{"k", vec_json(kz)}, {"dimension", rep.rank}, {"expected", expected}});
  };
  probe(Vec3::Zero());
  for (const Vec3& k : check_ks(cfg, 10)) probe(k);

  std::vector<double> ts;
  for (double t : cfg.t_list) ts.push_back(t * unit_length(cfg));
  const auto rows = discontinuity_probe(cfg.direction, ts, basis, gram);
  json disc = json::array();
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const auto& r : rows) {
    const double ratio = r.norm_reg / r.t;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    ok = ok && r.norm_plain >= 0.999;
    disc.push_back({{"t", r.t}, {"norm_plain", r.norm_plain}, {"norm_reg", r.norm_reg}, {"reg_over_t", ratio}});
  }
  const bool bounded = !rows.empty() && rmax <= 2.0 * rmin;
  ok = ok && bounded;
  const json doc = {{"intersection", inter}, {"discontinuity", disc}, {"reg_ratio_spread", rmax / rmin}};
  out.files.emplace_back("projections.json", doc.dump(2) + "\n");
  out.summary = {{"reg_ratio_spread", rmax / rmin}};
  log << "projections: regularized ratio spread " << rmax / rmin << "\n";
  if (!ok) out.code = kAcceptanceFailure;
  return out;
}

Outcome cmd_symbol_check(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const FiberBasis basis = build_basis(cfg, cfg.symbol_cutoff);
  out.mode_count = basis.mode_count();
  const MaterialWeights w = build_weights(cfg, basis);
  const SymbolContext ctx(w, cfg.modulation, basis);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  json samples = json::array();
  double worst = 0.0, second = 0.0;
  for (int i = 0; i < cfg.symbol_samples; ++i) {
    SymbolPoint p;
    p.r = cfg.lattice.position(Vec3(u(rng), u(rng), u(rng)));
    p.k = basis.dual().basis * Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
    p.lambda = cfg.lambda_max * u(rng);

    const SymbolJet mper = mper_jet(ctx, p.k);
    const SymbolJet s2 = scaling_jet(cfg.modulation, p.r, -2, basis);
    const SymbolJet s1 = scaling_jet(cfg.modulation, p.r, -1, basis);
    const SymbolJet phys = moyal_two_term(s2, mper, p.lambda);
    const SymbolJet half = moyal_two_term(s1, mper, p.lambda);
    const SymbolJet resc = moyal_two_term(half, s1, p.lambda);
    const double r_phys = (phys.value - eval_symbol_physical(p, ctx).value()).cwiseAbs().maxCoeff();
    const double r_resc = (resc.value - eval_symbol_rescaled(p, ctx).value()).cwiseAbs().maxCoeff();
    const double t2 = std::max({moyal_second_order(s2, mper, p.lambda).cwiseAbs().maxCoeff(),
                                moyal_second_order(s1, mper, p.lambda).cwiseAbs().maxCoeff(),
                                moyal_second_order(half, s1, p.lambda).cwiseAbs().maxCoeff()});
    const Index3 shift{1, 0, 0};
    const double e_phys = symbol_equivariance_check(
        [&](const Vec3& k) { return eval_symbol_physical({p.r, k, p.lambda}, ctx).value(); }, p.k, shift, basis);
    const double e_resc = symbol_equivariance_check(
        [&](const Vec3& k) { return eval_symbol_rescaled({p.r, k, p.lambda}, ctx).value(); }, p.k, shift, basis);
    worst = std::max({worst, r_phys, r_resc, e_phys, e_resc});
    second = std::max(second, t2);
    samples.push_back({{"r", vec_json(p.r)},
                       {"k", vec_json(p.k)},
                       {"lambda", p.lambda},
                       {"moyal_physical", r_phys},
                       {"moyal_rescaled", r_resc},
                       {"second_order_term", t2},
                       {"equivariance_physical", e_phys},
                       {"equivariance_rescaled", e_resc}});
  }
  const json doc = {{"samples", samples}, {"max_residual", worst}, {"max_second_order_term", second}};
  out.files.emplace_back("symbol_check.json", doc.dump(2) + "\n");
  out.summary = {{"max_residual", worst}, {"max_second_order_term", second}};
  log << "symbol check: max residual " << worst << ", second-order term " << second << "\n";
  if (!(worst <= cfg.tol.residual_tol) || second != 0.0) out.code = kAcceptanceFailure;
  return out;
}

Outcome cmd_validate(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const FiberBasis basis = build_basis(cfg, cfg.cutoff);
  out.mode_count = basis.mode_count();
  const MaterialWeights w = build_weights(cfg, basis);
  const WeightReport rep = validate_weights(w, cfg.lattice, cfg.validate_probes, cfg.seed);
  json doc = {{"ok", rep.ok},
              {"failed_invariant", rep.failed_invariant},
              {"message", rep.message},
              {"min_eigenvalue", rep.min_eigenvalue},
              {"max_eigenvalue", rep.max_eigenvalue},
              {"hermiticity_residual", rep.hermiticity_residual},
              {"realness_residual", rep.realness_residual},
              {"probes", rep.probes}};
  if (rep.ok) {
    assemble_gram(w, basis);  // throws when B is indefinite at this cutoff
    doc["gram_positive_definite"] = true;
  }
  out.files.emplace_back("validation.json", doc.dump(2) + "\n");
  out.summary = {{"ok", rep.ok}, {"failed_invariant", rep.failed_invariant}};
  if (!rep.ok) {
    log << "invariant violated: " << rep.failed_invariant << " (" << rep.message << ")\n";
    out.code = kNumericalFailure;
  } else {
    log << "weights valid: eigenvalues in [" << rep.min_eigenvalue << ", " << rep.max_eigenvalue << "]\n";
  }
  return out;
}

Outcome cmd_oracle(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const FiberBasis basis = build_basis(cfg, cfg.cutoff);
  out.mode_count = basis.mode_count();
  const CMat gram = assemble_gram(MaterialWeights::vacuum(), basis).matrix;
  const auto ks = check_ks(cfg, 20);
  const auto spectra = solve_many(ks, basis, gram, SolveOptions{cfg.tol.zero_tol, false}, cfg.threads);
  json rows = json::array();
  double dev = 0.0;
  for (const auto& sp : spectra) {
    const double d = free_oracle_deviation(sp, basis.modes());
    dev = std::max(dev, d);
    rows.push_back({{"k", vec_json(sp.k)}, {"max_rel_deviation", d}, {"zero_count", sp.zero_count},
                    {"kernel_dimension", kernel_dimension(sp.k, basis.modes())}});
  }
  const json doc = {{"points", rows}, {"max_rel_deviation", dev}};
  out.files.emplace_back("oracle.json", doc.dump(2) + "\n");
  out.summary = {{"max_rel_deviation", dev}};
  log << "free-operator oracle: " << ks.size() << " k-points, max relative deviation " << dev << "\n";
  if (!(dev <= cfg.tol.residual_tol)) out.code = kAcceptanceFailure;
  return out;
}

Outcome cmd_convergence(const RunConfig& cfg, std::ostream& log) {
  Outcome out;
  const ConvergenceTable t = convergence_report(cfg, cfg.cutoffs);
  std::vector<std::string> header{"cutoff"};
  for (int n : t.bands) header.push_back("omega_" + std::to_string(n));
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < t.cutoffs.size(); ++c) {
    std::vector<double> row{t.cutoffs[c]};
    row.insert(row.end(), t.omega[c].begin(), t.omega[c].end());
    rows.push_back(std::move(row));
  }
  out.files.emplace_back("convergence.csv", io::csv(header, rows));
  json flags = json::array();
  bool all = true;
  for (std::size_t b = 0; b < t.bands.size(); ++b) {
    flags.push_back({{"n", t.bands[b]}, {"monotone", static_cast<bool>(t.monotone[b])}});
    all = all && t.monotone[b];
  }
  const json doc = {{"k", vec_json(t.k)}, {"cutoffs", t.cutoffs}, {"drift", t.drift}, {"bands", flags}};
  out.files.emplace_back("convergence.json", doc.dump(2) + "\n");
  out.summary = {{"all_monotone", all}};
  log << "convergence: " << (all ? "drift decreases for every band" : "non-monotone drift flagged") << "\n";
  return out;
}

}  // namespace

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    RunConfig cfg;
    cfg.command = j.value("command", "");
    if (j.contains("lattice")) {
      const auto& l = j["lattice"];
      if (l.contains("vectors")) {
        const auto& v = l["vectors"];
        if (!v.is_array() || v.size() != 3) throw ConfigError("lattice.vectors needs three vectors");
        cfg.lattice = Lattice::from_vectors(vec3(v[0], "lattice vector"), vec3(v[1], "lattice vector"),
                                            vec3(v[2], "lattice vector"));
      } else {
        cfg.lattice = Lattice::cubic(l.value("cubic", 1.0));
      }
    }
    const DualLattice dual = dual_basis(cfg.lattice);

    if (j.contains("weights")) {
      const auto& wj = j["weights"];
      const std::string src = wj.value("source", "vacuum");
      auto& ws = cfg.weights;
      if (src == "vacuum") {
        ws.source = WeightsSpec::Source::Vacuum;
      } else if (src == "constant") {
        ws.source = WeightsSpec::Source::Constant;
        ws.eps = mat3(wj.at("eps"), "eps");
        ws.mu = wj.contains("mu") ? mat3(wj["mu"], "mu") : CMat3::Identity();
      } else if (src == "primitives") {
        ws.source = WeightsSpec::Source::Primitives;
        for (const auto& p : wj.at("primitives")) ws.primitives.push_back(parse_primitive(p, cfg.lattice));
        const std::string ov = wj.value("overlap", "reject");
        if (ov == "reject") {
          ws.overlap = OverlapPolicy::Reject;
        } else if (ov == "overwrite") {
          ws.overlap = OverlapPolicy::ExplicitOverwrite;
        } else {
          throw ConfigError("overlap must be 'reject' or 'overwrite'");
        }
      } else if (src == "file" || src == "grid") {
        ws.source = src == "file" ? WeightsSpec::Source::File : WeightsSpec::Source::Grid;
        ws.path = base_dir / wj.at("path").get<std::string>();
        if (wj.contains("retain_radius")) ws.retain_radius = wj["retain_radius"].get<double>();
      } else {
        throw ConfigError("unknown weights source '" + src + "'");
      }
    }

    cfg.cutoff = j.value("cutoff", cfg.cutoff);
    if (!(cfg.cutoff >= 0.0)) throw ConfigError("cutoff must be >= 0");
    if (j.contains("cutoffs")) cfg.cutoffs = j["cutoffs"].get<std::vector<double>>();

    if (j.contains("kpath")) {
      const auto& p = j["kpath"];
      const std::string units = p.value("units", "reduced");
      for (const auto& v : p.at("vertices")) cfg.path.push_back(to_cartesian(dual, vec3(v, "path vertex"), units));
      cfg.samples_per_segment = p.at("samples_per_segment").get<int>();
      if (cfg.path.size() < 2) throw ConfigError("kpath needs at least two vertices");
      if (cfg.samples_per_segment < 1) throw ConfigError("kpath needs samples_per_segment >= 1");
    }
    if (j.contains("kpoints")) {
      const auto& kp = j["kpoints"];
      if (kp.is_object() && kp.contains("random")) {
        cfg.kpoints = random_kpoints(dual, kp["random"].get<int>(), kp.value("min_distance", 0.1),
                                     j.value("seed", cfg.seed));
      } else {
        const auto& pts = kp.is_object() ? kp.at("points") : kp;
        const std::string units = kp.is_object() ? kp.value("units", "reduced") : "reduced";
        for (const auto& v : pts) cfg.kpoints.push_back(to_cartesian(dual, vec3(v, "k-point"), units));
      }
    }
    cfg.n_bands = j.value("n_bands", cfg.n_bands);
    if (cfg.n_bands < 1) throw ConfigError("n_bands must be >= 1");
    if (j.contains("direction")) {
      const auto& d = j["direction"];
      const Vec3 v = d.is_object() ? to_cartesian(dual, vec3(d.at("vector"), "direction"), d.value("units", "reduced"))
                                   : to_cartesian(dual, vec3(d, "direction"), "reduced");
      if (!(v.norm() > 0.0)) throw ConfigError("direction must be nonzero");
      cfg.direction = v.normalized();
    }
    if (j.contains("t_list")) cfg.t_list = j["t_list"].get<std::vector<double>>();
    for (std::size_t i = 0; i < cfg.t_list.size(); ++i) {
      if (!(cfg.t_list[i] > 0.0)) throw ConfigError("t_list entries must be positive");
      if (i > 0 && !(cfg.t_list[i] < cfg.t_list[i - 1])) throw ConfigError("t_list must be strictly decreasing");
    }

    if (j.contains("modulation")) {
      const auto& m = j["modulation"];
      if (m.contains("eps")) cfg.modulation.eps = parse_profile(m["eps"]);
      if (m.contains("mu")) cfg.modulation.mu = parse_profile(m["mu"]);
      check_profile(cfg.modulation.eps);
      check_profile(cfg.modulation.mu);
    }
    if (j.contains("symbol")) {
      const auto& s = j["symbol"];
      cfg.symbol_samples = s.value("samples", cfg.symbol_samples);
      cfg.lambda_max = s.value("lambda_max", cfg.lambda_max);
      cfg.symbol_cutoff = s.value("cutoff", cfg.symbol_cutoff);
      if (cfg.symbol_samples < 1 || !(cfg.lambda_max >= 0.0) || !(cfg.symbol_cutoff >= 0.0)) {
        throw ConfigError("symbol settings need samples >= 1, lambda_max >= 0, cutoff >= 0");
      }
    }
    cfg.validate_probes = j.value("validate_probes", cfg.validate_probes);

    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      cfg.tol.zero_tol = t.value("zero_tol", cfg.tol.zero_tol);
      cfg.tol.residual_tol = t.value("residual_tol", cfg.tol.residual_tol);
      cfg.tol.slope_tol = t.value("slope_tol", cfg.tol.slope_tol);
    }
    if (!(cfg.tol.zero_tol > 0.0 && cfg.tol.residual_tol > 0.0 && cfg.tol.slope_tol > 0.0)) {
      throw ConfigError("tolerances must be positive");
    }
    if (j.contains("output_dir")) cfg.output_dir = base_dir / j["output_dir"].get<std::string>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.canonical = j.dump();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("PCE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("PCE_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

FiberBasis build_basis(const RunConfig& cfg, double cutoff_units) {
  const DualLattice dual = dual_basis(cfg.lattice);
  return FiberBasis::with_cutoff(dual, cutoff_units * dual.basis.col(0).norm());
}

MaterialWeights build_weights(const RunConfig& cfg, const FiberBasis& basis) {
  using S = WeightsSpec::Source;
  const auto& ws = cfg.weights;
  switch (ws.source) {
    case S::Vacuum:
      return MaterialWeights::vacuum();
    case S::Constant:
      return MaterialWeights::constant(ws.eps, ws.mu);
    case S::Primitives:
      return coefficients_from_primitives(ws.primitives, cfg.lattice, difference_modes(basis.dual(), basis.modes()),
                                          ws.overlap);
    case S::File:
      return io::weights_from_json(json::parse(io::read_file(ws.path)), cfg.lattice);
    case S::Grid:
      return coefficients_from_samples(io::grid_from_json(json::parse(io::read_file(ws.path))), basis.dual(),
                                       ws.retain_radius);
  }
  throw ConfigError("unknown weights source");
}

ConvergenceTable convergence_report(const RunConfig& cfg, const std::vector<double>& cutoffs) {
  if (cutoffs.size() < 3) throw ConfigError("convergence needs at least three cutoffs");
  for (std::size_t i = 1; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > cutoffs[i - 1])) throw ConfigError("cutoffs must be strictly increasing");
  }
  if (cfg.kpoints.empty()) throw ConfigError("convergence needs a k-point");
  ConvergenceTable t;
  t.k = cfg.kpoints.front();
  t.cutoffs = cutoffs;
  for (int n = 1; n <= cfg.n_bands; ++n) t.bands.push_back(n);
  const double s0 = 0.0;
  for (double c : cutoffs) {
    const FiberBasis basis = build_basis(cfg, c);
    const CMat gram = assemble_gram(build_weights(cfg, basis), basis).matrix;
    const FiberSpectrum sp = solve_fiber(make_problem(t.k, basis, gram), SolveOptions{cfg.tol.zero_tol, false});
    const BandStructure b = label_bands(std::span<const FiberSpectrum>(&sp, 1), basis, std::span<const double>(&s0, 1));
    if (b.n_max < cfg.n_bands) throw ConfigError("cutoff too small for the requested number of bands");
    std::vector<double> row;
    for (int n : t.bands) row.push_back(b.at(0, n));
    t.omega.push_back(std::move(row));
  }
  for (std::size_t c = 1; c < cutoffs.size(); ++c) {
    std::vector<double> d;
    for (std::size_t b = 0; b < t.bands.size(); ++b) d.push_back(std::abs(t.omega[c][b] - t.omega[c - 1][b]));
    t.drift.push_back(std::move(d));
  }
  for (std::size_t b = 0; b < t.bands.size(); ++b) {
    bool mono = true;
    const double floor = 1e-12 * std::abs(t.omega.back()[b]);
    for (std::size_t p = 1; p < t.drift.size(); ++p) {
      if (t.drift[p][b] > t.drift[p - 1][b] && t.drift[p][b] > floor) mono = false;
    }
    t.monotone.push_back(mono);
  }
  return t;
}

int run(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  std::string error;
  try {
    const std::string& c = cfg.command;
    if (c == "bands") {
      out = cmd_bands(cfg, log);
    } else if (c == "groundstate") {
      out = cmd_groundstate(cfg, log);
    } else if (c == "projections") {
      out = cmd_projections(cfg, log);
    } else if (c == "symbol-check") {
      out = cmd_symbol_check(cfg, log);
    } else if (c == "validate") {
      out = cmd_validate(cfg, log);
    } else if (c == "oracle") {
      out = cmd_oracle(cfg, log);
    } else if (c == "convergence") {
      out = cmd_convergence(cfg, log);
    } else {
      throw ConfigError("unknown command '" + c + "'");
    }
  } catch (const ConfigError& e) {
    out.code = kConfigFailure;
    error = e.what();
    log << "config error: " << error << "\n";
  } catch (const InvariantViolation& e) {
    out.code = kNumericalFailure;
    error = e.what();
    log << "invariant violated: " << e.invariant() << " (" << error << ")\n";
  } catch (const NumericalError& e) {
    out.code = kNumericalFailure;
    error = e.what();
    log << "numerical failure: " << error << "\n";
  } catch (const json::exception& e) {
    out.code = kConfigFailure;
    error = e.what();
    log << "config error: " << error << "\n";
  }
  if (out.code == kConfigFailure) return out.code;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json artifacts = json::array();
  for (const auto& [name, content] : out.files) {
    io::atomic_write(cfg.output_dir / name, content);
    artifacts.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", io::hex64(io::fnv1a64(content))}});
  }
  const json manifest = {{"command", cfg.command},
                         {"config_hash", io::hex64(io::fnv1a64(cfg.canonical))},
                         {"mode_count", out.mode_count},
                         {"threads", cfg.threads},
                         {"wall_time_s", wall},
                         {"exit_code", out.code},
                         {"error", error},
                         {"summary", out.summary},
                         {"artifacts", artifacts}};
  io::atomic_write(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
  return out.code;
}

}  // namespace pce::cli
