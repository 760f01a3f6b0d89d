#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pce/material.hpp"
#include "pce/planewave.hpp"

namespace pce::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 2, kNumericalFailure = 3, kAcceptanceFailure = 4 };

struct Tolerances {
  double zero_tol = 1e-8;
  double residual_tol = 1e-8;
  double slope_tol = 5e-2;
};

struct WeightsSpec {
  enum class Source { Vacuum, Constant, Primitives, File, Grid };
  Source source = Source::Vacuum;
  CMat3 eps = CMat3::Identity();  // constant
  CMat3 mu = CMat3::Identity();
  std::vector<GeometryPrimitive> primitives;
  OverlapPolicy overlap = OverlapPolicy::Reject;
  std::filesystem::path path;  // file, grid
  std::optional<double> retain_radius;
};

struct RunConfig {
  std::string command;
  Lattice lattice = Lattice::cubic(1.0);
  WeightsSpec weights;
  double cutoff = 3.0;           // units of |e*_1|
  std::vector<double> cutoffs;   // convergence
  std::vector<Vec3> path;        // cartesian vertices
  int samples_per_segment = 0;
  std::vector<Vec3> kpoints;     // cartesian
  int n_bands = 8;
  Vec3 direction = Vec3::UnitX();           // cartesian, normalized
  std::vector<double> t_list{0.1, 0.03, 0.01};  // units of |e*_1|
  ModulationPair modulation;
  int symbol_samples = 20;
  double lambda_max = 0.5;
  double symbol_cutoff = 2.0;    // units of |e*_1|
  int validate_probes = 512;
  Tolerances tol;
  std::filesystem::path output_dir = "pce-out";
  std::uint64_t seed = 12345;
  int threads = 1;
  std::string canonical;         // normalized config text, hashed into the manifest
};

/// Parses the JSON schema documented in the README. Relative file paths
/// resolve against `base_dir`. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// --threads wins, then PCE_THREADS, then 1.
int resolve_threads(std::optional<int> flag);

MaterialWeights build_weights(const RunConfig& cfg, const FiberBasis& basis);
FiberBasis build_basis(const RunConfig& cfg, double cutoff_units);

struct ConvergenceTable {
  Vec3 k = Vec3::Zero();
  std::vector<double> cutoffs;
  std::vector<int> bands;
  std::vector<std::vector<double>> omega;  // [cutoff][band]
  std::vector<std::vector<double>> drift;  // [pair][band], |omega_K' - omega_K|
  std::vector<bool> monotone;              // per band: drift non-increasing
};

/// Needs at least three strictly increasing cutoffs.
ConvergenceTable convergence_report(const RunConfig& cfg, const std::vector<double>& cutoffs);

/// Dispatches cfg.command, writes artifacts and the manifest, returns the exit code.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace pce::cli
