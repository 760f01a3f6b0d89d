#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pce/material.hpp"

namespace pce::io {

using nlohmann::json;

/// Writes to `<path>.tmp` and renames over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

/// Shortest form that round-trips a double (17 significant digits).
std::string format_double(double v);

/// Rows of numbers as CSV with a header line.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

json table_to_json(const CoefficientTable& t);
CoefficientTable table_from_json(const json& j);

/// {"real": bool, "lower_bound", "upper_bound", "eps": [...], "mu": [...],
///  "inv_eps": [...], "inv_mu": [...]}; each table entry is
/// {"n": [n1, n2, n3], "value": 9 [re, im] pairs in row-major order}.
json weights_to_json(const MaterialWeights& w);
/// Inverse tables and bounds are optional on input; missing inverses are
/// obtained from the pointwise inverse of the series on an n_grid^3 grid.
MaterialWeights weights_from_json(const json& j, const Lattice& lattice, int n_grid = 32);

/// {"n": n, "eps": [...], "mu": [...]} with n^3 entries each, in the
/// SampleGrid flat order. An entry is a positive scalar or 9 [re, im] pairs.
SampleGrid grid_from_json(const json& j);

/// Binary dump: "PCEM", uint64 N, k (3 doubles), N*N complex128 row-major.
void write_matrix(const std::filesystem::path& path, const CMat& m, const Vec3& k);
CMat read_matrix(const std::filesystem::path& path, Vec3* k = nullptr);

}  // namespace pce::io
