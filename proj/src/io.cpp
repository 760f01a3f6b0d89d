#include "pce/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pce::io {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

json mat3_to_json(const CMat3& m) {
  json v = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) v.push_back({m(r, c).real(), m(r, c).imag()});
  }
  return v;
}

CMat3 mat3_from_json(const json& v) {
  if (v.is_number()) return v.get<double>() * CMat3::Identity();
  if (!v.is_array() || v.size() != 9) throw ConfigError("a 3x3 entry needs 9 [re, im] pairs or one scalar");
  CMat3 m;
  for (int i = 0; i < 9; ++i) {
    const auto& e = v[static_cast<std::size_t>(i)];
    if (e.is_number()) {
      m(i / 3, i % 3) = e.get<double>();
    } else {
      if (!e.is_array() || e.size() != 2) throw ConfigError("matrix entries are [re, im] pairs");
      m(i / 3, i % 3) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

}  // namespace

json table_to_json(const CoefficientTable& t) {
  json arr = json::array();
  for (const auto& [n, v] : t.entries()) arr.push_back({{"n", {n[0], n[1], n[2]}}, {"value", mat3_to_json(v)}});
  return arr;
}

CoefficientTable table_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("coefficient table must be an array");
  CoefficientTable t;
  for (const auto& e : j) {
    const auto n = e.at("n").get<std::array<int, 3>>();
    if (t.contains(n)) throw ConfigError("duplicate coefficient index");
    t.set(n, mat3_from_json(e.at("value")));
  }
  return t;
}

json weights_to_json(const MaterialWeights& w) {
  return {{"real", w.real_weights},       {"lower_bound", w.lower_bound},
          {"upper_bound", w.upper_bound}, {"eps", table_to_json(w.eps)},
          {"mu", table_to_json(w.mu)},    {"inv_eps", table_to_json(w.inv_eps)},
          {"inv_mu", table_to_json(w.inv_mu)}};
}

MaterialWeights weights_from_json(const json& j, const Lattice& lattice, int n_grid) {
  try {
    MaterialWeights w;
    w.eps = table_from_json(j.at("eps"));
    w.mu = table_from_json(j.at("mu"));
    w.real_weights = j.value("real", w.eps.realness_residual() == 0.0 && w.mu.realness_residual() == 0.0);
    if (j.contains("inv_eps") && j.contains("inv_mu")) {
      w.inv_eps = table_from_json(j.at("inv_eps"));
      w.inv_mu = table_from_json(j.at("inv_mu"));
      w.lower_bound = j.value("lower_bound", 0.0);
      w.upper_bound = j.value("upper_bound", 0.0);
    } else {
      // Pointwise inverse of the tabulated series, transformed back.
      const SampleGrid grid = sample_weights(w, lattice, n_grid);
      const MaterialWeights g = coefficients_from_samples(grid, dual_basis(lattice));
      w.inv_eps = g.inv_eps;
      w.inv_mu = g.inv_mu;
      w.lower_bound = g.lower_bound;
      w.upper_bound = g.upper_bound;
    }
    return w;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed weights document: ") + e.what());
  }
}

SampleGrid grid_from_json(const json& j) {
  try {
    SampleGrid g;
    g.n = j.at("n").get<int>();
    if (g.n < 2) throw ConfigError("sample grid needs n >= 2");
    const std::size_t total = static_cast<std::size_t>(g.n) * g.n * g.n;
    for (const char* key : {"eps", "mu"}) {
      const auto& arr = j.at(key);
      if (!arr.is_array() || arr.size() != total) {
        throw ConfigError(std::string("sample grid '") + key + "' needs n^3 entries");
      }
      auto& dst = std::string(key) == "eps" ? g.eps : g.mu;
      dst.reserve(total);
      for (const auto& e : arr) dst.push_back(mat3_from_json(e));
    }
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed sample grid: ") + e.what());
  }
}

void write_matrix(const fs::path& path, const CMat& m, const Vec3& k) {
  if (m.rows() != m.cols()) throw Error("matrix dump needs a square matrix");
  std::string buf = "PCEM";
  auto put = [&](const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); };
  const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  put(&n, sizeof n);
  put(k.data(), 3 * sizeof(double));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double re = m(r, c).real(), im = m(r, c).imag();
      put(&re, sizeof re);
      put(&im, sizeof im);
    }
  }
  atomic_write(path, buf);
}

CMat read_matrix(const fs::path& path, Vec3* k) {
  const std::string buf = read_file(path);
  const std::size_t head = 4 + sizeof(std::uint64_t) + 3 * sizeof(double);
  if (buf.size() < head || buf.compare(0, 4, "PCEM") != 0) throw ConfigError("not a matrix dump: " + path.string());
  std::uint64_t n = 0;
  std::memcpy(&n, buf.data() + 4, sizeof n);
  if (buf.size() != head + n * n * 2 * sizeof(double)) throw ConfigError("truncated matrix dump: " + path.string());
  Vec3 kk;
  std::memcpy(kk.data(), buf.data() + 12, 3 * sizeof(double));
  if (k) *k = kk;
  CMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const char* p = buf.data() + head;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double re, im;
      std::memcpy(&re, p, sizeof re);
      std::memcpy(&im, p + sizeof re, sizeof im);
      p += 2 * sizeof(double);
      m(r, c) = cplx(re, im);
    }
  }
  return m;
}

}  // namespace pce::io
