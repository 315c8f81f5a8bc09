#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nambu/dynamics.hpp"
#include "nambu/functionals.hpp"
#include "nambu/matrix.hpp"

namespace nambu {

using Json = nlohmann::json;

/// Matrix wire format: {"dim": d, "re": [[...]], "im": [[...]]}, row-major.
inline Json matrix_to_json(const ComplexMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json re_row = Json::array(), im_row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re_row.push_back(m(i, j).real());
      im_row.push_back(m(i, j).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
    throw std::runtime_error("matrix json: expected object with dim, re, im");
  const int d = j.at("dim").get<int>();
  if (d < 1) throw std::runtime_error("matrix json: dim must be positive");
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  if (static_cast<int>(re.size()) != d || static_cast<int>(im.size()) != d)
    throw std::runtime_error("matrix json: not square (row count differs from dim)");
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(re[i].size()) != d || static_cast<int>(im[i].size()) != d)
      throw std::runtime_error("matrix json: not square (column count differs from dim)");
    for (int jj = 0; jj < d; ++jj)
      m(i, jj) = Complex(re[i][jj].get<double>(), im[i][jj].get<double>());
  }
  return m;
}

inline void save_matrix(const std::string& path, const ComplexMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
  out << matrix_to_json(m).dump(2) << "\n";
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

/// Load and validate a Hermitian observable; rejections name the violated
/// invariant.
inline HermitianMatrix load_matrix(const std::string& path) {
  const ComplexMatrix m = matrix_from_json(read_json_file(path));
  try {
    return HermitianMatrix(m);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

/// Load and validate a density matrix (Hermitian, PSD, positive trace).
inline DensityMatrix load_density(const std::string& path) {
  const ComplexMatrix m = matrix_from_json(read_json_file(path));
  try {
    return DensityMatrix(m);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

/// Functional descriptor:
///   {"kind": "linear", "matrix": <matrix json>}
///   {"kind": "casimir", "n": k}
///   {"kind": "renyi_a" | "renyi_b", "alpha": x}
///   {"kind": "casimir_function", "phi": "c2_half" | "c1" | "c2sq_plus_c3"}
inline Functional functional_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") return linear_observable(HermitianMatrix(matrix_from_json(j.at("matrix"))));
  if (kind == "casimir") return casimir(j.at("n").get<int>());
  if (kind == "renyi_a") return renyi_a(j.at("alpha").get<double>());
  if (kind == "renyi_b") return renyi_b(j.at("alpha").get<double>());
  if (kind == "casimir_function") return casimir_function_preset(j.at("phi").get<std::string>());
  throw std::runtime_error("functional json: unknown kind '" + kind + "'");
}

/// CSV with one row per step and floats at 17 significant digits.
inline void write_csv(const DiagnosticsTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  char buf[64];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  write_csv(diagnostics_table(traj), out);
}

}  // namespace nambu
