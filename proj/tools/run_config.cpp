#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fracstab/error.hpp"

namespace fracstab::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::config, message, field);
}

const json* member(const json& obj, const char* key, const std::string& path, bool required) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) fail(path + "." + key, "missing");
    return nullptr;
  }
  return &*it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

template <typename T>
void read(const json& obj, const char* key, const std::string& path, T& out, bool required = false) {
  const json* v = member(obj, key, path, required);
  if (!v) return;
  const std::string field = path + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v->is_boolean()) fail(field, "expected true or false");
    out = v->get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v->is_string()) fail(field, "expected a string");
    out = v->get<std::string>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v->is_number_unsigned()) fail(field, "expected a nonnegative integer");
    out = v->get<std::uint64_t>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v->is_number_integer()) fail(field, "expected an integer");
    out = v->get<T>();
  } else {
    out = number(*v, field);
  }
}

Matrix read_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of rows");
  const auto rows = v.size();
  Matrix m(rows, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) fail(row_path, "expected an array");
    if (v[i].size() != rows)
      fail(row_path, "row has " + std::to_string(v[i].size()) + " entries, expected " + std::to_string(rows));
    for (std::size_t k = 0; k < rows; ++k)
      m(i, k) = number(v[i][k], row_path + "[" + std::to_string(k) + "]");
  }
  return m;
}

Vector read_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  const json& sys = *member(j, "system", "config", true);
  c.A = read_matrix(*member(sys, "A", "system", true), "system.A");
  c.rho = read_vector(*member(sys, "rho", "system", true), "system.rho");
  read(sys, "alpha", "system", c.alpha, true);
  read(sys, "p", "system", c.p);
  if (const json* co = member(sys, "coefficients", "system", false)) {
    const std::string path = "system.coefficients";
    auto& cc = c.coefficients;
    read(*co, "family", path, cc.family, true);
    if (cc.family == "linear") {
      const auto n = c.A.rows();
      const auto mat = [&](const char* key) {
        const json* v = member(*co, key, path, false);
        return v ? read_matrix(*v, path + "." + key) : Matrix(Matrix::Zero(n, n));
      };
      cc.G = mat("G");
      cc.B = mat("B");
      cc.S = mat("S");
    } else if (cc.family == "bounded_smooth") {
      read(*co, "c_g", path, cc.c_g);
      read(*co, "c_b", path, cc.c_b);
      read(*co, "c_s", path, cc.c_s);
    } else if (cc.family == "additive_noise") {
      read(*co, "s", path, cc.s, true);
    } else if (cc.family != "zero") {
      fail(path + ".family", "unknown family '" + cc.family + "' (zero, linear, bounded_smooth, additive_noise)");
    }
  }
  if (const json* g = member(j, "grid", "config", false)) {
    read(*g, "T", "grid", c.T);
    read(*g, "N", "grid", c.N);
  }
  if (const json* mc = member(j, "monte_carlo", "config", false)) {
    read(*mc, "n_paths", "monte_carlo", c.n_paths);
    read(*mc, "master_seed", "monte_carlo", c.master_seed);
    read(*mc, "scheme", "monte_carlo", c.scheme);
    read(*mc, "as_printed", "monte_carlo", c.as_printed);
  }
  if (const json* cr = member(j, "criteria", "config", false)) {
    read(*cr, "epsilon", "criteria", c.epsilon);
    read(*cr, "window_fraction", "criteria", c.window_fraction);
    read(*cr, "tail_tol", "criteria", c.tail_tol);
    read(*cr, "scale_rho_to_delta", "criteria", c.scale_rho_to_delta);
    if (const json* m = member(*cr, "M_override", "criteria", false); m && !m->is_null())
      c.M_override = number(*m, "criteria.M_override");
  }
  if (const json* out = member(j, "output", "config", false)) {
    read(*out, "directory", "output", c.directory);
    read(*out, "emit_paths", "output", c.emit_paths);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open config file " + path, "--config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("malformed JSON: ") + e.what(), "--config");
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json co = {{"family", c.coefficients.family}};
  const auto& cc = c.coefficients;
  if (cc.family == "linear") {
    co["G"] = matrix_json(cc.G);
    co["B"] = matrix_json(cc.B);
    co["S"] = matrix_json(cc.S);
  } else if (cc.family == "bounded_smooth") {
    co["c_g"] = cc.c_g;
    co["c_b"] = cc.c_b;
    co["c_s"] = cc.c_s;
  } else if (cc.family == "additive_noise") {
    co["s"] = cc.s;
  }
  json j;
  j["system"] = {{"A", matrix_json(c.A)}, {"rho", vector_json(c.rho)}, {"alpha", c.alpha}, {"p", c.p},
                 {"coefficients", co}};
  j["grid"] = {{"T", c.T}, {"N", c.N}};
  j["monte_carlo"] = {{"n_paths", c.n_paths}, {"master_seed", c.master_seed}, {"scheme", c.scheme},
                      {"as_printed", c.as_printed}};
  j["criteria"] = {{"epsilon", c.epsilon},
                   {"window_fraction", c.window_fraction},
                   {"tail_tol", c.tail_tol},
                   {"scale_rho_to_delta", c.scale_rho_to_delta},
                   {"M_override", c.M_override ? json(*c.M_override) : json(nullptr)}};
  j["output"] = {{"directory", c.directory}, {"emit_paths", c.emit_paths}};
  return j;
}

void RunConfig::validate() const {
  if (!(alpha > 0.5 && alpha <= 1.0))
    fail("system.alpha", "alpha must lie in (1/2, 1]; the model is posed for orders in (1/2, 1), "
                         "and 1 is admitted for classical checks");
  if (p < 2) fail("system.p", "p must be an integer >= 2");
  if (rho.size() != A.rows()) fail("system.rho", "length must match the dimension of A");
  if (!(T > 0.0)) fail("grid.T", "must be positive");
  if (N < 2) fail("grid.N", "must be >= 2");
  if (n_paths < 1) fail("monte_carlo.n_paths", "must be >= 1");
  if (scheme != "mild" && scheme != "integral_form" && scheme != "picard")
    fail("monte_carlo.scheme", "expected mild, integral_form or picard");
  if (!(epsilon > 0.0)) fail("criteria.epsilon", "must be positive");
  if (!(window_fraction > 0.0 && window_fraction < 1.0)) fail("criteria.window_fraction", "must lie in (0, 1)");
  if (!(tail_tol > 0.0)) fail("criteria.tail_tol", "must be positive");
  if (M_override && !(*M_override > 0.0)) fail("criteria.M_override", "must be positive");
  if (directory.empty()) fail("output.directory", "must not be empty");
  const auto n = A.rows();
  if (coefficients.family == "linear")
    for (const auto& [m, key] : {std::pair{&coefficients.G, "G"}, std::pair{&coefficients.B, "B"},
                                 std::pair{&coefficients.S, "S"}})
      if (m->rows() != n) fail(std::string("system.coefficients.") + key, "dimension must match A");
}

SystemSpec RunConfig::system() const {
  const int n = static_cast<int>(A.rows());
  CoefficientSet coeffs;
  const auto& cc = coefficients;
  if (cc.family == "linear") coeffs = make_linear(cc.G, cc.B, cc.S);
  else if (cc.family == "bounded_smooth") coeffs = make_bounded_smooth(n, cc.c_g, cc.c_b, cc.c_s);
  else if (cc.family == "additive_noise") coeffs = make_additive_noise(n, cc.s);
  else coeffs = make_zero(n);
  return SystemSpec{A, rho, coeffs, FractionalOrder{alpha, p}};
}

}  // namespace fracstab::cli
