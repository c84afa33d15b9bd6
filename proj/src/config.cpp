#include "pwhom/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pwhom/errors.hpp"
#include "pwhom/format.hpp"

namespace pwh {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json cols = json::array();
    for (int c = 0; c < m.cols(); ++c)
      cols.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(cols);
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(where + ": matrix must be an array of rows");
  const int rows = int(j.size());
  const int cols = int(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (int(j[r].size()) != cols)
      throw ConfigError(where + ": ragged matrix rows");
    for (int c = 0; c < cols; ++c) {
      const json& e = j[r][c];
      if (!e.is_array() || e.size() != 2)
        throw ConfigError(where + ": entries must be [re, im] pairs");
      m(r, c) = cd(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

Mode mode_from_json(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || int(j.size()) != dim)
    throw ConfigError(where + ": mode index must have " + std::to_string(dim) +
                      " entries");
  Mode k{0, 0};
  for (int i = 0; i < dim; ++i) k[i] = j[i].get<int>();
  return k;
}

PeriodicField field_from_json(const Lattice& lat, const json& j,
                              const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError(where + ": coefficient needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    if (!j.contains("matrix")) throw ConfigError(where + ": missing \"matrix\"");
    return field_constant(lat, matrix_from_json(j.at("matrix"), where));
  }
  if (kind == "fourier") {
    if (!j.contains("rows") || !j.contains("cols"))
      throw ConfigError(where + ": fourier kind needs \"rows\" and \"cols\"");
    std::vector<std::pair<Mode, Eigen::MatrixXcd>> modes;
    for (const auto& e : j.value("modes", json::array()))
      modes.push_back({mode_from_json(e.at("k"), lat.dim, where),
                       matrix_from_json(e.at("matrix"), where)});
    return field_from_fourier(lat, j.at("rows").get<int>(),
                              j.at("cols").get<int>(), modes);
  }
  if (kind == "grid") {
    for (const char* key : {"rows", "cols", "grid", "values"})
      if (!j.contains(key))
        throw ConfigError(where + ": grid kind needs \"" + key + "\"");
    std::vector<Eigen::MatrixXcd> values;
    for (const auto& e : j.at("values")) values.push_back(matrix_from_json(e, where));
    return field_from_grid(lat, j.at("rows").get<int>(), j.at("cols").get<int>(),
                           j.at("grid").get<int>(), values);
  }
  if (kind == "piecewise1d") {
    if (!j.contains("breaks") || !j.contains("values"))
      throw ConfigError(where + ": piecewise1d needs \"breaks\" and \"values\"");
    Piecewise1d pw;
    for (const auto& e : j.at("breaks")) pw.breaks.push_back(e.get<double>());
    for (const auto& e : j.at("values")) pw.values.push_back(matrix_from_json(e, where));
    return field_from_piecewise(lat, pw, j.value("cutoff", 16));
  }
  throw ConfigError(where + ": unknown kind \"" + kind + "\"");
}

Benchmark custom_benchmark(const json& j) {
  Benchmark bench;
  bench.name = j.value("name", std::string("custom"));
  if (!j.contains("dim")) throw ConfigError("custom benchmark: missing \"dim\"");
  const int dim = j.at("dim").get<int>();

  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(dim, dim);
  if (j.contains("lattice")) {
    const json& lj = j.at("lattice");
    if (int(lj.size()) != dim) throw ConfigError("\"lattice\" must be dim x dim");
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) basis(r, c) = lj[r][c].get<double>();
  }
  bench.lat = std::make_shared<Lattice>(make_lattice(basis));

  if (!j.contains("symbol_b")) throw ConfigError("custom benchmark: missing \"symbol_b\"");
  std::vector<Eigen::MatrixXcd> bmats;
  for (const auto& e : j.at("symbol_b"))
    bmats.push_back(matrix_from_json(e, "symbol_b"));
  bench.b = make_symbol(dim, bmats);

  if (!j.contains("coefficients"))
    throw ConfigError("custom benchmark: missing \"coefficients\"");
  const json& co = j.at("coefficients");
  if (!co.contains("g")) throw ConfigError("coefficients: missing \"g\"");
  bench.coeffs.g = field_from_json(*bench.lat, co.at("g"), "coefficients.g");
  if (co.contains("a")) {
    for (const auto& e : co.at("a"))
      bench.coeffs.a.push_back(field_from_json(*bench.lat, e, "coefficients.a"));
  }
  while (int(bench.coeffs.a.size()) < dim)
    bench.coeffs.a.push_back(field_from_fourier(*bench.lat, bench.b.n, bench.b.n, {}));
  if (int(bench.coeffs.a.size()) != dim)
    throw ConfigError("coefficients.a: expected " + std::to_string(dim) + " entries");
  bench.coeffs.Q = co.contains("Q")
                       ? field_from_json(*bench.lat, co.at("Q"), "coefficients.Q")
                       : field_from_fourier(*bench.lat, bench.b.n, bench.b.n, {});
  if (!co.contains("Q0")) throw ConfigError("coefficients: missing \"Q0\"");
  bench.coeffs.Q0 = field_from_json(*bench.lat, co.at("Q0"), "coefficients.Q0");
  return bench;
}

}  // namespace

Benchmark load_benchmark(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse failure: " + std::string(e.what()));
  }

  const std::string id = j.value("benchmark", std::string("custom"));
  Benchmark bench = id == "custom" ? custom_benchmark(j) : make_benchmark(id);

  if (j.contains("N_list")) {
    bench.N_list.clear();
    for (const auto& e : j.at("N_list")) bench.N_list.push_back(e.get<int>());
  }
  if (j.contains("t_list")) {
    bench.t_list.clear();
    for (const auto& e : j.at("t_list")) bench.t_list.push_back(e.get<double>());
  }
  if (j.contains("theorems")) {
    bench.theorems.clear();
    for (const auto& e : j.at("theorems"))
      bench.theorems.push_back(e.get<std::string>());
  }
  if (j.contains("cell_cutoff")) bench.cell_cutoff = j.at("cell_cutoff").get<int>();
  if (j.contains("beta_target")) bench.beta_target = j.at("beta_target").get<double>();
  if (j.contains("use_smoothing")) bench.use_smoothing = j.at("use_smoothing").get<bool>();
  if (j.contains("probe_max_mode"))
    bench.probe_max_mode = j.at("probe_max_mode").get<int>();
  if (j.contains("micro_cutoff")) bench.micro_cutoff = j.at("micro_cutoff").get<int>();
  return bench;
}

std::string cell_solution_to_json(const CellSolution& sol) {
  auto field_to_json = [](const PeriodicField& f) {
    json out;
    out["rows"] = f.rows;
    out["cols"] = f.cols;
    out["cutoff"] = f.cutoff;
    json modes = json::array();
    for (const auto& [k, m] : f.coeff) {
      json e;
      e["k"] = {k[0], k[1]};
      e["matrix"] = matrix_to_json(m);
      modes.push_back(e);
    }
    out["modes"] = modes;
    return out;
  };
  json j;
  j["lambda"] = field_to_json(sol.lambda);
  j["lambda_tilde"] = field_to_json(sol.lambda_tilde);
  j["g_tilde"] = field_to_json(sol.g_tilde);
  j["g0"] = matrix_to_json(sol.g0);
  j["V"] = matrix_to_json(sol.V);
  j["W"] = matrix_to_json(sol.W);
  j["Qbar"] = matrix_to_json(sol.Qbar);
  j["Q0bar"] = matrix_to_json(sol.Q0bar);
  json sa = json::array();
  for (const auto& m : sol.sum_a) sa.push_back(matrix_to_json(m));
  j["sum_a"] = sa;
  return j.dump(2);
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config_path;
  j["seed"] = manifest.seed;
  j["threads"] = manifest.threads;
  j["out_dir"] = manifest.out_dir;
  j["tool_version"] = manifest.tool_version;
  j["wall_seconds"] = manifest.wall_seconds;
  j["outputs"] = manifest.outputs;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write manifest to '" + tmp + "'");
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace pwh
