#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pwhom/config.hpp"
#include "pwhom/errors.hpp"
#include "pwhom/format.hpp"

namespace fs = std::filesystem;
using namespace pwh;

namespace {

struct CommonOpts {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config, "config file (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--threads", opts.threads, "worker threads for sweep points");
}

void print_matrix(const std::string& name, const Eigen::MatrixXcd& m) {
  std::cout << name << " =";
  if (m.rows() == 1 && m.cols() == 1) {
    std::cout << " " << fmt17(m(0, 0).real());
    if (std::abs(m(0, 0).imag()) > 0.0)
      std::cout << " + " << fmt17(m(0, 0).imag()) << "i";
    std::cout << "\n";
    return;
  }
  std::cout << "\n";
  for (int r = 0; r < m.rows(); ++r) {
    std::cout << "  ";
    for (int c = 0; c < m.cols(); ++c) {
      std::cout << fmt17(m(r, c).real());
      if (std::abs(m(r, c).imag()) > 0.0) std::cout << "+" << fmt17(m(r, c).imag()) << "i";
      std::cout << (c + 1 < m.cols() ? ", " : "");
    }
    std::cout << "\n";
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

double voigt_reuss_margin(const Eigen::MatrixXcd& hi, const Eigen::MatrixXcd& lo) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      Eigen::MatrixXcd(0.5 * ((hi - lo) + (hi - lo).adjoint())));
  return es.eigenvalues().minCoeff();
}

int cmd_cell(const CommonOpts& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Benchmark bench = load_benchmark(opts.config);
  const CellSolution sol =
      effective_assembly(bench.coeffs.g, bench.b, bench.coeffs.a, bench.coeffs.Q,
                         bench.coeffs.Q0, bench.cell_cutoff);

  std::cout << "benchmark: " << bench.name << "\n";
  print_matrix("g0", sol.g0);
  std::cout << "lambda_field_norm = " << fmt17(field_l2_norm(sol.lambda)) << "\n";
  std::cout << "lambda_tilde_field_norm = "
            << fmt17(field_l2_norm(sol.lambda_tilde)) << "\n";
  print_matrix("V", sol.V);
  print_matrix("W", sol.W);
  print_matrix("Qbar", sol.Qbar);
  print_matrix("Q0bar", sol.Q0bar);

  const Eigen::MatrixXcd gbar = cell_average(bench.coeffs.g);
  const Eigen::MatrixXcd gunder = harmonic_mean(bench.coeffs.g);
  std::cout << "voigt_reuss_margin_upper = "
            << fmt17(voigt_reuss_margin(gbar, sol.g0)) << "\n";
  std::cout << "voigt_reuss_margin_lower = "
            << fmt17(voigt_reuss_margin(sol.g0, gunder)) << "\n";

  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_file(out / "cell.json", cell_solution_to_json(sol));
    RunManifest man;
    man.command = "cell";
    man.config_path = opts.config;
    man.seed = opts.seed;
    man.threads = opts.threads;
    man.out_dir = opts.out_dir;
    man.outputs = {"cell.json"};
    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest((out / "manifest.json").string(), man);
  }
  return 0;
}

int run_sweep(const CommonOpts& opts, const std::string& command,
              const std::vector<std::string>& force_theorems) {
  const auto t0 = std::chrono::steady_clock::now();
  Benchmark bench = load_benchmark(opts.config);
  bench.seed = opts.seed;
  bench.threads = opts.threads;
  if (!force_theorems.empty()) bench.theorems = force_theorems;

  const SweepResult res = converge_sweep(bench);

  std::cout << "benchmark: " << bench.name << "  lambda = "
            << fmt17(res.lambda_used) << "\n";
  for (const auto& [key, fit] : res.rates) {
    std::cout << std::get<0>(key) << " [" << std::get<1>(key)
              << "] t=" << fmt17(std::get<2>(key));
    if (fit.exact)
      std::cout << "  exact (errors at numerical floor)\n";
    else
      std::cout << "  slope=" << fmt17(fit.slope) << "  R2=" << fmt17(fit.r2)
                << "\n";
  }
  for (const auto& r : res.rows)
    std::cout << "  " << r.theorem_tag << " t=" << fmt17(r.t)
              << " eps=" << fmt17(r.epsilon)
              << " err=" << fmt17(r.normalized_error) << " err/(1+t)="
              << fmt17(r.normalized_error / (1.0 + std::abs(r.t))) << "\n";

  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_file(out / "errors.csv", errors_csv(res));
    write_file(out / "rates.csv", rates_csv(res));
    write_file(out / "diagnostics.csv", diagnostics_csv(res));
    RunManifest man;
    man.command = command;
    man.config_path = opts.config;
    man.seed = opts.seed;
    man.threads = opts.threads;
    man.out_dir = opts.out_dir;
    man.outputs = {"errors.csv", "rates.csv", "diagnostics.csv"};
    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest((out / "manifest.json").string(), man);
  }
  return 0;
}

int cmd_oracle(int n, std::uint64_t seed, double t, int quad) {
  for (int q : {8, 16, 32, quad}) {
    const OracleReport rep = trotter_kato_oracle(n, seed, t, q);
    std::cout << "quad_points=" << q << "  four_term_residual="
              << fmt17(rep.resid_four)
              << "  seven_term_residual=" << fmt17(rep.resid_seven)
              << "  zero_corrector_collapse=" << fmt17(rep.collapse) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pwhom: effective operators and convergence-rate studies for "
               "periodic second-order systems"};
  app.require_subcommand(1);

  CommonOpts cell_opts, conv_opts, flux_opts, schro_opts;
  auto* cell = app.add_subcommand("cell", "solve the cell problems, print the "
                                          "effective coefficients");
  add_common(cell, cell_opts);
  auto* conv = app.add_subcommand("converge", "run the configured convergence "
                                              "sweep, write CSV tables");
  add_common(conv, conv_opts);
  auto* flux = app.add_subcommand("flux", "flux-approximation sweep");
  add_common(flux, flux_opts);
  auto* schro = app.add_subcommand("schrodinger", "Schrodinger-group sweep");
  add_common(schro, schro_opts);

  auto* oracle = app.add_subcommand("oracle", "matrix-scale semigroup identity "
                                              "check");
  int oracle_n = 6, oracle_quad = 128;
  std::uint64_t oracle_seed = 1;
  double oracle_t = 2.0;
  oracle->add_option("--n", oracle_n, "block size");
  oracle->add_option("--seed", oracle_seed, "random seed");
  oracle->add_option("--t", oracle_t, "time horizon");
  oracle->add_option("--quad", oracle_quad, "quadrature points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cell->parsed()) return cmd_cell(cell_opts);
    if (conv->parsed()) return run_sweep(conv_opts, "converge", {});
    if (flux->parsed()) return run_sweep(flux_opts, "flux", {"flux_s1"});
    if (schro->parsed())
      return run_sweep(schro_opts, "schrodinger", {"schrodinger_H3"});
    if (oracle->parsed())
      return cmd_oracle(oracle_n, oracle_seed, oracle_t, oracle_quad);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
