#ifndef PWHOM_HARNESS_HPP
#define PWHOM_HARNESS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <tuple>

#include "pwhom/homog.hpp"

namespace pwh {

// A benchmark is the full problem description a sweep runs on. It owns the
// lattice so that the fields' back-references stay valid across copies.
struct Benchmark {
  std::string name;
  std::shared_ptr<Lattice> lat;
  SymbolSpec b;
  CoefficientSet coeffs;
  int cell_cutoff = 64;
  std::vector<int> N_list;
  std::vector<double> t_list;
  std::vector<std::string> theorems;
  double beta_target = 0.1;
  bool use_smoothing = true;
  std::uint64_t seed = 1;
  int threads = 1;
  int probe_max_mode = 3;
  // The mode sets grow like N * max(coefficient cutoff, micro_cutoff) + 2;
  // raise micro_cutoff when the cell solutions decay slowly relative to the
  // coefficient bandwidth.
  int micro_cutoff = 0;
};

struct Probe {
  std::string name;
  TorusFunction phi, psi;
};

// One errors.csv row: the worst normalized error over the probe set.
struct SweepRow {
  std::string theorem_tag, norm;
  double t = 0.0, epsilon = 0.0;
  double error = 0.0, normalized_error = 0.0;
  std::string datum;
};

struct RateFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  int points = 0;
  bool exact = false;
};

struct DiagnosticsRow {
  int N = 0, K_big = 0, dim = 0;
  double lambda = 0.0, beta = 0.0, c_star = 0.0, cond = 0.0, herm_defect = 0.0;
};

using RateKey = std::tuple<std::string, std::string, double>;  // tag, norm, t

struct SweepResult {
  std::string benchmark;
  std::vector<SweepRow> rows;
  std::map<RateKey, RateFit> rates;
  std::vector<DiagnosticsRow> diagnostics;
  double lambda_used = 0.0;
  CellSolution cell;  // Galerkin cell data the sweep was built on
};

// Builds cell data, picks lambda, then per epsilon assembles both operators
// once and evaluates every requested theorem tag on the probe set.
SweepResult converge_sweep(const Benchmark& bench);

// Least squares of log(error) against log(eps). Requires >= 3 points with
// all errors > 1e-13; DegenerateFit otherwise.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// Deterministic probe construction (4 low-mode + 4 seeded band-limited).
std::vector<Probe> make_probes(const Benchmark& bench);
// Probes with a power-law Fourier tail |v^(k)| = (1+|xi_k|^2)^{-q}; the
// interpolated-norm and group tags draw their worst case from the movable
// saturation band such data provides.
std::vector<Probe> make_rough_probes(const Benchmark& bench, int max_mode,
                                     double q);

struct OracleReport {
  double resid_four = 0.0;    // relative residual of the 4-term identity
  double resid_seven = 0.0;   // relative residual of the 7-term identity
  double collapse = 0.0;      // |RHS7 - RHS4| / scale with the corrector zeroed
};

// Matrix-scale check of the semigroup-difference identities on random
// Hermitian positive definite stand-ins with a random corrector block.
OracleReport trotter_kato_oracle(int n, std::uint64_t seed, double t,
                                 int quad_points);

// CSV output; column orders are fixed.
std::string errors_csv(const SweepResult& res);
std::string rates_csv(const SweepResult& res);
std::string diagnostics_csv(const SweepResult& res);

}  // namespace pwh

#endif
