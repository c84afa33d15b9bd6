#include "pwhom/benchmarks.hpp"

#include "pwhom/errors.hpp"

namespace pwh {

namespace {

using ModeList = std::vector<std::pair<Mode, Eigen::MatrixXcd>>;

Eigen::MatrixXcd scalar(cd v) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = v;
  return m;
}

// real cos/sin mode pairs for scalar fields
void add_cos(ModeList& list, const Mode& k, double amp) {
  list.push_back({k, scalar(0.5 * amp)});
  list.push_back({{-k[0], -k[1]}, scalar(0.5 * amp)});
}
void add_sin(ModeList& list, const Mode& k, double amp) {
  list.push_back({k, scalar(cd(0.0, -0.5 * amp))});
  list.push_back({{-k[0], -k[1]}, scalar(cd(0.0, 0.5 * amp))});
}

}  // namespace

Benchmark make_two_phase_1d(bool with_lower_order) {
  Benchmark bench;
  bench.name = with_lower_order ? "two_phase_1d" : "two_phase_1d_no_a";
  bench.lat = std::make_shared<Lattice>(make_lattice(Eigen::MatrixXd::Identity(1, 1)));
  bench.b = make_symbol(1, {Eigen::MatrixXcd::Identity(1, 1)});

  Piecewise1d gpw;
  gpw.breaks = {0.0, 0.5};
  gpw.values = {scalar(1.0), scalar(4.0)};
  bench.coeffs.g = field_from_piecewise(*bench.lat, gpw, 16);

  // the sin component pairs against the odd harmonics of 1/g and keeps the
  // effective coupling matrix V away from zero
  ModeList a_modes;
  if (with_lower_order) {
    add_cos(a_modes, {1, 0}, 0.3);
    add_sin(a_modes, {1, 0}, 0.1);
    add_sin(a_modes, {2, 0}, 0.1);
  }
  bench.coeffs.a = {field_from_fourier(*bench.lat, 1, 1, a_modes)};

  ModeList q_modes{{Mode{0, 0}, scalar(-0.5)}};
  add_cos(q_modes, {1, 0}, 0.4);
  bench.coeffs.Q = field_from_fourier(*bench.lat, 1, 1, q_modes);

  ModeList q0_modes{{Mode{0, 0}, scalar(1.0)}};
  add_cos(q0_modes, {1, 0}, 0.5);
  bench.coeffs.Q0 = field_from_fourier(*bench.lat, 1, 1, q0_modes);

  bench.cell_cutoff = 256;
  bench.N_list = {8, 16, 32, 64};
  bench.t_list = {1.0, 4.0};
  bench.theorems = {"cos_L2",          "sin_L2",        "sin_nocorr_H1",
                    "sin_corr_H1",     "resolvent_corr_H1", "cos_interp_r1",
                    "schrodinger_H3",  "flux_s1",       "sol_corr_H1"};
  // probe content beyond mode 2 dephases at the coarse end of the sweep
  // (t = 4), mixing saturated and linear regimes into the fit
  bench.probe_max_mode = 2;
  return bench;
}

Benchmark make_zero_corrector_2d() {
  Benchmark bench;
  bench.name = "zero_corrector_2d";
  bench.lat = std::make_shared<Lattice>(make_lattice(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXcd b1 = Eigen::MatrixXcd::Zero(2, 1);
  Eigen::MatrixXcd b2 = Eigen::MatrixXcd::Zero(2, 1);
  b1(0, 0) = 1.0;
  b2(1, 0) = 1.0;
  bench.b = make_symbol(2, {b1, b2});

  // g = [[1+s, -q], [-q, 1+s]] with s = d sin(2pi x1) cos(2pi x2) and
  // q = d cos(2pi x1) sin(2pi x2): both columns are divergence free, so
  // Lambda = 0 and g0 = mean(g) = I.
  const double d = 0.3;
  ModeList g_modes;
  auto add_entry = [&](const Mode& k, cd v11, cd v12) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = v11;
    m(1, 1) = v11;
    m(0, 1) = v12;
    m(1, 0) = v12;
    g_modes.push_back({k, m});
  };
  add_entry({0, 0}, 1.0, 0.0);
  // sin a cos b = (sin(a+b) + sin(a-b))/2, cos a sin b = (sin(a+b) - sin(a-b))/2
  // s modes
  const cd i(0.0, 1.0);
  add_entry({1, 1}, d / (4.0 * i), -d / (4.0 * i));
  add_entry({-1, -1}, -d / (4.0 * i), d / (4.0 * i));
  add_entry({1, -1}, d / (4.0 * i), d / (4.0 * i));
  add_entry({-1, 1}, -d / (4.0 * i), -d / (4.0 * i));
  bench.coeffs.g = field_from_fourier(*bench.lat, 2, 2, g_modes);

  // a1 = eta cos(2pi(x1+x2)), a2 = -a1: sum_j D_j a_j^* = 0, so Lambda~ = 0.
  const double eta = 0.2;
  ModeList a1_modes, a2_modes;
  add_cos(a1_modes, {1, 1}, eta);
  add_cos(a2_modes, {1, 1}, -eta);
  bench.coeffs.a = {field_from_fourier(*bench.lat, 1, 1, a1_modes),
                    field_from_fourier(*bench.lat, 1, 1, a2_modes)};

  ModeList q_modes;
  add_cos(q_modes, {1, 0}, 0.5);
  bench.coeffs.Q = field_from_fourier(*bench.lat, 1, 1, q_modes);

  ModeList q0_modes{{Mode{0, 0}, scalar(1.0)}};
  add_cos(q0_modes, {0, 1}, 0.4);
  bench.coeffs.Q0 = field_from_fourier(*bench.lat, 1, 1, q0_modes);

  bench.cell_cutoff = 12;
  bench.N_list = {4, 8, 16};
  bench.t_list = {1.0};
  bench.theorems = {"sol_corr_H1"};
  bench.probe_max_mode = 1;
  return bench;
}

Benchmark make_constant_1d() {
  Benchmark bench;
  bench.name = "constant_1d";
  bench.lat = std::make_shared<Lattice>(make_lattice(Eigen::MatrixXd::Identity(1, 1)));
  bench.b = make_symbol(1, {Eigen::MatrixXcd::Identity(1, 1)});
  bench.coeffs.g = field_constant(*bench.lat, scalar(2.0));
  bench.coeffs.a = {field_from_fourier(*bench.lat, 1, 1, {})};
  bench.coeffs.Q = field_from_fourier(*bench.lat, 1, 1, {});
  bench.coeffs.Q0 = field_constant(*bench.lat, scalar(1.0));
  bench.cell_cutoff = 32;
  bench.N_list = {4, 8, 16};
  bench.t_list = {1.0};
  bench.theorems = {"cos_L2", "sin_L2", "sol_corr_H1"};
  bench.probe_max_mode = 2;
  return bench;
}

Benchmark make_benchmark(const std::string& id) {
  if (id == "two_phase_1d") return make_two_phase_1d(true);
  if (id == "two_phase_1d_no_a") return make_two_phase_1d(false);
  if (id == "zero_corrector_2d") return make_zero_corrector_2d();
  if (id == "constant_1d") return make_constant_1d();
  throw ConfigError("unknown benchmark id '" + id + "'");
}

}  // namespace pwh
