#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "pwhom/errors.hpp"
#include "pwhom/fields.hpp"

using namespace pwh;
constexpr double pi = std::numbers::pi;

namespace {

const Lattice lat1 = make_lattice(Eigen::MatrixXd::Identity(1, 1));
const Lattice lat2 = make_lattice(Eigen::MatrixXd::Identity(2, 2));

Eigen::MatrixXcd sc(cd v) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = v;
  return m;
}

PeriodicField random_field(const Lattice& lat, int rows, int cols, int K,
                           std::mt19937_64& rng, bool hermitian = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::pair<Mode, Eigen::MatrixXcd>> modes;
  const int k1 = lat.dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -k1; b <= k1; ++b) {
      if (hermitian && (a < 0 || (a == 0 && b < 0))) continue;
      Eigen::MatrixXcd m(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = cd(g(rng), g(rng));
      modes.push_back({{a, b}, m});
      if (hermitian && !(a == 0 && b == 0)) modes.push_back({{-a, -b}, m.adjoint()});
      if (hermitian && a == 0 && b == 0) modes.back().second = 0.5 * (m + m.adjoint());
    }
  return field_from_fourier(lat, rows, cols, modes);
}

TorusFunction random_torus(const Lattice& lat, int n, int K, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  TorusFunction u = torus_zero(lat, n);
  const int k1 = lat.dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -k1; b <= k1; ++b) {
      Eigen::VectorXcd v(n);
      for (int c = 0; c < n; ++c) v(c) = cd(g(rng), g(rng));
      u.coeff[{a, b}] = v;
    }
  return u;
}

}  // namespace

TEST_CASE("grid synthesis basics") {
  const PeriodicField c = field_constant(lat1, sc(3.5));
  for (const auto& v : eval_on_grid(c, 8))
    CHECK(std::abs(v(0, 0) - cd(3.5)) < 1e-14);

  const PeriodicField one_mode =
      field_from_fourier(lat1, 1, 1, {{Mode{1, 0}, sc(1.0)}});
  const auto vals = eval_on_grid(one_mode, 8);
  for (int j = 0; j < 8; ++j)
    CHECK(std::abs(vals[j](0, 0) - std::polar(1.0, 2 * pi * j / 8.0)) < 1e-14);

  CHECK_THROWS_AS(eval_on_grid(one_mode, 2), GridTooCoarse);
}

TEST_CASE("grid ingestion round trip") {
  std::mt19937_64 rng(3);
  const PeriodicField f = random_field(lat1, 2, 2, 3, rng);
  const int grid = 4 * f.cutoff + 1;
  const auto vals = eval_on_grid(f, grid);
  const PeriodicField back = field_from_grid(lat1, 2, 2, grid, vals);
  for (const auto& [k, m] : f.coeff)
    CHECK((back.at(k) - m).cwiseAbs().maxCoeff() < 1e-12);

  // 2D round trip
  const PeriodicField f2 = random_field(lat2, 1, 1, 2, rng);
  const auto vals2 = eval_on_grid(f2, 4 * f2.cutoff + 1);
  const PeriodicField back2 = field_from_grid(lat2, 1, 1, 4 * f2.cutoff + 1, vals2);
  for (const auto& [k, m] : f2.coeff)
    CHECK((back2.at(k) - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rescale_eps moves modes and conserves the Parseval norm") {
  std::mt19937_64 rng(4);
  const PeriodicField f = random_field(lat1, 1, 1, 5, rng);

  const PeriodicField same = rescale_eps(f, 1);
  for (const auto& [k, m] : f.coeff)
    CHECK((same.at(k) - m).cwiseAbs().maxCoeff() == 0.0);

  const PeriodicField f4 = rescale_eps(
      field_from_fourier(lat1, 1, 1, {{Mode{1, 0}, sc(2.0)}}), 4);
  CHECK(f4.at({4, 0})(0, 0) == cd(2.0));
  CHECK(f4.at({1, 0})(0, 0) == cd(0.0));
  CHECK(f4.cutoff == 4);

  const PeriodicField f8 = rescale_eps(f, 8);
  CHECK(field_l2_norm(f8) == doctest::Approx(field_l2_norm(f)).epsilon(1e-14));
}

TEST_CASE("cell averages and harmonic means") {
  const PeriodicField c = field_constant(lat1, sc(2.5));
  CHECK(cell_average(c)(0, 0) == cd(2.5));
  CHECK(std::abs(harmonic_mean(c)(0, 0) - cd(2.5)) < 1e-14);

  // two-phase data given as grid samples: exact quadrature of g and 1/g
  std::vector<Eigen::MatrixXcd> samples;
  for (int j = 0; j < 8; ++j) samples.push_back(sc(j < 4 ? 1.0 : 4.0));
  const PeriodicField g = field_from_grid(lat1, 1, 1, 8, samples);
  CHECK(std::abs(cell_average(g)(0, 0) - cd(2.5)) < 1e-14);
  CHECK(std::abs(harmonic_mean(g)(0, 0) - cd(1.6)) < 1e-14);

  // same data as an exact piecewise description
  Piecewise1d pw;
  pw.breaks = {0.0, 0.5};
  pw.values = {sc(1.0), sc(4.0)};
  const PeriodicField gpw = field_from_piecewise(lat1, pw, 16);
  CHECK(std::abs(cell_average(gpw)(0, 0) - cd(2.5)) < 1e-14);
  CHECK(std::abs(harmonic_mean(gpw)(0, 0) - cd(1.6)) < 1e-14);

  // mean of 2 + cos(2 pi x) is 2
  const PeriodicField gc = field_from_fourier(
      lat1, 1, 1,
      {{Mode{0, 0}, sc(2.0)}, {Mode{1, 0}, sc(0.5)}, {Mode{-1, 0}, sc(0.5)}});
  CHECK(std::abs(cell_average(gc)(0, 0) - cd(2.0)) < 1e-15);

  const PeriodicField zero = field_constant(lat1, sc(0.0));
  CHECK_THROWS_AS(harmonic_mean(zero), SingularPointwise);
}

TEST_CASE("piecewise closed-form coefficients match grid analysis") {
  Piecewise1d pw;
  pw.breaks = {0.0, 0.3, 0.7};
  pw.values = {sc(1.0), sc(cd(2.0, 0.5)), sc(-0.5)};
  const PeriodicField f = field_from_piecewise(lat1, pw, 6);
  // oracle: dense Riemann sums
  const int G = 20000;
  for (int k = -6; k <= 6; ++k) {
    cd acc = 0.0;
    for (int j = 0; j < G; ++j) {
      const double x = (j + 0.5) / G;
      const cd val = x < 0.3 ? cd(1.0) : (x < 0.7 ? cd(2.0, 0.5) : cd(-0.5));
      acc += val * std::polar(1.0, -2 * pi * k * x);
    }
    acc /= double(G);
    CHECK(std::abs(f.at({k, 0})(0, 0) - acc) < 1e-7);
  }
}

TEST_CASE("field products match grid products") {
  std::mt19937_64 rng(5);
  const PeriodicField f = random_field(lat1, 2, 3, 2, rng);
  const TorusFunction u = random_torus(lat1, 3, 3, rng);
  const TorusFunction fu = multiply(f, u);

  const int grid = 4 * (f.cutoff + 3) + 1;
  const auto fv = eval_on_grid(f, grid);
  const auto uv = eval_on_grid(u, grid);
  const auto pv = eval_on_grid(fu, grid);
  for (int j = 0; j < grid; ++j)
    CHECK((fv[j] * uv[j] - pv[j]).cwiseAbs().maxCoeff() < 1e-10);

  // scalar exponent addition
  const PeriodicField e1 = field_from_fourier(lat1, 1, 1, {{Mode{1, 0}, sc(1.0)}});
  const TorusFunction e1u = torus_single_mode(lat1, 1, {1, 0}, Eigen::VectorXcd::Ones(1));
  const TorusFunction prod = multiply(e1, e1u);
  CHECK(prod.coeff.size() == 1);
  CHECK(std::abs(prod.coeff.at({2, 0})(0) - cd(1.0)) < 1e-15);

  CHECK_THROWS_AS(multiply(random_field(lat1, 2, 2, 1, rng), u), ShapeMismatch);
}

TEST_CASE("smoothing projection") {
  std::mt19937_64 rng(6);
  // idempotence and norm contraction
  const TorusFunction u = random_torus(lat1, 2, 9, rng);
  const TorusFunction pu = apply_smoothing(u, 4);
  const TorusFunction ppu = apply_smoothing(pu, 4);
  CHECK(l2_norm(sub(pu, ppu)) == 0.0);
  CHECK(l2_norm(pu) <= l2_norm(u) + 1e-15);

  // cubic d=1, N=4: zone edge at |k| = 2: mode 1 kept, mode 3 dropped
  TorusFunction v = torus_zero(lat1, 1);
  v.coeff[{1, 0}] = Eigen::VectorXcd::Ones(1);
  v.coeff[{3, 0}] = Eigen::VectorXcd::Ones(1);
  const TorusFunction pv = apply_smoothing(v, 4);
  CHECK(pv.coeff.count({1, 0}) == 1);
  CHECK(pv.coeff.count({3, 0}) == 0);

  // fully retained band-limited data: projection acts as the identity
  const TorusFunction w = random_torus(lat1, 1, 1, rng);
  CHECK(l2_norm(sub(apply_smoothing(w, 4), w)) == 0.0);

  // Pi commutes with differentiation
  const TorusFunction d_pu = apply_Dj(apply_smoothing(u, 4), 0);
  const TorusFunction p_du = apply_smoothing(apply_Dj(u, 0), 4);
  CHECK(l2_norm(sub(d_pu, p_du)) == 0.0);
}

TEST_CASE("smoothing error bound eps/r0 * ||Du||") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Lattice& lat = trial % 2 == 0 ? lat1 : lat2;
    const TorusFunction u = random_torus(lat, 1, 6, rng);
    const int N = 2 + int(rng() % 6);
    const double eps = 1.0 / N;
    const double lhs = l2_norm(sub(apply_smoothing(u, N), u));
    CHECK(lhs <= eps / lat.r0 * grad_norm(u) + 1e-12);
  }
}

TEST_CASE("multiplier bound for [f^eps] Pi_eps on H^-kappa") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const PeriodicField f = random_field(lat1, 1, 1, 4, rng);
    const int N = 3 + int(rng() % 6);
    const PeriodicField f_eps = rescale_eps(f, N);
    const TorusFunction u = random_torus(lat1, 1, 2 * N, rng);
    const TorusFunction w = multiply(f_eps, apply_smoothing(u, N));
    const double fnorm = field_l2_norm(f);
    for (double kappa : {0.0, 1.0}) {
      CHECK(sobolev_norm(w, -kappa) <=
            fnorm * sobolev_norm(apply_smoothing(u, N), -kappa) * (1 + 1e-9) + 1e-12);
      CHECK(sobolev_norm(w, -kappa) <=
            fnorm * sobolev_norm(u, -kappa) * (1 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("sobolev norms") {
  const TorusFunction single =
      torus_single_mode(lat1, 1, {2, 0}, Eigen::VectorXcd::Ones(1));
  const double xi2 = std::pow(2 * pi * 2, 2);
  for (double s : {-2.0, -1.0, 0.0, 1.0, 3.0})
    CHECK(sobolev_norm(single, s) ==
          doctest::Approx(std::pow(1 + xi2, s / 2)).epsilon(1e-13));

  std::mt19937_64 rng(9);
  const TorusFunction u = random_torus(lat2, 2, 3, rng);
  CHECK(sobolev_norm(u, 0.0) == doctest::Approx(l2_norm(u)).epsilon(1e-14));
  // H1 identity: ||u||_1^2 = ||u||_0^2 + ||Du||^2
  const double h1 = sobolev_norm(u, 1.0);
  CHECK(h1 * h1 == doctest::Approx(l2_norm(u) * l2_norm(u) +
                                   grad_norm(u) * grad_norm(u)).epsilon(1e-12));
  CHECK_THROWS_AS(sobolev_norm(u, 4.0), ShapeMismatch);
}

TEST_CASE("hermitian-valued fields stay hermitian") {
  std::mt19937_64 rng(10);
  const PeriodicField f = random_field(lat1, 2, 2, 3, rng, /*hermitian=*/true);
  CHECK(field_is_hermitian(f));
  const Eigen::MatrixXcd avg = cell_average(f);
  CHECK((avg - avg.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(field_is_hermitian(rescale_eps(f, 4)));
}
