#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "pwhom/cell.hpp"
#include "pwhom/errors.hpp"

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

SymbolSpec b_1d() { return make_symbol(1, {Eigen::MatrixXcd::Identity(1, 1)}); }

SymbolSpec b_grad_2d() {
  Eigen::MatrixXcd b1 = Eigen::MatrixXcd::Zero(2, 1), b2 = Eigen::MatrixXcd::Zero(2, 1);
  b1(0, 0) = 1.0;
  b2(1, 0) = 1.0;
  return make_symbol(2, {b1, b2});
}

PeriodicField two_phase_exact() {
  Piecewise1d pw;
  pw.breaks = {0.0, 0.5};
  pw.values = {sc(1.0), sc(4.0)};
  return field_from_piecewise(lat1, pw, 16);
}

// scalar Hermitian-positive random field with controlled contrast
PeriodicField random_positive_scalar(const Lattice& lat, int K, double contrast,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<Mode, Eigen::MatrixXcd>> modes{{Mode{0, 0}, sc(2.0)}};
  const int k1 = lat.dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -k1; b <= k1; ++b) {
      if (a < 0 || (a == 0 && b <= 0)) continue;
      const cd c = contrast * cd(u(rng), u(rng));
      modes.push_back({{a, b}, sc(c)});
      modes.push_back({{-a, -b}, sc(std::conj(c))});
    }
  return field_from_fourier(lat, 1, 1, modes);
}

// Hermitian positive 2x2 matrix field
PeriodicField random_positive_matrix(const Lattice& lat, int K, double contrast,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<Mode, Eigen::MatrixXcd>> modes;
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Identity(2, 2) * 2.0;
  mean(0, 1) = cd(0.2, 0.1);
  mean(1, 0) = std::conj(mean(0, 1));
  modes.push_back({{0, 0}, mean});
  const int k1 = lat.dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -k1; b <= k1; ++b) {
      if (a < 0 || (a == 0 && b <= 0)) continue;
      Eigen::MatrixXcd m(2, 2);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = contrast * cd(u(rng), u(rng));
      modes.push_back({{a, b}, m});
      modes.push_back({{-a, -b}, m.adjoint()});
    }
  return field_from_fourier(lat, 2, 2, modes);
}

double min_eig(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      Eigen::MatrixXcd(0.5 * (h + h.adjoint())));
  return es.eigenvalues().minCoeff();
}

PeriodicField zero_field(const Lattice& lat, int rows, int cols) {
  return field_from_fourier(lat, rows, cols, {});
}

}  // namespace

TEST_CASE("symbol spec validation") {
  const SymbolSpec b = b_grad_2d();
  CHECK(b.alpha0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.alpha1 == doctest::Approx(1.0).epsilon(1e-12));

  // symbol that is rank deficient in every direction: rejected
  Eigen::MatrixXcd low = Eigen::MatrixXcd::Zero(2, 2);
  low(0, 0) = 1.0;
  CHECK_THROWS_AS(make_symbol(2, {low, low}), ShapeMismatch);
}

TEST_CASE("constant g has zero cell solutions") {
  const PeriodicField g = field_constant(lat1, sc(2.0));
  const PeriodicField lam = solve_lambda(g, b_1d(), 16);
  CHECK(field_l2_norm(lam) < 1e-13);

  // constant a gives zero lambda~ as well
  const std::vector<PeriodicField> a{field_constant(lat1, sc(cd(0.4, 0.2)))};
  const PeriodicField lt = solve_lambda_tilde(g, b_1d(), a, 16);
  CHECK(field_l2_norm(lt) < 1e-13);
}

TEST_CASE("two-phase tent solution (exact 1D path)") {
  const PeriodicField g = two_phase_exact();
  const int K = 64;
  const PeriodicField lam = solve_lambda(g, b_1d(), K);

  CHECK(cell_average(lam).cwiseAbs().maxCoeff() < 1e-15);

  // oracle: b(D)Lambda = g_under/g - 1 is the odd square wave +0.6 / -0.6;
  // its Fourier coefficients are 1.2/(pi i k) at odd k, 0 at even k, so
  // Lambda^(k) = 1.2/(pi i k) / (2 pi k) at odd k.
  for (int k = -K; k <= K; ++k) {
    if (k == 0) continue;
    const cd expected =
        (k % 2 == 0) ? cd(0.0) : 1.2 / (pi * cd(0.0, 1.0) * double(k)) / (2 * pi * k);
    CHECK(std::abs(lam.at({k, 0})(0, 0) - expected) < 1e-13);
  }
}

TEST_CASE("two-phase Galerkin path on the band-limited coefficient") {
  const PeriodicField g = strip_exact(two_phase_exact());
  const int K = 192;
  const PeriodicField lam = solve_lambda(g, b_1d(), K);
  CHECK(cell_average(lam).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(lambda_residual(g, b_1d(), lam, K) < 1e-8);

  // effective coefficient close to (but not exactly) the harmonic mean of
  // the exact two-phase medium
  const CellSolution sol = effective_assembly(
      g, b_1d(), {zero_field(lat1, 1, 1)}, zero_field(lat1, 1, 1),
      field_constant(lat1, sc(1.0)), K);
  CHECK(std::abs(sol.g0(0, 0).real() - 1.6) < 0.05);
  // m = n: g0 equals the harmonic mean of the band-limited medium
  CHECK(std::abs(sol.g0(0, 0) - harmonic_mean(g)(0, 0)) < 2e-4);
}

TEST_CASE("lambda~ single-mode oracle") {
  // g = 1, a1 = cos(2 pi x): xi^2 L~(k) = -xi (a^(-k))^*
  const PeriodicField g = field_constant(lat1, sc(1.0));
  const std::vector<PeriodicField> a{field_from_fourier(
      lat1, 1, 1, {{Mode{1, 0}, sc(0.5)}, {Mode{-1, 0}, sc(0.5)}})};
  const PeriodicField lt = solve_lambda_tilde(g, b_1d(), a, 16);
  CHECK(std::abs(lt.at({1, 0})(0, 0) - cd(-0.5 / (2 * pi))) < 1e-12);
  CHECK(std::abs(lt.at({-1, 0})(0, 0) - cd(0.5 / (2 * pi))) < 1e-12);
  for (int k = 2; k <= 16; ++k) CHECK(std::abs(lt.at({k, 0})(0, 0)) < 1e-12);
}

TEST_CASE("exact path lambda~ matches the Galerkin path on low modes") {
  Piecewise1d apw;
  apw.breaks = {0.0, 0.25, 0.6};
  apw.values = {sc(0.3), sc(cd(-0.2, 0.1)), sc(0.1)};
  const PeriodicField g = two_phase_exact();
  const std::vector<PeriodicField> a{field_from_piecewise(lat1, apw, 16)};

  const int K = 128;
  const PeriodicField exact = solve_lambda_tilde(g, b_1d(), a, K);
  const PeriodicField galerkin =
      solve_lambda_tilde(strip_exact(g), b_1d(), {strip_exact(a[0])}, K);
  for (int k = -4; k <= 4; ++k) {
    if (k == 0) continue;
    CHECK(std::abs(exact.at({k, 0})(0, 0) - galerkin.at({k, 0})(0, 0)) < 2e-3);
  }
}

TEST_CASE("2D reduction to 1D for x1-dependent scalar g") {
  // g(x) = (1 + 0.5 cos(2 pi x1)) I_2 with the gradient symbol
  std::vector<std::pair<Mode, Eigen::MatrixXcd>> modes{
      {Mode{0, 0}, Eigen::MatrixXcd::Identity(2, 2)},
      {Mode{1, 0}, 0.25 * Eigen::MatrixXcd::Identity(2, 2)},
      {Mode{-1, 0}, 0.25 * Eigen::MatrixXcd::Identity(2, 2)}};
  const PeriodicField g2 = field_from_fourier(lat2, 2, 2, modes);
  const int K = 12;
  const PeriodicField lam2 = solve_lambda(g2, b_grad_2d(), K);

  const PeriodicField g1 = field_from_fourier(
      lat1, 1, 1,
      {{Mode{0, 0}, sc(1.0)}, {Mode{1, 0}, sc(0.25)}, {Mode{-1, 0}, sc(0.25)}});
  const PeriodicField lam1 = solve_lambda(g1, b_1d(), K);

  // column 1 reduces to the 1D solution along x1, column 2 vanishes
  for (int k = -K; k <= K; ++k) {
    if (k != 0)
      CHECK(std::abs(lam2.at({k, 0})(0, 0) - lam1.at({k, 0})(0, 0)) < 1e-9);
    for (int k2 = -K; k2 <= K; ++k2) {
      if (k2 == 0) continue;
      CHECK(lam2.at({k, k2}).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  for (const auto& [k, m] : lam2.coeff) CHECK(std::abs(m(0, 1)) < 1e-9);
}

TEST_CASE("effective assembly golden values") {
  const PeriodicField g = two_phase_exact();
  const std::vector<PeriodicField> a{zero_field(lat1, 1, 1)};
  const CellSolution sol = effective_assembly(
      g, b_1d(), a, zero_field(lat1, 1, 1), field_constant(lat1, sc(1.0)), 128);

  // m = n: g0 is the harmonic mean, exactly 1.6 on the exact path
  CHECK(std::abs(sol.g0(0, 0) - cd(1.6)) < 1e-12);
  // a = 0: V = W = 0, g~ is the constant g0
  CHECK(sol.V.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(sol.W.cwiseAbs().maxCoeff() < 1e-13);
  for (const auto& [k, m] : sol.g_tilde.coeff) {
    if (k[0] == 0) continue;
    CHECK(m.cwiseAbs().maxCoeff() < 1e-13);
  }

  // symbol at xi = 1 with lambda Q0bar = 1
  const Eigen::MatrixXcd L = symbol_L(sol, b_1d(), 1.0, {1.0, 0.0});
  CHECK(std::abs(L(0, 0) - cd(2.6)) < 1e-12);
  CHECK(std::abs(symbol_L(sol, b_1d(), 1.0, {0.0, 0.0})(0, 0) - cd(1.0)) < 1e-13);
}

TEST_CASE("constant coefficients give the bare symbol") {
  const PeriodicField g = field_constant(lat1, sc(2.0));
  const CellSolution sol = effective_assembly(
      g, b_1d(), {zero_field(lat1, 1, 1)}, zero_field(lat1, 1, 1),
      field_constant(lat1, sc(1.0)), 32);
  for (double xi : {0.3, 1.0, 4.0})
    CHECK(std::abs(symbol_L(sol, b_1d(), 1.0, {xi, 0.0})(0, 0) -
                   cd(2.0 * xi * xi + 1.0)) < 1e-12);
}

TEST_CASE("symbol hermiticity and structural invariants on random assemblies") {
  std::mt19937_64 rng(21);
  const PeriodicField g = random_positive_matrix(lat2, 1, 0.15, rng);
  std::vector<PeriodicField> a;
  for (int j = 0; j < 2; ++j) a.push_back(random_positive_scalar(lat2, 1, 0.1, rng));
  const PeriodicField Q = random_positive_scalar(lat2, 1, 0.2, rng);
  const PeriodicField Q0 = random_positive_scalar(lat2, 1, 0.1, rng);
  const CellSolution sol = effective_assembly(g, b_grad_2d(), a, Q, Q0, 10);

  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd L = symbol_L(sol, b_grad_2d(), 1.3, {u(rng), u(rng)});
    CHECK((L - L.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * L.cwiseAbs().maxCoeff());
  }

  // zero-mean constraints hold exactly
  CHECK(cell_average(sol.lambda).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(cell_average(sol.lambda_tilde).cwiseAbs().maxCoeff() < 1e-14);
  // W is a Gram-type average: positive semidefinite
  CHECK(min_eig(sol.W) > -1e-10);
}

TEST_CASE("Voigt-Reuss bracketing on random draws") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    // 1D, m = 2 > n = 1: strict bracketing
    Eigen::MatrixXcd b1(2, 1);
    b1 << 1.0, 1.0;
    const SymbolSpec b = make_symbol(1, {b1});
    const PeriodicField g = random_positive_matrix(lat1, 2, 0.2, rng);
    const CellSolution sol = effective_assembly(
        g, b, {zero_field(lat1, 1, 1)}, zero_field(lat1, 1, 1),
        field_constant(lat1, sc(1.0)), 48);
    CHECK(min_eig(cell_average(g) - sol.g0) > -1e-10);
    CHECK(min_eig(sol.g0 - harmonic_mean(g)) > -1e-10);
  }
  for (int trial = 0; trial < 10; ++trial) {
    // 2D acoustics, m = 2 > n = 1
    const PeriodicField g = random_positive_matrix(lat2, 1, 0.15, rng);
    const CellSolution sol = effective_assembly(
        g, b_grad_2d(), {zero_field(lat2, 1, 1), zero_field(lat2, 1, 1)},
        zero_field(lat2, 1, 1), field_constant(lat2, sc(1.0)), 10);
    CHECK(min_eig(cell_average(g) - sol.g0) > -1e-10);
    CHECK(min_eig(sol.g0 - harmonic_mean(g)) > -1e-10);
  }
}

TEST_CASE("m = n forces g0 = harmonic mean") {
  std::mt19937_64 rng(23);
  // smooth draws: both the Galerkin g0 and the grid quadrature of 1/g are
  // spectrally accurate at this contrast
  for (int trial = 0; trial < 5; ++trial) {
    const PeriodicField g = random_positive_scalar(lat1, 1, 0.05, rng);
    const CellSolution sol = effective_assembly(
        g, b_1d(), {zero_field(lat1, 1, 1)}, zero_field(lat1, 1, 1),
        field_constant(lat1, sc(1.0)), 64);
    CHECK(std::abs(sol.g0(0, 0) - harmonic_mean(g)(0, 0)) <
          1e-8 * std::abs(sol.g0(0, 0)));
  }
  // piecewise draws: the exact path makes the identity hold to roundoff
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    Piecewise1d pw;
    pw.breaks = {0.0, 0.2 + 0.1 * trial, 0.7};
    pw.values = {sc(u(rng)), sc(u(rng)), sc(u(rng))};
    const PeriodicField g = field_from_piecewise(lat1, pw, 16);
    const CellSolution sol = effective_assembly(
        g, b_1d(), {zero_field(lat1, 1, 1)}, zero_field(lat1, 1, 1),
        field_constant(lat1, sc(1.0)), 64);
    CHECK(std::abs(sol.g0(0, 0) - harmonic_mean(g)(0, 0)) <
          1e-12 * std::abs(sol.g0(0, 0)));
  }
  // 2D with the square symbol b(xi) = [[xi1, -xi2], [xi2, xi1]]
  Eigen::MatrixXcd b1(2, 2), b2(2, 2);
  b1 << 1.0, 0.0, 0.0, 1.0;
  b2 << 0.0, -1.0, 1.0, 0.0;
  const SymbolSpec b = make_symbol(2, {b1, b2});
  const PeriodicField g = random_positive_matrix(lat2, 1, 0.08, rng);
  const CellSolution sol = effective_assembly(
      g, b, {zero_field(lat2, 2, 2), zero_field(lat2, 2, 2)},
      zero_field(lat2, 2, 2),
      field_constant(lat2, Eigen::MatrixXcd::Identity(2, 2)), 12);
  CHECK((sol.g0 - harmonic_mean(g)).cwiseAbs().maxCoeff() <
        1e-6 * sol.g0.cwiseAbs().maxCoeff());
}

TEST_CASE("divergence-free columns force g0 = mean(g)") {
  // g = [[1+s, -q], [-q, 1+s]], s = d sin(2pi x1) cos(2pi x2),
  // q = d cos(2pi x1) sin(2pi x2); both columns satisfy b(D)^* g_k = 0.
  const double d = 0.3;
  const cd i(0.0, 1.0);
  std::vector<std::pair<Mode, Eigen::MatrixXcd>> modes;
  auto add = [&](Mode k, cd s_val, cd mq_val) {
    Eigen::MatrixXcd m(2, 2);
    m << s_val, mq_val, mq_val, s_val;
    modes.push_back({k, m});
  };
  add({0, 0}, 1.0, 0.0);
  add({1, 1}, d / (4.0 * i), -d / (4.0 * i));
  add({-1, -1}, -d / (4.0 * i), d / (4.0 * i));
  add({1, -1}, d / (4.0 * i), d / (4.0 * i));
  add({-1, 1}, -d / (4.0 * i), -d / (4.0 * i));
  const PeriodicField g = field_from_fourier(lat2, 2, 2, modes);

  const PeriodicField lam = solve_lambda(g, b_grad_2d(), 10);
  CHECK(field_l2_norm(lam) < 1e-10);
  const CellSolution sol = effective_assembly(
      g, b_grad_2d(), {zero_field(lat2, 1, 1), zero_field(lat2, 1, 1)},
      zero_field(lat2, 1, 1), field_constant(lat2, sc(1.0)), 10);
  CHECK((sol.g0 - cell_average(g)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("indefinite coefficient rejected") {
  const PeriodicField bad = field_from_fourier(
      lat1, 1, 1,
      {{Mode{0, 0}, sc(0.5)}, {Mode{1, 0}, sc(1.0)}, {Mode{-1, 0}, sc(1.0)}});
  CHECK_THROWS_AS(solve_lambda(bad, b_1d(), 8), IndefiniteCoefficient);
}
