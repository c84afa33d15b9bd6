#include "pwhom/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pwhom/errors.hpp"

namespace pwh {

namespace {

std::vector<Mode> all_modes(int dim, int K) {
  std::vector<Mode> out;
  const int k1 = dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -k1; b <= k1; ++b) out.push_back({a, b});
  return out;
}

// Plane-wave assembly split into the lambda-independent part and the Q0
// block, so the lambda search can reuse one assembly.
struct AssembledParts {
  std::vector<Mode> modes;
  std::map<Mode, int> pos;
  Eigen::MatrixXcd base;
  Eigen::MatrixXcd q0;
};

template <typename LeftFn, typename RightFn>
void add_convolution(Eigen::MatrixXcd& mat, const std::vector<Mode>& modes,
                     const std::map<Mode, int>& pos,
                     const std::map<Mode, Eigen::MatrixXcd>& table, int n,
                     LeftFn&& left, RightFn&& right) {
  for (const auto& [dk, G] : table)
    for (size_t l = 0; l < modes.size(); ++l) {
      const Mode j{modes[l][0] + dk[0], modes[l][1] + dk[1]};
      auto it = pos.find(j);
      if (it == pos.end()) continue;
      mat.block(it->second * n, l * n, n, n) += left(it->second) * G * right(l);
    }
}

AssembledParts assemble_parts(const CoefficientSet& coeffs, const SymbolSpec& b,
                              int N, int K_big) {
  const Lattice& lat = *coeffs.g.lat;
  if (K_big < N * coeffs.cutoff() + 2)
    throw TruncationTooTight("K_big = " + std::to_string(K_big) + " < N*K + 2 = " +
                             std::to_string(N * coeffs.cutoff() + 2));

  AssembledParts parts;
  parts.modes = all_modes(lat.dim, K_big);
  for (size_t i = 0; i < parts.modes.size(); ++i) parts.pos[parts.modes[i]] = int(i);

  const int n = b.n;
  const int dim = n * int(parts.modes.size());
  std::vector<Eigen::MatrixXcd> bxi(parts.modes.size());
  std::vector<Eigen::Vector2d> xi(parts.modes.size());
  for (size_t i = 0; i < parts.modes.size(); ++i) {
    xi[i] = lat.frequency(parts.modes[i]);
    bxi[i] = b.of(xi[i]);
  }
  const Eigen::MatrixXcd id_n = Eigen::MatrixXcd::Identity(n, n);

  parts.base = Eigen::MatrixXcd::Zero(dim, dim);
  const PeriodicField g_eps = rescale_eps(coeffs.g, N);
  add_convolution(parts.base, parts.modes, parts.pos, g_eps.coeff, n,
                  [&](int j) { return bxi[j].adjoint(); },
                  [&](int l) { return bxi[l]; });
  for (int dir = 0; dir < b.d; ++dir) {
    const PeriodicField a_eps = rescale_eps(coeffs.a[dir], N);
    add_convolution(parts.base, parts.modes, parts.pos, a_eps.coeff, n,
                    [&](int) { return id_n; },
                    [&](int l) { return Eigen::MatrixXcd(xi[l](dir) * id_n); });
    const PeriodicField a_star = adjoint_field(a_eps);
    add_convolution(parts.base, parts.modes, parts.pos, a_star.coeff, n,
                    [&](int j) { return Eigen::MatrixXcd(xi[j](dir) * id_n); },
                    [&](int) { return id_n; });
  }
  const PeriodicField q_eps = rescale_eps(coeffs.Q, N);
  add_convolution(parts.base, parts.modes, parts.pos, q_eps.coeff, n,
                  [&](int) { return id_n; }, [&](int) { return id_n; });

  parts.q0 = Eigen::MatrixXcd::Zero(dim, dim);
  const PeriodicField q0_eps = rescale_eps(coeffs.Q0, N);
  add_convolution(parts.q0, parts.modes, parts.pos, q0_eps.coeff, n,
                  [&](int) { return id_n; }, [&](int) { return id_n; });
  return parts;
}

void finish_hermitian(DiscreteOperator& op) {
  const double scale = op.mat.cwiseAbs().maxCoeff();
  op.herm_defect =
      scale > 0.0 ? (op.mat - op.mat.adjoint()).cwiseAbs().maxCoeff() / scale : 0.0;
  op.mat = 0.5 * (op.mat + op.mat.adjoint().eval());
}

void eigensolve_dense(DiscreteOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.mat);
  if (es.info() != Eigen::Success)
    throw NoConvergence("dense Hermitian eigensolver failed");
  op.evals = es.eigenvalues();
  op.evecs = es.eigenvectors();
  op.beta = op.evals(0);
}

cd scalar_func(FuncKind kind, double lam, double t, double nu) {
  const double w = std::sqrt(std::max(lam, 0.0));
  switch (kind) {
    case FuncKind::CosSqrt:
      return std::cos(t * w);
    case FuncKind::SincSqrt:
      if (w * std::abs(t) < 1e-8) return t * (1.0 - (t * w) * (t * w) / 6.0);
      return std::sin(t * w) / w;
    case FuncKind::SinSqrtScaled:
      return w * std::sin(t * w);
    case FuncKind::ExpI:
      return std::polar(1.0, -t * lam);
    case FuncKind::Inv:
      return 1.0 / lam;
    case FuncKind::InvSqrt:
      return 1.0 / std::sqrt(lam);
    case FuncKind::Resolvent:
      return 1.0 / (lam + nu);
  }
  return 0.0;
}

}  // namespace

int CoefficientSet::cutoff() const {
  int K = std::max(g.cutoff, std::max(Q.cutoff, Q0.cutoff));
  for (const auto& aj : a) K = std::max(K, aj.cutoff);
  return K;
}

Eigen::VectorXcd DiscreteOperator::to_vec(const TorusFunction& u) const {
  if (u.n != n) throw ShapeMismatch("component count differs from operator");
  double scale = 0.0;
  for (const auto& [k, v] : u.coeff) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim());
  for (const auto& [k, v] : u.coeff) {
    auto it = mode_pos.find(k);
    if (it == mode_pos.end()) {
      if (v.cwiseAbs().maxCoeff() > 1e-13 * scale)
        throw ShapeMismatch("function carries a mode outside the operator set");
      continue;
    }
    out.segment(it->second * n, n) = v;
  }
  return out;
}

TorusFunction DiscreteOperator::from_vec(const Eigen::VectorXcd& v) const {
  if (v.size() != dim()) throw ShapeMismatch("coefficient vector has wrong length");
  TorusFunction u = torus_zero(*lat, n);
  for (size_t i = 0; i < modes.size(); ++i) {
    Eigen::VectorXcd seg = v.segment(i * n, n);
    if (seg.squaredNorm() > 0.0) u.coeff[modes[i]] = std::move(seg);
  }
  return u;
}

DiscreteOperator assemble_beps(const CoefficientSet& coeffs, const SymbolSpec& b,
                               int N, int K_big, double lambda) {
  AssembledParts parts = assemble_parts(coeffs, b, N, K_big);
  DiscreteOperator op;
  op.lat = coeffs.g.lat;
  op.n = b.n;
  op.K_big = K_big;
  op.modes = std::move(parts.modes);
  op.mode_pos = std::move(parts.pos);
  op.mat = parts.base + lambda * parts.q0;
  finish_hermitian(op);
  eigensolve_dense(op);
  if (!(op.beta > 0.0))
    throw LambdaInadmissible("min eigenvalue " + std::to_string(op.beta) +
                             " is not positive");
  return op;
}

DiscreteOperator assemble_b0(const CellSolution& sol, const SymbolSpec& b,
                             double lambda, int K_big, const Lattice& lat) {
  DiscreteOperator op;
  op.lat = &lat;
  op.n = b.n;
  op.K_big = K_big;
  op.modes = all_modes(lat.dim, K_big);
  for (size_t i = 0; i < op.modes.size(); ++i) op.mode_pos[op.modes[i]] = int(i);

  const int n = b.n;
  const int M = int(op.modes.size());
  op.mat = Eigen::MatrixXcd::Zero(op.dim(), op.dim());

  // Block-diagonal over modes; eigendecompose per block and sort globally.
  std::vector<std::pair<double, int>> order;
  Eigen::MatrixXcd evecs = Eigen::MatrixXcd::Zero(op.dim(), op.dim());
  op.c_star = std::numeric_limits<double>::infinity();
  for (int i = 0; i < M; ++i) {
    const Eigen::Vector2d xi = lat.frequency(op.modes[i]);
    const Eigen::MatrixXcd L = symbol_L(sol, b, lambda, xi);
    op.mat.block(i * n, i * n, n, n) = L;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(L);
    for (int c = 0; c < n; ++c) {
      evecs.col(i * n + c).segment(i * n, n) = es.eigenvectors().col(c);
      order.push_back({es.eigenvalues()(c), i * n + c});
    }
    op.c_star =
        std::min(op.c_star, es.eigenvalues()(0) / (1.0 + xi.squaredNorm()));
  }
  std::sort(order.begin(), order.end());
  op.evals.resize(op.dim());
  op.evecs.resize(op.dim(), op.dim());
  for (int i = 0; i < op.dim(); ++i) {
    op.evals(i) = order[i].first;
    op.evecs.col(i) = evecs.col(order[i].second);
  }
  op.beta = op.evals(0);
  op.herm_defect = 0.0;
  if (!(op.beta > 0.0))
    throw LambdaInadmissible("effective symbol not positive definite, min eig " +
                             std::to_string(op.beta));
  return op;
}

double choose_lambda(const CoefficientSet& coeffs, const SymbolSpec& b,
                     const CellSolution& sol, const std::vector<int>& N_list,
                     const std::vector<int>& K_big_list, double beta_target) {
  if (N_list.size() != K_big_list.size())
    throw ShapeMismatch("N_list and K_big_list length mismatch");
  {
    auto samples = coeffs.Q0.piecewise
                       ? coeffs.Q0.piecewise->values
                       : eval_on_grid(coeffs.Q0, 4 * coeffs.Q0.cutoff + 3);
    for (const auto& s : samples) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (s + s.adjoint()));
      if (es.eigenvalues().minCoeff() <= 1e-10)
        throw IndefiniteCoefficient("Q0 is not positive definite on the grid");
    }
  }

  std::vector<AssembledParts> ops;
  for (size_t i = 0; i < N_list.size(); ++i)
    ops.push_back(assemble_parts(coeffs, b, N_list[i], K_big_list[i]));
  for (auto& p : ops) {
    p.base = 0.5 * (p.base + p.base.adjoint().eval());
    p.q0 = 0.5 * (p.q0 + p.q0.adjoint().eval());
  }

  // Effective-symbol admissibility, sampled on the finest retained mode set.
  std::vector<Eigen::Vector2d> sample_xi;
  for (const auto& k : all_modes(coeffs.g.lat->dim, K_big_list.back()))
    sample_xi.push_back(coeffs.g.lat->frequency(k));

  auto op_ok = [&](const AssembledParts& s, double lam) -> bool {
    const Eigen::MatrixXcd shifted =
        s.base + lam * s.q0 -
        beta_target * Eigen::MatrixXcd::Identity(s.base.rows(), s.base.cols());
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) return false;
    return !(ldlt.vectorD().real().array() < 0.0).any();
  };

  // Trials run on an active subset; operators that fail verification join it.
  std::vector<size_t> active{0};
  auto admissible = [&](double lam) -> bool {
    for (size_t i : active)
      if (!op_ok(ops[i], lam)) return false;
    for (const auto& xi : sample_xi) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symbol_L(sol, b, lam, xi));
      if (es.eigenvalues().minCoeff() < beta_target) return false;
    }
    return true;
  };

  auto bisect = [&](double lo_start) -> double {
    double hi = std::max(std::max(beta_target, 1e-3), lo_start);
    int steps = 0;
    while (!admissible(hi)) {
      hi = hi <= 0.0 ? std::max(beta_target, 1e-3) : hi * 2.0;
      if (++steps > 60)
        throw SearchFailed("no admissible lambda below " + std::to_string(hi));
    }
    double lo;
    if (lo_start > -std::numeric_limits<double>::infinity() &&
        !admissible(lo_start)) {
      lo = lo_start;
    } else if (admissible(0.0)) {
      lo = -std::max(beta_target, 1e-3);
      int down = 0;
      while (admissible(lo)) {
        hi = lo;
        lo *= 2.0;
        if (++down > 60) throw SearchFailed("lambda search unbounded below");
      }
    } else {
      lo = 0.0;
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (admissible(mid))
        hi = mid;
      else
        lo = mid;
      if (hi - lo <= 1e-6 * std::max(1.0, std::abs(hi))) break;
    }
    return hi;
  };

  double lam = bisect(-std::numeric_limits<double>::infinity());
  // verify the remaining operators; escalate the search when one binds
  for (int round = 0; round < int(ops.size()); ++round) {
    bool all_ok = true;
    for (size_t i = 0; i < ops.size(); ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      if (!op_ok(ops[i], lam)) {
        active.push_back(i);
        all_ok = false;
      }
    }
    if (all_ok) return lam;
    lam = bisect(lam);
  }
  return lam;
}

Eigen::VectorXcd func_calc_vec(const DiscreteOperator& op, FuncKind kind,
                               const Eigen::VectorXcd& v, double t, double nu) {
  if ((kind == FuncKind::Inv || kind == FuncKind::InvSqrt) && !(op.beta > 0.0))
    throw NotPositive("operator has min eigenvalue <= 0");
  Eigen::VectorXcd a = op.evecs.adjoint() * v;
  for (int i = 0; i < a.size(); ++i) a(i) *= scalar_func(kind, op.evals(i), t, nu);
  return op.evecs * a;
}

TorusFunction func_calc(const DiscreteOperator& op, FuncKind kind,
                        const TorusFunction& v, double t, double nu) {
  return op.from_vec(func_calc_vec(op, kind, op.to_vec(v), t, nu));
}

void gauss_legendre(int points, double a, double b, std::vector<double>& x,
                    std::vector<double>& w) {
  x.assign(points, 0.0);
  w.assign(points, 0.0);
  // Newton iteration on Legendre polynomials, nodes mapped from (-1,1).
  for (int i = 0; i < points; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < points; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = points * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (b - a) * z + 0.5 * (a + b);
    w[i] = (b - a) / ((1.0 - z * z) * pp * pp);
  }
}

Eigen::VectorXcd inv_sqrt_quadrature(const DiscreteOperator& op,
                                     const Eigen::VectorXcd& v, int points) {
  if (!(op.beta > 0.0)) throw NotPositive("operator has min eigenvalue <= 0");
  // Substitution nu = c s^2/(1-s)^2 maps (0,1) to (0,inf) and removes the
  // endpoint singularity of nu^{-1/2}; c sits at the geometric mean of the
  // spectrum extent.
  const double c = std::sqrt(op.beta * std::max(op.evals(op.dim() - 1), op.beta));
  std::vector<double> s, w;
  gauss_legendre(points, 0.0, 1.0, s, w);
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(v.size());
  for (int i = 0; i < points; ++i) {
    const double om = 1.0 - s[i];
    const double nu = c * s[i] * s[i] / (om * om);
    const double dnu = 2.0 * c * s[i] / (om * om * om);
    const double factor = (1.0 / std::numbers::pi) / std::sqrt(nu) * dnu;
    acc += (w[i] * factor) * func_calc_vec(op, FuncKind::Resolvent, v, 0.0, nu);
  }
  return acc;
}

DiscreteOperator operator_from_matrix(const Lattice& lat, int n, int K_big,
                                      const Eigen::MatrixXcd& mat) {
  DiscreteOperator op;
  op.lat = &lat;
  op.n = n;
  op.K_big = K_big;
  op.modes = all_modes(lat.dim, K_big);
  for (size_t i = 0; i < op.modes.size(); ++i) op.mode_pos[op.modes[i]] = int(i);
  if (mat.rows() != op.dim() || mat.cols() != op.dim())
    throw ShapeMismatch("matrix size does not match n * |modes|");
  op.mat = mat;
  finish_hermitian(op);
  eigensolve_dense(op);
  return op;
}

}  // namespace pwh
