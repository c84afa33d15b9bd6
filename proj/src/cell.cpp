#include "pwhom/cell.hpp"

#include <cmath>
#include <numbers>

#include "pwhom/errors.hpp"

namespace pwh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Eigen::Vector2d> unit_directions(int dim) {
  std::vector<Eigen::Vector2d> dirs;
  if (dim == 1) {
    dirs.push_back({1.0, 0.0});
    dirs.push_back({-1.0, 0.0});
  } else {
    for (int i = 0; i < 64; ++i) {
      const double phi = kTwoPi * (i + 0.5) / 64.0;
      dirs.push_back({std::cos(phi), std::sin(phi)});
    }
  }
  return dirs;
}

// Nonzero modes 0 < |k|_inf <= K in deterministic (lexicographic) order.
std::vector<Mode> nonzero_modes(int dim, int K) {
  std::vector<Mode> out;
  const int k1 = dim == 2 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -k1; b <= k1; ++b)
      if (a != 0 || b != 0) out.push_back({a, b});
  return out;
}

void check_positive_definite(const PeriodicField& g) {
  auto check_samples = [&](const std::vector<Eigen::MatrixXcd>& vals) {
    for (const auto& v : vals) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (v + v.adjoint()));
      if (es.eigenvalues().minCoeff() <= 1e-10)
        throw IndefiniteCoefficient("coefficient not positive definite on the sampling grid");
    }
  };
  if (g.piecewise)
    check_samples(g.piecewise->values);
  else
    check_samples(eval_on_grid(g, 4 * g.cutoff + 3));
}

// Galerkin system for the sesquilinear form (g b(D) u, b(D) v) on the
// zero-mean trig polynomials with cutoff K; matrix-free application plus a
// constant-coefficient symbol preconditioner.
struct GalerkinSystem {
  const PeriodicField* g;
  const SymbolSpec* bsym;
  std::vector<Mode> modes;
  std::map<Mode, int> pos;
  std::vector<Eigen::MatrixXcd> bxi;       // b(xi_k), m x n
  std::vector<Eigen::MatrixXcd> precond;   // (b* gbar b)^{-1}, n x n
  int n, m;

  GalerkinSystem(const PeriodicField& g_, const SymbolSpec& b_, int K)
      : g(&g_), bsym(&b_), n(b_.n), m(b_.m) {
    modes = nonzero_modes(g_.lat->dim, K);
    for (int i = 0; i < int(modes.size()); ++i) pos[modes[i]] = i;
    const Eigen::MatrixXcd gbar = cell_average(g_);
    bxi.resize(modes.size());
    precond.resize(modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
      bxi[i] = b_.of(g_.lat->frequency(modes[i]));
      const Eigen::MatrixXcd p = bxi[i].adjoint() * gbar * bxi[i];
      precond[i] = p.ldlt().solve(Eigen::MatrixXcd::Identity(n, n));
    }
  }

  int unknowns() const { return n * int(modes.size()); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    const size_t M = modes.size();
    std::vector<Eigen::VectorXcd> w(M);
    for (size_t l = 0; l < M; ++l) w[l] = bxi[l] * x.segment(l * n, n);
    std::vector<Eigen::VectorXcd> z(M, Eigen::VectorXcd::Zero(m));
    for (const auto& [dk, G] : g->coeff) {
      for (size_t l = 0; l < M; ++l) {
        const Mode j{modes[l][0] + dk[0], modes[l][1] + dk[1]};
        auto it = pos.find(j);
        if (it != pos.end()) z[it->second] += G * w[l];
      }
    }
    Eigen::VectorXcd y(unknowns());
    for (size_t j = 0; j < M; ++j) y.segment(j * n, n) = bxi[j].adjoint() * z[j];
    return y;
  }

  Eigen::VectorXcd apply_precond(const Eigen::VectorXcd& r) const {
    Eigen::VectorXcd z(unknowns());
    for (size_t j = 0; j < modes.size(); ++j)
      z.segment(j * n, n) = precond[j] * r.segment(j * n, n);
    return z;
  }

  Eigen::VectorXcd solve_cg(const Eigen::VectorXcd& rhs) const {
    const double rhs_norm = rhs.norm();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(unknowns());
    if (rhs_norm == 0.0) return x;
    Eigen::VectorXcd r = rhs;
    Eigen::VectorXcd z = apply_precond(r);
    Eigen::VectorXcd p = z;
    double rho = std::real(r.dot(z));
    const int maxit = 10 * unknowns();
    for (int it = 0; it < maxit; ++it) {
      const Eigen::VectorXcd q = apply(p);
      const double pq = std::real(p.dot(q));
      if (!(pq > 0.0)) throw NoConvergence("CG direction lost positivity");
      const double alpha = rho / pq;
      x += alpha * p;
      r -= alpha * q;
      if (r.norm() <= 1e-12 * rhs_norm) return x;
      z = apply_precond(r);
      const double rho_new = std::real(r.dot(z));
      p = z + (rho_new / rho) * p;
      rho = rho_new;
    }
    throw NoConvergence("CG did not reach 1e-12 in " + std::to_string(maxit) +
                        " iterations");
  }

  Eigen::MatrixXcd dense_matrix() const {
    const size_t M = modes.size();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(unknowns(), unknowns());
    for (const auto& [dk, G] : g->coeff)
      for (size_t l = 0; l < M; ++l) {
        const Mode j{modes[l][0] + dk[0], modes[l][1] + dk[1]};
        auto it = pos.find(j);
        if (it != pos.end())
          A.block(it->second * n, l * n, n, n) += bxi[it->second].adjoint() * G * bxi[l];
      }
    return A;
  }

  // One solve per right-hand-side column.
  std::vector<Eigen::VectorXcd> solve(const std::vector<Eigen::VectorXcd>& rhs) const {
    std::vector<Eigen::VectorXcd> out;
    if (unknowns() < 2000) {
      Eigen::LDLT<Eigen::MatrixXcd> ldlt(dense_matrix());
      for (const auto& r : rhs) out.push_back(ldlt.solve(r));
    } else {
      for (const auto& r : rhs) out.push_back(solve_cg(r));
    }
    return out;
  }
};

PeriodicField columns_to_field(const GalerkinSystem& sys, const Lattice& lat,
                               const std::vector<Eigen::VectorXcd>& cols) {
  PeriodicField out;
  out.lat = &lat;
  out.rows = sys.n;
  out.cols = int(cols.size());
  out.cutoff = 0;
  for (size_t i = 0; i < sys.modes.size(); ++i) {
    Eigen::MatrixXcd m(sys.n, cols.size());
    for (size_t c = 0; c < cols.size(); ++c)
      m.col(c) = cols[c].segment(i * sys.n, sys.n);
    if (m.cwiseAbs().maxCoeff() > 0.0) {
      out.coeff[sys.modes[i]] = m;
      out.cutoff = std::max(out.cutoff,
                            std::max(std::abs(sys.modes[i][0]), std::abs(sys.modes[i][1])));
    }
  }
  return out;
}

// --- exact path for 1D scalar piecewise-constant data ----------------------

struct Partition1d {
  std::vector<double> breaks;  // x_0 = 0 < ... < x_{p-1} < 1
  std::vector<double> lengths;
};

Partition1d merge_breaks(const std::vector<const Piecewise1d*>& parts) {
  std::vector<double> all{0.0};
  for (const auto* p : parts)
    all.insert(all.end(), p->breaks.begin(), p->breaks.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-15; }),
            all.end());
  Partition1d part;
  part.breaks = all;
  for (size_t i = 0; i < all.size(); ++i) {
    const double x1 = i + 1 < all.size() ? all[i + 1] : 1.0;
    part.lengths.push_back(x1 - all[i]);
  }
  return part;
}

std::vector<cd> sample_piecewise(const Piecewise1d& pw, const Partition1d& part) {
  std::vector<cd> out(part.breaks.size());
  for (size_t i = 0; i < part.breaks.size(); ++i) {
    const double x = part.breaks[i] + 0.5 * part.lengths[i];
    size_t seg = 0;
    for (size_t s = 0; s < pw.breaks.size(); ++s)
      if (pw.breaks[s] <= x) seg = s;
    out[i] = pw.values[seg](0, 0);
  }
  return out;
}

// Closed-form Fourier table of a piecewise-constant scalar on the partition.
PeriodicField piecewise_to_field(const Lattice& lat, const Partition1d& part,
                                 const std::vector<cd>& vals, int cutoff) {
  Piecewise1d pw;
  pw.breaks = part.breaks;
  for (const cd& v : vals) {
    Eigen::MatrixXcd m(1, 1);
    m(0, 0) = v;
    pw.values.push_back(m);
  }
  return field_from_piecewise(lat, pw, cutoff);
}

bool exact_path_applies(const PeriodicField& g, const SymbolSpec& b,
                        const std::vector<PeriodicField>& a) {
  if (g.lat->dim != 1 || b.m != 1 || b.n != 1) return false;
  if (!g.piecewise) return false;
  for (const auto& aj : a)
    if (!aj.piecewise && !aj.coeff.empty() &&
        !(aj.coeff.size() == 1 && aj.coeff.count({0, 0})))
      return false;
  return true;
}

Piecewise1d constant_as_piecewise(const Eigen::MatrixXcd& v) {
  Piecewise1d pw;
  pw.breaks = {0.0};
  pw.values = {v};
  return pw;
}

}  // namespace

SymbolSpec make_symbol(int dim, const std::vector<Eigen::MatrixXcd>& b_mats) {
  if (int(b_mats.size()) != dim) throw ShapeMismatch("need one b_j per dimension");
  SymbolSpec s;
  s.d = dim;
  s.m = int(b_mats[0].rows());
  s.n = int(b_mats[0].cols());
  if (s.m < s.n) throw ShapeMismatch("symbol needs m >= n");
  for (const auto& bj : b_mats)
    if (bj.rows() != s.m || bj.cols() != s.n)
      throw ShapeMismatch("all b_j must be m x n");
  s.b = b_mats;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& th : unit_directions(dim)) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.of(th));
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-10)
      throw ShapeMismatch("symbol b(theta) loses rank on a sampled direction");
    lo = std::min(lo, smin * smin);
    hi = std::max(hi, smax * smax);
  }
  s.alpha0 = lo;
  s.alpha1 = hi;
  return s;
}

TorusFunction apply_bD(const SymbolSpec& b, const TorusFunction& u) {
  if (u.n != b.n) throw ShapeMismatch("apply_bD: component count != n");
  TorusFunction out;
  out.lat = u.lat;
  out.n = b.m;
  for (const auto& [k, v] : u.coeff) {
    Eigen::VectorXcd w = b.of(u.lat->frequency(k)) * v;
    if (w.squaredNorm() > 0.0) out.coeff[k] = std::move(w);
  }
  return out;
}

PeriodicField apply_bD(const SymbolSpec& b, const PeriodicField& f) {
  if (f.rows != b.n) throw ShapeMismatch("apply_bD: field rows != n");
  PeriodicField out;
  out.lat = f.lat;
  out.rows = b.m;
  out.cols = f.cols;
  out.cutoff = f.cutoff;
  for (const auto& [k, m] : f.coeff) {
    Eigen::MatrixXcd w = b.of(f.lat->frequency(k)) * m;
    if (w.cwiseAbs().maxCoeff() > 0.0) out.coeff[k] = std::move(w);
  }
  return out;
}

namespace {

// All cell quantities of the 1D scalar problem with piecewise-constant data,
// evaluated in closed form on the merged breakpoint partition.
struct Exact1d {
  Partition1d part;
  std::vector<cd> g, a;
  cd b1;
  cd gunder;              // harmonic mean of g
  std::vector<cd> phi;    // b(D)Lambda + 1 = gunder / g
  std::vector<cd> phit;   // b(D)Lambda~

  Exact1d(const PeriodicField& gf, const SymbolSpec& b,
          const std::vector<PeriodicField>& af) {
    std::vector<const Piecewise1d*> pieces{gf.piecewise.get()};
    Piecewise1d a_const;
    const Piecewise1d* apw = nullptr;
    if (!af.empty()) {
      if (af[0].piecewise) {
        apw = af[0].piecewise.get();
      } else {
        a_const = constant_as_piecewise(cell_average(af[0]));
        apw = &a_const;
      }
      pieces.push_back(apw);
    }
    part = merge_breaks(pieces);
    g = sample_piecewise(*gf.piecewise, part);
    a = apw ? sample_piecewise(*apw, part)
            : std::vector<cd>(g.size(), cd(0.0));
    b1 = b.b[0](0, 0);

    cd inv_mean = 0.0;
    for (size_t i = 0; i < g.size(); ++i) inv_mean += part.lengths[i] / g[i];
    gunder = 1.0 / inv_mean;
    phi.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i) phi[i] = gunder / g[i];

    // |b1|^2 g DLambda~ + a^* = z with mean(DLambda~) = 0
    cd num = 0.0;
    for (size_t i = 0; i < g.size(); ++i)
      num += part.lengths[i] * std::conj(a[i]) / g[i];
    const cd z = num / inv_mean;
    phit.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i)
      phit[i] = b1 * (z - std::conj(a[i])) / (std::norm(b1) * g[i]);
  }

  // Antiderivative table: field^(k) = (b1-weighted derivative)^(k)/(b1 xi_k).
  PeriodicField antiderivative(const Lattice& lat,
                               const std::vector<cd>& derivative, int K) const {
    const PeriodicField dfield = piecewise_to_field(lat, part, derivative, K);
    PeriodicField out;
    out.lat = &lat;
    out.rows = 1;
    out.cols = 1;
    out.cutoff = K;
    for (const auto& [k, m] : dfield.coeff) {
      if (k[0] == 0) continue;
      out.coeff[k] = m / (b1 * lat.frequency(k)(0));
    }
    return out;
  }

  PeriodicField lambda(const Lattice& lat, int K) const {
    std::vector<cd> bdl(phi.size());
    for (size_t i = 0; i < phi.size(); ++i) bdl[i] = phi[i] - 1.0;
    return antiderivative(lat, bdl, K);
  }

  PeriodicField lambda_tilde(const Lattice& lat, int K) const {
    return antiderivative(lat, phit, K);
  }
};

}  // namespace

PeriodicField solve_lambda(const PeriodicField& g, const SymbolSpec& b, int K) {
  if (g.rows != b.m || g.cols != b.m) throw ShapeMismatch("g must be m x m");
  check_positive_definite(g);

  if (exact_path_applies(g, b, {})) return Exact1d(g, b, {}).lambda(*g.lat, K);

  GalerkinSystem sys(g, b, K);
  std::vector<Eigen::VectorXcd> rhs;
  for (int c = 0; c < b.m; ++c) {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(sys.unknowns());
    for (size_t j = 0; j < sys.modes.size(); ++j) {
      const Eigen::MatrixXcd gj = g.at(sys.modes[j]);
      r.segment(j * b.n, b.n) = -(sys.bxi[j].adjoint() * gj.col(c));
    }
    rhs.push_back(std::move(r));
  }
  return columns_to_field(sys, *g.lat, sys.solve(rhs));
}

PeriodicField solve_lambda_tilde(const PeriodicField& g, const SymbolSpec& b,
                                 const std::vector<PeriodicField>& a, int K) {
  if (int(a.size()) != b.d) throw ShapeMismatch("need one a_j per dimension");
  for (const auto& aj : a)
    if (aj.rows != b.n || aj.cols != b.n) throw ShapeMismatch("a_j must be n x n");
  check_positive_definite(g);

  if (exact_path_applies(g, b, a))
    return Exact1d(g, b, a).lambda_tilde(*g.lat, K);

  GalerkinSystem sys(g, b, K);
  std::vector<Eigen::VectorXcd> rhs;
  for (int c = 0; c < b.n; ++c) {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(sys.unknowns());
    for (size_t j = 0; j < sys.modes.size(); ++j) {
      const Eigen::Vector2d xi = g.lat->frequency(sys.modes[j]);
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(b.n);
      for (int dir = 0; dir < b.d; ++dir) {
        const Mode neg{-sys.modes[j][0], -sys.modes[j][1]};
        const Eigen::MatrixXcd a_star = a[dir].at(neg).adjoint();
        acc += xi(dir) * (a_star.col(c));
      }
      r.segment(j * b.n, b.n) = -acc;
    }
    rhs.push_back(std::move(r));
  }
  return columns_to_field(sys, *g.lat, sys.solve(rhs));
}

CellSolution effective_assembly(const PeriodicField& g, const SymbolSpec& b,
                                const std::vector<PeriodicField>& a,
                                const PeriodicField& Q, const PeriodicField& Q0,
                                int K) {
  CellSolution sol;

  const bool exact_lambda = exact_path_applies(g, b, {});
  const bool exact_tilde = exact_path_applies(g, b, a);

  // Table-based pairings V = mean((b(D)L)^* g (b(D)L~)), W likewise, used by
  // every non-exact combination.
  auto pair_tables = [&](const PeriodicField& g_tab) {
    const PeriodicField bdl = apply_bD(b, sol.lambda);
    const PeriodicField bdlt = apply_bD(b, sol.lambda_tilde);
    const PeriodicField g_bdlt = multiply(g_tab, bdlt);
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(b.m, b.n);
    for (const auto& [k, gb] : g_bdlt.coeff) V += bdl.at(k).adjoint() * gb;
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(b.n, b.n);
    for (const auto& [k, gb] : g_bdlt.coeff) W += bdlt.at(k).adjoint() * gb;
    sol.V = V;
    sol.W = 0.5 * (W + W.adjoint().eval());
  };

  if (exact_tilde) {
    check_positive_definite(g);
    const Exact1d ex(g, b, a);
    sol.lambda = ex.lambda(*g.lat, K);
    sol.lambda_tilde = ex.lambda_tilde(*g.lat, K);
    // g~ = g (b(D)Lambda + 1) = gunder pointwise: a constant field.
    Eigen::MatrixXcd g0(1, 1);
    g0(0, 0) = ex.gunder;
    sol.g_tilde = field_constant(*g.lat, g0);
    sol.g0 = 0.5 * (g0 + g0.adjoint().eval());
    cd V = 0.0, W = 0.0;
    for (size_t i = 0; i < ex.g.size(); ++i) {
      V += ex.part.lengths[i] * std::conj(ex.phi[i] - 1.0) * ex.g[i] * ex.phit[i];
      W += ex.part.lengths[i] * std::conj(ex.phit[i]) * ex.g[i] * ex.phit[i];
    }
    sol.V = Eigen::MatrixXcd(1, 1);
    sol.V(0, 0) = V;
    sol.W = Eigen::MatrixXcd(1, 1);
    sol.W(0, 0) = W.real();
  } else if (exact_lambda) {
    // exact principal part; the lower-order cell problem runs through the
    // Galerkin solver on the band-limited table
    check_positive_definite(g);
    const Exact1d ex(g, b, {});
    sol.lambda = ex.lambda(*g.lat, K);
    Eigen::MatrixXcd g0(1, 1);
    g0(0, 0) = ex.gunder;
    sol.g_tilde = field_constant(*g.lat, g0);
    sol.g0 = 0.5 * (g0 + g0.adjoint().eval());
    sol.lambda_tilde = solve_lambda_tilde(strip_exact(g), b, a, K);
    pair_tables(strip_exact(g));
  } else {
    sol.lambda = solve_lambda(g, b, K);
    sol.lambda_tilde = solve_lambda_tilde(g, b, a, K);

    const PeriodicField bdl = apply_bD(b, sol.lambda);
    PeriodicField bdl1 = bdl;
    bdl1.coeff[{0, 0}] = bdl.at({0, 0}) + Eigen::MatrixXcd::Identity(b.m, b.m);
    sol.g_tilde = multiply(g, bdl1);
    sol.g0 = cell_average(sol.g_tilde);
    sol.g0 = 0.5 * (sol.g0 + sol.g0.adjoint().eval());
    pair_tables(g);
  }

  sol.Qbar = cell_average(Q);
  sol.Q0bar = cell_average(Q0);
  for (const auto& aj : a) {
    const Eigen::MatrixXcd abar = cell_average(aj);
    sol.sum_a.push_back(abar + abar.adjoint());
  }
  return sol;
}

Eigen::MatrixXcd symbol_L(const CellSolution& sol, const SymbolSpec& b,
                          double lambda_const, const Eigen::Vector2d& xi) {
  const Eigen::MatrixXcd bxi = b.of(xi);
  Eigen::MatrixXcd L = bxi.adjoint() * sol.g0 * bxi;
  L -= bxi.adjoint() * sol.V;
  L -= sol.V.adjoint() * bxi;
  for (int j = 0; j < b.d; ++j) L += sol.sum_a[j] * xi(j);
  L -= sol.W;
  L += sol.Qbar;
  L += lambda_const * sol.Q0bar;
  return 0.5 * (L + L.adjoint().eval());
}

double lambda_residual(const PeriodicField& g, const SymbolSpec& b,
                       const PeriodicField& lambda, int K) {
  // residual^(j) = b(xi_j)^H [g (b(D)Lambda + 1)]^(j) over 0 < |j| <= K
  PeriodicField bdl = apply_bD(b, lambda);
  bdl.coeff[{0, 0}] = bdl.at({0, 0}) + Eigen::MatrixXcd::Identity(b.m, b.m);
  const PeriodicField flux = multiply(g, bdl);
  double acc = 0.0;
  for (const auto& [k, m] : flux.coeff) {
    if (k[0] == 0 && k[1] == 0) continue;
    if (std::max(std::abs(k[0]), std::abs(k[1])) > K) continue;
    acc += (b.of(g.lat->frequency(k)).adjoint() * m).squaredNorm();
  }
  double gn = 0.0;
  for (const auto& [k, m] : g.coeff) gn += m.squaredNorm();
  return std::sqrt(acc) / std::sqrt(gn);
}

}  // namespace pwh
