#include "pwhom/fields.hpp"

#include <cmath>
#include <numbers>

#include "pwhom/errors.hpp"

namespace pwh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int max_abs_index(const Mode& k) { return std::max(std::abs(k[0]), std::abs(k[1])); }

void check_same_lattice(const Lattice* a, const Lattice* b) {
  if (a != b) throw ShapeMismatch("operands live on different lattices");
}

// Grid point index -> fractional coordinates (tau_1, tau_2), first
// coordinate fastest in the flat ordering.
struct GridIter {
  int dim, grid;
  int total() const { return dim == 1 ? grid : grid * grid; }
  std::array<int, 2> unflatten(int idx) const {
    if (dim == 1) return {idx, 0};
    return {idx % grid, idx / grid};
  }
};

}  // namespace

PeriodicField field_constant(const Lattice& lat, const Eigen::MatrixXcd& value) {
  PeriodicField f;
  f.lat = &lat;
  f.rows = int(value.rows());
  f.cols = int(value.cols());
  f.cutoff = 0;
  f.coeff[{0, 0}] = value;
  return f;
}

PeriodicField field_from_fourier(const Lattice& lat, int rows, int cols,
                                 const std::vector<std::pair<Mode, Eigen::MatrixXcd>>& modes) {
  PeriodicField f;
  f.lat = &lat;
  f.rows = rows;
  f.cols = cols;
  f.cutoff = 0;
  for (const auto& [k, m] : modes) {
    if (m.rows() != rows || m.cols() != cols)
      throw ShapeMismatch("fourier mode matrix has wrong shape");
    if (lat.dim == 1 && k[1] != 0)
      throw ShapeMismatch("second index must be 0 for d=1");
    f.coeff[k] = f.at(k) + m;
    f.cutoff = std::max(f.cutoff, max_abs_index(k));
  }
  return f;
}

PeriodicField field_from_grid(const Lattice& lat, int rows, int cols, int grid,
                              const std::vector<Eigen::MatrixXcd>& values) {
  GridIter gi{lat.dim, grid};
  if (int(values.size()) != gi.total())
    throw ShapeMismatch("expected " + std::to_string(gi.total()) + " samples, got " +
                        std::to_string(values.size()));
  const int K = (grid - 1) / 2;
  PeriodicField f;
  f.lat = &lat;
  f.rows = rows;
  f.cols = cols;
  f.cutoff = K;

  const int k1 = lat.dim == 2 ? K : 0;
  for (int ka = -K; ka <= K; ++ka)
    for (int kb = -k1; kb <= k1; ++kb) {
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows, cols);
      for (int idx = 0; idx < gi.total(); ++idx) {
        auto [ja, jb] = gi.unflatten(idx);
        const double phase = -kTwoPi * (double(ka * ja) + double(kb * jb)) / grid;
        acc += values[idx] * std::polar(1.0, phase);
      }
      acc /= double(gi.total());
      if (acc.cwiseAbs().maxCoeff() > 0.0) f.coeff[{ka, kb}] = acc;
    }

  auto raw = std::make_shared<GridSamples>();
  raw->grid = grid;
  raw->values = values;
  f.samples = std::move(raw);
  return f;
}

PeriodicField field_from_piecewise(const Lattice& lat, const Piecewise1d& pw,
                                   int cutoff) {
  if (lat.dim != 1) throw ShapeMismatch("piecewise ingestion is 1D only");
  if (pw.breaks.empty() || pw.breaks.size() != pw.values.size() ||
      pw.breaks.front() != 0.0)
    throw ShapeMismatch("piecewise data needs breaks starting at 0, one value per interval");
  const int p = int(pw.breaks.size());
  for (int i = 1; i < p; ++i)
    if (!(pw.breaks[i] > pw.breaks[i - 1] && pw.breaks[i] < 1.0))
      throw ShapeMismatch("piecewise breaks must be increasing inside (0,1)");

  PeriodicField f;
  f.lat = &lat;
  f.rows = int(pw.values[0].rows());
  f.cols = int(pw.values[0].cols());
  f.cutoff = cutoff;

  for (int k = -cutoff; k <= cutoff; ++k) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(f.rows, f.cols);
    for (int i = 0; i < p; ++i) {
      const double x0 = pw.breaks[i];
      const double x1 = i + 1 < p ? pw.breaks[i + 1] : 1.0;
      if (k == 0) {
        acc += pw.values[i] * (x1 - x0);
      } else {
        // int_{x0}^{x1} e^{-2 pi i k x} dx
        const cd num = std::polar(1.0, -kTwoPi * k * x0) - std::polar(1.0, -kTwoPi * k * x1);
        acc += pw.values[i] * (num / cd(0.0, kTwoPi * k));
      }
    }
    if (acc.cwiseAbs().maxCoeff() > 1e-300) f.coeff[{k, 0}] = acc;
  }

  f.piecewise = std::make_shared<Piecewise1d>(pw);
  return f;
}

std::vector<Eigen::MatrixXcd> eval_on_grid(const PeriodicField& f, int grid) {
  if (grid < 2 * f.cutoff + 1)
    throw GridTooCoarse("grid " + std::to_string(grid) + " < 2K+1 = " +
                        std::to_string(2 * f.cutoff + 1));
  GridIter gi{f.lat->dim, grid};
  std::vector<Eigen::MatrixXcd> out(gi.total(),
                                    Eigen::MatrixXcd::Zero(f.rows, f.cols));
  for (int idx = 0; idx < gi.total(); ++idx) {
    auto [ja, jb] = gi.unflatten(idx);
    for (const auto& [k, m] : f.coeff) {
      const double phase = kTwoPi * (double(k[0] * ja) + double(k[1] * jb)) / grid;
      out[idx] += m * std::polar(1.0, phase);
    }
  }
  return out;
}

std::vector<Eigen::VectorXcd> eval_on_grid(const TorusFunction& u, int grid) {
  GridIter gi{u.lat->dim, grid};
  std::vector<Eigen::VectorXcd> out(gi.total(), Eigen::VectorXcd::Zero(u.n));
  for (int idx = 0; idx < gi.total(); ++idx) {
    auto [ja, jb] = gi.unflatten(idx);
    for (const auto& [k, v] : u.coeff) {
      const double phase = kTwoPi * (double(k[0] * ja) + double(k[1] * jb)) / grid;
      out[idx] += v * std::polar(1.0, phase);
    }
  }
  return out;
}

PeriodicField rescale_eps(const PeriodicField& f, int N) {
  if (N < 1) throw ShapeMismatch("rescale needs N >= 1");
  PeriodicField out;
  out.lat = f.lat;
  out.rows = f.rows;
  out.cols = f.cols;
  out.cutoff = N * f.cutoff;
  for (const auto& [k, m] : f.coeff) out.coeff[{N * k[0], N * k[1]}] = m;
  return out;
}

Eigen::MatrixXcd cell_average(const PeriodicField& f) { return f.at({0, 0}); }

Eigen::MatrixXcd harmonic_mean(const PeriodicField& f) {
  if (f.rows != f.cols) throw ShapeMismatch("harmonic mean needs a square matrix field");

  auto mean_inverse = [&](const std::vector<Eigen::MatrixXcd>& vals,
                          const std::vector<double>& weights) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(f.rows, f.cols);
    for (size_t i = 0; i < vals.size(); ++i) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vals[i]);
      if (svd.singularValues().minCoeff() < 1e-10)
        throw SingularPointwise("sample " + std::to_string(i) +
                                " has min singular value < 1e-10");
      acc += weights[i] * vals[i].inverse();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(acc);
    if (svd.singularValues().minCoeff() < 1e-10)
      throw SingularPointwise("mean of inverses is singular");
    return Eigen::MatrixXcd(acc.inverse());
  };

  if (f.piecewise) {
    const auto& pw = *f.piecewise;
    std::vector<double> w(pw.breaks.size());
    for (size_t i = 0; i < pw.breaks.size(); ++i) {
      const double x1 = i + 1 < pw.breaks.size() ? pw.breaks[i + 1] : 1.0;
      w[i] = x1 - pw.breaks[i];
    }
    return mean_inverse(pw.values, w);
  }
  if (f.samples) {
    const auto& gs = *f.samples;
    std::vector<double> w(gs.values.size(), 1.0 / double(gs.values.size()));
    return mean_inverse(gs.values, w);
  }
  const int grid = 4 * f.cutoff + 3;
  auto vals = eval_on_grid(f, grid);
  std::vector<double> w(vals.size(), 1.0 / double(vals.size()));
  return mean_inverse(vals, w);
}

PeriodicField adjoint_field(const PeriodicField& f) {
  PeriodicField out;
  out.lat = f.lat;
  out.rows = f.cols;
  out.cols = f.rows;
  out.cutoff = f.cutoff;
  for (const auto& [k, m] : f.coeff)
    out.coeff[{-k[0], -k[1]}] = m.adjoint();
  return out;
}

PeriodicField strip_exact(const PeriodicField& f) {
  PeriodicField out = f;
  out.piecewise.reset();
  out.samples.reset();
  return out;
}

PeriodicField truncate_field(const PeriodicField& f, int K) {
  PeriodicField out;
  out.lat = f.lat;
  out.rows = f.rows;
  out.cols = f.cols;
  out.cutoff = std::min(f.cutoff, K);
  for (const auto& [k, m] : f.coeff)
    if (max_abs_index(k) <= K) out.coeff[k] = m;
  return out;
}

bool field_is_hermitian(const PeriodicField& f, double tol) {
  if (f.rows != f.cols) return false;
  double scale = 0.0;
  for (const auto& [k, m] : f.coeff) scale = std::max(scale, m.cwiseAbs().maxCoeff());
  if (scale == 0.0) return true;
  for (const auto& [k, m] : f.coeff) {
    const Eigen::MatrixXcd other = f.at({-k[0], -k[1]});
    if ((m - other.adjoint()).cwiseAbs().maxCoeff() > tol * scale) return false;
  }
  return true;
}

double field_l2_norm(const PeriodicField& f) {
  double acc = 0.0;
  for (const auto& [k, m] : f.coeff) acc += m.squaredNorm();
  return std::sqrt(acc);
}

PeriodicField multiply(const PeriodicField& f, const PeriodicField& h) {
  check_same_lattice(f.lat, h.lat);
  if (f.cols != h.rows) throw ShapeMismatch("field product: cols != rows");
  PeriodicField out;
  out.lat = f.lat;
  out.rows = f.rows;
  out.cols = h.cols;
  out.cutoff = f.cutoff + h.cutoff;
  for (const auto& [kf, mf] : f.coeff)
    for (const auto& [kh, mh] : h.coeff) {
      const Mode k{kf[0] + kh[0], kf[1] + kh[1]};
      auto it = out.coeff.find(k);
      if (it == out.coeff.end())
        out.coeff[k] = mf * mh;
      else
        it->second += mf * mh;
    }
  return out;
}

TorusFunction multiply(const PeriodicField& f, const TorusFunction& u) {
  check_same_lattice(f.lat, u.lat);
  if (f.cols != u.n) throw ShapeMismatch("field/function product: cols != components");
  TorusFunction out;
  out.lat = u.lat;
  out.n = f.rows;
  for (const auto& [kf, mf] : f.coeff)
    for (const auto& [ku, vu] : u.coeff) {
      const Mode k{kf[0] + ku[0], kf[1] + ku[1]};
      auto it = out.coeff.find(k);
      if (it == out.coeff.end())
        out.coeff[k] = mf * vu;
      else
        it->second += mf * vu;
    }
  return out;
}

TorusFunction torus_zero(const Lattice& lat, int n) {
  TorusFunction u;
  u.lat = &lat;
  u.n = n;
  return u;
}

TorusFunction torus_single_mode(const Lattice& lat, int n, const Mode& k,
                                const Eigen::VectorXcd& value) {
  if (value.size() != n) throw ShapeMismatch("mode value has wrong length");
  TorusFunction u = torus_zero(lat, n);
  u.coeff[k] = value;
  return u;
}

TorusFunction add_scaled(const TorusFunction& u, cd factor, const TorusFunction& v) {
  check_same_lattice(u.lat, v.lat);
  if (u.n != v.n) throw ShapeMismatch("component counts differ");
  TorusFunction out = u;
  for (const auto& [k, w] : v.coeff) {
    auto it = out.coeff.find(k);
    if (it == out.coeff.end())
      out.coeff[k] = factor * w;
    else
      it->second += factor * w;
  }
  return out;
}

TorusFunction add(const TorusFunction& u, const TorusFunction& v) {
  return add_scaled(u, cd(1.0), v);
}
TorusFunction sub(const TorusFunction& u, const TorusFunction& v) {
  return add_scaled(u, cd(-1.0), v);
}
TorusFunction scale(const TorusFunction& u, cd factor) {
  TorusFunction out = u;
  for (auto& [k, w] : out.coeff) w *= factor;
  return out;
}

TorusFunction apply_smoothing(const TorusFunction& u, int N) {
  TorusFunction out;
  out.lat = u.lat;
  out.n = u.n;
  const double eps = 1.0 / double(N);
  for (const auto& [k, v] : u.coeff)
    if (in_brillouin(*u.lat, u.lat->frequency(k), eps)) out.coeff[k] = v;
  return out;
}

double sobolev_norm(const TorusFunction& u, double s) {
  if (s < -2.0 || s > 3.0)
    throw ShapeMismatch("sobolev scale s must lie in [-2, 3]");
  double acc = 0.0;
  for (const auto& [k, v] : u.coeff) {
    const double xi2 = u.lat->frequency(k).squaredNorm();
    acc += std::pow(1.0 + xi2, s) * v.squaredNorm();
  }
  return std::sqrt(acc);
}

double l2_norm(const TorusFunction& u) { return sobolev_norm(u, 0.0); }

double grad_norm(const TorusFunction& u) {
  double acc = 0.0;
  for (const auto& [k, v] : u.coeff)
    acc += u.lat->frequency(k).squaredNorm() * v.squaredNorm();
  return std::sqrt(acc);
}

TorusFunction apply_Dj(const TorusFunction& u, int j) {
  if (j < 0 || j >= u.lat->dim) throw ShapeMismatch("direction out of range");
  TorusFunction out;
  out.lat = u.lat;
  out.n = u.n;
  for (const auto& [k, v] : u.coeff) {
    const double xij = u.lat->frequency(k)(j);
    if (xij != 0.0) out.coeff[k] = xij * v;
  }
  return out;
}

}  // namespace pwh
