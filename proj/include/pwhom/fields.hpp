#ifndef PWHOM_FIELDS_HPP
#define PWHOM_FIELDS_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <memory>
#include <vector>

#include "pwhom/lattice.hpp"

namespace pwh {

using cd = std::complex<double>;

// Exact piecewise-constant description of a 1-periodic coefficient on the
// unit interval in fractional cell coordinates. breaks[0] must be 0 and the
// i-th value holds on [breaks[i], breaks[i+1]) with wrap-around at 1.
struct Piecewise1d {
  std::vector<double> breaks;
  std::vector<Eigen::MatrixXcd> values;
};

// Raw ingestion samples on a uniform grid over the cell (row-major, the
// first coordinate fastest). Kept so that pointwise quadratures can use the
// given data instead of the band-limited synthesis.
struct GridSamples {
  int grid = 0;
  std::vector<Eigen::MatrixXcd> values;
};

// Gamma-periodic matrix-valued function as a truncated Fourier table:
// f(x) = sum_k coeff[k] e^{i<xi_k, x>}, xi_k = sum_j k_j b_j.
struct PeriodicField {
  const Lattice* lat = nullptr;
  int rows = 0, cols = 0;
  int cutoff = 0;  // modes with |k|_inf <= cutoff may be present
  std::map<Mode, Eigen::MatrixXcd> coeff;

  // Optional exact descriptions attached by ingestion; they drive exact
  // quadratures (cell averages, harmonic means, positivity checks).
  std::shared_ptr<const Piecewise1d> piecewise;
  std::shared_ptr<const GridSamples> samples;

  Eigen::MatrixXcd at(const Mode& k) const {
    auto it = coeff.find(k);
    if (it != coeff.end()) return it->second;
    return Eigen::MatrixXcd::Zero(rows, cols);
  }
};

// Vector-valued function on the computational torus, same Fourier basis.
struct TorusFunction {
  const Lattice* lat = nullptr;
  int n = 0;
  std::map<Mode, Eigen::VectorXcd> coeff;
};

// --- construction ---------------------------------------------------------

PeriodicField field_constant(const Lattice& lat, const Eigen::MatrixXcd& value);
PeriodicField field_from_fourier(const Lattice& lat, int rows, int cols,
                                 const std::vector<std::pair<Mode, Eigen::MatrixXcd>>& modes);
// Grid ingestion: analysis of uniform samples (grid^d of them, row-major,
// first coordinate fastest); resulting cutoff is (grid-1)/2.
PeriodicField field_from_grid(const Lattice& lat, int rows, int cols, int grid,
                              const std::vector<Eigen::MatrixXcd>& values);
// Piecewise-constant 1D ingestion with closed-form Fourier coefficients up
// to the requested cutoff.
PeriodicField field_from_piecewise(const Lattice& lat, const Piecewise1d& pw,
                                   int cutoff);

// --- field operations ------------------------------------------------------

// Inverse discrete Fourier synthesis on a uniform grid over the cell.
// Throws GridTooCoarse when grid < 2*cutoff + 1.
std::vector<Eigen::MatrixXcd> eval_on_grid(const PeriodicField& f, int grid);

// f^eps(x) = f(x / eps) with eps = 1/N: mode k goes to N*k.
PeriodicField rescale_eps(const PeriodicField& f, int N);

// Mean over the cell; equals the zeroth Fourier coefficient.
Eigen::MatrixXcd cell_average(const PeriodicField& f);
// (mean of the pointwise inverse)^{-1}. Uses the exact data when the field
// carries one, otherwise synthesis on a grid of size 4*cutoff + 3 per
// dimension. Throws SingularPointwise when a sample is not invertible.
Eigen::MatrixXcd harmonic_mean(const PeriodicField& f);

// Pointwise adjoint field f(x)^*; Fourier table (f^*)^(k) = (f^(-k))^H.
PeriodicField adjoint_field(const PeriodicField& f);

// Copy without the exact descriptors; forces the band-limited table to be
// the single source of truth downstream.
PeriodicField strip_exact(const PeriodicField& f);

// Drops the modes with |k|_inf > K.
PeriodicField truncate_field(const PeriodicField& f, int K);

// true iff coeff(-k) == coeff(k)^H within tol (Hermitian-matrix-valued field).
bool field_is_hermitian(const PeriodicField& f, double tol = 1e-12);

// |Omega|-normalized L2 norm: ( sum_k ||f^(k)||_F^2 )^{1/2}.
double field_l2_norm(const PeriodicField& f);

// Fourier-space products (convolution of tables).
PeriodicField multiply(const PeriodicField& f, const PeriodicField& h);
TorusFunction multiply(const PeriodicField& f, const TorusFunction& u);

// --- torus function operations ---------------------------------------------

TorusFunction torus_zero(const Lattice& lat, int n);
TorusFunction torus_single_mode(const Lattice& lat, int n, const Mode& k,
                                const Eigen::VectorXcd& value);

TorusFunction add(const TorusFunction& u, const TorusFunction& v);
TorusFunction sub(const TorusFunction& u, const TorusFunction& v);
TorusFunction scale(const TorusFunction& u, cd factor);
// u + factor * v
TorusFunction add_scaled(const TorusFunction& u, cd factor, const TorusFunction& v);

// Keeps exactly the modes whose wave vector lies in the dilated Brillouin
// zone (the smoothing projection with eps = 1/N).
TorusFunction apply_smoothing(const TorusFunction& u, int N);

// ( sum_k (1 + |xi_k|^2)^s |u^(k)|^2 )^{1/2}, s in [-2, 3].
double sobolev_norm(const TorusFunction& u, double s);
double l2_norm(const TorusFunction& u);
// ( sum_k |xi_k|^2 |u^(k)|^2 )^{1/2} = || D u ||_{L2}.
double grad_norm(const TorusFunction& u);

// Component-wise partial derivative D_j = -i d/dx_j (multiplier (xi_k)_j).
TorusFunction apply_Dj(const TorusFunction& u, int j);

std::vector<Eigen::VectorXcd> eval_on_grid(const TorusFunction& u, int grid);

}  // namespace pwh

#endif
