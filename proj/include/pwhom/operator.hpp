#ifndef PWHOM_OPERATOR_HPP
#define PWHOM_OPERATOR_HPP

#include "pwhom/cell.hpp"
#include "pwhom/fields.hpp"

namespace pwh {

// Cell-level coefficient set of the operator
// b(D)^* g^eps b(D) + sum_j (a_j^eps D_j + D_j a_j^eps*) + Q^eps + lambda Q0^eps.
struct CoefficientSet {
  PeriodicField g;                 // m x m
  std::vector<PeriodicField> a;    // d fields, n x n
  PeriodicField Q;                 // n x n Hermitian-valued
  PeriodicField Q0;                // n x n Hermitian positive definite
  int cutoff() const;
};

// Hermitian plane-wave discretization on the mode set |k|_inf <= K_big with
// cached eigendecomposition.
struct DiscreteOperator {
  const Lattice* lat = nullptr;
  int n = 0, K_big = 0;
  std::vector<Mode> modes;        // lexicographic order
  std::map<Mode, int> mode_pos;
  Eigen::MatrixXcd mat;
  Eigen::VectorXd evals;          // ascending
  Eigen::MatrixXcd evecs;         // unitary, columns match evals
  double beta = 0.0;              // min eigenvalue
  double c_star = 0.0;            // inf min-eig L(xi)/(1+|xi|^2), effective op only
  double herm_defect = 0.0;       // max |M - M^*| relative, before symmetrization

  int dim() const { return n * int(modes.size()); }
  Eigen::VectorXcd to_vec(const TorusFunction& u) const;
  TorusFunction from_vec(const Eigen::VectorXcd& v) const;
};

// Throws TruncationTooTight when K_big < N * coefficient cutoff + 2 and
// LambdaInadmissible when the assembled matrix is not positive definite.
DiscreteOperator assemble_beps(const CoefficientSet& coeffs, const SymbolSpec& b,
                               int N, int K_big, double lambda);

// Effective operator: block-diagonal with block L(xi_k) per retained mode.
DiscreteOperator assemble_b0(const CellSolution& sol, const SymbolSpec& b,
                             double lambda, int K_big, const Lattice& lat);

// Smallest lambda (doubling then bisection) such that every requested
// B_eps(N) and the effective operator have min eigenvalue >= beta_target.
double choose_lambda(const CoefficientSet& coeffs, const SymbolSpec& b,
                     const CellSolution& sol, const std::vector<int>& N_list,
                     const std::vector<int>& K_big_list, double beta_target);

enum class FuncKind {
  CosSqrt,        // cos(t sqrt(lambda))
  SincSqrt,       // sin(t sqrt(lambda)) / sqrt(lambda)
  SinSqrtScaled,  // sqrt(lambda) sin(t sqrt(lambda))
  ExpI,           // e^{-i t lambda}
  Inv,            // lambda^{-1}
  InvSqrt,        // lambda^{-1/2}
  Resolvent       // (lambda + nu)^{-1}
};

// U f(Lambda) U^* v through the cached eigendecomposition. Inv/InvSqrt demand
// beta > 0 (NotPositive otherwise).
TorusFunction func_calc(const DiscreteOperator& op, FuncKind kind,
                        const TorusFunction& v, double t = 0.0, double nu = 0.0);

// Same calculus on the coefficient vector (used internally and by tests).
Eigen::VectorXcd func_calc_vec(const DiscreteOperator& op, FuncKind kind,
                               const Eigen::VectorXcd& v, double t = 0.0,
                               double nu = 0.0);

// B^{-1/2} v through the integral representation
// (1/pi) int_0^inf nu^{-1/2} (B + nu I)^{-1} v dnu with a substituted
// Gauss-Legendre rule; cross-check for the spectral InvSqrt.
Eigen::VectorXcd inv_sqrt_quadrature(const DiscreteOperator& op,
                                     const Eigen::VectorXcd& v, int points);

// Test/oracle hook: wraps an explicit Hermitian matrix in a DiscreteOperator
// (modes |k|_inf <= K_big must give n*(2K+1)^d == mat.rows()).
DiscreteOperator operator_from_matrix(const Lattice& lat, int n, int K_big,
                                      const Eigen::MatrixXcd& mat);

// Gauss-Legendre nodes/weights on [a, b].
void gauss_legendre(int points, double a, double b, std::vector<double>& x,
                    std::vector<double>& w);

}  // namespace pwh

#endif
