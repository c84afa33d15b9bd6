#ifndef PWHOM_HOMOG_HPP
#define PWHOM_HOMOG_HPP

#include <string>

#include "pwhom/propagate.hpp"

namespace pwh {

// eps-rescaled cell data entering the correctors, built once per N.
struct CorrectorKit {
  const CellSolution* sol = nullptr;
  int N = 1;
  bool use_smoothing = true;
  PeriodicField lambda_eps;          // n x m
  PeriodicField lambda_tilde_eps;    // n x n
  PeriodicField bD_lambda_tilde_eps; // m x n, (b(D)Lambda~)^eps
  PeriodicField g_tilde_eps;         // m x m
  PeriodicField g_eps;               // m x m
};

CorrectorKit make_corrector_kit(const CellSolution& sol, const PeriodicField& g,
                                const SymbolSpec& b, int N, bool use_smoothing);

// K(eps) v = [Lambda^eps] Pi b(D) (B0)^{-1} v + [Lambda~^eps] Pi (B0)^{-1} v.
TorusFunction corrector_resolvent(const CorrectorKit& kit, const SymbolSpec& b,
                                  const DiscreteOperator& op0,
                                  const TorusFunction& v);

enum class TimeCorrector { K1, K2, K3 };

// K1 = (...) cos(t sqrt(B0)) (B0)^{-1};  K2 = (...) (B0)^{-1/2} sin(t sqrt(B0));
// K3 = (...) e^{-i t B0} (B0)^{-1}, with (...) = Lambda^eps Pi b(D) + Lambda~^eps Pi.
TorusFunction corrector_time(const CorrectorKit& kit, const SymbolSpec& b,
                             TimeCorrector kind, double t,
                             const DiscreteOperator& op0, const TorusFunction& v);

// Effective solution of the prepared-data problem: initial data
// ((B0)^{-1} phi, psi) and source F.
TorusFunction effective_solution(const DiscreteOperator& op0,
                                 const TorusFunction& phi,
                                 const TorusFunction& psi, const SourceTerm& F,
                                 double t);

// First order approximation u~_0 + eps (Lambda^eps Pi b(D) + Lambda~^eps Pi) u~_0.
TorusFunction first_order_approx(const CorrectorKit& kit, const SymbolSpec& b,
                                 const DiscreteOperator& op0,
                                 const TorusFunction& phi,
                                 const TorusFunction& psi, const SourceTerm& F,
                                 double t);

// g~^eps Pi b(D) u~_0 + g^eps (b(D)Lambda~)^eps Pi u~_0  (m components).
TorusFunction flux_approx(const CorrectorKit& kit, const SymbolSpec& b,
                          const DiscreteOperator& op0, const TorusFunction& phi,
                          const TorusFunction& psi, const SourceTerm& F, double t);

// p_eps = g^eps b(D) u~_eps with u~_eps solving the prepared-data problem
// for B_eps (initial data (B_eps^{-1} phi, psi)).
TorusFunction true_flux(const PeriodicField& g_eps, const SymbolSpec& b,
                        const DiscreteOperator& op_eps, const TorusFunction& phi,
                        const TorusFunction& psi, const SourceTerm& F, double t);

struct ErrorRow {
  double epsilon = 0.0;
  double t = 0.0;
  std::string norm_tag;    // "L2", "H1", "Hm1"
  std::string datum_tag;
  double raw_error = 0.0;
  double normalized_error = 0.0;
  double bound_shape = 0.0;  // eps * (1 + |t|) reference value
};

// Sobolev-norm differences per requested s in {0, 1, -1}, normalized by the
// supplied datum norm.
std::vector<ErrorRow> error_report(const TorusFunction& u_ref,
                                   const TorusFunction& u_approx,
                                   const std::vector<double>& s_list,
                                   double datum_norm, double epsilon, double t,
                                   const std::string& datum_tag);

}  // namespace pwh

#endif
