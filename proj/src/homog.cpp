#include "pwhom/homog.hpp"

#include <cmath>

#include "pwhom/errors.hpp"

namespace pwh {

namespace {

// (Lambda^eps Pi b(D) + Lambda~^eps Pi) w
TorusFunction oscillating_part(const CorrectorKit& kit, const SymbolSpec& b,
                               const TorusFunction& w) {
  TorusFunction w1 = apply_bD(b, w);
  TorusFunction w2 = w;
  if (kit.use_smoothing) {
    w1 = apply_smoothing(w1, kit.N);
    w2 = apply_smoothing(w2, kit.N);
  }
  return add(multiply(kit.lambda_eps, w1), multiply(kit.lambda_tilde_eps, w2));
}

std::string norm_name(double s) {
  if (s == 0.0) return "L2";
  if (s == 1.0) return "H1";
  if (s == -1.0) return "Hm1";
  return "Hs" + std::to_string(s);
}

}  // namespace

CorrectorKit make_corrector_kit(const CellSolution& sol, const PeriodicField& g,
                                const SymbolSpec& b, int N, bool use_smoothing) {
  CorrectorKit kit;
  kit.sol = &sol;
  kit.N = N;
  kit.use_smoothing = use_smoothing;
  kit.lambda_eps = rescale_eps(sol.lambda, N);
  kit.lambda_tilde_eps = rescale_eps(sol.lambda_tilde, N);
  kit.bD_lambda_tilde_eps = rescale_eps(apply_bD(b, sol.lambda_tilde), N);
  kit.g_tilde_eps = rescale_eps(sol.g_tilde, N);
  kit.g_eps = rescale_eps(g, N);
  return kit;
}

TorusFunction corrector_resolvent(const CorrectorKit& kit, const SymbolSpec& b,
                                  const DiscreteOperator& op0,
                                  const TorusFunction& v) {
  return oscillating_part(kit, b, func_calc(op0, FuncKind::Inv, v));
}

TorusFunction corrector_time(const CorrectorKit& kit, const SymbolSpec& b,
                             TimeCorrector kind, double t,
                             const DiscreteOperator& op0, const TorusFunction& v) {
  TorusFunction w(torus_zero(*v.lat, v.n));
  switch (kind) {
    case TimeCorrector::K1:
      w = func_calc(op0, FuncKind::Inv, func_calc(op0, FuncKind::CosSqrt, v, t));
      break;
    case TimeCorrector::K2:
      w = func_calc(op0, FuncKind::SincSqrt, v, t);
      break;
    case TimeCorrector::K3:
      w = func_calc(op0, FuncKind::Inv, func_calc(op0, FuncKind::ExpI, v, t));
      break;
  }
  return oscillating_part(kit, b, w);
}

TorusFunction effective_solution(const DiscreteOperator& op0,
                                 const TorusFunction& phi,
                                 const TorusFunction& psi, const SourceTerm& F,
                                 double t) {
  const TorusFunction phi0 = func_calc(op0, FuncKind::Inv, phi);
  return solve_hyperbolic(op0, phi0, psi, F, t).u;
}

TorusFunction first_order_approx(const CorrectorKit& kit, const SymbolSpec& b,
                                 const DiscreteOperator& op0,
                                 const TorusFunction& phi,
                                 const TorusFunction& psi, const SourceTerm& F,
                                 double t) {
  const TorusFunction u0 = effective_solution(op0, phi, psi, F, t);
  const double eps = 1.0 / double(kit.N);
  return add_scaled(u0, cd(eps), oscillating_part(kit, b, u0));
}

TorusFunction flux_approx(const CorrectorKit& kit, const SymbolSpec& b,
                          const DiscreteOperator& op0, const TorusFunction& phi,
                          const TorusFunction& psi, const SourceTerm& F, double t) {
  const TorusFunction u0 = effective_solution(op0, phi, psi, F, t);
  TorusFunction w1 = apply_bD(b, u0);
  TorusFunction w2 = u0;
  if (kit.use_smoothing) {
    w1 = apply_smoothing(w1, kit.N);
    w2 = apply_smoothing(w2, kit.N);
  }
  return add(multiply(kit.g_tilde_eps, w1),
             multiply(kit.g_eps, multiply(kit.bD_lambda_tilde_eps, w2)));
}

TorusFunction true_flux(const PeriodicField& g_eps, const SymbolSpec& b,
                        const DiscreteOperator& op_eps, const TorusFunction& phi,
                        const TorusFunction& psi, const SourceTerm& F, double t) {
  const TorusFunction phi_e = func_calc(op_eps, FuncKind::Inv, phi);
  const TorusFunction u_eps = solve_hyperbolic(op_eps, phi_e, psi, F, t).u;
  return multiply(g_eps, apply_bD(b, u_eps));
}

std::vector<ErrorRow> error_report(const TorusFunction& u_ref,
                                   const TorusFunction& u_approx,
                                   const std::vector<double>& s_list,
                                   double datum_norm, double epsilon, double t,
                                   const std::string& datum_tag) {
  const TorusFunction diff = sub(u_ref, u_approx);
  std::vector<ErrorRow> rows;
  for (double s : s_list) {
    ErrorRow row;
    row.epsilon = epsilon;
    row.t = t;
    row.norm_tag = norm_name(s);
    row.datum_tag = datum_tag;
    row.raw_error = sobolev_norm(diff, s);
    if (!(datum_norm > 0.0)) throw ShapeMismatch("datum norm must be positive");
    row.normalized_error = row.raw_error / datum_norm;
    row.bound_shape = epsilon * (1.0 + std::abs(t));
    if (!std::isfinite(row.raw_error))
      throw NoConvergence("error norm is not finite");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pwh
