#ifndef PWHOM_PROPAGATE_HPP
#define PWHOM_PROPAGATE_HPP

#include "pwhom/operator.hpp"

namespace pwh {

// (u, d_t u) pair.
struct WaveState {
  TorusFunction u, du;
};

// F(x,t) = sum_k F_k(x) e^{i omega_k t}.
struct SourceMode {
  TorusFunction profile;
  double omega = 0.0;
};
using SourceTerm = std::vector<SourceMode>;

// Solution of  d_t^2 u = -B u + F,  u(0) = phi,  d_t u(0) = psi.
// The Duhamel integrals are evaluated in closed form per eigenvalue, with a
// series fallback near resonance (|omega_k - sqrt(lambda)| t below 1e-8).
WaveState solve_hyperbolic(const DiscreteOperator& op, const TorusFunction& phi,
                           const TorusFunction& psi, const SourceTerm& F,
                           double t);

// Applies [[cos(t sqrt(B)), sinc], [-sqrt(B) sin, cos]] to the state pair.
WaveState block_group(const DiscreteOperator& op, const WaveState& state, double t);

// e^{-i t B} phi.
TorusFunction schrodinger_evolve(const DiscreteOperator& op,
                                 const TorusFunction& phi, double t);

// ||du||_{L2}^2 + u^* B u.
double energy(const DiscreteOperator& op, const WaveState& state);

}  // namespace pwh

#endif
