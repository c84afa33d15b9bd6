#include "pwhom/propagate.hpp"

#include <cmath>

#include "pwhom/errors.hpp"

namespace pwh {

namespace {

// E(mu, t) = int_0^t e^{i mu s} ds, stable near mu = 0.
cd phase_integral(double mu, double t) {
  if (std::abs(mu * t) < 1e-8) {
    const cd imt(0.0, mu * t);
    return t * (1.0 + imt / 2.0 + imt * imt / 6.0);
  }
  return (std::polar(1.0, mu * t) - 1.0) / cd(0.0, mu);
}

// int_0^t sin(w (t-s)) e^{i om s} ds
cd duhamel_sin(double w, double om, double t) {
  const cd a = std::polar(1.0, w * t) * phase_integral(om - w, t);
  const cd b = std::polar(1.0, -w * t) * phase_integral(om + w, t);
  return (a - b) / cd(0.0, 2.0);
}

// int_0^t cos(w (t-s)) e^{i om s} ds
cd duhamel_cos(double w, double om, double t) {
  const cd a = std::polar(1.0, w * t) * phase_integral(om - w, t);
  const cd b = std::polar(1.0, -w * t) * phase_integral(om + w, t);
  return 0.5 * (a + b);
}

}  // namespace

WaveState solve_hyperbolic(const DiscreteOperator& op, const TorusFunction& phi,
                           const TorusFunction& psi, const SourceTerm& F,
                           double t) {
  if (!(op.beta > 0.0)) throw NotPositive("hyperbolic solve needs beta > 0");

  const Eigen::VectorXcd a = op.evecs.adjoint() * op.to_vec(phi);
  const Eigen::VectorXcd b = op.evecs.adjoint() * op.to_vec(psi);
  std::vector<Eigen::VectorXcd> f;
  for (const auto& mode : F) f.push_back(op.evecs.adjoint() * op.to_vec(mode.profile));

  Eigen::VectorXcd u(op.dim()), du(op.dim());
  for (int i = 0; i < op.dim(); ++i) {
    const double w = std::sqrt(op.evals(i));
    const double cw = std::cos(t * w), sw = std::sin(t * w);
    cd ui = cw * a(i) + (sw / w) * b(i);
    cd dui = -w * sw * a(i) + cw * b(i);
    for (size_t k = 0; k < f.size(); ++k) {
      ui += (duhamel_sin(w, F[k].omega, t) / w) * f[k](i);
      dui += duhamel_cos(w, F[k].omega, t) * f[k](i);
    }
    u(i) = ui;
    du(i) = dui;
  }
  WaveState out;
  out.u = op.from_vec(op.evecs * u);
  out.du = op.from_vec(op.evecs * du);
  return out;
}

WaveState block_group(const DiscreteOperator& op, const WaveState& state, double t) {
  if (!(op.beta > 0.0)) throw NotPositive("block group needs beta > 0");
  const Eigen::VectorXcd a = op.evecs.adjoint() * op.to_vec(state.u);
  const Eigen::VectorXcd b = op.evecs.adjoint() * op.to_vec(state.du);
  Eigen::VectorXcd u(op.dim()), du(op.dim());
  for (int i = 0; i < op.dim(); ++i) {
    const double w = std::sqrt(op.evals(i));
    const double cw = std::cos(t * w), sw = std::sin(t * w);
    u(i) = cw * a(i) + (sw / w) * b(i);
    du(i) = -w * sw * a(i) + cw * b(i);
  }
  WaveState out;
  out.u = op.from_vec(op.evecs * u);
  out.du = op.from_vec(op.evecs * du);
  return out;
}

TorusFunction schrodinger_evolve(const DiscreteOperator& op,
                                 const TorusFunction& phi, double t) {
  return func_calc(op, FuncKind::ExpI, phi, t);
}

double energy(const DiscreteOperator& op, const WaveState& state) {
  const Eigen::VectorXcd u = op.to_vec(state.u);
  const Eigen::VectorXcd du = op.to_vec(state.du);
  return du.squaredNorm() + std::real(u.dot(op.mat * u));
}

}  // namespace pwh
