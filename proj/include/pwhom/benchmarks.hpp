#ifndef PWHOM_BENCHMARKS_HPP
#define PWHOM_BENCHMARKS_HPP

#include "pwhom/harness.hpp"

namespace pwh {

// 1D two-phase medium g in {1, 4} with first-order terms and potentials;
// the workhorse of the convergence studies. with_lower_order = false zeroes
// the a_j (the Lambda~ = 0 flux special case).
Benchmark make_two_phase_1d(bool with_lower_order = true);

// 2D benchmark with divergence-free g columns and sum_j D_j a_j^* = 0, so
// both cell solutions vanish and the first-order approximation needs no
// corrector.
Benchmark make_zero_corrector_2d();

// Constant coefficients; every homogenization error sits at the numerical
// floor (smoke and exact-flag tests).
Benchmark make_constant_1d();

Benchmark make_benchmark(const std::string& id);

}  // namespace pwh

#endif
