#pragma once

#include "holder/quadrature.hpp"
#include "holder/util.hpp"

namespace holder {

using vecld = std::vector<long double>;

// omega(t) = b(t) P(t) on (1/2,1) with unit mass and l vanishing moments.
// P is expanded in polynomials orthonormal w.r.t. the weight b(t)dt, where the
// moment conditions reduce to P = sum_k pi_k(0) pi_k; the coefficients stay
// small, unlike an expansion in an unweighted basis whose coefficients grow
// past 1e14 and cancel catastrophically. The recurrence is built and evaluated
// in extended precision: the moment system conditioning (~1e10 at l = 5) eats
// most of a double's digits.
struct mollifier_kernel {
    int l = 0;
    vecld alpha, beta;    // three-term recurrence of the orthonormal family
    vecld pi_at_zero;     // pi_k(0), the expansion coefficients
    quad_rule rule;       // production quadrature on (1/2,1)
    double condition = 0; // of the unweighted-basis moment matrix (reported)
    vecd moment_residuals;  // production-rule moments minus their targets

    double eval(double t) const;
    uint64_t hash() const;
};

double bump_base(double t);  // exp(-1/((t-1/2)(1-t))) on (1/2,1), else 0

inline constexpr int k_production_nodes = 64;
inline constexpr int k_oracle_nodes = 128;

mollifier_kernel build_kernel_1d(int l);

// production-rule moment of t^j
double kernel_moment(const mollifier_kernel& k, int j);
// independent adaptive oracle at 2x node count
double kernel_moment_oracle(const mollifier_kernel& k, int j);

// product of per-axis kernels; zero outside (1/2,1)^n
double tensor_kernel_eval(const std::vector<mollifier_kernel>& axes, const vecd& z);

}  // namespace holder
