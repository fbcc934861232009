#pragma once

#include <functional>

#include "holder/util.hpp"

namespace holder {

struct quad_rule {
    vecd nodes, weights;  // on the interval given at construction
    size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1,1], nodes by Newton iteration on the recurrence
quad_rule gauss_legendre(int n);
// mapped to [a,b]
quad_rule gauss_legendre(int n, double a, double b);

double integrate(const quad_rule& q, const std::function<double(double)>& f);

// adaptive bisection with a fixed high-order panel rule; used as the
// independent oracle against production rules
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-13, int panel_nodes = 128, int max_depth = 24);

}  // namespace holder
