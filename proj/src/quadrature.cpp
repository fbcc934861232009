#include "holder/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace holder {

quad_rule gauss_legendre(int n) {
    if (n < 1) throw schema_error("quadrature rule needs at least one node");
    quad_rule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre P_n(x) and derivative via the three-term recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[i] = -x;
        q.weights[i] = w;
        q.nodes[n - 1 - i] = x;
        q.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) q.nodes[n / 2] = 0.0;
    return q;
}

namespace {
const quad_rule& cached_reference_rule(int n) {
    static std::map<int, quad_rule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}
}  // namespace

quad_rule gauss_legendre(int n, double a, double b) {
    const quad_rule& ref = cached_reference_rule(n);
    quad_rule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    double mid = 0.5 * (a + b), hl = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        q.nodes[i] = mid + hl * ref.nodes[i];
        q.weights[i] = hl * ref.weights[i];
    }
    return q;
}

double integrate(const quad_rule& q, const std::function<double(double)>& f) {
    kahan_sum acc;
    for (size_t i = 0; i < q.size(); ++i) acc.add(q.weights[i] * f(q.nodes[i]));
    return acc.value();
}

namespace {
double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole,
                    double tol, int panel_nodes, int depth) {
    double m = 0.5 * (a + b);
    double left = integrate(gauss_legendre(panel_nodes, a, m), f);
    double right = integrate(gauss_legendre(panel_nodes, m, b), f);
    // floor the tolerance at rounding scale so splitting terminates
    double floor_tol = 4e-16 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(left + right - whole) <= std::max(tol, floor_tol))
        return left + right;
    double child_tol = std::max(0.5 * tol, floor_tol);
    return adaptive_rec(f, a, m, left, child_tol, panel_nodes, depth - 1) +
           adaptive_rec(f, m, b, right, child_tol, panel_nodes, depth - 1);
}
}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol,
                          int panel_nodes, int max_depth) {
    double whole = integrate(gauss_legendre(panel_nodes, a, b), f);
    return adaptive_rec(f, a, b, whole, tol, panel_nodes, max_depth);
}

}  // namespace holder
