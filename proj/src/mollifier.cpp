#include "holder/mollifier.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace holder {

namespace {

long double bump_base_ld(long double t) {
    long double g = (t - 0.5L) * (1.0L - t);
    if (g <= 0) return 0.0L;
    return std::exp(-1.0L / g);
}

// Legendre P_j at u
double legendre(int j, double u) {
    if (j == 0) return 1.0;
    double p0 = 1.0, p1 = u;
    for (int k = 2; k <= j; ++k) {
        double p2 = ((2 * k - 1) * u * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// condition number of the moment matrix in the unweighted (shifted-Legendre)
// basis; kept for reporting and for the refusal rule
double legendre_basis_condition(int l, const quad_rule& rule) {
    int m = l + 1;
    Eigen::MatrixXd M(m, m);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j) {
            kahan_sum s;
            for (size_t q = 0; q < rule.size(); ++q) {
                double t = rule.nodes[q];
                s.add(rule.weights[q] * bump_base(t) * std::pow(t, k) *
                      legendre(j, 4.0 * t - 3.0));
            }
            M(k, j) = s.value();
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0) / svd.singularValues()(m - 1);
}

// orthonormal values p_0(t)..p_l(t) by the recurrence
void ortho_values(const vecld& alpha, const vecld& beta, long double t, vecld& out) {
    int m = static_cast<int>(alpha.size());
    out.resize(m);
    long double pm1 = 0.0L;
    long double p0 = 1.0L / std::sqrt(beta[0]);
    out[0] = p0;
    for (int k = 0; k + 1 < m; ++k) {
        long double p1 =
            ((t - alpha[k]) * p0 - (k > 0 ? std::sqrt(beta[k]) * pm1 : 0.0L)) /
            std::sqrt(beta[k + 1]);
        out[k + 1] = p1;
        pm1 = p0;
        p0 = p1;
    }
}

}  // namespace

double bump_base(double t) { return static_cast<double>(bump_base_ld(t)); }

double mollifier_kernel::eval(double t) const {
    long double b = bump_base_ld(t);
    if (b == 0.0L) return 0.0;
    vecld p;
    ortho_values(alpha, beta, t, p);
    long double s = 0.0L;
    for (int k = 0; k <= l; ++k) s += pi_at_zero[k] * p[k];
    return static_cast<double>(b * s);
}

uint64_t mollifier_kernel::hash() const {
    fnv1a h;
    h.u64(static_cast<uint64_t>(l));
    for (long double a : alpha) h.f64(static_cast<double>(a));
    for (long double b : beta) h.f64(static_cast<double>(b));
    for (long double c : pi_at_zero) h.f64(static_cast<double>(c));
    for (double x : rule.nodes) h.f64(x);
    for (double w : rule.weights) h.f64(w);
    return h.value();
}

mollifier_kernel build_kernel_1d(int l) {
    if (l < 0) throw schema_error("vanishing-moment order must be nonnegative");
    quad_rule rule = gauss_legendre(k_production_nodes, 0.5, 1.0);
    if (l > 6)
        throw schema_error("moment system refused beyond order 6: condition number " +
                           format_double(legendre_basis_condition(l, rule)));

    int m = l + 1;
    size_t nq = rule.size();
    vecld wb(nq);
    for (size_t q = 0; q < nq; ++q)
        wb[q] = static_cast<long double>(rule.weights[q]) * bump_base_ld(rule.nodes[q]);

    // discrete Stieltjes for the monic recurrence of the weight b(t)dt
    vecld alpha(m + 1, 0.0L), beta(m + 1, 0.0L);
    vecld v_prev(nq, 0.0L), v_cur(nq, 1.0L);
    long double nrm_prev = 0.0L;
    for (int k = 0; k <= m; ++k) {
        long double num = 0.0L, den = 0.0L;
        for (size_t q = 0; q < nq; ++q) {
            long double vv = v_cur[q] * v_cur[q] * wb[q];
            num += static_cast<long double>(rule.nodes[q]) * vv;
            den += vv;
        }
        alpha[k] = num / den;
        beta[k] = (k > 0) ? den / nrm_prev : den;
        if (k == m) break;
        vecld v_next(nq);
        for (size_t q = 0; q < nq; ++q)
            v_next[q] = (static_cast<long double>(rule.nodes[q]) - alpha[k]) * v_cur[q] -
                        (k > 0 ? beta[k] * v_prev[q] : 0.0L);
        nrm_prev = den;
        v_prev = std::move(v_cur);
        v_cur = std::move(v_next);
    }
    alpha.resize(m);

    mollifier_kernel k;
    k.l = l;
    k.alpha = alpha;
    k.beta = beta;
    ortho_values(k.alpha, k.beta, 0.0L, k.pi_at_zero);
    k.rule = std::move(rule);
    k.condition = legendre_basis_condition(l, k.rule);
    k.moment_residuals.resize(m);
    for (int j = 0; j < m; ++j)
        k.moment_residuals[j] = kernel_moment(k, j) - (j == 0 ? 1.0 : 0.0);
    return k;
}

double kernel_moment(const mollifier_kernel& k, int j) {
    if (j < 0) throw schema_error("moment order must be nonnegative");
    kahan_sum s;
    for (size_t q = 0; q < k.rule.size(); ++q) {
        double t = k.rule.nodes[q];
        s.add(k.rule.weights[q] * std::pow(t, j) * k.eval(t));
    }
    return s.value();
}

double kernel_moment_oracle(const mollifier_kernel& k, int j) {
    if (j < 0) throw schema_error("moment order must be nonnegative");
    return adaptive_integrate([&](double t) { return std::pow(t, j) * k.eval(t); }, 0.5, 1.0,
                              1e-14, k_oracle_nodes);
}

double tensor_kernel_eval(const std::vector<mollifier_kernel>& axes, const vecd& z) {
    if (axes.size() != z.size()) throw schema_error("tensor kernel dimension mismatch");
    double prod = 1.0;
    for (size_t i = 0; i < axes.size(); ++i) {
        prod *= axes[i].eval(z[i]);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

}  // namespace holder
