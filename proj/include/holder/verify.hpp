#pragma once

#include <string>
#include <utility>
#include <vector>

#include "holder/extension.hpp"
#include "holder/fields.hpp"
#include "holder/geometry.hpp"
#include "holder/norms.hpp"

namespace holder {

// Shared knobs for the empirical checks. The pair ladder runs `levels`
// rounds; round L draws base_pairs*4^L pairs with the distance floor
// d_base*floor_shrink^-L, so refinement quadruples the pairs while probing
// much closer. A constant counts as finite when the sup ratio grows by
// less than growth_gate across the ladder.
struct verify_config {
    int grid_res = 96;
    std::size_t base_pairs = 1500;
    int levels = 4;
    double d_base = 0.05;
    double floor_shrink = 8.0;
    double growth_gate = 2.0;
    double c0 = 50.0;          // equivalence bracket
    double eps = 0.05;         // exponent reduction in parallelepiped mode
    double tau = 2.0;          // radius dilation on the gradient side
    int threads = 1;
    std::uint64_t seed = 2026;
};

struct check_report {
    std::string id;
    std::vector<std::pair<std::string, double>> params;
    double predicted = 0.0;         // exponent the estimate calls for
    double measured = 0.0;          // sup constant at the finest ladder level
    double tolerance = 0.0;
    double growth = 0.0;            // sup_last / sup_first across the ladder
    double fitted_exponent = 0.0;   // envelope slope of log osc vs log dist
    bool boundary_case = false;
    bool pass = false;
    std::vector<std::string> notes;
    // (distance form value, oscillation) samples from the finest level
    std::vector<std::pair<double, double>> witnesses;
};

// |f(x)-f(y)| <= c (|xbar-ybar|^gamma + |x_n-y_n|)^alpha with
// alpha = (lambda - n_gamma)/p; requires lambda > n_gamma.
check_report check_campanato_embedding(const elementary_domain& dom,
                                       const test_function& f, double p,
                                       double lambda, const vecd& box_lo,
                                       const vecd& box_hi,
                                       const verify_config& vc);

// two-sided comparison of the Campanato and Morrey norms for
// 0 < lambda < n_gamma; brackets must stay inside [1/c0, c0] and not
// widen by more than 25% when the grid is refined by 3/2.
check_report check_morrey_campanato_equivalence(
    const elementary_domain& dom, const std::vector<test_function>& family,
    double p, double lambda, const vecd& box_lo, const vecd& box_hi,
    const verify_config& vc);

// Hoelder estimate with exponent gamma*(l + (lambda - n_gamma)/p) against
// the Sobolev-Morrey norm. Pairs are segment-filtered (64 interior samples
// must stay in the domain). barozzi = true switches to the parallelepiped
// variant: no segment filter and the exponent is reduced by vc.eps.
check_report check_sobolev_morrey_embedding(const elementary_domain& dom,
                                            const test_function& f, int l,
                                            double p, double lambda,
                                            const vecd& box_lo,
                                            const vecd& box_hi,
                                            const verify_config& vc,
                                            bool barozzi = false);

// first-order estimate with exponent eta + (lambda - n_gamma)/p where
// eta = n_gamma/n + n - n_gamma, or a measured eta_tilde when one is
// supplied (then the hypothesis p*eta_tilde > n_gamma - lambda is gated).
check_report check_daprato(const elementary_domain& dom,
                           const test_function& f, double p, double lambda,
                           const vecd& box_lo, const vecd& box_hi,
                           const verify_config& vc, double eta_tilde = 0.0);

struct poincare_sample {
    std::size_t f_index = 0;
    vecd center;
    double r = 0.0;
    double lhs = 0.0;   // mean oscillation of f on the ball
    double rhs = 0.0;   // (mean |grad f|^p on the tau-dilated ball)^{1/p}
    double ratio = 0.0;
    double convex_bound = 0.0;
    bool skipped = false;
    bool violation = false;
};

struct poincare_report {
    double eta_fit = 0.0;        // slope of log sup-ratio vs log r
    std::size_t samples = 0;
    std::size_t skipped = 0;
    std::size_t convex_violations = 0;
    bool convex_mode = false;
    bool pass = false;
    vecd radii;
    vecd sup_ratio;              // per radius, over family and centers
    std::vector<poincare_sample> details;  // capped
    std::vector<std::string> notes;
};

// rejection-samples `count` points of the domain inside the box
std::vector<vecd> sample_domain_points(const elementary_domain& dom,
                                       const vecd& box_lo, const vecd& box_hi,
                                       std::size_t count, std::uint64_t seed);

// mean oscillation over anisotropic balls against the dilated gradient
// mean. convex_mode additionally asserts the explicit constant
// (omega_n / |B cap Omega|)^{1-1/n} * diam^n per sample.
poincare_report poincare_ratio(const elementary_domain& dom,
                               const std::vector<test_function>& family,
                               double p, const vecd& box_lo,
                               const vecd& box_hi,
                               const std::vector<vecd>& centers,
                               const vecd& radii, const verify_config& vc,
                               bool convex_mode);

struct lemma_config {
    vecd x;
    double r = 0.0;
    vecd eta;
};

struct geometric_lemma_report {
    std::size_t configs = 0;
    std::size_t vacuous = 0;      // ball meets no boundary layer
    std::size_t gap_checks = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;    // max of gap - bound over all checks
    double s_fit = 0.0;           // max shifted-union diameter / (r + r^gamma)
    bool pass = false;
    std::vector<std::string> notes;
};

// admissible layer gap for a Euclidean ball of radius r:
// r + lip * 2^{gamma-1} * r^gamma
double geometric_gap_bound(double r, double lip, double gamma);

// for each (x, r, eta): find the first boundary layer the ball meets,
// then every deeper layer whose eta-shifted copy still meets the ball must
// sit within the gap bound of level h+3; the diameter of the union of
// shifted intersections calibrates S in diam <= S (r + r^gamma).
geometric_lemma_report check_geometric_lemma(
    const elementary_domain& dom, const std::vector<lemma_config>& configs,
    const verify_config& vc);

// convenience sampler for lemma configs: centers in the box, radii
// log-uniform in [r_lo, r_hi], shift components uniform in [-e, e]
std::vector<lemma_config> sample_lemma_configs(const vecd& box_lo,
                                               const vecd& box_hi,
                                               std::size_t count, double r_lo,
                                               double r_hi, double e,
                                               std::uint64_t seed);

// Euclidean-form Hoelder estimate for the extension: exponent
// [gamma l] + (gamma lambda - n)/p, oscillation of Tf measured on all
// pairs (no segment filter) against the gamma=1 Sobolev-Morrey norm of f
// on the domain. The extension is built with ker/ecfg to tie the report
// to a concrete operator instance.
check_report check_extension_corollary(const elementary_domain& dom,
                                       const test_function& f, int l,
                                       double p, double lambda,
                                       const mollifier_kernel& ker,
                                       const extension_config& ecfg,
                                       const vecd& box_lo, const vecd& box_hi,
                                       const verify_config& vc);

// at gamma = 1 every exponent formula must collapse to its classical
// value exactly (bitwise, no tolerance): alpha, the Sobolev-Morrey
// exponent, eta = 1, and the extension corollary exponent.
check_report verify_classical_limit(int n, int l, double p, double lambda);

}  // namespace holder
