#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "holder/fields.hpp"
#include "holder/geometry.hpp"
#include "holder/mollifier.hpp"
#include "holder/norms.hpp"

namespace holder {

// smooth cutoff: exactly 1 for t <= 1, exactly 0 for t >= 2, decreasing in
// between; the transition is the normalized upper tail integral of
// exp(-1/((s-1)(2-s))), evaluated from a cached chebyshev expansion
double theta_eval(double t);

// psi_k(x) = theta(2^k rho_n(x)) - theta(2^{k+1} rho_n(x)); at any point at
// most two consecutive k are nonzero and every other term is an exact zero,
// so partial sums telescope with no truncation error
struct layer_partition {
    elementary_domain dom;
    int k_min = 0;
    int k_max = 40;
    double smooth_eps = 0;  // optional bar smoothing of rho at scale eps * 2^{-k/gamma}

    double rho_at(const vecd& x, int k) const;
    double rho_reg(const vecd& x) const;
    double psi(int k, const vecd& x) const;
    double psi_sum(const vecd& x) const;
};

layer_partition build_layer_partition(const elementary_domain& dom, int k_min, int k_max,
                                      double smooth_eps = 0);

// sup_x |D^alpha psi_k| against k; the slope target is |alpha_bar|/gamma + alpha_n
struct scaling_check {
    std::vector<int> alpha;
    vecd ks;
    vecd log2_sup;
    double slope = 0;
    double target = 0;
    bool all_zero = false;       // derivative vanishes identically (flat graphs)
    bool stencil_shrunk = false; // a stencil had to back away from a graph kink
};

scaling_check psi_derivative_scaling_check(const layer_partition& part,
                                           const std::vector<int>& alpha, int k_lo, int k_hi,
                                           int samples_per_k, uint64_t seed = 99);

// f by closed form or stored grid
struct field_source {
    std::function<double(const vecd&)> fn;
    const grid_field* grid = nullptr;
    interp_scheme scheme = interp_scheme::multilinear;

    double operator()(const vecd& x) const {
        return fn ? fn(x) : eval_field(*grid, x, scheme);
    }
};

struct extension_config {
    static constexpr int k_auto = std::numeric_limits<int>::min();

    double A = 0;  // <= 0 picks the default 200 (1 + M n)
    int l = 2;
    int Q = 64;    // tensor quadrature nodes per axis; 64 reuses the kernel production rule
    int k_min = k_auto;  // k_auto derives the range from the output box
    int k_max = 40;
    int threads = 1;
    double smooth_eps = 0;
    interp_scheme scheme = interp_scheme::multilinear;
};

// all shifted quadrature nodes of f_k at x, with the entry margin rho_n(y)
// (negative means strictly inside the subgraph)
struct support_check {
    bool ok = false;
    bool precondition_ok = false;  // 2^{-k-2} <= rho_n(x) <= 2^{-k+1}
    double worst_margin = 0;
    std::string note;
};

support_check shifted_support_check(const elementary_domain& dom, const mollifier_kernel& ker,
                                    int k, const vecd& x, const extension_config& cfg);

// tensor quadrature of f(xbar - 2^{-k/gamma} zbar, x_n - A 2^{-k} z_n) omega(z)
// over (1/2,1)^n; throws hard_error if a shifted node leaves the domain
double f_k_eval(const elementary_domain& dom, const field_source& f, const mollifier_kernel& ker,
                int k, const vecd& x, const extension_config& cfg);

struct extend_result {
    grid_field field;
    double A = 0;
    bool low_A = false;  // caller overrode A below the default
    int k_min = 0, k_max = 0;
    size_t omega_cells = 0;
    size_t layer_cells = 0;
    size_t decay_cells = 0;  // above the k_min layer: the partition tapers to zero there
    size_t tail_cells = 0;   // below the k_max layer: masked out as unresolved
    uint64_t kernel_hash = 0;
};

// Tf = f on the subgraph, sum_k psi_k f_k above it; needs the whole-cylinder
// form of the domain (W_all and a_infinite) so shifted nodes stay inside
extend_result extend_elementary(const elementary_domain& dom, const field_source& f,
                                const mollifier_kernel& ker, const extension_config& cfg,
                                const vecd& box_lo, const vecd& box_hi,
                                const std::vector<int>& res);

struct chart_diag {
    size_t chart = 0;
    int k_floor = 0;            // smallest layer whose shift depth fits the chart
    bool margin_flagged = false;  // requested range starts below k_floor
};

struct atlas_extend_result {
    grid_field field;
    double A = 0;
    std::vector<chart_diag> charts;
    size_t omega_cells = 0;
    size_t outside_cells = 0;
};

// Tf = sum_j psi_j T_j(f psi_j) with tensor cutoffs subordinate to the shrunk
// chart boxes, normalized so sum psi_j^2 = 1 wherever any cutoff is active
atlas_extend_result extend_atlas(const atlas& at, const field_source& f,
                                 const mollifier_kernel& ker, const extension_config& cfg,
                                 const vecd& box_lo, const vecd& box_hi,
                                 const std::vector<int>& res);

// |alpha_bar| + gamma alpha_n <= gamma l
bool derivative_index_allowed(const std::vector<int>& alpha, double gamma, int l);

// finite differences of an extended field; refuses indices past the bound
grid_field extension_derivative(const grid_field& tf, const std::vector<int>& alpha, double gamma,
                                int l);

struct operator_norm_report {
    struct entry {
        std::string name;
        vecd ratios;  // one per resolution
        double numerator = 0, denominator = 0;  // finest resolution
    };
    std::vector<entry> functions;
    vecd family_max;      // per resolution
    double max_ratio = 0;
    double spread = 0;    // max/min of family_max, minus 1
    int target_order = 0;
    weight_spec target_weight;
};

// ||Tf|| in the order-[gamma l] euclidean-ball space with weight phi_gamma on
// the output box, over ||f|| in the order-l space on the subgraph, across
// at least two grid resolutions
operator_norm_report operator_norm_estimate(const elementary_domain& dom,
                                            const std::vector<test_function>& family, int l,
                                            double p, const weight_spec& w,
                                            const mollifier_kernel& ker,
                                            const extension_config& cfg, const vecd& box_lo,
                                            const vecd& box_hi,
                                            const std::vector<int>& resolutions);

}  // namespace holder
