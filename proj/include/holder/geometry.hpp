#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "holder/util.hpp"

namespace holder {

struct gamma_metric {
    double gamma = 1.0;
    int n = 2;
    double n_gamma() const { return (n - 1) / gamma + 1.0; }
};

gamma_metric make_metric(double gamma, int n);

// Euclidean norm of the first n-1 coordinates of x-y
double bar_dist(const vecd& x, const vecd& y, int n);
double euclid_dist(const vecd& x, const vecd& y);

// max{ |xbar-ybar|^gamma, |x_n-y_n| }
double delta_gamma(const vecd& x, const vecd& y, const gamma_metric& m);
// |xbar-ybar|^gamma + |x_n-y_n|  (the form appearing in the embedding estimates)
double aniso_sum_dist(const vecd& x, const vecd& y, const gamma_metric& m);

// Lebesgue volume of the unit ball in R^k (omega_k); omega_0 = 1
double unit_ball_volume(int k);

// 2 * omega_{n-1} * r^{n_gamma}
double gamma_ball_measure(const gamma_metric& m, double r);

// product ball: Euclidean (n-1)-ball of radius r^{1/gamma} times an interval
// of half-length r in the last coordinate
struct gamma_ball {
    vecd center;
    double r = 0;
    double bar_radius = 0;
    int n = 2;
    bool contains(const vecd& y) const;
    vecd box_lo() const;  // bounding box; equals the ball itself when n = 2
    vecd box_hi() const;
};

gamma_ball make_ball(const vecd& center, double r, const gamma_metric& m);

// boundary graph catalog
struct phi_fn {
    enum class kind_t { flat, affine, cusp, wedge, bump, samples };
    kind_t kind = kind_t::flat;
    double c0 = 0;        // level / base height
    vecd grad;            // affine slope per bar-axis
    vecd vertex_bar;      // feature center for cusp/wedge/bump
    double amp = 0;       // cusp: signed opening M; wedge: signed slope; bump: amplitude
    double gamma = 1;     // cusp exponent
    double width = 1;     // bump support radius
    vecd sample_x, sample_y;  // piecewise-linear table (one bar-dimension only)
    double eval(const vecd& xbar) const;
};

phi_fn phi_flat(double c0);
phi_fn phi_affine(double c0, vecd grad);
// c0 + signed_m * |xbar - vertex|^gamma; signed_m < 0 digs a cusp into {x_n < phi}
phi_fn phi_cusp(double c0, double signed_m, double gamma, vecd vertex_bar = {});
phi_fn phi_wedge(double c0, double signed_slope, vecd vertex_bar = {});
phi_fn phi_bump(double c0, double amp, double width, vecd vertex_bar = {});
phi_fn phi_samples(vecd xs, vecd ys);

// subgraph domain { xbar in W, a < x_n < phi(xbar) }
struct elementary_domain {
    gamma_metric m;
    phi_fn phi;
    vecd W_lo, W_hi;
    bool W_all = false;
    double a = 0;             // holds the sentinel depth when a_infinite
    bool a_infinite = false;
    double lip = 0;           // declared Lip_gamma of phi
    double delta_margin = 0;

    bool bar_in_W(const vecd& x) const;
    double phi_at(const vecd& x) const;  // phi(xbar)
    bool contains(const vecd& x) const;
    // x_n - phi(xbar); requires xbar in W
    double rho(const vecd& x) const;
};

// validates invariants: Lip_gamma quotients on sampled pairs (reject if the
// declared lip is exceeded by more than 1%), phi > a + delta_margin on samples
elementary_domain make_elementary(gamma_metric m, phi_fn phi, vecd W_lo, vecd W_hi, double a,
                                  bool a_infinite, double lip, double delta_margin,
                                  uint64_t validation_seed = 12345);
// W = R^{n-1} variant; validation samples drawn from validation_box around the origin
elementary_domain make_elementary_whole(gamma_metric m, phi_fn phi, double a_sentinel, double lip,
                                        double delta_margin, double validation_halfwidth = 4.0,
                                        uint64_t validation_seed = 12345);

// unique k with 2^{-k-1} < rho <= 2^{-k}; requires rho > 0
int layer_index(double rho_value);
// nullopt means x is inside the domain (rho <= 0)
std::optional<int> layer_index_at(const elementary_domain& dom, const vecd& x);

struct cusp {
    vecd vertex;
    double h = 1;
    double M = 1;
    double gamma = 1;
    // vertex_n - h < y_n < vertex_n - M*|ybar - vertexbar|^gamma
    bool contains(const vecd& y) const;
};

cusp make_cusp(vecd vertex, double h, double M, double gamma);

// omega_{n-1} * gamma/(gamma+n-1) * M^{-(n-1)/gamma} * h^{n_gamma}
double cusp_measure(int n, double gamma, double M, double h);

struct measure_estimate {
    double value = 0;
    double error = 0;       // unresolved boundary volume, one-sided bound
    size_t cells = 0;
    bool resolution_ok = true;
};

// cell counting over the ball box with one level of boundary-cell bisection
measure_estimate ball_intersection_measure(const elementary_domain& dom, const vecd& x, double r,
                                           const gamma_metric& m, int resolution);
// fixed-seed Monte Carlo fallback (n = 3 scale)
measure_estimate ball_intersection_measure_mc(const elementary_domain& dom, const vecd& x,
                                              double r, const gamma_metric& m, size_t samples,
                                              uint64_t seed);

struct exponent_fit {
    double slope = 0;
    double intercept = 0;  // of log(value) vs log(r)
    int points = 0;
};

exponent_fit fit_line(const vecd& log_x, const vecd& log_y);
exponent_fit fit_measure_exponent(const elementary_domain& dom, const vecd& x, const vecd& radii,
                                  const gamma_metric& m, int resolution);

vecd geometric_radii(double r_min, double r_max, int per_octave = 4);

// charts: lambda(x) = R(angle) x + shift maps world to chart coordinates,
// lambda(V) = product of ]box_lo_i, box_hi_i[
struct chart {
    double angle = 0;
    vecd shift;
    vecd box_lo, box_hi;
    bool full_cuboid = false;
    phi_fn phi;      // elementary charts: {xbar in W_j, box_lo_n < x_n < phi}
    double lip = 0;

    vecd to_chart(const vecd& x) const;
    vecd to_world(const vecd& y) const;
    bool in_V(const vecd& x) const;
    bool in_V_shrunk(const vecd& x, double d) const;
    bool chart_point_in_H(const vecd& y) const;  // membership in chart coordinates
};

struct atlas {
    double gamma = 1;
    double d = 0;
    double M = 0;
    std::vector<chart> charts;
    int n = 2;
    // x in Omega iff some chart sees it inside its local representation
    bool contains(const vecd& x) const;
};

struct atlas_report {
    bool pass = false;
    bool margins_ok = false;
    bool shrunk_nonempty = false;
    bool covering_ok = false;
    bool charts_ok = false;    // classification + Hölder bound + a_n + d < phi
    int multiplicity = 0;
    double max_diam = 0;
    std::vector<std::string> failures;
};

atlas_report atlas_validate(const atlas& at, int samples_per_chart = 4000,
                            uint64_t seed = 777);

vecd chart_localize(const atlas& at, size_t j, const vecd& x);
vecd chart_delocalize(const atlas& at, size_t j, const vecd& y);

}  // namespace holder
