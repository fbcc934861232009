#pragma once

#include "holder/fields.hpp"
#include "holder/geometry.hpp"

#include <functional>

namespace holder {

// phi(r) = min{r^lambda, 1} or a tabulated weight with log-log interpolation;
// phi(r) = 1 for r > 1 is enforced in both cases
struct weight_spec {
    enum class kind_t { power, custom };
    kind_t kind = kind_t::power;
    double lambda = 0.0;
    vecd table_r, table_phi;
};

weight_spec weight_power(double lambda);
weight_spec weight_custom(vecd r, vecd phi);
double weight_eval(const weight_spec& w, double r);
// phi_gamma(r) = phi(r^gamma); power(lambda) maps to power(gamma*lambda)
weight_spec weight_transform_gamma(const weight_spec& w, double gamma);

struct norm_estimate {
    double value = 0.0;
    vecd argmax_center;
    double argmax_radius = 0.0;
    size_t center_count = 0;
    size_t radius_count = 0;
};

struct norm_grids {
    std::vector<vecd> centers;
    vecd radii;
};

// centers = masked cell centers subsampled to max_centers in index order;
// radii = geometric grid r_min*2^{j/4} with r_min = 4h, truncated at twice the
// delta_gamma diameter of the masked bounding box
norm_grids default_norm_grids(const grid_field& f, const gamma_metric& m,
                              size_t max_centers = 10000);

// discrete sup over centers/radii of (1/phi(r) int_{B∩mask} |f|^p)^{1/p};
// ball membership is the open coordinate-box predicate on cell centers, so
// the estimate is a lower bound of the continuum norm
norm_estimate morrey_norm(const grid_field& f, double p, const weight_spec& w,
                          const gamma_metric& m, const norm_grids& g, int threads = 1);

// same sup with the mean over B∩mask subtracted; zero-measure pairs skipped
norm_estimate campanato_seminorm(const grid_field& f, double p, const weight_spec& w,
                                 const gamma_metric& m, const norm_grids& g, int threads = 1);

struct sobolev_term {
    std::vector<int> alpha;
    norm_estimate estimate;
};

struct sobolev_estimate {
    double value = 0.0;  // sum of the term values
    std::vector<sobolev_term> terms;
    norm_estimate dominant;  // witness of the largest term
};

// sum over |alpha| <= l of morrey_norm of the finite-difference derivative;
// derivative masks shrink toward the interior, a documented lower-bound bias
sobolev_estimate sobolev_morrey_norm(const grid_field& f, int l, double p,
                                     const weight_spec& w, const gamma_metric& m,
                                     const norm_grids& g, int threads = 1);

// per-radius profile at a fixed center (for reports)
vecd morrey_profile(const grid_field& f, double p, const weight_spec& w,
                    const gamma_metric& m, const vecd& center, const vecd& radii);

struct holder_bin {
    double delta_mid = 0.0;  // geometric midpoint of the dyadic distance bin
    double max_osc = 0.0;
    size_t pairs = 0;
};

struct holder_fit {
    std::vector<std::pair<double, double>> sup_ratios;  // (alpha, sup |df|/delta^alpha)
    double fitted_exponent = 0.0;
    std::vector<holder_bin> bins;
    size_t pair_count = 0;
    bool degenerate = false;  // all oscillations vanished
};

// samples point pairs in the domain with delta_gamma spanning [delta_min,
// delta_max], computes sup ratios for the requested alphas and fits the
// exponent as the slope of the per-bin upper envelope in log-log
holder_fit holder_ratio_fit(const std::function<double(const vecd&)>& f,
                            const gamma_metric& m, const elementary_domain& dom,
                            size_t pair_samples, const vecd& alphas, double delta_min,
                            double delta_max, uint64_t seed = 2024);

}  // namespace holder
