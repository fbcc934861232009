#pragma once

#include <functional>
#include <string>
#include <vector>

#include "holder/geometry.hpp"
#include "holder/util.hpp"

namespace holder {

// uniform grid with values at cell centers origin + (i + 1/2) h
struct grid_field {
    vecd origin;
    vecd spacing;
    std::vector<int> extents;
    vecd values;
    std::vector<uint8_t> mask;
    int n = 2;

    size_t size() const { return values.size(); }
    size_t index(const std::vector<int>& idx) const {
        size_t r = 0;
        for (int i = n - 1; i >= 0; --i) r = r * extents[i] + idx[i];
        return r;
    }
    vecd cell_center(const std::vector<int>& idx) const {
        vecd x(n);
        for (int i = 0; i < n; ++i) x[i] = origin[i] + (idx[i] + 0.5) * spacing[i];
        return x;
    }
    double cell_volume() const {
        double v = 1;
        for (int i = 0; i < n; ++i) v *= spacing[i];
        return v;
    }
    // cells whose centers lie in [lo, hi] along one axis: [first, last)
    std::pair<int, int> axis_range(int axis, double lo, double hi) const;
};

grid_field make_grid(vecd origin, vecd spacing, std::vector<int> extents);

enum class interp_scheme { nearest, multilinear, cubic };

double eval_field(const grid_field& f, const vecd& x, interp_scheme scheme);

struct test_function {
    enum class kind_t { polynomial, gamma_power, smooth_bump, custom };
    kind_t kind = kind_t::custom;
    std::string name;
    // polynomial: sum of coef * prod x_i^pow_i
    std::vector<std::pair<double, std::vector<int>>> terms;
    int total_degree = 0;
    // gamma_power: delta_gamma(x, center)^beta
    vecd center;
    double beta = 0;
    gamma_metric metric{1.0, 2};
    double radius = 1;  // smooth_bump support
    double amplitude = 1;
    std::function<double(const vecd&)> fn;

    double eval(const vecd& x) const;
};

test_function make_polynomial(std::string name,
                              std::vector<std::pair<double, std::vector<int>>> terms);
test_function make_gamma_power(std::string name, vecd center, double beta, gamma_metric m);
test_function make_smooth_bump(std::string name, vecd center, double radius,
                               double amplitude = 1.0);
test_function make_custom(std::string name, std::function<double(const vecd&)> fn);

// the ten smooth functions used by the norm/extension studies, plus named extras
std::vector<test_function> smooth_catalog();
test_function catalog_entry(const std::string& name, const gamma_metric& m);

grid_field sample_to_grid(const std::function<double(const vecd&)>& f, vecd origin, vecd spacing,
                          std::vector<int> extents,
                          const std::function<bool(const vecd&)>& region);

grid_field finite_diff_derivative(const grid_field& f, const std::vector<int>& alpha);

struct integral_result {
    double value = 0;
    bool empty = false;
    size_t cells = 0;
};

integral_result integrate_region(const grid_field& f, double p,
                                 const std::function<bool(const vecd&)>& region);

// plain mean over region cells (for oscillation integrands)
integral_result region_mean(const grid_field& f, const std::function<bool(const vecd&)>& region);

}  // namespace holder
