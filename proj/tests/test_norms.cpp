#include "doctest.h"

#include "holder/norms.hpp"

#include <cmath>

using namespace holder;

namespace {

grid_field unit_square_field(const std::function<double(const vecd&)>& f, int n_cells) {
    return sample_to_grid(f, {0.0, 0.0}, {1.0 / n_cells, 1.0 / n_cells}, {n_cells, n_cells},
                          [](const vecd&) { return true; });
}

bool cell_in_ball(const grid_field& g, const std::vector<int>& idx, const gamma_ball& b) {
    vecd c = g.cell_center(idx);
    vecd lo = b.box_lo(), hi = b.box_hi();
    for (int i = 0; i < g.n; ++i)
        if (!(c[i] > lo[i] && c[i] < hi[i])) return false;
    if (g.n > 2 && !(bar_dist(c, b.center, g.n) < b.bar_radius)) return false;
    return true;
}

template <typename Cell>
double brute_ball_sum(const grid_field& g, const gamma_ball& b, Cell cell) {
    std::vector<int> idx(g.n, 0);
    kahan_sum s;
    while (true) {
        if (g.mask[g.index(idx)] && cell_in_ball(g, idx, b)) s.add(cell(g.index(idx)));
        int ax = 0;
        while (ax < g.n && ++idx[ax] == g.extents[ax]) idx[ax++] = 0;
        if (ax == g.n) break;
    }
    return s.value();
}

double brute_morrey(const grid_field& f, double p, const weight_spec& w, const gamma_metric& m,
                    const norm_grids& g) {
    double vol = f.cell_volume();
    double best = 0;
    for (const vecd& c : g.centers)
        for (double r : g.radii) {
            gamma_ball b = make_ball(c, r, m);
            double integral =
                brute_ball_sum(f, b, [&](size_t k) { return std::pow(std::abs(f.values[k]), p) * vol; });
            best = std::max(best, std::pow(integral / weight_eval(w, r), 1.0 / p));
        }
    return best;
}

double brute_campanato(const grid_field& f, double p, const weight_spec& w,
                       const gamma_metric& m, const norm_grids& g) {
    double vol = f.cell_volume();
    double best = 0;
    for (const vecd& c : g.centers)
        for (double r : g.radii) {
            gamma_ball b = make_ball(c, r, m);
            double meas = brute_ball_sum(f, b, [&](size_t) { return vol; });
            if (meas <= 0) continue;
            double mu = brute_ball_sum(f, b, [&](size_t k) { return f.values[k] * vol; }) / meas;
            double osc = brute_ball_sum(
                f, b, [&](size_t k) { return std::pow(std::abs(f.values[k] - mu), p) * vol; });
            best = std::max(best, std::pow(osc / weight_eval(w, r), 1.0 / p));
        }
    return best;
}

}  // namespace

TEST_CASE("power weights evaluate with the enforced tail") {
    weight_spec w = weight_power(1.5);
    CHECK(weight_eval(w, 0.25) == doctest::Approx(std::pow(0.25, 1.5)));
    CHECK(weight_eval(w, 1.0) == doctest::Approx(1.0));
    CHECK(weight_eval(w, 4.0) == 1.0);
    CHECK(weight_eval(weight_power(0.0), 0.37) == 1.0);
    CHECK_THROWS_AS(weight_eval(w, 0.0), schema_error);
    CHECK_THROWS_AS(weight_power(-1.0), schema_error);
}

TEST_CASE("custom weights interpolate log-linearly and keep the tail") {
    weight_spec w = weight_custom({0.01, 0.1, 1.0}, {1e-4, 1e-2, 1.0});
    CHECK(weight_eval(w, 0.1) == doctest::Approx(1e-2).epsilon(1e-12));
    // log-linear between 0.1 and 1: phi(sqrt(0.1)) = sqrt(1e-2 * 1)
    CHECK(weight_eval(w, std::sqrt(0.1)) == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(weight_eval(w, 4.0) == 1.0);
    CHECK_THROWS_AS(weight_custom({0.2, 0.1}, {0.5, 0.5}), schema_error);
    CHECK_THROWS_AS(weight_custom({2.0}, {0.5}), schema_error);
}

TEST_CASE("gamma transform maps power weights exactly") {
    weight_spec w = weight_transform_gamma(weight_power(2.0), 0.5);
    CHECK(w.kind == weight_spec::kind_t::power);
    CHECK(w.lambda == doctest::Approx(1.0));
    weight_spec id = weight_transform_gamma(weight_power(1.3), 1.0);
    CHECK(id.lambda == doctest::Approx(1.3));
    weight_spec c = weight_transform_gamma(weight_custom({0.25, 1.0}, {0.0625, 1.0}), 0.5);
    // phi_gamma(r) = phi(r^1/2): table radius 0.25 maps to 0.0625
    CHECK(c.table_r[0] == doctest::Approx(0.0625));
    CHECK(weight_eval(c, 0.0625) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("morrey norm of the unit function hits the half-radius witness") {
    grid_field f = unit_square_field([](const vecd&) { return 1.0; }, 65);
    gamma_metric m = make_metric(1.0, 2);
    norm_grids g;
    for (size_t k = 0; k < f.size(); ++k) {
        size_t rem = k;
        std::vector<int> idx(2);
        idx[0] = static_cast<int>(rem % 65);
        idx[1] = static_cast<int>(rem / 65);
        g.centers.push_back(f.cell_center(idx));
    }
    g.radii = {0.125, 0.25, 0.5, 1.0};
    norm_estimate e = morrey_norm(f, 1.0, weight_power(1.0), m, g);
    CHECK(e.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(e.argmax_radius == 0.5);
    CHECK(e.argmax_center[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.argmax_center[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.center_count == f.size());
    CHECK(e.radius_count == 4);
}

TEST_CASE("morrey norm with the flat weight recovers the domain measure") {
    grid_field f = unit_square_field([](const vecd&) { return 1.0; }, 65);
    gamma_metric m = make_metric(1.0, 2);
    norm_grids g = default_norm_grids(f, m);
    norm_estimate e = morrey_norm(f, 1.0, weight_power(0.0), m, g);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-10));
    norm_estimate z = morrey_norm(unit_square_field([](const vecd&) { return 0.0; }, 65), 1.0,
                                  weight_power(0.0), m, g);
    CHECK(z.value == 0.0);
}

TEST_CASE("summed-table morrey agrees with the direct scan") {
    auto fn = [](const vecd& x) { return std::sin(3 * x[0] + 2 * x[1]) + 0.3; };
    grid_field f = unit_square_field(fn, 48);
    gamma_metric m = make_metric(0.5, 2);
    rng_stream rng(5150, 0);
    norm_grids g;
    for (int i = 0; i < 40; ++i)
        g.centers.push_back({rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)});
    g.radii = {0.031, 0.073, 0.15, 0.31, 0.69, 1.4};
    for (double p : {1.0, 2.0, 3.0}) {
        norm_estimate e = morrey_norm(f, p, weight_power(1.2), m, g);
        CHECK(e.value == doctest::Approx(brute_morrey(f, p, weight_power(1.2), m, g))
                             .epsilon(1e-10));
    }
}

TEST_CASE("three-dimensional morrey uses the disc-shaped bar section") {
    auto fn = [](const vecd& x) { return 1.0 + x[0] - 0.5 * x[2]; };
    grid_field f = sample_to_grid(fn, {0, 0, 0}, {1.0 / 12, 1.0 / 12, 1.0 / 12}, {12, 12, 12},
                                  [](const vecd&) { return true; });
    gamma_metric m = make_metric(0.5, 3);
    rng_stream rng(777, 1);
    norm_grids g;
    for (int i = 0; i < 12; ++i)
        g.centers.push_back(
            {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)});
    g.radii = {0.11, 0.29, 0.57, 1.3};
    norm_estimate e = morrey_norm(f, 2.0, weight_power(0.8), m, g);
    CHECK(e.value == doctest::Approx(brute_morrey(f, 2.0, weight_power(0.8), m, g))
                         .epsilon(1e-10));
}

TEST_CASE("campanato seminorm kills constants and matches the direct scan") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field c = unit_square_field([](const vecd&) { return 0.7; }, 32);
    norm_grids g = default_norm_grids(c, m);
    CHECK(campanato_seminorm(c, 1.0, weight_power(3.0), m, g).value < 1e-10);

    grid_field f = unit_square_field([](const vecd& x) { return x[1]; }, 24);
    norm_grids gf = default_norm_grids(f, m, 200);
    for (double p : {1.0, 2.0}) {
        double direct = brute_campanato(f, p, weight_power(3.0), m, gf);
        norm_estimate e = campanato_seminorm(f, p, weight_power(3.0), m, gf);
        CHECK(e.value == doctest::Approx(direct).epsilon(1e-9));
        CHECK(e.value > 0);
    }
}

TEST_CASE("campanato seminorm is invariant under adding constants") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field f = unit_square_field([](const vecd& x) { return x[1] * x[1] - 0.3 * x[0]; }, 24);
    grid_field fs = f;
    for (double& v : fs.values) v += 1.0;
    norm_grids g = default_norm_grids(f, m, 300);
    for (double p : {1.0, 2.0}) {
        double a = campanato_seminorm(f, p, weight_power(1.0), m, g).value;
        double b = campanato_seminorm(fs, p, weight_power(1.0), m, g).value;
        CHECK(b == doctest::Approx(a).epsilon(5e-12));
    }
}

TEST_CASE("campanato stays below twice the morrey norm on catalog entries") {
    gamma_metric m = make_metric(1.0, 2);
    for (const test_function& tf : smooth_catalog()) {
        grid_field f = unit_square_field([&](const vecd& x) { return tf.eval(x); }, 24);
        norm_grids g = default_norm_grids(f, m, 150);
        for (double p : {1.0, 2.0}) {
            double camp = campanato_seminorm(f, p, weight_power(1.5), m, g).value;
            double mor = morrey_norm(f, p, weight_power(1.5), m, g).value;
            CHECK(camp <= 2.0 * mor * (1 + 1e-12) + 1e-300);
        }
    }
}

TEST_CASE("discrete sups never decrease when the grids grow") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field f = unit_square_field([](const vecd& x) { return std::sin(5 * x[0]) * x[1]; }, 32);
    norm_grids big = default_norm_grids(f, m, 400);
    norm_grids small;
    for (size_t i = 0; i < big.centers.size(); i += 3) small.centers.push_back(big.centers[i]);
    for (size_t i = 0; i < big.radii.size(); i += 2) small.radii.push_back(big.radii[i]);
    CHECK(morrey_norm(f, 2.0, weight_power(1.0), m, small).value <=
          morrey_norm(f, 2.0, weight_power(1.0), m, big).value);
    CHECK(campanato_seminorm(f, 1.0, weight_power(1.0), m, small).value <=
          campanato_seminorm(f, 1.0, weight_power(1.0), m, big).value);
}

TEST_CASE("a jump drives the high-weight campanato seminorm up under refinement") {
    gamma_metric m = make_metric(1.0, 2);
    auto jump = [](const vecd& x) { return x[1] > 0.37 ? 1.0 : -1.0; };
    grid_field coarse = unit_square_field(jump, 32);
    grid_field fine = unit_square_field(jump, 128);
    double a = campanato_seminorm(coarse, 1.0, weight_power(3.0), m,
                                  default_norm_grids(coarse, m, 600))
                   .value;
    double b = campanato_seminorm(fine, 1.0, weight_power(3.0), m,
                                  default_norm_grids(fine, m, 600))
                   .value;
    CHECK(b > 2.0 * a);
}

TEST_CASE("sobolev-morrey norm of the unit function reduces to its morrey norm") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field f = unit_square_field([](const vecd&) { return 1.0; }, 32);
    norm_grids g = default_norm_grids(f, m, 500);
    sobolev_estimate s = sobolev_morrey_norm(f, 1, 1.0, weight_power(1.0), m, g);
    norm_estimate e = morrey_norm(f, 1.0, weight_power(1.0), m, g);
    CHECK(s.value == doctest::Approx(e.value).epsilon(1e-14));
    CHECK(s.terms.size() == 3);
    CHECK(s.dominant.value == doctest::Approx(e.value).epsilon(1e-14));
}

TEST_CASE("sobolev-morrey norm of x1 splits into its closed-form terms") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field f = unit_square_field([](const vecd& x) { return x[0]; }, 65);
    norm_grids g = default_norm_grids(f, m, 2000);
    sobolev_estimate s = sobolev_morrey_norm(f, 1, 1.0, weight_power(0.0), m, g);
    // |Ω|-integral terms: ‖x1‖ = 1/2, ‖∂1 x1‖ = 1, ‖∂2 x1‖ = 0
    CHECK(s.value == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(s.terms[0].estimate.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("sobolev-morrey norm obeys the triangle inequality on shared grids") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field f = unit_square_field([](const vecd& x) { return std::sin(2 * x[0] + x[1]); }, 24);
    grid_field h = unit_square_field([](const vecd& x) { return std::exp(x[0] - x[1]); }, 24);
    grid_field sum = f;
    for (size_t k = 0; k < sum.size(); ++k) sum.values[k] += h.values[k];
    norm_grids g = default_norm_grids(f, m, 200);
    double nf = sobolev_morrey_norm(f, 2, 2.0, weight_power(1.0), m, g).value;
    double nh = sobolev_morrey_norm(h, 2, 2.0, weight_power(1.0), m, g).value;
    double ns = sobolev_morrey_norm(sum, 2, 2.0, weight_power(1.0), m, g).value;
    CHECK(ns <= (nf + nh) * (1 + 1e-12));
    CHECK_THROWS_AS(sobolev_morrey_norm(f, 5, 2.0, weight_power(1.0), m, g), schema_error);
}

TEST_CASE("norm estimators reject malformed inputs") {
    gamma_metric m = make_metric(1.0, 2);
    grid_field f = unit_square_field([](const vecd&) { return 1.0; }, 8);
    norm_grids empty;
    CHECK_THROWS_AS(morrey_norm(f, 1.0, weight_power(1.0), m, empty), schema_error);
    norm_grids bad;
    bad.centers = {{0.5, 0.5}};
    bad.radii = {0.5, 0.25};
    CHECK_THROWS_AS(morrey_norm(f, 1.0, weight_power(1.0), m, bad), schema_error);
    bad.radii = {0.25, 0.5};
    CHECK_THROWS_AS(morrey_norm(f, 0.5, weight_power(1.0), m, bad), schema_error);
}

TEST_CASE("default grids follow the quarter-octave ladder") {
    gamma_metric m = make_metric(0.5, 2);
    grid_field f = unit_square_field([](const vecd&) { return 1.0; }, 64);
    norm_grids g = default_norm_grids(f, m, 1000);
    CHECK(g.centers.size() <= 1000);
    CHECK(g.radii.front() == doctest::Approx(4.0 / 64).epsilon(1e-12));
    for (size_t i = 1; i < g.radii.size(); ++i)
        CHECK(g.radii[i] / g.radii[i - 1] == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-12));
    // large enough to cover the domain from any center
    CHECK(g.radii.back() >= 1.0);
}

TEST_CASE("holder fit recovers the exponent of a metric power") {
    gamma_metric m = make_metric(0.5, 2);
    elementary_domain dom = make_elementary(m, phi_flat(0.0), {-0.5}, {0.5}, -1.0, false, 0.0, 0.0);
    test_function f = make_gamma_power("g", {0.0, -0.5}, 0.4, m);
    holder_fit fit = holder_ratio_fit([&](const vecd& x) { return f.eval(x); }, m, dom, 200000,
                                      {0.4}, 0.02, 2.0);
    CHECK(fit.fitted_exponent == doctest::Approx(0.4).epsilon(0.125));
    CHECK(std::abs(fit.fitted_exponent - 0.4) < 0.05);
    CHECK(fit.sup_ratios[0].second <= 1.0 + 1e-9);
    CHECK(fit.sup_ratios[0].second > 0.5);
}

TEST_CASE("holder fit sees the vertical coordinate as exponent one") {
    gamma_metric m = make_metric(0.5, 2);
    elementary_domain dom = make_elementary(m, phi_flat(0.0), {-1.0}, {1.0}, -2.0, false, 0.0, 0.0);
    holder_fit fit = holder_ratio_fit([](const vecd& x) { return x[1]; }, m, dom, 100000, {1.0},
                                      0.01, 1.0);
    CHECK(std::abs(fit.fitted_exponent - 1.0) < 0.05);
    CHECK(fit.sup_ratios[0].second == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("holder fit reports constants as degenerate") {
    gamma_metric m = make_metric(0.5, 2);
    elementary_domain dom = make_elementary(m, phi_flat(0.0), {-1.0}, {1.0}, -2.0, false, 0.0, 0.0);
    holder_fit fit = holder_ratio_fit([](const vecd&) { return 3.0; }, m, dom, 2000, {0.5},
                                      0.01, 1.0);
    CHECK(fit.degenerate);
    for (auto& [a, sup] : fit.sup_ratios) CHECK(sup == 0.0);
    CHECK_THROWS_AS(holder_ratio_fit([](const vecd&) { return 3.0; }, m, dom, 500, {0.5},
                                     0.01, 1.0),
                    schema_error);
    CHECK_THROWS_AS(holder_ratio_fit([](const vecd&) { return 3.0; }, m, dom, 2000, {0.5},
                                     0.1, 1.0),
                    schema_error);
}
