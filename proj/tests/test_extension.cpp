#include "doctest.h"

#include "holder/extension.hpp"

#include <algorithm>
#include <cmath>

#include "holder/fields.hpp"
#include "holder/mollifier.hpp"
#include "holder/quadrature.hpp"

using namespace holder;

namespace {

elementary_domain cusp_half_domain() {
    return make_elementary_whole(gamma_metric{0.5, 2}, phi_cusp(0.0, -1.0, 0.5), -64.0, 1.0, 0.0);
}

elementary_domain flat_domain() {
    return make_elementary_whole(gamma_metric{1.0, 2}, phi_flat(0.0), -64.0, 0.0, 0.0);
}

const test_function& catalog_entry_named(const std::vector<test_function>& cat,
                                         const std::string& name) {
    for (const auto& e : cat)
        if (e.name == name) return e;
    REQUIRE(false);
    return cat.front();
}

double sup_vs_exact(const extend_result& er, const std::function<double(const vecd&)>& exact) {
    double worst = 0.0;
    const grid_field& g = er.field;
    std::vector<int> idx(g.n, 0);
    for (size_t lin = 0; lin < g.size(); ++lin) {
        size_t rem = lin;
        for (int i = 0; i < g.n; ++i) {
            idx[i] = static_cast<int>(rem % g.extents[i]);
            rem /= g.extents[i];
        }
        if (g.mask[lin]) worst = std::max(worst, std::abs(g.values[lin] - exact(g.cell_center(idx))));
    }
    return worst;
}

double theta_oracle(double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    auto f = [](double s) {
        double g = (s - 1.0) * (2.0 - s);
        return g > 0 ? std::exp(-1.0 / g) : 0.0;
    };
    double total = adaptive_integrate(f, 1.0, 2.0, 1e-15);
    return adaptive_integrate(f, t, 2.0, 1e-15) / total;
}

}  // namespace

TEST_CASE("theta is exactly one below 1, exactly zero above 2, accurate between") {
    CHECK(theta_eval(0.0) == 1.0);
    CHECK(theta_eval(1.0) == 1.0);
    CHECK(theta_eval(2.0) == 0.0);
    CHECK(theta_eval(5.0) == 0.0);
    double prev = 1.0;
    for (int i = 1; i <= 20; ++i) {
        double t = 1.0 + i / 21.0;
        double v = theta_eval(t);
        CHECK(std::abs(v - theta_oracle(t)) <= 1e-12);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("layer cutoffs at rho 0.3 telescope over exactly two layers") {
    auto dom = flat_domain();
    auto part = build_layer_partition(dom, -4, 40);
    vecd x{0.2, 0.3};  // rho = 0.3, layer band (1/4, 1/2] so h = 1
    CHECK(layer_index(0.3) == 1);
    double p1 = part.psi(1, x), p2 = part.psi(2, x);
    CHECK(p1 == 1.0 - theta_eval(1.2));
    CHECK(p2 == theta_eval(1.2));
    CHECK(p1 + p2 == 1.0);
    for (int k : {-2, -1, 0, 3, 4, 10}) CHECK(part.psi(k, x) == 0.0);
}

TEST_CASE("cutoffs vanish inside the domain and outside the base box") {
    auto cusp = cusp_half_domain();
    auto part = build_layer_partition(cusp, -2, 40);
    vecd inside{0.4, -1.5};  // below the graph
    CHECK(cusp.contains(inside));
    for (int k = -2; k <= 12; ++k) CHECK(part.psi(k, inside) == 0.0);
    CHECK(part.psi_sum(inside) == 0.0);

    auto strip = make_elementary(gamma_metric{1.0, 2}, phi_flat(0.0), {-1.0}, {1.0}, -8.0, false,
                                 0.0, 0.5);
    auto spart = build_layer_partition(strip, 0, 40);
    vecd off{1.5, 0.3};  // xbar outside W
    CHECK(spart.psi(1, off) == 0.0);
    CHECK(spart.psi_sum(off) == 0.0);
}

TEST_CASE("partition of unity is exact with multiplicity two") {
    auto dom = cusp_half_domain();
    auto part = build_layer_partition(dom, -3, 40);
    rng_stream rng(2024, 5);
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        vecd x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        double rho = x[1] - dom.phi_at(x);
        if (!(rho > 1e-11 && rho < 7.5)) continue;
        ++checked;
        worst = std::max(worst, std::abs(part.psi_sum(x) - 1.0));
        int nonzero = 0;
        int h = layer_index(rho);
        for (int k = std::max(-3, h - 3); k <= h + 3; ++k) {
            double pk = part.psi(k, x);
            if (pk != 0.0) ++nonzero;
            CHECK(pk * part.psi(k + 2, x) == 0.0);
        }
        CHECK(nonzero <= 2);
    }
    CHECK(checked > 5000);
    CHECK(worst <= 1e-13);
}

TEST_CASE("partition stays exact with the smoothed distance") {
    auto dom = cusp_half_domain();
    auto part = build_layer_partition(dom, -3, 40, 0.5);
    rng_stream rng(4242, 7);
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 4000; ++i) {
        vecd x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        double rho = x[1] - dom.phi_at(x);
        if (!(rho > 1e-9 && rho < 7.5)) continue;
        ++checked;
        worst = std::max(worst, std::abs(part.psi_sum(x) - 1.0));
        // the regularized distance stays comparable to the raw one
        double sig = part.rho_reg(x);
        CHECK(sig > rho / (1.0 + std::sqrt(0.5)) * 0.999);
        CHECK(sig < rho / (1.0 - std::sqrt(0.5)) * 1.001);
    }
    CHECK(checked > 2000);
    CHECK(worst <= 1e-13);

    // affine graphs pass through the smoothing untouched
    auto flat = make_elementary_whole(gamma_metric{1.0, 2}, phi_flat(0.25), -64.0, 0.0, 0.0);
    auto fpart = build_layer_partition(flat, 0, 40, 0.5);
    vecd x{0.1, 0.55};
    CHECK(fpart.rho_reg(x) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("cutoff derivative growth matches the anisotropic layer scaling") {
    auto dom = cusp_half_domain();
    auto part = build_layer_partition(dom, -1, 40);

    scaling_check vert = psi_derivative_scaling_check(part, {0, 1}, 4, 14, 40);
    CHECK(!vert.all_zero);
    CHECK(vert.target == doctest::Approx(1.0));
    CHECK(std::abs(vert.slope - vert.target) <= 0.15 * vert.target);

    scaling_check bar = psi_derivative_scaling_check(part, {1, 0}, 4, 14, 40);
    CHECK(!bar.all_zero);
    CHECK(bar.target == doctest::Approx(2.0));
    CHECK(std::abs(bar.slope - bar.target) <= 0.15 * bar.target);

    auto flat = flat_domain();
    auto fpart = build_layer_partition(flat, 0, 40);
    scaling_check fb = psi_derivative_scaling_check(fpart, {1, 0}, 4, 14, 40);
    CHECK(fb.all_zero);  // flat graph: no bar dependence at all
    CHECK(fb.slope == 0.0);
    scaling_check fv = psi_derivative_scaling_check(fpart, {0, 1}, 4, 14, 40);
    CHECK(std::abs(fv.slope - 1.0) <= 0.15);
}

TEST_CASE("window averages reproduce polynomials through the kernel order") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    rng_stream rng(7, 3);
    for (int trial = 0; trial < 25; ++trial) {
        int k = 1 + trial % 6;
        vecd x{rng.uniform(-1.0, 1.0), 0.0};
        x[1] = dom.phi_at(x) + std::ldexp(1.0, -k - 1) * rng.log_uniform(1.1, 3.5);
        double v0 = f_k_eval(dom, {[](const vecd&) { return 1.0; }}, ker, k, x, cfg);
        CHECK(std::abs(v0 - 1.0) <= 1e-11);
        double v1 = f_k_eval(dom, {[](const vecd& y) { return y[1]; }}, ker, k, x, cfg);
        CHECK(std::abs(v1 - x[1]) <= 1e-8);
        double v2 = f_k_eval(dom, {[](const vecd& y) { return y[0] * y[0]; }}, ker, k, x, cfg);
        CHECK(std::abs(v2 - x[0] * x[0]) <= 1e-8);
    }
}

TEST_CASE("window average refuses nodes that escape the domain") {
    auto flat = flat_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 1.0;  // below the containment bound: shallow nodes stay above the graph
    vecd x{0.0, 0.7};
    CHECK_THROWS_AS(f_k_eval(flat, {[](const vecd&) { return 1.0; }}, ker, 0, x, cfg), hard_error);
}

TEST_CASE("shifted node containment on the catalog domains with the default shift") {
    std::vector<elementary_domain> doms;
    doms.push_back(flat_domain());
    doms.push_back(cusp_half_domain());
    doms.push_back(
        make_elementary_whole(gamma_metric{2.0 / 3.0, 2}, phi_cusp(0.0, -1.5, 2.0 / 3.0), -64.0,
                              1.5, 0.0));
    doms.push_back(make_elementary_whole(gamma_metric{1.0, 2}, phi_wedge(0.0, -1.0), -64.0, 1.0,
                                         0.0));
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    rng_stream rng(31337, 1);
    for (const auto& dom : doms) {
        for (int k = 0; k <= 8; ++k) {
            for (int s = 0; s < 25; ++s) {
                vecd x{rng.uniform(-1.5, 1.5), 0.0};
                x[1] = dom.phi_at(x) + std::ldexp(1.0, -k - 1) * rng.log_uniform(1.1, 3.8);
                support_check sc = shifted_support_check(dom, ker, k, x, cfg);
                CHECK(sc.precondition_ok);
                CHECK(sc.ok);
                CHECK(sc.worst_margin < 0.0);
            }
        }
    }
}

TEST_CASE("support check reports band violations and too-small shifts") {
    auto flat = flat_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 4.0;  // enough for a flat graph: rho drops by at least A/2 per unit node
    vecd x{0.0, 0.7};
    support_check ok = shifted_support_check(flat, ker, 0, x, cfg);
    CHECK(ok.ok);

    cfg.A = 1.0;
    support_check bad = shifted_support_check(flat, ker, 0, x, cfg);
    CHECK(bad.precondition_ok);
    CHECK(!bad.ok);
    CHECK(bad.worst_margin > 0.0);

    vecd deep{0.0, 5.0};  // rho = 5 outside the k = 0 band
    support_check pre = shifted_support_check(flat, ker, 0, deep, cfg);
    CHECK(!pre.precondition_ok);
    CHECK(!pre.note.empty());
}

TEST_CASE("extension restricts to the field itself on the domain") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    auto cat = smooth_catalog();
    const test_function& f = catalog_entry_named(cat, "sin_mix");
    field_source src{[&f](const vecd& x) { return f.eval(x); }};
    extend_result er = extend_elementary(dom, src, ker, cfg, {-1.0, -1.0}, {1.0, 1.0}, {48, 48});

    CHECK(er.A == doctest::Approx(600.0));
    CHECK(!er.low_A);
    CHECK(er.k_min == -2);  // box depth 2 plus the Hölder slack of the sampled graph minimum
    CHECK(er.kernel_hash == ker.hash());
    CHECK(er.omega_cells + er.layer_cells + er.tail_cells == er.field.size());

    const grid_field& g = er.field;
    std::vector<int> idx(2, 0);
    size_t on_domain = 0;
    for (size_t lin = 0; lin < g.size(); ++lin) {
        idx[0] = static_cast<int>(lin % g.extents[0]);
        idx[1] = static_cast<int>(lin / g.extents[0]);
        vecd x = g.cell_center(idx);
        CHECK(std::isfinite(g.values[lin]));
        if (dom.contains(x)) {
            CHECK(g.values[lin] == f.eval(x));  // restriction is the identity, bit for bit
            ++on_domain;
        }
    }
    CHECK(on_domain == er.omega_cells);
}

TEST_CASE("extension reproduces polynomials up to the kernel order on the whole box") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    auto cat = smooth_catalog();
    for (const auto* name : {"one", "x1", "x2", "x1x2", "x1sq_minus_x2"}) {
        const test_function& f = catalog_entry_named(cat, name);
        field_source src{[&f](const vecd& x) { return f.eval(x); }};
        extend_result er =
            extend_elementary(dom, src, ker, cfg, {-1.0, -1.0}, {1.0, 1.0}, {64, 64});
        CHECK(sup_vs_exact(er, [&f](const vecd& x) { return f.eval(x); }) <= 1e-7);
    }
}

TEST_CASE("smoothed cutoffs keep the reproduction property") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.smooth_eps = 0.5;
    auto cat = smooth_catalog();
    const test_function& f = catalog_entry_named(cat, "x1sq_minus_x2");
    field_source src{[&f](const vecd& x) { return f.eval(x); }};
    extend_result er = extend_elementary(dom, src, ker, cfg, {-1.0, -1.0}, {1.0, 1.0}, {64, 64});
    CHECK(sup_vs_exact(er, [&f](const vecd& x) { return f.eval(x); }) <= 1e-7);
}

TEST_CASE("extension is linear") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    auto f = [](const vecd& x) { return std::sin(2.0 * x[0] + x[1]); };
    auto g = [](const vecd& x) { return std::exp(-0.25 * (x[0] * x[0] + x[1] * x[1])); };
    auto combo = [&](const vecd& x) { return 2.0 * f(x) + 3.0 * g(x); };
    vecd lo{-1.0, -1.0}, hi{1.0, 1.0};
    std::vector<int> res{32, 32};
    extend_result ef = extend_elementary(dom, {f}, ker, cfg, lo, hi, res);
    extend_result eg = extend_elementary(dom, {g}, ker, cfg, lo, hi, res);
    extend_result ec = extend_elementary(dom, {combo}, ker, cfg, lo, hi, res);
    double worst = 0.0;
    for (size_t lin = 0; lin < ec.field.size(); ++lin)
        worst = std::max(worst, std::abs(ec.field.values[lin] - 2.0 * ef.field.values[lin] -
                                         3.0 * eg.field.values[lin]));
    CHECK(worst <= 1e-11);
}

TEST_CASE("extension only looks at the field within the window reach") {
    auto flat = flat_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 8.0;
    cfg.k_min = 0;  // window nodes reach down to depth A
    auto base = [](const vecd& x) { return std::exp(x[0] + 0.5 * x[1]); };
    auto spiked = [&base](const vecd& x) {
        return x[1] < -10.0 ? base(x) + 1e6 * std::sin(x[0]) : base(x);
    };
    vecd lo{-1.0, -1.0}, hi{1.0, 0.5};
    extend_result a = extend_elementary(flat, {base}, ker, cfg, lo, hi, {40, 40});
    extend_result b = extend_elementary(flat, {spiked}, ker, cfg, lo, hi, {40, 40});
    CHECK(std::equal(a.field.values.begin(), a.field.values.end(), b.field.values.begin()));
}

TEST_CASE("reruns and thread counts do not change a single bit") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    auto f = [](const vecd& x) { return std::sin(2.0 * x[0] + x[1]); };
    vecd lo{-1.0, -1.0}, hi{1.0, 1.0};
    extend_result a = extend_elementary(dom, {f}, ker, cfg, lo, hi, {32, 32});
    extend_result b = extend_elementary(dom, {f}, ker, cfg, lo, hi, {32, 32});
    CHECK(std::equal(a.field.values.begin(), a.field.values.end(), b.field.values.begin()));
    extension_config cfg3 = cfg;
    cfg3.threads = 3;
    extend_result c = extend_elementary(dom, {f}, ker, cfg3, lo, hi, {32, 32});
    CHECK(std::equal(a.field.values.begin(), a.field.values.end(), c.field.values.begin()));
    CHECK(a.field.mask == c.field.mask);
}

TEST_CASE("explicit layer bounds produce tail masking and a decay collar") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.k_min = 0;  // above 2^0 the layer sum tapers toward zero
    cfg.k_max = 6;  // below 2^-6 cells are unresolved and masked
    auto f = [](const vecd& x) { return 1.0 + x[0] + x[1]; };
    extend_result er = extend_elementary(dom, {f}, ker, cfg, {-1.0, -1.0}, {1.0, 1.0}, {64, 64});
    CHECK(er.tail_cells > 0);
    CHECK(er.decay_cells > 0);
    size_t masked = 0;
    for (size_t lin = 0; lin < er.field.size(); ++lin)
        if (!er.field.mask[lin]) ++masked;
    CHECK(masked == er.tail_cells);
    CHECK(er.omega_cells + er.layer_cells + er.tail_cells == er.field.size());
}

TEST_CASE("small shift override is flagged and schema violations refuse to run") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 20.0;
    auto f = [](const vecd&) { return 1.0; };
    extend_result er = extend_elementary(dom, {f}, ker, cfg, {-1.0, -1.0}, {1.0, 1.0}, {16, 16});
    CHECK(er.low_A);
    CHECK(er.A == doctest::Approx(20.0));

    auto strip = make_elementary(gamma_metric{1.0, 2}, phi_flat(0.0), {-1.0}, {1.0}, -8.0, false,
                                 0.0, 0.5);
    CHECK_THROWS_AS(
        extend_elementary(strip, {f}, ker, extension_config{}, {-1.0, -1.0}, {1.0, 1.0}, {8, 8}),
        schema_error);

    extension_config bad_q;
    bad_q.Q = 4;
    CHECK_THROWS_AS(extend_elementary(dom, {f}, ker, bad_q, {-1.0, -1.0}, {1.0, 1.0}, {8, 8}),
                    schema_error);
    CHECK_THROWS_AS(
        extend_elementary(dom, {f}, ker, extension_config{}, {-1.0, -1.0}, {-2.0, 1.0}, {8, 8}),
        schema_error);
    extension_config bad_range;
    bad_range.k_min = 10;
    bad_range.k_max = 5;
    CHECK_THROWS_AS(
        extend_elementary(dom, {f}, ker, bad_range, {-1.0, -1.0}, {1.0, 1.0}, {8, 8}),
        schema_error);
}

TEST_CASE("derivative index gate follows the anisotropic order") {
    CHECK(derivative_index_allowed({0, 0}, 0.5, 2));
    CHECK(derivative_index_allowed({1, 0}, 0.5, 2));
    CHECK(derivative_index_allowed({0, 1}, 0.5, 2));
    CHECK(derivative_index_allowed({0, 2}, 0.5, 2));
    CHECK(!derivative_index_allowed({2, 0}, 0.5, 2));
    CHECK(!derivative_index_allowed({1, 1}, 0.5, 2));
    CHECK(derivative_index_allowed({1, 1}, 1.0, 2));

    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    auto f = [](const vecd& x) { return x[0] + 2.0 * x[1]; };
    extend_result er =
        extend_elementary(dom, {f}, ker, extension_config{}, {-1.0, -1.0}, {1.0, 1.0}, {24, 24});
    grid_field d1 = extension_derivative(er.field, {1, 0}, 0.5, 2);
    double worst = 0.0;
    for (size_t lin = 0; lin < d1.size(); ++lin)
        if (d1.mask[lin]) worst = std::max(worst, std::abs(d1.values[lin] - 1.0));
    CHECK(worst <= 1e-6);
    CHECK_THROWS_AS(extension_derivative(er.field, {2, 0}, 0.5, 2), schema_error);
    CHECK_THROWS_AS(extension_derivative(er.field, {1, 0, 0}, 0.5, 2), schema_error);
}

TEST_CASE("operator norm study reports the transformed target space") {
    auto dom = cusp_half_domain();
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 20.0;
    std::vector<test_function> fam;
    auto cat = smooth_catalog();
    fam.push_back(catalog_entry_named(cat, "one"));
    fam.push_back(catalog_entry_named(cat, "x2"));
    operator_norm_report rep = operator_norm_estimate(dom, fam, 2, 2.0, weight_power(1.5), ker,
                                                      cfg, {-1.0, -1.0}, {1.0, 1.0}, {32, 48});
    CHECK(rep.target_order == 1);
    CHECK(rep.target_weight.lambda == doctest::Approx(0.75));
    CHECK(rep.functions.size() == 2);
    for (const auto& fe : rep.functions) {
        CHECK(fe.ratios.size() == 2);
        for (double r : fe.ratios) {
            CHECK(std::isfinite(r));
            CHECK(r > 0.0);
        }
    }
    CHECK(rep.max_ratio > 0.0);
    CHECK(std::isfinite(rep.spread));
    CHECK_THROWS_AS(operator_norm_estimate(dom, fam, 2, 2.0, weight_power(1.5), ker, cfg,
                                           {-1.0, -1.0}, {1.0, 1.0}, {32}),
                    schema_error);
    CHECK_THROWS_AS(operator_norm_estimate(dom, {}, 2, 2.0, weight_power(1.5), ker, cfg,
                                           {-1.0, -1.0}, {1.0, 1.0}, {32, 48}),
                    schema_error);
}

namespace {

// strip under a piecewise-linear roof with a bevel from height 2 down to 1.5;
// chart boxes live in the positive orthant, the shifts carry them there
atlas beveled_strip_atlas(double roof_x_hi = 5.0) {
    atlas at;
    at.gamma = 1.0;
    at.d = 0.05;
    at.M = 1.0;
    at.n = 2;

    chart roof;  // world box (-2, 0.35)..(roof_x_hi, 3.5), graph x2 = beta(x1)
    roof.angle = 0.0;
    roof.shift = {3.0, 1.0};
    roof.box_lo = {1.0, 1.35};
    roof.box_hi = {roof_x_hi + 3.0, 4.5};
    roof.phi = phi_samples({-97.0, 4.25, 4.75, 103.0}, {3.0, 3.0, 2.5, 2.5});
    roof.lip = 1.0;
    at.charts.push_back(roof);

    chart floor;  // rotated by pi: the strip floor x2 = 0 becomes a graph from below
    floor.angle = M_PI;
    floor.shift = {6.0, 2.0};
    floor.box_lo = {1.0, 0.8};
    floor.box_hi = {8.0, 2.5};
    floor.phi = phi_flat(2.0);
    floor.lip = 0.0;
    at.charts.push_back(floor);
    return at;
}

}  // namespace

TEST_CASE("a one-chart atlas matches the elementary extension") {
    auto flat = flat_domain();
    atlas at;
    at.gamma = 1.0;
    at.d = 0.05;
    at.M = 0.0;
    at.n = 2;
    chart only;  // world box (-4, -6)..(4, 1.5) carried into the positive orthant
    only.angle = 0.0;
    only.shift = {5.0, 7.0};
    only.box_lo = {1.0, 1.0};
    only.box_hi = {9.0, 8.5};
    only.phi = phi_flat(7.0);
    only.lip = 0.0;
    at.charts.push_back(only);
    CHECK(atlas_validate(at).pass);

    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 8.0;
    cfg.Q = 16;
    cfg.k_min = -3;
    auto f = [](const vecd& x) { return std::exp(-0.25 * (x[0] * x[0] + x[1] * x[1])); };
    vecd lo{-0.3, -0.6}, hi{0.3, 0.4};
    extend_result ele = extend_elementary(flat, {f}, ker, cfg, lo, hi, {40, 40});
    atlas_extend_result glob = extend_atlas(at, {f}, ker, cfg, lo, hi, {40, 40});
    CHECK(glob.A == doctest::Approx(8.0));
    double worst = 0.0;
    for (size_t lin = 0; lin < ele.field.size(); ++lin)
        worst = std::max(worst, std::abs(ele.field.values[lin] - glob.field.values[lin]));
    CHECK(worst <= 1e-11);  // the chart shift round-trips coordinates through one rounding
}

TEST_CASE("two-chart strip atlas extends with exact restriction") {
    atlas at = beveled_strip_atlas();
    atlas_report rep = atlas_validate(at);
    CHECK(rep.pass);
    CHECK(rep.multiplicity == 2);

    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 8.0;
    cfg.Q = 16;
    auto f = [](const vecd& x) { return std::sin(1.3 * x[0]) + 0.5 * x[1]; };
    vecd lo{-0.5, 0.05}, hi{3.0, 2.49};
    atlas_extend_result out = extend_atlas(at, {f}, ker, cfg, lo, hi, {36, 36});

    CHECK(out.charts.size() == 2);
    for (const auto& cd : out.charts) CHECK(cd.k_floor >= 0);  // shallow charts flag their floor
    CHECK(out.omega_cells > 0);
    CHECK(out.outside_cells > 0);
    CHECK(out.omega_cells + out.outside_cells == out.field.size());

    const grid_field& g = out.field;
    std::vector<int> idx(2, 0);
    for (size_t lin = 0; lin < g.size(); ++lin) {
        idx[0] = static_cast<int>(lin % g.extents[0]);
        idx[1] = static_cast<int>(lin / g.extents[0]);
        vecd x = g.cell_center(idx);
        CHECK(std::isfinite(g.values[lin]));
        if (at.contains(x)) CHECK(g.values[lin] == f(x));
    }
}

TEST_CASE("atlas extension refuses coverage holes and invalid atlases") {
    auto ker = build_kernel_1d(2);
    extension_config cfg;
    cfg.A = 8.0;
    cfg.Q = 16;
    auto f = [](const vecd& x) { return x[0] + x[1]; };

    // shortened roof: domain cells beyond the floor chart band lose every cutoff
    atlas holed = beveled_strip_atlas(2.0);
    CHECK_THROWS_AS(extend_atlas(holed, {f}, ker, cfg, {-0.5, 0.05}, {1.99, 1.49}, {50, 36}),
                    schema_error);

    atlas degenerate = beveled_strip_atlas();
    degenerate.d = 5.0;  // shrunk chart boxes become empty
    CHECK_THROWS_AS(extend_atlas(degenerate, {f}, ker, cfg, {-0.5, 0.05}, {3.0, 2.49}, {16, 16}),
                    schema_error);
}
