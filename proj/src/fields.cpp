#include "holder/fields.hpp"

#include <algorithm>
#include <cmath>

namespace holder {

std::pair<int, int> grid_field::axis_range(int axis, double lo, double hi) const {
    double h = spacing[axis];
    int first = static_cast<int>(std::ceil((lo - origin[axis]) / h - 0.5 - 1e-12));
    int last = static_cast<int>(std::floor((hi - origin[axis]) / h - 0.5 + 1e-12)) + 1;
    first = std::max(first, 0);
    last = std::min(last, extents[axis]);
    if (last < first) last = first;
    return {first, last};
}

grid_field make_grid(vecd origin, vecd spacing, std::vector<int> extents) {
    grid_field g;
    g.n = static_cast<int>(extents.size());
    if (origin.size() != extents.size() || spacing.size() != extents.size())
        throw schema_error("grid origin/spacing/extents disagree on dimension");
    for (int i = 0; i < g.n; ++i) {
        if (!(spacing[i] > 0)) throw schema_error("grid spacing must be positive");
        if (extents[i] < 1) throw schema_error("grid extents must be positive");
    }
    g.origin = std::move(origin);
    g.spacing = std::move(spacing);
    g.extents = std::move(extents);
    size_t total = 1;
    for (int i = 0; i < g.n; ++i) total *= static_cast<size_t>(g.extents[i]);
    g.values.assign(total, 0.0);
    g.mask.assign(total, 1);
    return g;
}

namespace {

double eval_nearest(const grid_field& f, const vecd& x) {
    std::vector<int> idx(f.n);
    for (int i = 0; i < f.n; ++i) {
        int j = static_cast<int>(std::lround((x[i] - f.origin[i]) / f.spacing[i] - 0.5));
        idx[i] = std::clamp(j, 0, f.extents[i] - 1);
    }
    size_t lin = f.index(idx);
    if (!f.mask[lin]) {
        // scan the immediate neighborhood for a valid cell
        std::vector<int> best = idx;
        double best_d = -1;
        std::vector<int> probe(f.n);
        int span = 2;
        std::function<void(int)> rec = [&](int axis) {
            if (axis == f.n) {
                size_t l = f.index(probe);
                if (!f.mask[l]) return;
                double d = 0;
                for (int i = 0; i < f.n; ++i) {
                    double c = f.origin[i] + (probe[i] + 0.5) * f.spacing[i];
                    d += (c - x[i]) * (c - x[i]);
                }
                if (best_d < 0 || d < best_d) {
                    best_d = d;
                    best = probe;
                }
                return;
            }
            for (int o = -span; o <= span; ++o) {
                int j = idx[axis] + o;
                if (j < 0 || j >= f.extents[axis]) continue;
                probe[axis] = j;
                rec(axis + 1);
            }
        };
        rec(0);
        if (best_d < 0) throw hard_error("field query outside the masked hull");
        lin = f.index(best);
    }
    return f.values[lin];
}

double eval_multilinear(const grid_field& f, const vecd& x) {
    std::vector<int> base(f.n);
    vecd w(f.n);
    for (int i = 0; i < f.n; ++i) {
        double t = (x[i] - f.origin[i]) / f.spacing[i] - 0.5;
        int j = static_cast<int>(std::floor(t));
        double frac = t - j;
        if (j < 0) {
            j = 0;
            frac = 0;
        }
        if (j > f.extents[i] - 2) {
            j = std::max(f.extents[i] - 2, 0);
            frac = 1;
        }
        if (f.extents[i] == 1) frac = 0;
        base[i] = j;
        w[i] = frac;
    }
    int corners = 1 << f.n;
    double acc = 0, wsum = 0;
    std::vector<int> idx(f.n);
    bool any_masked_out = false;
    for (int c = 0; c < corners; ++c) {
        double weight = 1;
        for (int i = 0; i < f.n; ++i) {
            int bit = (c >> i) & 1;
            idx[i] = std::min(base[i] + bit, f.extents[i] - 1);
            weight *= bit ? w[i] : 1 - w[i];
        }
        size_t lin = f.index(idx);
        if (!f.mask[lin]) {
            any_masked_out = true;
            continue;
        }
        acc += weight * f.values[lin];
        wsum += weight;
    }
    if (wsum <= 0) return eval_nearest(f, x);
    if (any_masked_out) return acc / wsum;
    return acc;
}

double catmull_rom(double fm1, double f0, double f1, double f2, double t) {
    double a = -0.5 * fm1 + 1.5 * f0 - 1.5 * f1 + 0.5 * f2;
    double b = fm1 - 2.5 * f0 + 2.0 * f1 - 0.5 * f2;
    double c = -0.5 * fm1 + 0.5 * f1;
    return ((a * t + b) * t + c) * t + f0;
}

double eval_cubic_axis(const grid_field& f, std::vector<int>& idx, const vecd& x, int axis);

double eval_cubic_point(const grid_field& f, std::vector<int>& idx, const vecd& x, int axis) {
    if (axis < 0) {
        size_t lin = f.index(idx);
        if (!f.mask[lin]) return eval_multilinear(f, x);
        return f.values[lin];
    }
    return eval_cubic_axis(f, idx, x, axis);
}

double eval_cubic_axis(const grid_field& f, std::vector<int>& idx, const vecd& x, int axis) {
    double t = (x[axis] - f.origin[axis]) / f.spacing[axis] - 0.5;
    int j = static_cast<int>(std::floor(t));
    double frac = t - j;
    if (j < 1 || j > f.extents[axis] - 3) {
        // not enough stencil room near the edge
        std::vector<int> save = idx;
        double v;
        {
            int jj = std::clamp(j, 0, f.extents[axis] - 2);
            double fr = std::clamp(t - jj, 0.0, 1.0);
            idx[axis] = jj;
            double f0 = eval_cubic_point(f, idx, x, axis - 1);
            idx[axis] = jj + 1 < f.extents[axis] ? jj + 1 : jj;
            double f1 = eval_cubic_point(f, idx, x, axis - 1);
            v = f0 + fr * (f1 - f0);
        }
        idx = save;
        return v;
    }
    double s[4];
    std::vector<int> save = idx;
    for (int o = 0; o < 4; ++o) {
        idx[axis] = j - 1 + o;
        s[o] = eval_cubic_point(f, idx, x, axis - 1);
    }
    idx = save;
    return catmull_rom(s[0], s[1], s[2], s[3], frac);
}

}  // namespace

double eval_field(const grid_field& f, const vecd& x, interp_scheme scheme) {
    if (static_cast<int>(x.size()) != f.n) throw schema_error("query dimension mismatch");
    switch (scheme) {
        case interp_scheme::nearest:
            return eval_nearest(f, x);
        case interp_scheme::multilinear:
            return eval_multilinear(f, x);
        case interp_scheme::cubic: {
            std::vector<int> idx(f.n, 0);
            return eval_cubic_axis(f, idx, x, f.n - 1);
        }
    }
    return 0;
}

double test_function::eval(const vecd& x) const {
    switch (kind) {
        case kind_t::polynomial: {
            kahan_sum s;
            for (const auto& [coef, pows] : terms) {
                double t = coef;
                for (size_t i = 0; i < pows.size(); ++i)
                    for (int k = 0; k < pows[i]; ++k) t *= x[i];
                s.add(t);
            }
            return s.value();
        }
        case kind_t::gamma_power:
            return std::pow(delta_gamma(x, center, metric), beta);
        case kind_t::smooth_bump: {
            double d2 = 0;
            for (size_t i = 0; i < x.size(); ++i) {
                double d = x[i] - center[i];
                d2 += d * d;
            }
            double t2 = d2 / (radius * radius);
            if (t2 >= 1.0) return 0.0;
            return amplitude * std::exp(1.0 - 1.0 / (1.0 - t2));
        }
        case kind_t::custom:
            return fn(x);
    }
    return 0;
}

test_function make_polynomial(std::string name,
                              std::vector<std::pair<double, std::vector<int>>> terms) {
    test_function f;
    f.kind = test_function::kind_t::polynomial;
    f.name = std::move(name);
    f.terms = std::move(terms);
    for (const auto& [coef, pows] : f.terms) {
        int deg = 0;
        for (int p : pows) {
            if (p < 0) throw schema_error("negative power in polynomial term");
            deg += p;
        }
        f.total_degree = std::max(f.total_degree, deg);
    }
    return f;
}

test_function make_gamma_power(std::string name, vecd center, double beta, gamma_metric m) {
    if (!(beta > 0)) throw schema_error("gamma_power exponent must be positive");
    test_function f;
    f.kind = test_function::kind_t::gamma_power;
    f.name = std::move(name);
    f.center = std::move(center);
    f.beta = beta;
    f.metric = m;
    return f;
}

test_function make_smooth_bump(std::string name, vecd center, double radius, double amplitude) {
    if (!(radius > 0)) throw schema_error("bump radius must be positive");
    test_function f;
    f.kind = test_function::kind_t::smooth_bump;
    f.name = std::move(name);
    f.center = std::move(center);
    f.radius = radius;
    f.amplitude = amplitude;
    return f;
}

test_function make_custom(std::string name, std::function<double(const vecd&)> fn) {
    test_function f;
    f.kind = test_function::kind_t::custom;
    f.name = std::move(name);
    f.fn = std::move(fn);
    return f;
}

std::vector<test_function> smooth_catalog() {
    std::vector<test_function> cat;
    cat.push_back(make_polynomial("one", {{1.0, {0, 0}}}));
    cat.push_back(make_polynomial("x1", {{1.0, {1, 0}}}));
    cat.push_back(make_polynomial("x2", {{1.0, {0, 1}}}));
    cat.push_back(make_polynomial("x1x2", {{1.0, {1, 1}}}));
    cat.push_back(make_polynomial("x1sq_minus_x2", {{1.0, {2, 0}}, {-1.0, {0, 1}}}));
    cat.push_back(make_custom("sin_mix", [](const vecd& x) { return std::sin(2 * x[0] + x[1]); }));
    cat.push_back(make_custom(
        "gauss", [](const vecd& x) { return std::exp(-0.25 * (x[0] * x[0] + x[1] * x[1])); }));
    cat.push_back(make_smooth_bump("bump", {0.0, -1.0}, 0.8));
    cat.push_back(make_custom("exp_sum", [](const vecd& x) {
        double t = x[0] + x[1];
        return t < -700 ? 0.0 : std::exp(t);
    }));
    cat.push_back(make_custom(
        "rational", [](const vecd& x) { return 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1]); }));
    return cat;
}

test_function catalog_entry(const std::string& name, const gamma_metric& m) {
    for (auto& f : smooth_catalog())
        if (f.name == name) return f;
    if (name == "gpow_025") return make_gamma_power(name, vecd(m.n, 0.0), 0.25, m);
    if (name == "gpow_04") return make_gamma_power(name, vecd(m.n, 0.0), 0.4, m);
    if (name == "gpow_05") return make_gamma_power(name, vecd(m.n, 0.0), 0.5, m);
    if (name == "gpow_08") return make_gamma_power(name, vecd(m.n, 0.0), 0.8, m);
    throw schema_error("unknown catalog function: " + name);
}

grid_field sample_to_grid(const std::function<double(const vecd&)>& f, vecd origin, vecd spacing,
                          std::vector<int> extents,
                          const std::function<bool(const vecd&)>& region) {
    grid_field g = make_grid(std::move(origin), std::move(spacing), std::move(extents));
    std::vector<int> idx(g.n, 0);
    size_t total = g.size();
    for (size_t lin = 0; lin < total; ++lin) {
        size_t rem = lin;
        for (int i = 0; i < g.n; ++i) {
            idx[i] = static_cast<int>(rem % g.extents[i]);
            rem /= g.extents[i];
        }
        vecd x = g.cell_center(idx);
        bool in = region ? region(x) : true;
        g.mask[lin] = in ? 1 : 0;
        g.values[lin] = in ? f(x) : 0.0;
        if (in && !std::isfinite(g.values[lin]))
            throw hard_error("nonfinite sample while gridding a field");
    }
    return g;
}

namespace {

// one first-derivative sweep along an axis
grid_field diff_axis(const grid_field& f, int axis) {
    grid_field g = f;
    double h = f.spacing[axis];
    std::vector<int> idx(f.n, 0);
    size_t total = f.size();
    size_t stride = 1;
    for (int i = 0; i < axis; ++i) stride *= static_cast<size_t>(f.extents[i]);
    for (size_t lin = 0; lin < total; ++lin) {
        size_t rem = lin;
        for (int i = 0; i < f.n; ++i) {
            idx[i] = static_cast<int>(rem % f.extents[i]);
            rem /= f.extents[i];
        }
        if (!f.mask[lin]) {
            g.mask[lin] = 0;
            g.values[lin] = 0;
            continue;
        }
        int j = idx[axis];
        bool has_prev = j > 0 && f.mask[lin - stride];
        bool has_next = j + 1 < f.extents[axis] && f.mask[lin + stride];
        if (has_prev && has_next) {
            g.values[lin] = (f.values[lin + stride] - f.values[lin - stride]) / (2 * h);
        } else if (has_next) {
            g.values[lin] = (f.values[lin + stride] - f.values[lin]) / h;
        } else if (has_prev) {
            g.values[lin] = (f.values[lin] - f.values[lin - stride]) / h;
        } else {
            g.mask[lin] = 0;
            g.values[lin] = 0;
        }
    }
    return g;
}

}  // namespace

grid_field finite_diff_derivative(const grid_field& f, const std::vector<int>& alpha) {
    if (static_cast<int>(alpha.size()) != f.n) throw schema_error("multi-index dimension mismatch");
    int total = 0;
    for (int a : alpha) {
        if (a < 0) throw schema_error("negative derivative order");
        total += a;
    }
    if (total > 4) throw schema_error("derivative order above 4 is not supported");
    grid_field g = f;
    bool any = false;
    for (int axis = 0; axis < f.n; ++axis)
        for (int k = 0; k < alpha[axis]; ++k) {
            g = diff_axis(g, axis);
            any = true;
        }
    if (any) {
        bool nonempty = false;
        for (uint8_t m : g.mask)
            if (m) {
                nonempty = true;
                break;
            }
        if (!nonempty) throw hard_error("difference stencil nowhere applicable");
    }
    return g;
}

integral_result integrate_region(const grid_field& f, double p,
                                 const std::function<bool(const vecd&)>& region) {
    if (!(p >= 1)) throw schema_error("integral exponent must be at least 1");
    integral_result res;
    kahan_sum acc;
    std::vector<int> idx(f.n, 0);
    size_t total = f.size();
    for (size_t lin = 0; lin < total; ++lin) {
        size_t rem = lin;
        for (int i = 0; i < f.n; ++i) {
            idx[i] = static_cast<int>(rem % f.extents[i]);
            rem /= f.extents[i];
        }
        if (!f.mask[lin]) continue;
        if (region && !region(f.cell_center(idx))) continue;
        acc.add(std::pow(std::abs(f.values[lin]), p));
        ++res.cells;
    }
    res.value = acc.value() * f.cell_volume();
    res.empty = res.cells == 0;
    return res;
}

integral_result region_mean(const grid_field& f, const std::function<bool(const vecd&)>& region) {
    integral_result res;
    kahan_sum acc;
    std::vector<int> idx(f.n, 0);
    size_t total = f.size();
    for (size_t lin = 0; lin < total; ++lin) {
        size_t rem = lin;
        for (int i = 0; i < f.n; ++i) {
            idx[i] = static_cast<int>(rem % f.extents[i]);
            rem /= f.extents[i];
        }
        if (!f.mask[lin]) continue;
        if (region && !region(f.cell_center(idx))) continue;
        acc.add(f.values[lin]);
        ++res.cells;
    }
    res.empty = res.cells == 0;
    res.value = res.empty ? 0.0 : acc.value() / static_cast<double>(res.cells);
    return res;
}

}  // namespace holder
