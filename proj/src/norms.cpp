#include "holder/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace holder {

weight_spec weight_power(double lambda) {
    if (!(lambda >= 0) || !std::isfinite(lambda))
        throw schema_error("power weight exponent must be finite and nonnegative");
    weight_spec w;
    w.kind = weight_spec::kind_t::power;
    w.lambda = lambda;
    return w;
}

weight_spec weight_custom(vecd r, vecd phi) {
    if (r.empty() || r.size() != phi.size())
        throw schema_error("custom weight table must be nonempty with matching lengths");
    for (size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0) || !std::isfinite(r[i]) || !(phi[i] > 0) || !std::isfinite(phi[i]))
            throw schema_error("custom weight table entries must be positive and finite");
        if (i > 0 && !(r[i] > r[i - 1]))
            throw schema_error("custom weight radii must be strictly increasing");
        if (r[i] > 1.0 && phi[i] != 1.0)
            throw schema_error("custom weight must equal 1 beyond radius 1");
    }
    weight_spec w;
    w.kind = weight_spec::kind_t::custom;
    w.table_r = std::move(r);
    w.table_phi = std::move(phi);
    return w;
}

double weight_eval(const weight_spec& w, double r) {
    if (!(r > 0)) throw schema_error("weight argument must be positive");
    if (r > 1.0) return 1.0;
    if (w.kind == weight_spec::kind_t::power) return std::min(std::pow(r, w.lambda), 1.0);
    const vecd& tr = w.table_r;
    const vecd& tp = w.table_phi;
    if (tr.size() == 1) return tp[0];
    size_t hi = std::lower_bound(tr.begin(), tr.end(), r) - tr.begin();
    size_t lo;
    if (hi == 0) {
        lo = 0;
        hi = 1;
    } else if (hi == tr.size()) {
        lo = tr.size() - 2;
        hi = tr.size() - 1;
    } else {
        lo = hi - 1;
    }
    double t = (std::log(r) - std::log(tr[lo])) / (std::log(tr[hi]) - std::log(tr[lo]));
    return std::exp(std::log(tp[lo]) + t * (std::log(tp[hi]) - std::log(tp[lo])));
}

weight_spec weight_transform_gamma(const weight_spec& w, double gamma) {
    if (!(gamma > 0) || !(gamma <= 1)) throw schema_error("gamma must lie in (0,1]");
    if (w.kind == weight_spec::kind_t::power) return weight_power(gamma * w.lambda);
    vecd r = w.table_r;
    for (double& x : r) x = std::pow(x, 1.0 / gamma);
    return weight_custom(std::move(r), w.table_phi);
}

namespace {

// smallest index with center > lo and smallest index with center >= hi, so the
// half-open index range holds exactly the cells with lo < center < hi under
// the same double comparisons a direct scan would use
std::pair<long, long> open_range(const grid_field& g, int axis, double lo, double hi) {
    const double h = g.spacing[axis];
    const double o = g.origin[axis];
    const long n = g.extents[axis];
    auto center = [&](long i) { return o + (i + 0.5) * h; };
    long i = std::clamp(static_cast<long>(std::floor((lo - o) / h - 0.5)) + 1, 0L, n);
    while (i > 0 && center(i - 1) > lo) --i;
    while (i < n && center(i) <= lo) ++i;
    long j = std::clamp(static_cast<long>(std::ceil((hi - o) / h - 0.5)), 0L, n);
    while (j > 0 && center(j - 1) >= hi) --j;
    while (j < n && center(j) < hi) ++j;
    if (j < i) j = i;
    return {i, j};
}

struct sat2 {
    long n0 = 0, n1 = 0;
    vecd s;

    template <typename Cell>
    void build(const grid_field& g, Cell cell) {
        n0 = g.extents[0];
        n1 = g.extents[1];
        s.assign(static_cast<size_t>(n0 + 1) * (n1 + 1), 0.0);
        for (long b = 0; b < n1; ++b)
            for (long a = 0; a < n0; ++a) {
                size_t row = static_cast<size_t>(b + 1) * (n0 + 1);
                size_t prev = static_cast<size_t>(b) * (n0 + 1);
                s[row + a + 1] =
                    s[row + a] + s[prev + a + 1] - s[prev + a] + cell(static_cast<size_t>(b * n0 + a));
            }
    }

    double query(long a0, long a1, long b0, long b1) const {
        size_t r1 = static_cast<size_t>(b1) * (n0 + 1);
        size_t r0 = static_cast<size_t>(b0) * (n0 + 1);
        return s[r1 + a1] - s[r1 + a0] - s[r0 + a1] + s[r0 + a0];
    }
};

// sum of cell(idx) over masked cells with centers strictly inside the ball;
// for n = 2 the ball is its coordinate box, in higher dimension the bar part
// is a euclidean disc so the box is filtered pointwise
template <typename Cell>
double ball_sum_loop(const grid_field& g, const gamma_ball& b, Cell cell) {
    vecd lo = b.box_lo(), hi = b.box_hi();
    int n = g.n;
    std::vector<std::pair<long, long>> rng(n);
    for (int i = 0; i < n; ++i) {
        rng[i] = open_range(g, i, lo[i], hi[i]);
        if (rng[i].first >= rng[i].second) return 0.0;
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = static_cast<int>(rng[i].first);
    kahan_sum sum;
    vecd c(n);
    while (true) {
        for (int i = 0; i < n; ++i) c[i] = g.origin[i] + (idx[i] + 0.5) * g.spacing[i];
        bool in = std::abs(c[n - 1] - b.center[n - 1]) < b.r;
        if (in && n > 2) in = bar_dist(c, b.center, n) < b.bar_radius;
        if (in) sum.add(cell(g.index(idx)));
        int ax = 0;
        while (ax < n) {
            if (++idx[ax] < static_cast<int>(rng[ax].second)) break;
            idx[ax] = static_cast<int>(rng[ax].first);
            ++ax;
        }
        if (ax == n) break;
    }
    return sum.value();
}

struct best_cell {
    double value = -1.0;
    size_t center = 0;
    size_t radius = 0;

    void offer(double v, size_t ci, size_t ri) {
        if (v > value) {
            value = v;
            center = ci;
            radius = ri;
        }
    }
    void merge(const best_cell& o) {
        if (o.value > value || (o.value == value && (o.center < center ||
                                (o.center == center && o.radius < radius))))
            *this = o;
    }
};

void validate_grids(const grid_field& f, double p, const norm_grids& g) {
    if (!(p >= 1) || !std::isfinite(p)) throw schema_error("p must be finite and >= 1");
    if (g.centers.empty()) throw schema_error("empty center set");
    if (g.radii.empty()) throw schema_error("empty radius set");
    for (const vecd& c : g.centers)
        if (static_cast<int>(c.size()) != f.n) throw schema_error("center dimension mismatch");
    for (size_t i = 0; i < g.radii.size(); ++i) {
        if (!(g.radii[i] > 0)) throw schema_error("radii must be positive");
        if (i > 0 && !(g.radii[i] > g.radii[i - 1]))
            throw schema_error("radii must be strictly increasing");
    }
}

norm_estimate finish(const best_cell& best, const norm_grids& g, double p, bool take_root) {
    norm_estimate e;
    e.center_count = g.centers.size();
    e.radius_count = g.radii.size();
    if (best.value > 0) {
        e.value = take_root ? std::pow(best.value, 1.0 / p) : best.value;
        e.argmax_center = g.centers[best.center];
        e.argmax_radius = g.radii[best.radius];
    } else {
        e.value = 0.0;
        e.argmax_center = g.centers[0];
        e.argmax_radius = g.radii[0];
    }
    return e;
}

}  // namespace

norm_grids default_norm_grids(const grid_field& f, const gamma_metric& m, size_t max_centers) {
    if (f.n != m.n) throw schema_error("field and metric dimension mismatch");
    norm_grids g;
    std::vector<int> idx(f.n, 0);
    vecd lo(f.n, std::numeric_limits<double>::infinity());
    vecd hi(f.n, -std::numeric_limits<double>::infinity());
    std::vector<size_t> masked;
    for (size_t k = 0; k < f.size(); ++k)
        if (f.mask[k]) masked.push_back(k);
    if (masked.empty()) throw schema_error("empty center set: field mask has no active cells");
    size_t stride = (masked.size() + max_centers - 1) / max_centers;
    for (size_t q = 0; q < masked.size(); q += stride) {
        size_t k = masked[q];
        size_t rem = k;
        for (int i = 0; i < f.n; ++i) {
            idx[i] = static_cast<int>(rem % f.extents[i]);
            rem /= f.extents[i];
        }
        g.centers.push_back(f.cell_center(idx));
    }
    for (size_t k : masked) {
        size_t rem = k;
        for (int i = 0; i < f.n; ++i) {
            int ii = static_cast<int>(rem % f.extents[i]);
            rem /= f.extents[i];
            double c = f.origin[i] + (ii + 0.5) * f.spacing[i];
            lo[i] = std::min(lo[i], c);
            hi[i] = std::max(hi[i], c);
        }
    }
    double bar = 0;
    for (int i = 0; i + 1 < f.n; ++i) bar += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    double ddiam = std::max(std::pow(std::sqrt(bar), m.gamma), hi[f.n - 1] - lo[f.n - 1]);
    double h = *std::max_element(f.spacing.begin(), f.spacing.end());
    double r_min = 4.0 * h;
    double r_max = std::max(2.0 * ddiam, r_min);
    for (int j = 0;; ++j) {
        double r = r_min * std::pow(2.0, j / 4.0);
        if (r > r_max * (1 + 1e-12) && j > 0) break;
        g.radii.push_back(r);
    }
    return g;
}

norm_estimate morrey_norm(const grid_field& f, double p, const weight_spec& w,
                          const gamma_metric& m, const norm_grids& g, int threads) {
    validate_grids(f, p, g);
    if (f.n != m.n) throw schema_error("field and metric dimension mismatch");
    const double vol = f.cell_volume();
    auto cell = [&](size_t k) {
        return f.mask[k] ? std::pow(std::abs(f.values[k]), p) * vol : 0.0;
    };
    sat2 sat;
    if (f.n == 2) sat.build(f, cell);
    vecd inv_phi(g.radii.size());
    for (size_t ri = 0; ri < g.radii.size(); ++ri) inv_phi[ri] = 1.0 / weight_eval(w, g.radii[ri]);

    std::vector<best_cell> bests(k_chunk_count);
    parallel_for_chunks(g.centers.size(), threads, [&](size_t chunk, size_t b, size_t e) {
        best_cell local;
        for (size_t ci = b; ci < e; ++ci) {
            for (size_t ri = 0; ri < g.radii.size(); ++ri) {
                gamma_ball ball = make_ball(g.centers[ci], g.radii[ri], m);
                double integral;
                if (f.n == 2) {
                    vecd lo = ball.box_lo(), hi = ball.box_hi();
                    auto [a0, a1] = open_range(f, 0, lo[0], hi[0]);
                    auto [b0, b1] = open_range(f, 1, lo[1], hi[1]);
                    integral = (a0 < a1 && b0 < b1) ? sat.query(a0, a1, b0, b1) : 0.0;
                } else {
                    integral = ball_sum_loop(f, ball, cell);
                }
                if (integral > 0) local.offer(integral * inv_phi[ri], ci, ri);
            }
        }
        bests[chunk] = local;
    });
    best_cell best;
    for (const best_cell& bc : bests) best.merge(bc);
    return finish(best, g, p, true);
}

norm_estimate campanato_seminorm(const grid_field& f, double p, const weight_spec& w,
                                 const gamma_metric& m, const norm_grids& g, int threads) {
    validate_grids(f, p, g);
    if (f.n != m.n) throw schema_error("field and metric dimension mismatch");
    const double vol = f.cell_volume();
    auto cell_m = [&](size_t k) { return f.mask[k] ? vol : 0.0; };
    auto cell_f = [&](size_t k) { return f.mask[k] ? f.values[k] * vol : 0.0; };
    auto cell_f2 = [&](size_t k) {
        return f.mask[k] ? f.values[k] * f.values[k] * vol : 0.0;
    };
    const bool square = (p == 2.0);
    sat2 s0, s1, s2;
    if (f.n == 2) {
        s0.build(f, cell_m);
        s1.build(f, cell_f);
        if (square) s2.build(f, cell_f2);
    }
    vecd inv_phi(g.radii.size());
    for (size_t ri = 0; ri < g.radii.size(); ++ri) inv_phi[ri] = 1.0 / weight_eval(w, g.radii[ri]);

    std::vector<best_cell> bests(k_chunk_count);
    parallel_for_chunks(g.centers.size(), threads, [&](size_t chunk, size_t b, size_t e) {
        best_cell local;
        for (size_t ci = b; ci < e; ++ci) {
            for (size_t ri = 0; ri < g.radii.size(); ++ri) {
                gamma_ball ball = make_ball(g.centers[ci], g.radii[ri], m);
                double meas, fsum, osc;
                if (f.n == 2) {
                    vecd lo = ball.box_lo(), hi = ball.box_hi();
                    auto [a0, a1] = open_range(f, 0, lo[0], hi[0]);
                    auto [b0, b1] = open_range(f, 1, lo[1], hi[1]);
                    if (a0 >= a1 || b0 >= b1) continue;
                    meas = s0.query(a0, a1, b0, b1);
                    if (meas <= 0) continue;
                    fsum = s1.query(a0, a1, b0, b1);
                    if (square) {
                        osc = std::max(s2.query(a0, a1, b0, b1) - fsum * fsum / meas, 0.0);
                    } else {
                        double mu = fsum / meas;
                        auto cell_dev = [&](size_t k) {
                            return f.mask[k] ? std::pow(std::abs(f.values[k] - mu), p) * vol : 0.0;
                        };
                        osc = ball_sum_loop(f, ball, cell_dev);
                    }
                } else {
                    meas = ball_sum_loop(f, ball, cell_m);
                    if (meas <= 0) continue;
                    fsum = ball_sum_loop(f, ball, cell_f);
                    double mu = fsum / meas;
                    auto cell_dev = [&](size_t k) {
                        return f.mask[k] ? std::pow(std::abs(f.values[k] - mu), p) * vol : 0.0;
                    };
                    osc = ball_sum_loop(f, ball, cell_dev);
                }
                if (osc > 0) local.offer(osc * inv_phi[ri], ci, ri);
            }
        }
        bests[chunk] = local;
    });
    best_cell best;
    for (const best_cell& bc : bests) best.merge(bc);
    return finish(best, g, p, true);
}

namespace {

void enumerate_alphas(int n, int l, std::vector<std::vector<int>>& out) {
    for (int total = 0; total <= l; ++total) {
        std::vector<int> a(n, 0);
        std::function<void(int, int)> rec = [&](int axis, int rem) {
            if (axis == n - 1) {
                a[axis] = rem;
                out.push_back(a);
                return;
            }
            for (int k = 0; k <= rem; ++k) {
                a[axis] = k;
                rec(axis + 1, rem - k);
            }
        };
        rec(0, total);
    }
}

}  // namespace

sobolev_estimate sobolev_morrey_norm(const grid_field& f, int l, double p,
                                     const weight_spec& w, const gamma_metric& m,
                                     const norm_grids& g, int threads) {
    if (l < 0 || l > 4) throw schema_error("derivative order must lie in [0,4]");
    std::vector<std::vector<int>> alphas;
    enumerate_alphas(f.n, l, alphas);
    sobolev_estimate est;
    kahan_sum total;
    double best = -1.0;
    for (const std::vector<int>& a : alphas) {
        bool zero = std::all_of(a.begin(), a.end(), [](int k) { return k == 0; });
        norm_estimate ne = zero ? morrey_norm(f, p, w, m, g, threads)
                                : morrey_norm(finite_diff_derivative(f, a), p, w, m, g, threads);
        total.add(ne.value);
        if (ne.value > best) {
            best = ne.value;
            est.dominant = ne;
        }
        est.terms.push_back({a, ne});
    }
    est.value = total.value();
    return est;
}

vecd morrey_profile(const grid_field& f, double p, const weight_spec& w,
                    const gamma_metric& m, const vecd& center, const vecd& radii) {
    norm_grids g;
    g.centers = {center};
    g.radii = radii;
    validate_grids(f, p, g);
    const double vol = f.cell_volume();
    auto cell = [&](size_t k) {
        return f.mask[k] ? std::pow(std::abs(f.values[k]), p) * vol : 0.0;
    };
    vecd out(radii.size(), 0.0);
    for (size_t ri = 0; ri < radii.size(); ++ri) {
        gamma_ball ball = make_ball(center, radii[ri], m);
        double integral = ball_sum_loop(f, ball, cell);
        out[ri] = std::pow(integral / weight_eval(w, radii[ri]), 1.0 / p);
    }
    return out;
}

holder_fit holder_ratio_fit(const std::function<double(const vecd&)>& f,
                            const gamma_metric& m, const elementary_domain& dom,
                            size_t pair_samples, const vecd& alphas, double delta_min,
                            double delta_max, uint64_t seed) {
    if (pair_samples < 1000) throw schema_error("holder fit needs at least 1000 pair samples");
    if (!(delta_min > 0) || !(delta_max >= 100.0 * delta_min * (1 - 1e-12)))
        throw schema_error("holder fit distance range must span at least two decades");
    if (dom.a_infinite) throw schema_error("holder fit needs a bounded domain");
    for (double a : alphas)
        if (!(a >= 0) || !std::isfinite(a)) throw schema_error("holder exponents must be >= 0");

    const int n = m.n;
    rng_stream rng(seed, 91);
    holder_fit fit;
    fit.sup_ratios.reserve(alphas.size());
    for (double a : alphas) fit.sup_ratios.push_back({a, 0.0});
    int nbins = static_cast<int>(std::ceil(std::log2(delta_max / delta_min) - 1e-9));
    nbins = std::max(nbins, 1);
    fit.bins.resize(nbins);
    for (int b = 0; b < nbins; ++b)
        fit.bins[b].delta_mid = delta_min * std::pow(2.0, b + 0.5);

    // the upper envelope needs pairs straddling the roughest spot of f at
    // every scale; a global pass alone almost never lands both endpoints near
    // a point singularity at small delta, so half the budget re-anchors near
    // the running argmax of osc/delta (the hotspot)
    vecd x(n), y(n), xbar(n - 1);
    vecd hotspot;
    double hot_ratio = -1.0;
    auto delta_step = [&](vecd& pt, double scale, double frac) {
        double bar_mag = 0.0, vert = 0.0;
        double mode = rng.uniform(0.0, 1.0);
        if (mode < 0.25) {
            vert = scale;
        } else if (mode < 0.5) {
            bar_mag = std::pow(scale, 1.0 / m.gamma);
        } else {
            bar_mag = std::pow(scale * rng.uniform(frac, 1.0), 1.0 / m.gamma);
            vert = scale * rng.uniform(frac, 1.0);
        }
        if (bar_mag > 0) {
            if (n == 2) {
                pt[0] += (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * bar_mag;
            } else {
                vecd d(n - 1);
                double nn = 0;
                for (int i = 0; i + 1 < n; ++i) {
                    double u = rng.uniform(1e-12, 1.0), v = rng.uniform(0.0, 1.0);
                    d[i] = std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
                    nn += d[i] * d[i];
                }
                nn = std::sqrt(std::max(nn, 1e-300));
                for (int i = 0; i + 1 < n; ++i) pt[i] += bar_mag * d[i] / nn;
            }
        }
        if (vert > 0) pt[n - 1] += (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * vert;
    };
    for (size_t s = 0; s < pair_samples; ++s) {
        bool anchored = (s % 2 == 1) && hot_ratio >= 0;
        for (int attempt = 0; attempt < 64; ++attempt) {
            double scale = rng.log_uniform(delta_min, delta_max);
            if (anchored) {
                x = hotspot;
                delta_step(x, scale * rng.log_uniform(0.02, 2.0), 0.0);
                if (!dom.contains(x)) continue;
            } else {
                for (int i = 0; i + 1 < n; ++i) xbar[i] = rng.uniform(dom.W_lo[i], dom.W_hi[i]);
                double top = dom.phi_at(xbar);
                if (!(top > dom.a)) continue;
                for (int i = 0; i + 1 < n; ++i) x[i] = xbar[i];
                x[n - 1] = rng.uniform(dom.a, top);
            }
            y = x;
            delta_step(y, scale, 0.25);
            if (!dom.contains(y)) continue;
            double d = delta_gamma(x, y, m);
            if (!(d >= delta_min * (1 - 1e-12)) || !(d <= delta_max * (1 + 1e-12))) continue;
            double osc = std::abs(f(x) - f(y));
            if (!std::isfinite(osc)) throw hard_error("holder fit sampled a nonfinite value");
            ++fit.pair_count;
            int b = std::clamp(static_cast<int>(std::floor(std::log2(d / delta_min))), 0,
                               nbins - 1);
            fit.bins[b].pairs++;
            fit.bins[b].max_osc = std::max(fit.bins[b].max_osc, osc);
            for (auto& [a, sup] : fit.sup_ratios)
                sup = std::max(sup, osc / std::pow(d, a));
            if (osc / d > hot_ratio) {
                hot_ratio = osc / d;
                hotspot = x;
            }
            break;
        }
    }
    if (fit.pair_count < 1000) throw schema_error("degenerate pair set: too few accepted pairs");

    vecd lx, ly;
    for (const holder_bin& b : fit.bins)
        if (b.pairs >= 30 && b.max_osc > 0) {
            lx.push_back(std::log2(b.delta_mid));
            ly.push_back(std::log2(b.max_osc));
        }
    if (lx.size() < 3) {
        fit.degenerate = true;
        fit.fitted_exponent = 0.0;
        return fit;
    }
    fit.fitted_exponent = fit_line(lx, ly).slope;
    return fit;
}

}  // namespace holder
