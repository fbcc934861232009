#include "holder/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>

namespace holder {

namespace {

// |xbar-ybar|^q + |x_n-y_n|; q = gamma for the anisotropic estimates,
// q = 1 for the Euclidean-form extension corollary
double sum_form(const vecd& x, const vecd& y, double q, int n) {
    double bar = bar_dist(x, y, n);
    double vert = std::abs(x[n - 1] - y[n - 1]);
    return (bar > 0 ? std::pow(bar, q) : 0.0) + vert;
}

bool in_box(const vecd& x, const vecd& lo, const vecd& hi) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

void require_box(const vecd& lo, const vecd& hi, int n) {
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
        throw schema_error("box dimension does not match the domain");
    for (int i = 0; i < n; ++i)
        if (!(hi[i] > lo[i])) throw schema_error("box must have positive extent on every axis");
}

vecd random_dir(rng_stream& rng, int dim) {
    vecd v(dim);
    for (;;) {
        double s = 0;
        for (int i = 0; i < dim; ++i) {
            v[i] = rng.uniform(-1.0, 1.0);
            s += v[i] * v[i];
        }
        if (s > 0.01 && s <= 1.0) {
            double inv = 1.0 / std::sqrt(s);
            for (double& c : v) c *= inv;
            return v;
        }
    }
}

std::optional<vecd> draw_in_domain(const elementary_domain& dom, const vecd& lo, const vecd& hi,
                                   rng_stream& rng, int tries = 200) {
    int n = dom.m.n;
    vecd x(n);
    for (int t = 0; t < tries; ++t) {
        for (int i = 0; i < n; ++i) x[i] = rng.uniform(lo[i], hi[i]);
        if (dom.contains(x)) return x;
    }
    return std::nullopt;
}

bool segment_inside(const elementary_domain& dom, const vecd& x, const vecd& y, int pts) {
    int n = dom.m.n;
    vecd z(n);
    for (int j = 0; j < pts; ++j) {
        double t = (j + 0.5) / pts;
        for (int i = 0; i < n; ++i) z[i] = x[i] + t * (y[i] - x[i]);
        if (!dom.contains(z)) return false;
    }
    return true;
}

struct pair_batch {
    std::vector<vecd> xs, ys;
};

// pair sampler mixing uniform pairs, displaced pairs at a targeted
// distance, and boundary probes (vertex straddles and graph-normal
// segments) that exercise the graph singularity at every scale
pair_batch draw_pairs(const elementary_domain& dom, const vecd& lo, const vecd& hi,
                      std::size_t want, double d_lo, double d_hi, double gamma_form,
                      bool segment_filter, int segment_pts, rng_stream& rng) {
    int n = dom.m.n;
    int nb = n - 1;
    pair_batch out;
    out.xs.reserve(want);
    out.ys.reserve(want);

    vecd vbar(nb, 0.0);
    for (int i = 0; i < nb && i < static_cast<int>(dom.phi.vertex_bar.size()); ++i)
        vbar[i] = dom.phi.vertex_bar[i];

    auto log_frac = [&]() { return std::pow(10.0, rng.uniform(-2.7, -0.2)); };

    auto accept = [&](const vecd& x, const vecd& y) -> bool {
        if (!in_box(x, lo, hi) || !in_box(y, lo, hi)) return false;
        if (!dom.contains(x) || !dom.contains(y)) return false;
        double d = sum_form(x, y, gamma_form, n);
        if (d < d_lo || d > d_hi) return false;
        if (segment_filter && !segment_inside(dom, x, y, segment_pts)) return false;
        return true;
    };

    for (std::size_t i = 0; i < want; ++i) {
        int mode = static_cast<int>(i % 10);
        for (int attempt = 0; attempt < 80; ++attempt) {
            int m = attempt < 40 ? mode : 0;  // fall back to uniform pairs
            vecd x, y;
            bool built = false;
            if (m <= 3) {
                auto a = draw_in_domain(dom, lo, hi, rng, 60);
                auto b = draw_in_domain(dom, lo, hi, rng, 60);
                if (a && b) {
                    x = *a;
                    y = *b;
                    built = true;
                }
            } else if (m <= 6) {
                auto a = draw_in_domain(dom, lo, hi, rng, 60);
                if (a) {
                    x = *a;
                    y = x;
                    double t = rng.log_uniform(d_lo, d_hi);
                    int sub = attempt % 3;
                    if (sub == 0) {  // bar-only displacement
                        vecd dir = random_dir(rng, nb);
                        double step = std::pow(t, 1.0 / gamma_form);
                        for (int c = 0; c < nb; ++c) y[c] += dir[c] * step;
                    } else if (sub == 1) {  // vertical displacement
                        y[n - 1] += (rng.next_double() < 0.5 ? -t : t);
                    } else {
                        double theta = rng.uniform(0.2, 0.8);
                        vecd dir = random_dir(rng, nb);
                        double step = std::pow(t * theta, 1.0 / gamma_form);
                        for (int c = 0; c < nb; ++c) y[c] += dir[c] * step;
                        y[n - 1] += (rng.next_double() < 0.5 ? 1 : -1) * t * (1 - theta);
                    }
                    built = true;
                }
            } else {
                double t = rng.log_uniform(d_lo, std::min(d_hi, 1.0));
                if (m == 7) {  // straddle the vertex at matched height
                    double sep = std::pow(t, 1.0 / gamma_form);
                    double u = rng.uniform(0.35, 0.65);
                    vecd dir = random_dir(rng, nb);
                    x.assign(n, 0.0);
                    y.assign(n, 0.0);
                    for (int c = 0; c < nb; ++c) {
                        x[c] = vbar[c] + dir[c] * sep * u;
                        y[c] = vbar[c] - dir[c] * sep * (1 - u);
                    }
                    double wall = std::min(dom.phi_at(x), dom.phi_at(y));
                    x[n - 1] = y[n - 1] = wall - t * log_frac();
                    built = true;
                } else {  // graph-normal pair at depth scale t
                    vecd bar(nb);
                    if (m == 8) {
                        for (int c = 0; c < nb; ++c) bar[c] = rng.uniform(lo[c], hi[c]);
                    } else {  // hug the feature at its own scale
                        vecd dir = random_dir(rng, nb);
                        double rad = std::pow(t, 1.0 / dom.m.gamma) * rng.uniform(0.3, 1.5);
                        for (int c = 0; c < nb; ++c) bar[c] = vbar[c] + dir[c] * rad;
                    }
                    x.assign(bar.begin(), bar.end());
                    x.push_back(0.0);
                    if (dom.bar_in_W(x)) {
                        double wall = dom.phi_at(x);
                        double s = t * log_frac();
                        x[n - 1] = wall - s;
                        y = x;
                        y[n - 1] = wall - s - t;
                        built = true;
                    }
                }
            }
            if (!built || !accept(x, y)) continue;
            out.xs.push_back(x);
            out.ys.push_back(y);
            break;
        }
    }
    return out;
}

struct ladder_opts {
    double exponent = 0.5;
    double gamma_form = 1.0;
    double denom = 1.0;
    bool segment_filter = false;
    int segment_pts = 64;
};

struct ladder_out {
    double sup_first = 0, sup_last = 0, growth = 0, fitted = 0;
    std::size_t pairs = 0;
    std::vector<std::pair<double, double>> witnesses;
    std::vector<std::string> level_notes;
};

double box_form_diameter(const vecd& lo, const vecd& hi, double gamma_form, int n) {
    double bar2 = 0;
    for (int i = 0; i + 1 < n; ++i) bar2 += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    double bar = std::sqrt(bar2);
    return (bar > 0 ? std::pow(bar, gamma_form) : 0.0) + (hi[n - 1] - lo[n - 1]);
}

ladder_out run_ladder(const std::function<double(const vecd&)>& fe, const elementary_domain& dom,
                      const vecd& lo, const vecd& hi, const ladder_opts& opt,
                      const verify_config& vc) {
    if (!(opt.denom > 0) || !std::isfinite(opt.denom))
        throw hard_error("oscillation ladder needs a positive finite norm, got " +
                         format_double(opt.denom));
    if (vc.levels < 2) throw schema_error("ladder needs at least two levels");
    int n = dom.m.n;
    double d_hi = box_form_diameter(lo, hi, opt.gamma_form, n);

    const int nbins = 40;
    double bin_lo = vc.d_base * std::pow(vc.floor_shrink, -(vc.levels - 1)) * 0.25;
    double lb = std::log(bin_lo), ub = std::log(d_hi);
    std::vector<double> bin_max(nbins, 0.0);
    std::vector<std::size_t> bin_cnt(nbins, 0);

    ladder_out out;
    for (int L = 0; L < vc.levels; ++L) {
        std::size_t want = vc.base_pairs << (2 * L);
        double d_lo = std::min(vc.d_base * std::pow(vc.floor_shrink, -L), d_hi * 0.25);
        rng_stream rng(vc.seed, 211 + static_cast<std::uint64_t>(L));
        pair_batch pb = draw_pairs(dom, lo, hi, want, d_lo, d_hi, opt.gamma_form,
                                   opt.segment_filter, opt.segment_pts, rng);
        std::size_t m = pb.xs.size();
        vecd dist(m, 0.0), osc(m, 0.0);
        std::vector<std::exception_ptr> errs(k_chunk_count);
        parallel_for_chunks(m, vc.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
            try {
                for (std::size_t i = b; i < e; ++i) {
                    dist[i] = sum_form(pb.xs[i], pb.ys[i], opt.gamma_form, n);
                    osc[i] = std::abs(fe(pb.xs[i]) - fe(pb.ys[i]));
                }
            } catch (...) {
                errs[c] = std::current_exception();
            }
        });
        for (auto& ep : errs)
            if (ep) std::rethrow_exception(ep);

        double sup = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double ratio = osc[i] / (opt.denom * std::pow(dist[i], opt.exponent));
            sup = std::max(sup, ratio);
            int b = static_cast<int>((std::log(dist[i]) - lb) / (ub - lb) * nbins);
            b = std::clamp(b, 0, nbins - 1);
            bin_max[b] = std::max(bin_max[b], osc[i]);
            ++bin_cnt[b];
        }
        if (L == 0) out.sup_first = sup;
        out.sup_last = sup;
        out.pairs += m;
        out.level_notes.push_back("level " + std::to_string(L) + ": pairs=" + std::to_string(m) +
                                  " floor=" + format_double(d_lo) + " sup=" + format_double(sup));
        if (L == vc.levels - 1) {
            std::size_t stride = std::max<std::size_t>(1, m / 200);
            for (std::size_t i = 0; i < m; i += stride) out.witnesses.emplace_back(dist[i], osc[i]);
        }
    }
    out.growth = out.sup_last / std::max(out.sup_first, 1e-300);

    vecd lx, ly;
    for (int b = 0; b < nbins; ++b) {
        if (bin_cnt[b] == 0 || bin_max[b] <= 0) continue;
        lx.push_back(lb + (b + 0.5) / nbins * (ub - lb));
        ly.push_back(std::log(bin_max[b]));
    }
    if (lx.size() >= 3) out.fitted = fit_line(lx, ly).slope;
    return out;
}

grid_field domain_grid(const elementary_domain& dom, const test_function& f, const vecd& lo,
                       const vecd& hi, int res) {
    int n = dom.m.n;
    vecd spacing(n);
    std::vector<int> ext(n, res);
    for (int i = 0; i < n; ++i) spacing[i] = (hi[i] - lo[i]) / res;
    return sample_to_grid([&](const vecd& x) { return f.eval(x); }, lo, spacing, ext,
                          [&](const vecd& x) { return dom.contains(x); });
}

double lp_norm(const grid_field& g, double p) {
    auto r = integrate_region(g, p, nullptr);
    return r.empty ? 0.0 : std::pow(r.value, 1.0 / p);
}

void apply_ladder(check_report& rep, const ladder_out& lad, const verify_config& vc) {
    rep.measured = lad.sup_last;
    rep.growth = lad.growth;
    rep.fitted_exponent = lad.fitted;
    rep.tolerance = vc.growth_gate;
    rep.witnesses = lad.witnesses;
    for (const auto& s : lad.level_notes) rep.notes.push_back(s);
    rep.pass = std::isfinite(rep.measured) && rep.growth < vc.growth_gate;
}

// iterate masked cells of g inside the anisotropic ball B_gamma(x, r)
template <class CB>
void for_ball_cells(const grid_field& g, const vecd& x, double r, const gamma_metric& m, CB&& cb) {
    int n = g.n;
    double rbar = std::pow(r, 1.0 / m.gamma);
    std::vector<std::pair<int, int>> rg(n);
    for (int i = 0; i < n; ++i) {
        double half = (i == n - 1) ? r : rbar;
        rg[i] = g.axis_range(i, x[i] - half, x[i] + half);
        if (rg[i].first >= rg[i].second) return;
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = rg[i].first;
    for (;;) {
        std::size_t lin = g.index(idx);
        if (g.mask[lin]) {
            vecd c = g.cell_center(idx);
            if (delta_gamma(c, x, m) < r) cb(lin, c);
        }
        int ax = 0;
        while (ax < n) {
            if (++idx[ax] < rg[ax].second) break;
            idx[ax] = rg[ax].first;
            ++ax;
        }
        if (ax == n) break;
    }
}

// lower envelope of the diameter via directional widths; exact enough at
// 64 directions and linear in the point count
double point_set_diameter(const std::vector<vecd>& pts) {
    if (pts.size() < 2) return 0.0;
    int n = static_cast<int>(pts[0].size());
    std::vector<vecd> dirs;
    if (n == 2) {
        for (int j = 0; j < 64; ++j) {
            double th = j * 3.14159265358979323846 / 64;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    } else {
        rng_stream rng(12321, 0);
        for (int ax = 0; ax < n; ++ax) {
            vecd e(n, 0.0);
            e[ax] = 1.0;
            dirs.push_back(e);
        }
        for (int j = 0; j < 64; ++j) dirs.push_back(random_dir(rng, n));
    }
    double best = 0;
    for (const auto& d : dirs) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& x : pts) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += d[i] * x[i];
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        best = std::max(best, hi - lo);
    }
    return best;
}

void push_param(check_report& rep, const std::string& k, double v) {
    rep.params.emplace_back(k, v);
}

}  // namespace

check_report check_campanato_embedding(const elementary_domain& dom, const test_function& f,
                                       double p, double lambda, const vecd& box_lo,
                                       const vecd& box_hi, const verify_config& vc) {
    check_report rep;
    rep.id = "campanato_embedding";
    require_box(box_lo, box_hi, dom.m.n);
    if (!(p >= 1)) throw schema_error("campanato embedding requires p >= 1");
    double ng = dom.m.n_gamma();
    if (!(lambda > ng))
        throw schema_error("campanato embedding requires lambda > n_gamma, got lambda = " +
                           format_double(lambda) + " <= n_gamma = " + format_double(ng));
    double alpha = (lambda - ng) / p;
    rep.predicted = alpha;
    push_param(rep, "gamma", dom.m.gamma);
    push_param(rep, "p", p);
    push_param(rep, "lambda", lambda);
    push_param(rep, "alpha", alpha);

    grid_field g = domain_grid(dom, f, box_lo, box_hi, vc.grid_res);
    norm_grids ng_grids = default_norm_grids(g, dom.m);
    double sem = campanato_seminorm(g, p, weight_power(lambda), dom.m, ng_grids, vc.threads).value;
    double scale = lp_norm(g, p);
    rep.notes.push_back("campanato seminorm = " + format_double(sem));

    if (sem <= 1e-12 * std::max(1.0, scale)) {
        rng_stream rng(vc.seed, 211);
        pair_batch pb = draw_pairs(dom, box_lo, box_hi, 2000, 0.0,
                                   box_form_diameter(box_lo, box_hi, dom.m.gamma, dom.m.n),
                                   dom.m.gamma, false, 0, rng);
        double worst = 0;
        for (std::size_t i = 0; i < pb.xs.size(); ++i)
            worst = std::max(worst, std::abs(f.eval(pb.xs[i]) - f.eval(pb.ys[i])));
        rep.measured = worst;
        rep.tolerance = 1e-8 * std::max(1.0, scale);
        rep.pass = worst <= rep.tolerance;
        rep.notes.push_back("seminorm numerically zero: oscillation must vanish");
        return rep;
    }

    ladder_opts opt;
    opt.exponent = alpha;
    opt.gamma_form = dom.m.gamma;
    opt.denom = sem;
    opt.segment_filter = false;
    apply_ladder(rep, run_ladder([&](const vecd& x) { return f.eval(x); }, dom, box_lo, box_hi,
                                 opt, vc),
                 vc);
    return rep;
}

check_report check_morrey_campanato_equivalence(const elementary_domain& dom,
                                                const std::vector<test_function>& family, double p,
                                                double lambda, const vecd& box_lo,
                                                const vecd& box_hi, const verify_config& vc) {
    check_report rep;
    rep.id = "morrey_campanato_equivalence";
    require_box(box_lo, box_hi, dom.m.n);
    if (family.empty()) throw schema_error("equivalence check needs a nonempty family");
    if (!(p >= 1)) throw schema_error("equivalence check requires p >= 1");
    double ng = dom.m.n_gamma();
    if (!(lambda > 0 && lambda < ng))
        throw schema_error("morrey-campanato equivalence requires 0 < lambda < n_gamma, got "
                           "lambda = " +
                           format_double(lambda) + ", n_gamma = " + format_double(ng));
    push_param(rep, "p", p);
    push_param(rep, "lambda", lambda);
    push_param(rep, "n_gamma", ng);
    push_param(rep, "functions", static_cast<double>(family.size()));

    std::vector<int> res = {vc.grid_res, (3 * vc.grid_res) / 2};
    std::vector<double> width(2, 0.0), hi_at(2, 0.0);
    bool all_in = true, finite = true;
    for (int ri = 0; ri < 2; ++ri) {
        double mn = std::numeric_limits<double>::infinity(), mx = 0;
        for (const auto& f : family) {
            grid_field g = domain_grid(dom, f, box_lo, box_hi, res[ri]);
            norm_grids grids = default_norm_grids(g, dom.m);
            double mor = morrey_norm(g, p, weight_power(lambda), dom.m, grids, vc.threads).value;
            double cam =
                campanato_seminorm(g, p, weight_power(lambda), dom.m, grids, vc.threads).value;
            double lp = lp_norm(g, p);
            if (mor <= 1e-300) {
                if (lp + cam <= 1e-300) continue;  // zero function: both sides vanish
                finite = false;
                rep.notes.push_back(f.name + ": morrey norm vanished but campanato side did not");
                continue;
            }
            double ratio = (lp + cam) / mor;
            mn = std::min(mn, ratio);
            mx = std::max(mx, ratio);
            if (ri == 1) rep.witnesses.emplace_back(static_cast<double>(rep.witnesses.size()), ratio);
        }
        if (!(mn <= mx)) {
            finite = false;
            continue;
        }
        all_in = all_in && mn >= 1.0 / vc.c0 && mx <= vc.c0;
        width[ri] = std::log(mx / mn);
        hi_at[ri] = mx;
        rep.notes.push_back("res " + std::to_string(res[ri]) + ": bracket [" + format_double(mn) +
                            ", " + format_double(mx) + "]");
    }
    rep.predicted = 1.0;
    rep.tolerance = vc.c0;
    rep.measured = hi_at[1];
    rep.growth = width[0] > 0 ? width[1] / width[0] : 1.0;
    rep.pass = finite && all_in && width[1] <= width[0] * 1.25 + 1e-12;
    return rep;
}

check_report check_sobolev_morrey_embedding(const elementary_domain& dom, const test_function& f,
                                            int l, double p, double lambda, const vecd& box_lo,
                                            const vecd& box_hi, const verify_config& vc,
                                            bool barozzi) {
    check_report rep;
    rep.id = barozzi ? "sobolev_morrey_embedding_parallelepiped" : "sobolev_morrey_embedding";
    require_box(box_lo, box_hi, dom.m.n);
    if (l < 1) throw schema_error("sobolev-morrey embedding requires l >= 1");
    if (!(p >= 1)) throw schema_error("sobolev-morrey embedding requires p >= 1");
    double ng = dom.m.n_gamma();
    if (!(p * l > ng - lambda))
        throw schema_error("sobolev-morrey embedding requires p*l > n_gamma - lambda, got p*l = " +
                           format_double(p * l) +
                           ", n_gamma - lambda = " + format_double(ng - lambda));
    double inner = l + (lambda - ng) / p;
    double e = dom.m.gamma * inner;
    rep.boundary_case = std::abs(e - 1.0) <= 1e-9 || std::abs(inner - 1.0) <= 1e-9;
    if (e > 1.0 + 1e-9)
        throw schema_error(
            "sobolev-morrey embedding requires gamma*(l + (lambda - n_gamma)/p) < 1, got " +
            format_double(e));
    double used = barozzi ? e - vc.eps : e;
    if (!(used > 0)) throw schema_error("exponent reduction leaves no positive exponent");
    rep.predicted = e;
    push_param(rep, "gamma", dom.m.gamma);
    push_param(rep, "l", l);
    push_param(rep, "p", p);
    push_param(rep, "lambda", lambda);
    push_param(rep, "exponent", used);
    if (barozzi)
        rep.notes.push_back("parallelepiped mode: unfiltered pairs, exponent reduced to " +
                            format_double(used));
    if (rep.boundary_case) rep.notes.push_back("boundary case: l + (lambda - n_gamma)/p reaches 1");

    grid_field g = domain_grid(dom, f, box_lo, box_hi, vc.grid_res);
    norm_grids grids = default_norm_grids(g, dom.m);
    double nrm =
        sobolev_morrey_norm(g, l, p, weight_power(lambda), dom.m, grids, vc.threads).value;
    rep.notes.push_back("sobolev-morrey norm = " + format_double(nrm));
    if (!(nrm > 0)) throw hard_error("sobolev-morrey norm vanished on the grid");

    ladder_opts opt;
    opt.exponent = used;
    opt.gamma_form = dom.m.gamma;
    opt.denom = nrm;
    opt.segment_filter = !barozzi;
    apply_ladder(rep, run_ladder([&](const vecd& x) { return f.eval(x); }, dom, box_lo, box_hi,
                                 opt, vc),
                 vc);
    return rep;
}

check_report check_daprato(const elementary_domain& dom, const test_function& f, double p,
                           double lambda, const vecd& box_lo, const vecd& box_hi,
                           const verify_config& vc, double eta_tilde) {
    check_report rep;
    rep.id = "daprato_estimate";
    require_box(box_lo, box_hi, dom.m.n);
    if (!(p >= 1)) throw schema_error("daprato estimate requires p >= 1");
    double ng = dom.m.n_gamma();
    int n = dom.m.n;
    double eta = eta_tilde > 0 ? eta_tilde : ng / n + n - ng;
    if (!(p * eta > ng - lambda))
        throw schema_error("daprato estimate requires p*eta > n_gamma - lambda, got p*eta = " +
                           format_double(p * eta) +
                           ", n_gamma - lambda = " + format_double(ng - lambda));
    double e = eta + (lambda - ng) / p;
    rep.predicted = e;
    rep.boundary_case = std::abs(e - 1.0) <= 1e-9;
    push_param(rep, "gamma", dom.m.gamma);
    push_param(rep, "p", p);
    push_param(rep, "lambda", lambda);
    push_param(rep, "eta", eta);
    if (eta_tilde > 0) rep.notes.push_back("using measured eta_tilde = " + format_double(eta_tilde));

    grid_field g = domain_grid(dom, f, box_lo, box_hi, vc.grid_res);
    norm_grids grids = default_norm_grids(g, dom.m);
    double nrm = sobolev_morrey_norm(g, 1, p, weight_power(lambda), dom.m, grids, vc.threads).value;
    rep.notes.push_back("first-order sobolev-morrey norm = " + format_double(nrm));
    if (!(nrm > 0)) throw hard_error("first-order norm vanished on the grid");

    ladder_opts opt;
    opt.exponent = e;
    opt.gamma_form = dom.m.gamma;
    opt.denom = nrm;
    opt.segment_filter = false;
    apply_ladder(rep, run_ladder([&](const vecd& x) { return f.eval(x); }, dom, box_lo, box_hi,
                                 opt, vc),
                 vc);
    return rep;
}

std::vector<vecd> sample_domain_points(const elementary_domain& dom, const vecd& box_lo,
                                       const vecd& box_hi, std::size_t count,
                                       std::uint64_t seed) {
    require_box(box_lo, box_hi, dom.m.n);
    rng_stream rng(seed, 31);
    std::vector<vecd> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        auto x = draw_in_domain(dom, box_lo, box_hi, rng, 400);
        if (x) out.push_back(*x);
    }
    return out;
}

poincare_report poincare_ratio(const elementary_domain& dom,
                               const std::vector<test_function>& family, double p,
                               const vecd& box_lo, const vecd& box_hi,
                               const std::vector<vecd>& centers, const vecd& radii,
                               const verify_config& vc, bool convex_mode) {
    poincare_report rep;
    rep.convex_mode = convex_mode;
    rep.radii = radii;
    require_box(box_lo, box_hi, dom.m.n);
    if (family.empty()) throw schema_error("poincare ratio needs a nonempty family");
    if (radii.empty()) throw schema_error("poincare ratio needs at least one radius");
    if (!(p >= 1)) throw schema_error("poincare ratio requires p >= 1");
    for (double r : radii)
        if (!(r > 0)) throw schema_error("poincare radii must be positive");
    int n = dom.m.n;

    std::vector<grid_field> fg, gp;
    fg.reserve(family.size());
    gp.reserve(family.size());
    for (const auto& f : family) {
        grid_field g = domain_grid(dom, f, box_lo, box_hi, vc.grid_res);
        std::vector<grid_field> d;
        d.reserve(n);
        for (int ax = 0; ax < n; ++ax) {
            std::vector<int> alpha(n, 0);
            alpha[ax] = 1;
            d.push_back(finite_diff_derivative(g, alpha));
        }
        grid_field mag = make_grid(g.origin, g.spacing, g.extents);
        for (std::size_t lin = 0; lin < mag.size(); ++lin) {
            bool ok = true;
            double s2 = 0;
            for (int ax = 0; ax < n; ++ax) {
                ok = ok && d[ax].mask[lin];
                s2 += d[ax].values[lin] * d[ax].values[lin];
            }
            mag.mask[lin] = ok ? 1 : 0;
            mag.values[lin] = ok ? std::pow(s2, p / 2.0) : 0.0;
        }
        fg.push_back(std::move(g));
        gp.push_back(std::move(mag));
    }

    if (centers.empty()) throw schema_error("poincare ratio needs at least one center");
    for (const auto& x : centers)
        if (static_cast<int>(x.size()) != n) throw schema_error("center dimension mismatch");

    rep.sup_ratio.assign(radii.size(), 0.0);
    double omega_n = unit_ball_volume(n);

    for (std::size_t j = 0; j < family.size(); ++j) {
        for (const auto& x : centers) {
            for (std::size_t ri = 0; ri < radii.size(); ++ri) {
                double r = radii[ri];
                poincare_sample s;
                s.f_index = j;
                s.center = x;
                s.r = r;

                kahan_sum sum;
                std::size_t cells = 0;
                std::vector<vecd> pts;
                for_ball_cells(fg[j], x, r, dom.m, [&](std::size_t lin, const vecd& c) {
                    sum.add(fg[j].values[lin]);
                    ++cells;
                    if (convex_mode) pts.push_back(c);
                });
                if (cells < 2) {
                    ++rep.skipped;
                    continue;
                }
                double mean = sum.value() / cells;
                kahan_sum dev;
                for_ball_cells(fg[j], x, r, dom.m, [&](std::size_t lin, const vecd&) {
                    dev.add(std::abs(fg[j].values[lin] - mean));
                });
                s.lhs = dev.value() / cells;

                kahan_sum gsum;
                std::size_t gcells = 0;
                for_ball_cells(gp[j], x, vc.tau * r, dom.m, [&](std::size_t lin, const vecd&) {
                    gsum.add(gp[j].values[lin]);
                    ++gcells;
                });
                if (gcells == 0 || gsum.value() / gcells <= 1e-280) {
                    ++rep.skipped;
                    continue;
                }
                s.rhs = std::pow(gsum.value() / gcells, 1.0 / p);
                s.ratio = s.lhs / s.rhs;

                if (convex_mode) {
                    double vol = static_cast<double>(cells) * fg[j].cell_volume();
                    double diam = point_set_diameter(pts);
                    s.convex_bound = std::pow(omega_n / vol, 1.0 - 1.0 / n) * std::pow(diam, n);
                    s.violation = s.lhs > s.convex_bound * s.rhs * (1 + 1e-9);
                    if (s.violation) ++rep.convex_violations;
                }

                ++rep.samples;
                rep.sup_ratio[ri] = std::max(rep.sup_ratio[ri], s.ratio);
                if (rep.details.size() < 128) rep.details.push_back(std::move(s));
            }
        }
    }

    vecd lx, ly;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        if (rep.sup_ratio[ri] > 0) {
            lx.push_back(std::log(radii[ri]));
            ly.push_back(std::log(rep.sup_ratio[ri]));
        }
    }
    if (lx.size() >= 2) {
        rep.eta_fit = fit_line(lx, ly).slope;
    } else {
        rep.notes.push_back("too few radii with nonzero ratio for an exponent fit");
    }
    rep.notes.push_back("samples=" + std::to_string(rep.samples) +
                        " skipped=" + std::to_string(rep.skipped) +
                        " violations=" + std::to_string(rep.convex_violations));
    rep.pass = rep.samples > 0 &&
               (convex_mode ? rep.convex_violations == 0 : std::isfinite(rep.eta_fit));
    return rep;
}

double geometric_gap_bound(double r, double lip, double gamma) {
    return r + lip * std::pow(2.0, gamma - 1.0) * std::pow(r, gamma);
}

std::vector<lemma_config> sample_lemma_configs(const vecd& box_lo, const vecd& box_hi,
                                               std::size_t count, double r_lo, double r_hi,
                                               double e, std::uint64_t seed) {
    if (!(r_lo > 0 && r_hi >= r_lo)) throw schema_error("lemma radii must satisfy 0 < r_lo <= r_hi");
    int n = static_cast<int>(box_lo.size());
    rng_stream rng(seed, 0);
    std::vector<lemma_config> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        lemma_config c;
        c.x.resize(n);
        for (int ax = 0; ax < n; ++ax) c.x[ax] = rng.uniform(box_lo[ax], box_hi[ax]);
        c.r = rng.log_uniform(r_lo, r_hi);
        c.eta.resize(n);
        for (int ax = 0; ax < n; ++ax) c.eta[ax] = rng.uniform(-e, e);
        out.push_back(std::move(c));
    }
    return out;
}

geometric_lemma_report check_geometric_lemma(const elementary_domain& dom,
                                             const std::vector<lemma_config>& configs,
                                             const verify_config& vc) {
    geometric_lemma_report rep;
    rep.configs = configs.size();
    if (configs.empty()) throw schema_error("geometric lemma check needs configs");
    int n = dom.m.n;
    int nb = n - 1;
    double gamma = dom.m.gamma;
    double worst = -std::numeric_limits<double>::infinity();
    const int samples = 384;
    const int depth = 48;

    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        const lemma_config& cfg = configs[ci];
        if (static_cast<int>(cfg.x.size()) != n || static_cast<int>(cfg.eta.size()) != n)
            throw schema_error("lemma config dimension mismatch");
        if (!(cfg.r > 0)) throw schema_error("lemma config needs r > 0");
        rng_stream rng(vc.seed, 401 + static_cast<std::uint64_t>(ci));

        std::vector<vecd> ball(samples, vecd(n, 0.0));
        for (auto& y : ball) {
            vecd dir = random_dir(rng, nb);
            double rad = cfg.r * std::pow(rng.next_double(), 1.0 / nb);
            for (int c = 0; c < nb; ++c) y[c] = cfg.x[c] + dir[c] * rad;
            y[n - 1] = cfg.x[n - 1] + rng.uniform(-cfg.r, cfg.r);
        }

        int h = std::numeric_limits<int>::max();
        for (const auto& y : ball) {
            auto k = layer_index_at(dom, y);
            if (k && *k < h) h = *k;
        }
        if (h == std::numeric_limits<int>::max()) {
            ++rep.vacuous;
            continue;
        }

        double bound = geometric_gap_bound(cfg.r, dom.lip, gamma);
        std::vector<vecd> hits;
        vecd z(n);
        for (int k = h; k < h + depth; ++k) {
            vecd shift(n);
            for (int c = 0; c < nb; ++c) shift[c] = cfg.eta[c] * std::pow(2.0, -k / gamma);
            shift[n - 1] = cfg.eta[n - 1] * std::pow(2.0, -static_cast<double>(k));
            bool met = false;
            for (const auto& y : ball) {
                for (int c = 0; c < n; ++c) z[c] = y[c] - shift[c];
                auto kz = layer_index_at(dom, z);
                if (kz && *kz == k) {
                    met = true;
                    hits.push_back(z);
                }
            }
            if (met && k >= h + 3) {
                ++rep.gap_checks;
                double gap = std::abs(std::ldexp(1.0, -(h + 3)) - std::ldexp(1.0, -k));
                double margin = gap - bound;
                worst = std::max(worst, margin);
                if (margin > 1e-12) {
                    ++rep.violations;
                    if (rep.notes.size() < 8)
                        rep.notes.push_back("config " + std::to_string(ci) + ": layer " +
                                            std::to_string(k) + " violates the gap bound by " +
                                            format_double(margin));
                }
            }
        }
        if (hits.size() >= 2) {
            double s = point_set_diameter(hits) / (cfg.r + std::pow(cfg.r, gamma));
            rep.s_fit = std::max(rep.s_fit, s);
        }
    }
    rep.worst_margin = rep.gap_checks ? worst : 0.0;
    rep.pass = rep.violations == 0;
    rep.notes.push_back("configs=" + std::to_string(rep.configs) +
                        " vacuous=" + std::to_string(rep.vacuous) +
                        " gap_checks=" + std::to_string(rep.gap_checks) +
                        " violations=" + std::to_string(rep.violations));
    return rep;
}

check_report check_extension_corollary(const elementary_domain& dom, const test_function& f,
                                       int l, double p, double lambda,
                                       const mollifier_kernel& ker, const extension_config& ecfg,
                                       const vecd& box_lo, const vecd& box_hi,
                                       const verify_config& vc) {
    check_report rep;
    rep.id = "extension_corollary";
    require_box(box_lo, box_hi, dom.m.n);
    if (l < 1) throw schema_error("extension corollary requires l >= 1");
    if (!(p >= 1)) throw schema_error("extension corollary requires p >= 1");
    int n = dom.m.n;
    double gamma = dom.m.gamma;
    int order = floor_index(gamma * l);
    if (!(p * order > n - gamma * lambda))
        throw schema_error(
            "extension corollary requires p*floor(gamma*l) > n - gamma*lambda, got lhs = " +
            format_double(p * order) + ", rhs = " + format_double(n - gamma * lambda));
    double e = order + (gamma * lambda - n) / p;
    rep.boundary_case = std::abs(e - 1.0) <= 1e-9;
    if (e > 1.0 + 1e-9)
        throw schema_error("extension corollary requires floor(gamma*l) + (gamma*lambda - n)/p "
                           "< 1, got " +
                           format_double(e));
    rep.predicted = e;
    push_param(rep, "gamma", gamma);
    push_param(rep, "l", l);
    push_param(rep, "p", p);
    push_param(rep, "lambda", lambda);
    push_param(rep, "order", order);

    field_source src;
    src.fn = [&](const vecd& x) { return f.eval(x); };
    extend_result er =
        extend_elementary(dom, src, ker, ecfg, box_lo, box_hi, std::vector<int>(n, vc.grid_res));
    push_param(rep, "A", er.A);
    rep.notes.push_back("extension kernel hash = " + std::to_string(er.kernel_hash));
    if (er.low_A) rep.notes.push_back("window constant overridden below the default");

    // the corollary bounds the Euclidean Hoelder seminorm of the restriction;
    // pairs live in the domain (no segment filter) where Tf agrees with f,
    // so oscillations are measured exactly rather than through the grid
    gamma_metric m1 = make_metric(1.0, n);
    grid_field g = domain_grid(dom, f, box_lo, box_hi, vc.grid_res);
    norm_grids grids = default_norm_grids(g, m1);
    double nrm = sobolev_morrey_norm(g, l, p, weight_power(lambda), m1, grids, vc.threads).value;
    rep.notes.push_back("gamma=1 sobolev-morrey norm = " + format_double(nrm));
    if (!(nrm > 0)) throw hard_error("corollary norm vanished on the grid");

    ladder_opts opt;
    opt.exponent = e;
    opt.gamma_form = 1.0;
    opt.denom = nrm;
    opt.segment_filter = false;
    apply_ladder(rep, run_ladder([&](const vecd& x) { return f.eval(x); }, dom, box_lo, box_hi,
                                 opt, vc),
                 vc);
    return rep;
}

check_report verify_classical_limit(int n, int l, double p, double lambda) {
    check_report rep;
    rep.id = "classical_limit";
    if (n < 2) throw schema_error("classical limit check requires n >= 2");
    if (l < 0) throw schema_error("classical limit check requires l >= 0");
    if (!(p >= 1)) throw schema_error("classical limit check requires p >= 1");
    double gamma = 1.0;
    double ng = (n - 1) / gamma + 1.0;
    push_param(rep, "n", n);
    push_param(rep, "l", l);
    push_param(rep, "p", p);
    push_param(rep, "lambda", lambda);

    double alpha_g = (lambda - ng) / p;
    double alpha_c = (lambda - n) / p;
    double sob_g = gamma * (l + (lambda - ng) / p);
    double sob_c = l + (lambda - n) / p;
    double eta_g = ng / n + n - ng;
    double cor_g = floor_index(gamma * l) + (gamma * lambda - n) / p;
    double cor_c = l + (lambda - n) / p;

    bool ok = alpha_g == alpha_c && sob_g == sob_c && eta_g == 1.0 && cor_g == cor_c;
    rep.notes.push_back("alpha: " + format_double(alpha_g) + " vs " + format_double(alpha_c));
    rep.notes.push_back("sobolev exponent: " + format_double(sob_g) + " vs " +
                        format_double(sob_c));
    rep.notes.push_back("eta: " + format_double(eta_g) + " vs 1");
    rep.notes.push_back("corollary exponent: " + format_double(cor_g) + " vs " +
                        format_double(cor_c));
    rep.predicted = sob_c;
    rep.measured = sob_g;
    rep.tolerance = 0.0;
    rep.pass = ok;
    return rep;
}

}  // namespace holder
