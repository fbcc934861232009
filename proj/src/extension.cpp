#include "holder/extension.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "holder/quadrature.hpp"

namespace holder {

namespace {

// --- smooth cutoff theta ---

double theta_integrand(double s) {
    double g = (s - 1.0) * (2.0 - s);
    if (g <= 0) return 0.0;
    return std::exp(-1.0 / g);
}

constexpr int k_theta_terms = 192;

struct theta_table {
    vecd coef;  // chebyshev coefficients of the normalized tail integral on [1,2]
};

const theta_table& theta_coefficients() {
    static const theta_table table = [] {
        theta_table t;
        const int m = k_theta_terms;
        const double pi = std::numbers::pi;
        vecd fv(m);
        double total = adaptive_integrate(theta_integrand, 1.0, 2.0, 1e-15);
        for (int j = 0; j < m; ++j) {
            double s = 1.5 + 0.5 * std::cos(pi * (j + 0.5) / m);
            fv[j] = adaptive_integrate(theta_integrand, s, 2.0, 1e-15) / total;
        }
        t.coef.resize(m);
        for (int k = 0; k < m; ++k) {
            kahan_sum acc;
            for (int j = 0; j < m; ++j) acc.add(fv[j] * std::cos(pi * k * (j + 0.5) / m));
            t.coef[k] = 2.0 / m * acc.value();
        }
        return t;
    }();
    return table;
}

}  // namespace

double theta_eval(double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const theta_table& tab = theta_coefficients();
    double u = 2.0 * t - 3.0;  // [1,2] -> [-1,1]
    double b1 = 0.0, b2 = 0.0;
    for (int k = k_theta_terms - 1; k >= 1; --k) {
        double b0 = 2.0 * u * b1 - b2 + tab.coef[k];
        b2 = b1;
        b1 = b0;
    }
    double v = u * b1 - b2 + 0.5 * tab.coef[0];
    return std::min(1.0, std::max(0.0, v));
}

// --- layer partition ---

namespace {

// even smooth averaging kernel on (-1,1), discretely normalized so constants
// and affine graphs pass through unchanged
const std::pair<vecd, vecd>& smoothing_rule() {
    static const std::pair<vecd, vecd> rule = [] {
        quad_rule gl = gauss_legendre(12, -1.0, 1.0);
        vecd u = gl.nodes, w(gl.size());
        double total = 0;
        for (size_t q = 0; q < gl.size(); ++q) {
            double g = 1.0 - u[q] * u[q];
            w[q] = gl.weights[q] * (g > 0 ? std::exp(-1.0 / g) : 0.0);
            total += w[q];
        }
        for (double& v : w) v /= total;
        return std::make_pair(u, w);
    }();
    return rule;
}

// phi mollified in the bar variables at scale s
double phi_mollified(const phi_fn& phi, const vecd& xbar, double s) {
    const auto& [u, w] = smoothing_rule();
    int nb = static_cast<int>(xbar.size());
    vecd y(xbar);
    if (nb == 1) {
        kahan_sum acc;
        for (size_t q = 0; q < u.size(); ++q) {
            y[0] = xbar[0] - s * u[q];
            acc.add(w[q] * phi.eval(y));
        }
        return acc.value();
    }
    std::vector<size_t> idx(nb, 0);
    kahan_sum acc;
    for (;;) {
        double wq = 1.0;
        for (int i = 0; i < nb; ++i) {
            y[i] = xbar[i] - s * u[idx[i]];
            wq *= w[idx[i]];
        }
        acc.add(wq * phi.eval(y));
        int i = 0;
        while (i < nb && ++idx[i] == u.size()) {
            idx[i] = 0;
            ++i;
        }
        if (i == nb) break;
    }
    return acc.value();
}

}  // namespace

double layer_partition::rho_at(const vecd& x, int /*k*/) const { return rho_reg(x); }

// regularized distance: the mollification scale eps sigma^{1/gamma} tracks the
// layer width of sigma itself, fixed by a short deterministic iteration; one
// sigma shared by every psi_k keeps the telescoping sum exact while giving the
// cutoffs the anisotropic bar-derivative bounds a raw graph kink would break
double layer_partition::rho_reg(const vecd& x) const {
    int n = dom.m.n;
    vecd xbar(x.begin(), x.end() - 1);
    double rho = x[n - 1] - dom.phi.eval(xbar);
    if (smooth_eps <= 0 || !(rho > 0)) return rho;
    double sigma = rho;
    for (int it = 0; it < 8; ++it) {
        double s = smooth_eps * std::pow(sigma, 1.0 / dom.m.gamma);
        sigma = std::max(x[n - 1] - phi_mollified(dom.phi, xbar, s), 1e-300);
    }
    return sigma;
}

double layer_partition::psi(int k, const vecd& x) const {
    if (!dom.bar_in_W(x)) return 0.0;
    double r = rho_reg(x);
    if (!(r > 0)) return 0.0;
    return theta_eval(std::ldexp(r, k)) - theta_eval(std::ldexp(r, k + 1));
}

double layer_partition::psi_sum(const vecd& x) const {
    if (!dom.bar_in_W(x)) return 0.0;
    double r0 = rho_reg(x);
    if (!(r0 > 0)) return 0.0;
    int h = layer_index(r0);
    int lo = std::max(k_min, h - 2), hi = std::min(k_max, h + 2);
    double s = 0.0;
    for (int k = lo; k <= hi; ++k) s += psi(k, x);
    return s;
}

layer_partition build_layer_partition(const elementary_domain& dom, int k_min, int k_max,
                                      double smooth_eps) {
    if (k_min > k_max) throw schema_error("empty layer range");
    layer_partition p;
    p.dom = dom;
    p.k_min = k_min;
    p.k_max = k_max;
    p.smooth_eps = smooth_eps;
    return p;
}

// --- derivative scaling of the cutoffs ---

namespace {

double psi_fd(const layer_partition& part, int k, const vecd& x, std::vector<int> alpha,
              const vecd& h) {
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] > 0) {
            alpha[i] -= 1;
            vecd xp = x, xm = x;
            xp[i] += h[i];
            xm[i] -= h[i];
            return (psi_fd(part, k, xp, alpha, h) - psi_fd(part, k, xm, alpha, h)) / (2.0 * h[i]);
        }
    }
    return part.psi(k, x);
}

}  // namespace

scaling_check psi_derivative_scaling_check(const layer_partition& part,
                                           const std::vector<int>& alpha, int k_lo, int k_hi,
                                           int samples_per_k, uint64_t seed) {
    int n = part.dom.m.n;
    if (static_cast<int>(alpha.size()) != n) throw schema_error("derivative index dimension mismatch");
    if (k_lo > k_hi) throw schema_error("empty layer range");
    if (samples_per_k < 1) throw schema_error("need at least one sample per layer");
    double gamma = part.dom.m.gamma;
    scaling_check out;
    out.alpha = alpha;
    double abar = 0;
    for (int i = 0; i + 1 < n; ++i) abar += alpha[i];
    out.target = abar / gamma + alpha[n - 1];

    rng_stream rng(seed, 31);
    vecd vertex(n - 1, 0.0);
    for (int i = 0; i + 1 < n && i < static_cast<int>(part.dom.phi.vertex_bar.size()); ++i)
        vertex[i] = part.dom.phi.vertex_bar[i];

    for (int k = k_lo; k <= k_hi; ++k) {
        double sbar = std::pow(2.0, -double(k) / gamma);
        double sup = 0.0;
        for (int s = 0; s < samples_per_k; ++s) {
            // half the draws sit at the graph feature scale, half spread out
            bool scaled = (s % 2 == 0);
            vecd x(n), xbar(n - 1);
            for (int i = 0; i < n - 1; ++i) {
                double mag = scaled ? sbar * rng.log_uniform(0.5, 2.0) : rng.uniform(0.05, 1.0);
                xbar[i] = vertex[i] + (rng.uniform(0.0, 1.0) < 0.5 ? -mag : mag);
                x[i] = xbar[i];
            }
            double rho = std::ldexp(1.0, -k - 1) * rng.log_uniform(1.05, 3.8);
            x[n - 1] = part.dom.phi.eval(xbar) + rho;
            vecd h(n);
            h[n - 1] = 0.05 * std::ldexp(1.0, -k);
            for (int i = 0; i < n - 1; ++i) {
                double step = 0.05 * sbar;
                double away = std::abs(xbar[i] - vertex[i]);
                if (alpha[i] > 0 && away < 4.0 * step) {
                    step = 0.25 * away;  // keep the stencil on one side of the graph kink
                    out.stencil_shrunk = true;
                }
                h[i] = std::max(step, 1e-300);
            }
            double v = std::abs(psi_fd(part, k, x, alpha, h));
            if (v > sup) sup = v;
        }
        if (sup > 1e-250) {
            out.ks.push_back(double(k));
            out.log2_sup.push_back(std::log2(sup));
        }
    }
    if (out.ks.empty()) {
        out.all_zero = true;
        out.slope = 0.0;
        return out;
    }
    if (out.ks.size() >= 2) out.slope = fit_line(out.ks, out.log2_sup).slope;
    return out;
}

// --- shifted mollification f_k ---

namespace {

struct axis_rule {
    vecd t, wz;  // nodes on (1/2,1) and weight * kernel values
};

axis_rule make_axis_rule(const mollifier_kernel& ker, int Q) {
    axis_rule a;
    if (Q == static_cast<int>(ker.rule.size())) {
        a.t = ker.rule.nodes;
        a.wz.resize(Q);
        for (int i = 0; i < Q; ++i) a.wz[i] = ker.rule.weights[i] * ker.eval(ker.rule.nodes[i]);
        return a;
    }
    quad_rule r = gauss_legendre(Q, 0.5, 1.0);
    a.t = r.nodes;
    a.wz.resize(Q);
    for (int i = 0; i < Q; ++i) a.wz[i] = r.weights[i] * ker.eval(r.nodes[i]);
    return a;
}

[[noreturn]] void throw_escape(const vecd& y) {
    std::string s = "shifted sample point left the domain at (";
    for (size_t i = 0; i < y.size(); ++i) {
        if (i) s += ", ";
        s += format_double(y[i]);
    }
    s += ")";
    throw hard_error(s);
}

double default_A(double lip, int n) { return 200.0 * (1.0 + lip * n); }

double f_k_core(const elementary_domain& dom, const field_source& f, const axis_rule& ar, int k,
                const vecd& x, double A) {
    int n = dom.m.n;
    double sbar = std::pow(2.0, -double(k) / dom.m.gamma);
    double svert = A * std::ldexp(1.0, -k);
    size_t Q = ar.t.size();
    if (n == 2) {
        kahan_sum acc;
        vecd y(2), ybar(1);
        for (size_t i = 0; i < Q; ++i) {
            y[0] = x[0] - sbar * ar.t[i];
            ybar[0] = y[0];
            if (!dom.W_all && !dom.bar_in_W(y)) throw_escape(y);
            double phi_y = dom.phi.eval(ybar);
            double wi = ar.wz[i];
            for (size_t j = 0; j < Q; ++j) {
                y[1] = x[1] - svert * ar.t[j];
                if (!(y[1] < phi_y) || (!dom.a_infinite && !(y[1] > dom.a))) throw_escape(y);
                acc.add(wi * ar.wz[j] * f(y));
            }
        }
        return acc.value();
    }
    std::vector<size_t> idx(n, 0);
    vecd y(n);
    kahan_sum acc;
    for (;;) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) w *= ar.wz[idx[i]];
        for (int i = 0; i + 1 < n; ++i) y[i] = x[i] - sbar * ar.t[idx[i]];
        y[n - 1] = x[n - 1] - svert * ar.t[idx[n - 1]];
        if (!dom.contains(y)) throw_escape(y);
        acc.add(w * f(y));
        int i = 0;
        while (i < n && ++idx[i] == Q) {
            idx[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
    return acc.value();
}

}  // namespace

double f_k_eval(const elementary_domain& dom, const field_source& f, const mollifier_kernel& ker,
                int k, const vecd& x, const extension_config& cfg) {
    if (cfg.Q < 8) throw schema_error("quadrature order below 8");
    double A = cfg.A > 0 ? cfg.A : default_A(dom.lip, dom.m.n);
    field_source src = f;
    if (!src.fn) src.scheme = cfg.scheme;
    axis_rule ar = make_axis_rule(ker, cfg.Q);
    return f_k_core(dom, src, ar, k, x, A);
}

support_check shifted_support_check(const elementary_domain& dom, const mollifier_kernel& ker,
                                    int k, const vecd& x, const extension_config& cfg) {
    if (cfg.Q < 8) throw schema_error("quadrature order below 8");
    support_check out;
    double rho = dom.rho(x);
    double lo = std::ldexp(1.0, -k - 2), hi = std::ldexp(1.0, -k + 1);
    out.precondition_ok = rho >= lo && rho <= hi;
    if (!out.precondition_ok)
        out.note = "rho_n(x) = " + format_double(rho) + " outside the layer band [" +
                   format_double(lo) + ", " + format_double(hi) + "]";

    double A = cfg.A > 0 ? cfg.A : default_A(dom.lip, dom.m.n);
    axis_rule ar = make_axis_rule(ker, cfg.Q);
    int n = dom.m.n;
    double sbar = std::pow(2.0, -double(k) / dom.m.gamma);
    double svert = A * std::ldexp(1.0, -k);
    size_t Q = ar.t.size();
    std::vector<size_t> idx(n, 0);
    vecd y(n);
    double worst = -std::numeric_limits<double>::infinity();
    bool all_inside = true;
    for (;;) {
        for (int i = 0; i + 1 < n; ++i) y[i] = x[i] - sbar * ar.t[idx[i]];
        y[n - 1] = x[n - 1] - svert * ar.t[idx[n - 1]];
        if (!dom.bar_in_W(y)) {
            all_inside = false;
            if (out.note.empty()) out.note = "shifted node left the base box W";
        } else {
            double m = dom.rho(y);
            if (!dom.a_infinite && !(y[n - 1] > dom.a)) {
                all_inside = false;
                if (out.note.empty()) out.note = "shifted node fell below the floor a";
            }
            if (m > worst) worst = m;
            if (!(m < 0)) all_inside = false;
        }
        int i = 0;
        while (i < n && ++idx[i] == Q) {
            idx[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
    out.worst_margin = worst;
    out.ok = out.precondition_ok && all_inside;
    return out;
}

// --- elementary extension ---

namespace {

double sampled_phi_min(const elementary_domain& dom, const vecd& box_lo, const vecd& box_hi) {
    int nb = dom.m.n - 1;
    int steps = nb == 1 ? 4096 : 128;
    vecd xbar(nb, 0.0);
    std::vector<int> idx(nb, 0);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        for (int i = 0; i < nb; ++i)
            xbar[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * (double(idx[i]) / steps);
        best = std::min(best, dom.phi.eval(xbar));
        int i = 0;
        while (i < nb && ++idx[i] > steps) {
            idx[i] = 0;
            ++i;
        }
        if (i == nb) break;
    }
    double gap = 0;
    for (int i = 0; i < nb; ++i) gap = std::max(gap, (box_hi[i] - box_lo[i]) / steps);
    return best - dom.lip * std::pow(gap, dom.m.gamma);
}

void check_output_box(int n, const vecd& box_lo, const vecd& box_hi, const std::vector<int>& res) {
    if (static_cast<int>(box_lo.size()) != n || static_cast<int>(box_hi.size()) != n ||
        static_cast<int>(res.size()) != n)
        throw schema_error("output box dimension mismatch");
    for (int i = 0; i < n; ++i)
        if (!(box_hi[i] > box_lo[i]) || res[i] < 2) throw schema_error("degenerate output box");
}

grid_field empty_grid(int n, const vecd& box_lo, const vecd& box_hi, const std::vector<int>& res) {
    grid_field g;
    g.n = n;
    g.origin = box_lo;
    g.extents = res;
    g.spacing.resize(n);
    size_t total = 1;
    for (int i = 0; i < n; ++i) {
        g.spacing[i] = (box_hi[i] - box_lo[i]) / res[i];
        total *= static_cast<size_t>(res[i]);
    }
    g.values.assign(total, 0.0);
    g.mask.assign(total, 1);
    return g;
}

}  // namespace

extend_result extend_elementary(const elementary_domain& dom, const field_source& f_in,
                                const mollifier_kernel& ker, const extension_config& cfg,
                                const vecd& box_lo, const vecd& box_hi,
                                const std::vector<int>& res) {
    int n = dom.m.n;
    if (!(dom.W_all && dom.a_infinite))
        throw schema_error("extension needs the whole-cylinder subgraph form of the domain");
    if (cfg.Q < 8) throw schema_error("quadrature order below 8");
    check_output_box(n, box_lo, box_hi, res);

    extend_result out;
    double A_def = default_A(dom.lip, n);
    out.A = cfg.A > 0 ? cfg.A : A_def;
    out.low_A = cfg.A > 0 && cfg.A < A_def;
    out.kernel_hash = ker.hash();

    field_source f = f_in;
    if (!f.fn) f.scheme = cfg.scheme;

    grid_field g = empty_grid(n, box_lo, box_hi, res);

    int k_min = cfg.k_min;
    if (k_min == extension_config::k_auto) {
        double rho_max = box_hi[n - 1] - sampled_phi_min(dom, box_lo, box_hi);
        k_min = rho_max <= 0 ? 0 : -static_cast<int>(std::ceil(std::log2(rho_max * (1.0 + 1e-12))));
    }
    if (k_min > cfg.k_max) throw schema_error("layer range empty for the requested box");
    out.k_min = k_min;
    out.k_max = cfg.k_max;

    layer_partition part = build_layer_partition(dom, k_min, cfg.k_max, cfg.smooth_eps);
    axis_rule ar = make_axis_rule(ker, cfg.Q);

    double full_lo = std::ldexp(1.0, -cfg.k_max);  // below: unresolved, masked out
    double full_hi = std::ldexp(1.0, -k_min);      // above: the partition tapers to zero

    struct counters {
        size_t omega = 0, layer = 0, decay = 0, tail = 0;
    };
    std::vector<counters> cnt(k_chunk_count);
    std::vector<std::exception_ptr> errs(k_chunk_count);

    parallel_for_chunks(g.size(), cfg.threads, [&](size_t chunk, size_t b, size_t e) {
        try {
            std::vector<int> idx(n);
            vecd x(n), xbar(n - 1);
            counters& c = cnt[chunk];
            for (size_t lin = b; lin < e; ++lin) {
                size_t rem = lin;
                for (int i = 0; i < n; ++i) {
                    idx[i] = static_cast<int>(rem % g.extents[i]);
                    rem /= g.extents[i];
                }
                for (int i = 0; i < n; ++i) x[i] = g.origin[i] + (idx[i] + 0.5) * g.spacing[i];
                for (int i = 0; i + 1 < n; ++i) xbar[i] = x[i];
                double rho = x[n - 1] - dom.phi.eval(xbar);
                if (rho <= 0) {
                    g.values[lin] = f(x);
                    c.omega += 1;
                    continue;
                }
                if (cfg.smooth_eps > 0) rho = part.rho_reg(x);
                if (rho < full_lo) {
                    g.values[lin] = 0.0;
                    g.mask[lin] = 0;
                    c.tail += 1;
                    continue;
                }
                int h = layer_index(rho);
                int lo = std::max(k_min, h - 1), hi = std::min(cfg.k_max, h + 1);
                kahan_sum acc;
                for (int k = lo; k <= hi; ++k) {
                    double pk = part.psi(k, x);
                    if (pk != 0.0) acc.add(pk * f_k_core(dom, f, ar, k, x, out.A));
                }
                g.values[lin] = acc.value();
                c.layer += 1;
                if (rho > full_hi) c.decay += 1;
            }
        } catch (...) {
            errs[chunk] = std::current_exception();
        }
    });
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (const auto& c : cnt) {
        out.omega_cells += c.omega;
        out.layer_cells += c.layer;
        out.decay_cells += c.decay;
        out.tail_cells += c.tail;
    }
    out.field = std::move(g);
    return out;
}

// --- atlas extension ---

namespace {

struct cutoff_axis {
    double lo = 0, hi = 0, w = 1;
};

double axis_bump(const cutoff_axis& c, double t) {
    if (t <= c.lo || t >= c.hi) return 0.0;
    return theta_eval(2.0 - (t - c.lo) / c.w) * theta_eval(2.0 - (c.hi - t) / c.w);
}

struct chart_ctx {
    const chart* ch = nullptr;
    std::vector<cutoff_axis> cut;
    elementary_domain dom;
    layer_partition part;
    bool full = false;
    int k_floor = 0;
    bool margin_flagged = false;

    double psi_hat(const vecd& y) const {
        double v = 1.0;
        for (size_t i = 0; i < cut.size(); ++i) {
            v *= axis_bump(cut[i], y[i]);
            if (v == 0.0) return 0.0;
        }
        return v;
    }
};

}  // namespace

atlas_extend_result extend_atlas(const atlas& at, const field_source& f_in,
                                 const mollifier_kernel& ker, const extension_config& cfg,
                                 const vecd& box_lo, const vecd& box_hi,
                                 const std::vector<int>& res) {
    atlas_report rep = atlas_validate(at);
    if (!rep.pass) {
        std::string why = rep.failures.empty() ? "unclassified" : rep.failures.front();
        throw schema_error("atlas failed validation: " + why);
    }
    int n = at.n;
    if (cfg.Q < 8) throw schema_error("quadrature order below 8");
    check_output_box(n, box_lo, box_hi, res);

    atlas_extend_result out;
    double A_def = default_A(at.M, n);
    out.A = cfg.A > 0 ? cfg.A : A_def;

    field_source f = f_in;
    if (!f.fn) f.scheme = cfg.scheme;

    int k_min = cfg.k_min;
    if (k_min == extension_config::k_auto) {
        // chart rho never exceeds the box diameter plus the chart spans
        double reach = 1.0;
        for (int i = 0; i < n; ++i) reach += box_hi[i] - box_lo[i];
        for (const chart& ch : at.charts)
            for (int i = 0; i < n; ++i) reach = std::max(reach, ch.box_hi[i] - ch.box_lo[i]);
        k_min = -static_cast<int>(std::ceil(std::log2(reach)));
    }
    if (k_min > cfg.k_max) throw schema_error("layer range empty for the requested box");

    std::vector<chart_ctx> ctx(at.charts.size());
    for (size_t j = 0; j < at.charts.size(); ++j) {
        const chart& ch = at.charts[j];
        chart_ctx& c = ctx[j];
        c.ch = &ch;
        c.full = ch.full_cuboid;
        c.cut.resize(n);
        for (int i = 0; i < n; ++i) {
            double lo = ch.box_lo[i] + at.d, hi = ch.box_hi[i] - at.d;
            if (!(hi > lo)) throw schema_error("shrunk chart box empty");
            c.cut[i] = {lo, hi, std::min(at.d, (hi - lo) / 4.0)};
        }
        if (!c.full) {
            double half = 1.0;
            for (int i = 0; i < n; ++i)
                half = std::max({half, std::abs(ch.box_lo[i]), std::abs(ch.box_hi[i])});
            c.dom = make_elementary_whole(gamma_metric{at.gamma, n}, ch.phi,
                                          ch.box_lo[n - 1] - 1.0, ch.lip, 0.0, half + 1.0);
            c.part = build_layer_partition(c.dom, k_min, cfg.k_max, cfg.smooth_eps);
            // depth below the graph available for the vertical shift
            vecd blo(ch.box_lo.begin(), ch.box_lo.end() - 1);
            vecd bhi(ch.box_hi.begin(), ch.box_hi.end() - 1);
            double phi_min = sampled_phi_min(c.dom, blo, bhi);
            double depth = phi_min - (ch.box_lo[n - 1] + at.d);
            int kf = k_min;
            while (kf < cfg.k_max && out.A * std::ldexp(1.0, -kf) > depth) ++kf;
            c.k_floor = kf;
            c.margin_flagged = kf > k_min;
        }
        out.charts.push_back({j, c.k_floor, c.margin_flagged});
    }

    axis_rule ar = make_axis_rule(ker, cfg.Q);

    auto sum_sq = [&](const vecd& x) {
        double s = 0.0;
        for (const chart_ctx& c : ctx) {
            double p = c.psi_hat(c.ch->to_chart(x));
            s += p * p;
        }
        return s;
    };

    // g_j = f psi_j in chart coordinates, zero-extended across the chart subgraph
    std::vector<field_source> gsrc(ctx.size());
    for (size_t j = 0; j < ctx.size(); ++j) {
        gsrc[j].fn = [&, j](const vecd& y) {
            double pj = ctx[j].psi_hat(y);
            if (pj == 0.0) return 0.0;
            vecd x = ctx[j].ch->to_world(y);
            return f(x) * pj / std::sqrt(sum_sq(x));
        };
    }

    struct tv {
        double v = 0;
        bool tail = false;
    };
    double full_lo = std::ldexp(1.0, -cfg.k_max);
    auto chart_T = [&](size_t j, const vecd& y) -> tv {
        const chart_ctx& c = ctx[j];
        if (c.full) return {gsrc[j](y), false};
        vecd ybar(y.begin(), y.end() - 1);
        double rho = y[n - 1] - c.dom.phi.eval(ybar);
        if (rho <= 0) return {gsrc[j](y), false};
        if (rho < full_lo) return {0.0, true};
        int h = layer_index(rho);
        int lo = std::max(k_min, h - 1), hi = std::min(cfg.k_max, h + 1);
        kahan_sum acc;
        for (int k = lo; k <= hi; ++k) {
            double pk = c.part.psi(k, y);
            if (pk != 0.0) acc.add(pk * f_k_core(c.dom, gsrc[j], ar, k, y, out.A));
        }
        return {acc.value(), false};
    };

    grid_field g = empty_grid(n, box_lo, box_hi, res);
    struct counters {
        size_t omega = 0, outside = 0, uncovered = 0;
    };
    std::vector<counters> cnt(k_chunk_count);
    std::vector<std::exception_ptr> errs(k_chunk_count);

    parallel_for_chunks(g.size(), cfg.threads, [&](size_t chunk, size_t b, size_t e) {
        try {
            std::vector<int> idx(n);
            vecd x(n);
            counters& c = cnt[chunk];
            for (size_t lin = b; lin < e; ++lin) {
                size_t rem = lin;
                for (int i = 0; i < n; ++i) {
                    idx[i] = static_cast<int>(rem % g.extents[i]);
                    rem /= g.extents[i];
                }
                for (int i = 0; i < n; ++i) x[i] = g.origin[i] + (idx[i] + 0.5) * g.spacing[i];
                if (at.contains(x)) {
                    if (sum_sq(x) <= 1e-12) {
                        c.uncovered += 1;
                        g.mask[lin] = 0;
                        continue;
                    }
                    g.values[lin] = f(x);
                    c.omega += 1;
                    continue;
                }
                double S = sum_sq(x);
                c.outside += 1;
                if (S <= 0.0) {
                    g.values[lin] = 0.0;
                    continue;
                }
                double root = std::sqrt(S);
                kahan_sum acc;
                bool tail = false;
                for (size_t j = 0; j < ctx.size(); ++j) {
                    vecd y = ctx[j].ch->to_chart(x);
                    double pj = ctx[j].psi_hat(y);
                    if (pj == 0.0) continue;
                    tv t = chart_T(j, y);
                    if (t.tail) tail = true;
                    acc.add(pj / root * t.v);
                }
                g.values[lin] = acc.value();
                if (tail) g.mask[lin] = 0;
            }
        } catch (...) {
            errs[chunk] = std::current_exception();
        }
    });
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    size_t uncovered = 0;
    for (const auto& c : cnt) {
        out.omega_cells += c.omega;
        out.outside_cells += c.outside;
        uncovered += c.uncovered;
    }
    if (uncovered > 0)
        throw schema_error("atlas cutoffs do not cover the domain at " + std::to_string(uncovered) +
                           " output cells");
    out.field = std::move(g);
    return out;
}

// --- derivative index bound ---

bool derivative_index_allowed(const std::vector<int>& alpha, double gamma, int l) {
    if (alpha.empty()) return true;
    double abar = 0;
    for (size_t i = 0; i + 1 < alpha.size(); ++i) abar += alpha[i];
    return abar + gamma * alpha.back() <= gamma * l + 1e-9;
}

grid_field extension_derivative(const grid_field& tf, const std::vector<int>& alpha, double gamma,
                                int l) {
    if (static_cast<int>(alpha.size()) != tf.n) throw schema_error("derivative index dimension mismatch");
    if (!derivative_index_allowed(alpha, gamma, l))
        throw schema_error("derivative index violates |alpha_bar| + gamma alpha_n <= gamma l");
    return finite_diff_derivative(tf, alpha);
}

// --- operator norm study ---

operator_norm_report operator_norm_estimate(const elementary_domain& dom,
                                            const std::vector<test_function>& family, int l,
                                            double p, const weight_spec& w,
                                            const mollifier_kernel& ker,
                                            const extension_config& cfg, const vecd& box_lo,
                                            const vecd& box_hi,
                                            const std::vector<int>& resolutions) {
    if (resolutions.size() < 2) throw schema_error("need at least two resolutions");
    if (family.empty()) throw schema_error("empty test family");
    int n = dom.m.n;
    double gamma = dom.m.gamma;

    operator_norm_report rep;
    rep.target_order = floor_index(gamma * l);
    rep.target_weight = weight_transform_gamma(w, gamma);
    gamma_metric m1{1.0, n};

    extension_config ecfg = cfg;
    ecfg.l = l;

    rep.functions.resize(family.size());
    for (size_t fi = 0; fi < family.size(); ++fi) rep.functions[fi].name = family[fi].name;

    for (int R : resolutions) {
        std::vector<int> res(n, R);
        double family_best = 0.0;
        for (size_t fi = 0; fi < family.size(); ++fi) {
            const test_function& tf = family[fi];
            field_source src;
            src.fn = [&tf](const vecd& x) { return tf.eval(x); };
            extend_result er = extend_elementary(dom, src, ker, ecfg, box_lo, box_hi, res);
            grid_field fg =
                sample_to_grid(src.fn, er.field.origin, er.field.spacing, er.field.extents,
                               [&dom](const vecd& x) { return dom.contains(x); });
            double num = sobolev_morrey_norm(er.field, rep.target_order, p, rep.target_weight, m1,
                                             default_norm_grids(er.field, m1), cfg.threads)
                             .value;
            double den =
                sobolev_morrey_norm(fg, l, p, w, m1, default_norm_grids(fg, m1), cfg.threads).value;
            if (!(den > 0)) throw schema_error("zero denominator norm for " + tf.name);
            double ratio = num / den;
            rep.functions[fi].ratios.push_back(ratio);
            if (R == resolutions.back()) {
                rep.functions[fi].numerator = num;
                rep.functions[fi].denominator = den;
            }
            family_best = std::max(family_best, ratio);
        }
        rep.family_max.push_back(family_best);
    }
    double mn = *std::min_element(rep.family_max.begin(), rep.family_max.end());
    double mx = *std::max_element(rep.family_max.begin(), rep.family_max.end());
    rep.max_ratio = mx;
    rep.spread = mn > 0 ? mx / mn - 1.0 : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace holder
