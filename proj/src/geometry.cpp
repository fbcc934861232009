#include "holder/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace holder {

gamma_metric make_metric(double gamma, int n) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw schema_error("gamma must lie in (0,1]");
    if (n < 2) throw schema_error("dimension must be at least 2");
    return gamma_metric{gamma, n};
}

double bar_dist(const vecd& x, const vecd& y, int n) {
    kahan_sum s;
    for (int i = 0; i + 1 < n; ++i) {
        double d = x[i] - y[i];
        s.add(d * d);
    }
    return std::sqrt(s.value());
}

double euclid_dist(const vecd& x, const vecd& y) {
    kahan_sum s;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        s.add(d * d);
    }
    return std::sqrt(s.value());
}

static void check_dims(const vecd& x, const vecd& y, const gamma_metric& m) {
    if (static_cast<int>(x.size()) != m.n || static_cast<int>(y.size()) != m.n)
        throw schema_error("point dimension does not match the metric");
}

double delta_gamma(const vecd& x, const vecd& y, const gamma_metric& m) {
    check_dims(x, y, m);
    double b = bar_dist(x, y, m.n);
    double v = std::abs(x[m.n - 1] - y[m.n - 1]);
    return std::max(std::pow(b, m.gamma), v);
}

double aniso_sum_dist(const vecd& x, const vecd& y, const gamma_metric& m) {
    check_dims(x, y, m);
    double b = bar_dist(x, y, m.n);
    double v = std::abs(x[m.n - 1] - y[m.n - 1]);
    return std::pow(b, m.gamma) + v;
}

double unit_ball_volume(int k) {
    if (k < 0) throw schema_error("negative dimension");
    return std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

double gamma_ball_measure(const gamma_metric& m, double r) {
    if (!(r > 0)) throw schema_error("ball radius must be positive");
    return 2.0 * unit_ball_volume(m.n - 1) * std::pow(r, m.n_gamma());
}

bool gamma_ball::contains(const vecd& y) const {
    if (static_cast<int>(y.size()) != n) throw schema_error("point dimension mismatch");
    if (std::abs(y[n - 1] - center[n - 1]) > r) return false;
    return bar_dist(y, center, n) <= bar_radius;
}

vecd gamma_ball::box_lo() const {
    vecd lo(center);
    for (int i = 0; i + 1 < n; ++i) lo[i] -= bar_radius;
    lo[n - 1] -= r;
    return lo;
}

vecd gamma_ball::box_hi() const {
    vecd hi(center);
    for (int i = 0; i + 1 < n; ++i) hi[i] += bar_radius;
    hi[n - 1] += r;
    return hi;
}

gamma_ball make_ball(const vecd& center, double r, const gamma_metric& m) {
    if (!(r > 0)) throw schema_error("ball radius must be positive");
    if (static_cast<int>(center.size()) != m.n) throw schema_error("center dimension mismatch");
    gamma_ball b;
    b.center = center;
    b.r = r;
    b.bar_radius = std::pow(r, 1.0 / m.gamma);
    b.n = m.n;
    return b;
}

double phi_fn::eval(const vecd& xbar) const {
    switch (kind) {
        case kind_t::flat:
            return c0;
        case kind_t::affine: {
            double v = c0;
            for (size_t i = 0; i < grad.size() && i < xbar.size(); ++i) v += grad[i] * xbar[i];
            return v;
        }
        case kind_t::cusp: {
            kahan_sum s;
            for (size_t i = 0; i < xbar.size(); ++i) {
                double d = xbar[i] - (i < vertex_bar.size() ? vertex_bar[i] : 0.0);
                s.add(d * d);
            }
            return c0 + amp * std::pow(std::sqrt(s.value()), gamma);
        }
        case kind_t::wedge: {
            kahan_sum s;
            for (size_t i = 0; i < xbar.size(); ++i) {
                double d = xbar[i] - (i < vertex_bar.size() ? vertex_bar[i] : 0.0);
                s.add(d * d);
            }
            return c0 + amp * std::sqrt(s.value());
        }
        case kind_t::bump: {
            kahan_sum s;
            for (size_t i = 0; i < xbar.size(); ++i) {
                double d = xbar[i] - (i < vertex_bar.size() ? vertex_bar[i] : 0.0);
                s.add(d * d);
            }
            double t2 = s.value() / (width * width);
            if (t2 >= 1.0) return c0;
            return c0 + amp * std::exp(1.0 - 1.0 / (1.0 - t2));
        }
        case kind_t::samples: {
            double x = xbar[0];
            const vecd& xs = sample_x;
            const vecd& ys = sample_y;
            if (x <= xs.front()) return ys.front();
            if (x >= xs.back()) return ys.back();
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            size_t i = static_cast<size_t>(it - xs.begin());
            double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + t * (ys[i] - ys[i - 1]);
        }
    }
    return c0;
}

phi_fn phi_flat(double c0) {
    phi_fn p;
    p.kind = phi_fn::kind_t::flat;
    p.c0 = c0;
    return p;
}

phi_fn phi_affine(double c0, vecd grad) {
    phi_fn p;
    p.kind = phi_fn::kind_t::affine;
    p.c0 = c0;
    p.grad = std::move(grad);
    return p;
}

phi_fn phi_cusp(double c0, double signed_m, double gamma, vecd vertex_bar) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw schema_error("cusp exponent must lie in (0,1]");
    phi_fn p;
    p.kind = phi_fn::kind_t::cusp;
    p.c0 = c0;
    p.amp = signed_m;
    p.gamma = gamma;
    p.vertex_bar = std::move(vertex_bar);
    return p;
}

phi_fn phi_wedge(double c0, double signed_slope, vecd vertex_bar) {
    phi_fn p;
    p.kind = phi_fn::kind_t::wedge;
    p.c0 = c0;
    p.amp = signed_slope;
    p.vertex_bar = std::move(vertex_bar);
    return p;
}

phi_fn phi_bump(double c0, double amp, double width, vecd vertex_bar) {
    if (!(width > 0)) throw schema_error("bump width must be positive");
    phi_fn p;
    p.kind = phi_fn::kind_t::bump;
    p.c0 = c0;
    p.amp = amp;
    p.width = width;
    p.vertex_bar = std::move(vertex_bar);
    return p;
}

phi_fn phi_samples(vecd xs, vecd ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw schema_error("sampled boundary needs at least two matching points");
    if (!std::is_sorted(xs.begin(), xs.end()))
        throw schema_error("sampled boundary abscissae must be sorted");
    phi_fn p;
    p.kind = phi_fn::kind_t::samples;
    p.sample_x = std::move(xs);
    p.sample_y = std::move(ys);
    return p;
}

bool elementary_domain::bar_in_W(const vecd& x) const {
    if (W_all) return true;
    for (int i = 0; i + 1 < m.n; ++i)
        if (!(x[i] > W_lo[i] && x[i] < W_hi[i])) return false;
    return true;
}

double elementary_domain::phi_at(const vecd& x) const {
    vecd xbar(x.begin(), x.end() - 1);
    return phi.eval(xbar);
}

bool elementary_domain::contains(const vecd& x) const {
    if (static_cast<int>(x.size()) != m.n) throw schema_error("point dimension mismatch");
    if (!bar_in_W(x)) return false;
    double xn = x[m.n - 1];
    return (a_infinite || xn > a) && xn < phi_at(x);
}

double elementary_domain::rho(const vecd& x) const {
    if (!bar_in_W(x)) throw schema_error("rho queried outside the base box W");
    return x[m.n - 1] - phi_at(x);
}

namespace {
void validate_domain(const elementary_domain& d, double half, uint64_t seed) {
    rng_stream rng(seed);
    int nb = d.m.n - 1;
    auto sample_bar = [&](vecd& out) {
        out.resize(nb);
        for (int i = 0; i < nb; ++i) {
            double lo = d.W_all ? -half : d.W_lo[i];
            double hi = d.W_all ? half : d.W_hi[i];
            out[i] = rng.uniform(lo, hi);
        }
    };
    vecd xb, yb;
    for (int t = 0; t < 2000; ++t) {
        sample_bar(xb);
        sample_bar(yb);
        double dist = 0;
        for (int i = 0; i < nb; ++i) dist += (xb[i] - yb[i]) * (xb[i] - yb[i]);
        dist = std::sqrt(dist);
        if (dist < 1e-12) continue;
        double dq = std::abs(d.phi.eval(xb) - d.phi.eval(yb)) / std::pow(dist, d.m.gamma);
        if (dq > d.lip * 1.01 + 1e-12)
            throw schema_error("declared Hölder constant violated by sampled quotient " +
                               format_double(dq));
        if (!d.a_infinite) {
            if (!(d.phi.eval(xb) > d.a + d.delta_margin))
                throw schema_error("boundary graph dips below a + delta_margin");
        }
    }
}
}  // namespace

elementary_domain make_elementary(gamma_metric m, phi_fn phi, vecd W_lo, vecd W_hi, double a,
                                  bool a_infinite, double lip, double delta_margin,
                                  uint64_t validation_seed) {
    if (static_cast<int>(W_lo.size()) != m.n - 1 || static_cast<int>(W_hi.size()) != m.n - 1)
        throw schema_error("base box dimension must be n-1");
    for (size_t i = 0; i < W_lo.size(); ++i)
        if (!(W_lo[i] < W_hi[i])) throw schema_error("base box is empty");
    if (lip < 0) throw schema_error("Hölder constant must be nonnegative");
    elementary_domain d;
    d.m = m;
    d.phi = std::move(phi);
    d.W_lo = std::move(W_lo);
    d.W_hi = std::move(W_hi);
    d.a = a;
    d.a_infinite = a_infinite;
    d.lip = lip;
    d.delta_margin = delta_margin;
    validate_domain(d, 0.0, validation_seed);
    return d;
}

elementary_domain make_elementary_whole(gamma_metric m, phi_fn phi, double a_sentinel, double lip,
                                        double delta_margin, double validation_halfwidth,
                                        uint64_t validation_seed) {
    if (lip < 0) throw schema_error("Hölder constant must be nonnegative");
    elementary_domain d;
    d.m = m;
    d.phi = std::move(phi);
    d.W_all = true;
    d.a = a_sentinel;
    d.a_infinite = true;
    d.lip = lip;
    d.delta_margin = delta_margin;
    validate_domain(d, validation_halfwidth, validation_seed);
    return d;
}

int layer_index(double rho_value) {
    if (!(rho_value > 0)) throw schema_error("layer index needs rho > 0");
    int k = static_cast<int>(std::floor(-std::log2(rho_value)));
    while (rho_value > std::ldexp(1.0, -k)) --k;
    while (rho_value <= std::ldexp(1.0, -k - 1)) ++k;
    return k;
}

std::optional<int> layer_index_at(const elementary_domain& dom, const vecd& x) {
    if (!dom.bar_in_W(x)) return std::nullopt;
    double r = dom.rho(x);
    if (r <= 0) return std::nullopt;
    return layer_index(r);
}

bool cusp::contains(const vecd& y) const {
    int n = static_cast<int>(vertex.size());
    if (static_cast<int>(y.size()) != n) throw schema_error("point dimension mismatch");
    double vn = vertex[n - 1], yn = y[n - 1];
    double b = bar_dist(y, vertex, n);
    return yn > vn - h && yn < vn - M * std::pow(b, gamma);
}

cusp make_cusp(vecd vertex, double h, double M, double gamma) {
    if (!(h > 0)) throw schema_error("cusp height must be positive");
    if (M < 0) throw schema_error("cusp opening must be nonnegative");
    if (!(gamma > 0 && gamma <= 1)) throw schema_error("cusp exponent must lie in (0,1]");
    return cusp{std::move(vertex), h, M, gamma};
}

double cusp_measure(int n, double gamma, double M, double h) {
    if (!(M > 0)) throw schema_error("analytic cusp measure needs a positive opening");
    double ng = (n - 1) / gamma + 1.0;
    return unit_ball_volume(n - 1) * gamma / (gamma + n - 1) * std::pow(M, -(n - 1) / gamma) *
           std::pow(h, ng);
}

namespace {

// inside-count classification of one cell: 0 = out, 1 = in, 2 = mixed
int classify_cell(const std::function<bool(const vecd&)>& inside, const vecd& lo, const vecd& hi,
                  int n, vecd& scratch) {
    scratch.resize(n);
    int corners = 1 << n;
    int hits = 0;
    for (int c = 0; c < corners; ++c) {
        for (int i = 0; i < n; ++i) scratch[i] = (c >> i) & 1 ? hi[i] : lo[i];
        if (inside(scratch)) ++hits;
    }
    for (int i = 0; i < n; ++i) scratch[i] = 0.5 * (lo[i] + hi[i]);
    if (inside(scratch)) ++hits;
    if (hits == corners + 1) return 1;
    if (hits == 0) return 0;
    return 2;
}

measure_estimate count_cells(const std::function<bool(const vecd&)>& inside, const vecd& box_lo,
                             const vecd& box_hi, int n, int resolution) {
    measure_estimate est;
    est.resolution_ok = resolution >= 8;
    std::vector<int> idx(n, 0);
    vecd h(n), lo(n), hi(n), scratch;
    for (int i = 0; i < n; ++i) h[i] = (box_hi[i] - box_lo[i]) / resolution;
    double cellvol = 1.0;
    for (int i = 0; i < n; ++i) cellvol *= h[i];
    kahan_sum vol;
    size_t mixed = 0;
    size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<size_t>(resolution);
    for (size_t cell = 0; cell < total; ++cell) {
        size_t rem = cell;
        for (int i = 0; i < n; ++i) {
            idx[i] = static_cast<int>(rem % resolution);
            rem /= resolution;
        }
        for (int i = 0; i < n; ++i) {
            lo[i] = box_lo[i] + idx[i] * h[i];
            hi[i] = lo[i] + h[i];
        }
        int cls = classify_cell(inside, lo, hi, n, scratch);
        if (cls == 1) {
            vol.add(cellvol);
        } else if (cls == 2) {
            ++mixed;
            // one bisection level, decided by subcell centers
            int subs = 1 << n;
            for (int s = 0; s < subs; ++s) {
                scratch.resize(n);
                for (int i = 0; i < n; ++i)
                    scratch[i] = lo[i] + ((s >> i) & 1 ? 0.75 : 0.25) * h[i];
                if (inside(scratch)) vol.add(cellvol / subs);
            }
        }
    }
    est.value = vol.value();
    est.error = 0.25 * static_cast<double>(mixed) * cellvol;
    est.cells = total;
    return est;
}

}  // namespace

measure_estimate ball_intersection_measure(const elementary_domain& dom, const vecd& x, double r,
                                           const gamma_metric& m, int resolution) {
    if (!(r > 0)) throw schema_error("degenerate radius");
    gamma_ball ball = make_ball(x, r, m);
    auto inside = [&](const vecd& p) { return ball.contains(p) && dom.contains(p); };
    return count_cells(inside, ball.box_lo(), ball.box_hi(), m.n, resolution);
}

measure_estimate ball_intersection_measure_mc(const elementary_domain& dom, const vecd& x,
                                              double r, const gamma_metric& m, size_t samples,
                                              uint64_t seed) {
    if (!(r > 0)) throw schema_error("degenerate radius");
    gamma_ball ball = make_ball(x, r, m);
    vecd lo = ball.box_lo(), hi = ball.box_hi();
    double boxvol = 1.0;
    for (int i = 0; i < m.n; ++i) boxvol *= hi[i] - lo[i];
    rng_stream rng(seed);
    vecd p(m.n);
    size_t hits = 0;
    for (size_t s = 0; s < samples; ++s) {
        for (int i = 0; i < m.n; ++i) p[i] = rng.uniform(lo[i], hi[i]);
        if (ball.contains(p) && dom.contains(p)) ++hits;
    }
    double frac = static_cast<double>(hits) / static_cast<double>(samples);
    measure_estimate est;
    est.value = boxvol * frac;
    est.error = boxvol * std::sqrt(std::max(frac * (1 - frac), 1e-12) / samples);
    est.cells = samples;
    return est;
}

exponent_fit fit_line(const vecd& log_x, const vecd& log_y) {
    if (log_x.size() != log_y.size() || log_x.size() < 2)
        throw schema_error("exponent fit needs at least two points");
    double n = static_cast<double>(log_x.size());
    kahan_sum sx, sy, sxx, sxy;
    for (size_t i = 0; i < log_x.size(); ++i) {
        sx.add(log_x[i]);
        sy.add(log_y[i]);
        sxx.add(log_x[i] * log_x[i]);
        sxy.add(log_x[i] * log_y[i]);
    }
    double denom = n * sxx.value() - sx.value() * sx.value();
    if (std::abs(denom) < 1e-14) throw schema_error("degenerate abscissae in exponent fit");
    exponent_fit f;
    f.slope = (n * sxy.value() - sx.value() * sy.value()) / denom;
    f.intercept = (sy.value() - f.slope * sx.value()) / n;
    f.points = static_cast<int>(log_x.size());
    return f;
}

exponent_fit fit_measure_exponent(const elementary_domain& dom, const vecd& x, const vecd& radii,
                                  const gamma_metric& m, int resolution) {
    if (radii.size() < 8) throw schema_error("need at least 8 radii for the exponent fit");
    double span = radii.back() / radii.front();
    if (span < 99.0) throw schema_error("radii must span at least two decades");
    vecd lx, ly;
    for (double r : radii) {
        measure_estimate est = ball_intersection_measure(dom, x, r, m, resolution);
        if (!(est.value > 0))
            throw schema_error("measure vanished at radius " + format_double(r) +
                               "; the center lies outside the domain closure");
        lx.push_back(std::log(r));
        ly.push_back(std::log(est.value));
    }
    return fit_line(lx, ly);
}

vecd geometric_radii(double r_min, double r_max, int per_octave) {
    if (!(r_min > 0 && r_max > r_min)) throw schema_error("bad radius range");
    vecd out;
    double factor = std::pow(2.0, 1.0 / per_octave);
    for (double r = r_min; r <= r_max * (1 + 1e-12); r *= factor) out.push_back(r);
    return out;
}

vecd chart::to_chart(const vecd& x) const {
    double c = std::cos(angle), s = std::sin(angle);
    vecd y(x.size());
    if (x.size() == 2) {
        y[0] = c * x[0] - s * x[1] + shift[0];
        y[1] = s * x[0] + c * x[1] + shift[1];
    } else {
        if (angle != 0.0) throw schema_error("rotated charts are planar only");
        for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] + shift[i];
    }
    return y;
}

vecd chart::to_world(const vecd& y) const {
    double c = std::cos(angle), s = std::sin(angle);
    vecd x(y.size());
    if (y.size() == 2) {
        double u = y[0] - shift[0], v = y[1] - shift[1];
        x[0] = c * u + s * v;
        x[1] = -s * u + c * v;
    } else {
        if (angle != 0.0) throw schema_error("rotated charts are planar only");
        for (size_t i = 0; i < y.size(); ++i) x[i] = y[i] - shift[i];
    }
    return x;
}

bool chart::in_V(const vecd& x) const {
    vecd y = to_chart(x);
    for (size_t i = 0; i < y.size(); ++i)
        if (!(y[i] > box_lo[i] && y[i] < box_hi[i])) return false;
    return true;
}

bool chart::in_V_shrunk(const vecd& x, double d) const {
    vecd y = to_chart(x);
    for (size_t i = 0; i < y.size(); ++i)
        if (!(y[i] > box_lo[i] + d && y[i] < box_hi[i] - d)) return false;
    return true;
}

bool chart::chart_point_in_H(const vecd& y) const {
    size_t n = y.size();
    for (size_t i = 0; i < n; ++i)
        if (!(y[i] > box_lo[i] && y[i] < box_hi[i])) return false;
    if (full_cuboid) return true;
    vecd ybar(y.begin(), y.end() - 1);
    return y[n - 1] < phi.eval(ybar);
}

bool atlas::contains(const vecd& x) const {
    for (const chart& ch : charts) {
        vecd y = ch.to_chart(x);
        bool in_box = true;
        for (size_t i = 0; i < y.size(); ++i)
            if (!(y[i] > ch.box_lo[i] && y[i] < ch.box_hi[i])) in_box = false;
        if (in_box && ch.chart_point_in_H(y)) return true;
    }
    return false;
}

atlas_report atlas_validate(const atlas& at, int samples_per_chart, uint64_t seed) {
    atlas_report rep;
    rep.margins_ok = true;
    rep.shrunk_nonempty = true;
    rep.charts_ok = true;
    rep.covering_ok = true;
    if (at.charts.empty()) {
        rep.failures.push_back("atlas has no charts");
        return rep;
    }
    int n = at.n;
    for (size_t j = 0; j < at.charts.size(); ++j) {
        const chart& ch = at.charts[j];
        double diam2 = 0;
        for (int i = 0; i < n; ++i) {
            double lo = ch.box_lo[i], hi = ch.box_hi[i];
            if (!(0 < lo && lo + at.d < hi)) {
                rep.margins_ok = false;
                rep.failures.push_back("chart " + std::to_string(j) +
                                       " violates 0 < a_i and a_i + d < b_i on axis " +
                                       std::to_string(i));
            }
            if (!(hi - lo > 2 * at.d)) {
                rep.shrunk_nonempty = false;
                rep.failures.push_back("chart " + std::to_string(j) +
                                       " has empty shrunk cuboid on axis " + std::to_string(i));
            }
            diam2 += (hi - lo) * (hi - lo);
        }
        rep.max_diam = std::max(rep.max_diam, std::sqrt(diam2));
    }

    rng_stream rng(seed);
    int max_mult = 0;
    for (size_t j = 0; j < at.charts.size(); ++j) {
        const chart& ch = at.charts[j];
        bool meets_shrunk = false;
        int covered = 0, tried = 0;
        for (int t = 0; t < samples_per_chart; ++t) {
            vecd y(n);
            vecd ybar(n - 1);
            for (int i = 0; i + 1 < n; ++i) {
                y[i] = rng.uniform(ch.box_lo[i], ch.box_hi[i]);
                ybar[i] = y[i];
            }
            double top = ch.full_cuboid ? ch.box_hi[n - 1] : ch.phi.eval(ybar);
            top = std::min(top, ch.box_hi[n - 1]);
            if (!(top > ch.box_lo[n - 1])) continue;
            y[n - 1] = rng.uniform(ch.box_lo[n - 1], top);
            vecd x = ch.to_world(y);
            ++tried;
            int mult = 0;
            bool in_some_shrunk = false;
            for (const chart& other : at.charts) {
                if (other.in_V(x)) ++mult;
                if (other.in_V_shrunk(x, at.d)) in_some_shrunk = true;
            }
            max_mult = std::max(max_mult, mult);
            if (in_some_shrunk) ++covered;
            if (ch.in_V_shrunk(x, at.d)) meets_shrunk = true;
        }
        if (tried == 0 || covered < tried) {
            rep.covering_ok = false;
            rep.failures.push_back("chart " + std::to_string(j) + ": " +
                                   std::to_string(tried - covered) + " of " +
                                   std::to_string(tried) +
                                   " sampled interior points escape the shrunk covering");
        }
        if (!meets_shrunk) {
            rep.covering_ok = false;
            rep.failures.push_back("chart " + std::to_string(j) +
                                   " has empty intersection with its shrunk cuboid");
        }
        if (!ch.full_cuboid) {
            // Hölder bound and the margin a_n + d < phi on samples
            for (int t = 0; t < samples_per_chart; ++t) {
                vecd ub(n - 1), vb(n - 1);
                for (int i = 0; i + 1 < n; ++i) {
                    ub[i] = rng.uniform(ch.box_lo[i], ch.box_hi[i]);
                    vb[i] = rng.uniform(ch.box_lo[i], ch.box_hi[i]);
                }
                double pu = ch.phi.eval(ub), pv = ch.phi.eval(vb);
                if (!(pu > ch.box_lo[n - 1] + at.d)) {
                    rep.charts_ok = false;
                    rep.failures.push_back("chart " + std::to_string(j) +
                                           " boundary graph dips to a_n + d");
                    break;
                }
                double dist = 0;
                for (int i = 0; i + 1 < n; ++i) dist += (ub[i] - vb[i]) * (ub[i] - vb[i]);
                dist = std::sqrt(dist);
                if (dist < 1e-12) continue;
                double dq = std::abs(pu - pv) / std::pow(dist, at.gamma);
                if (dq > at.M * 1.01 + 1e-12) {
                    rep.charts_ok = false;
                    rep.failures.push_back("chart " + std::to_string(j) +
                                           " exceeds the atlas Hölder bound: quotient " +
                                           format_double(dq));
                    break;
                }
            }
        }
    }
    rep.multiplicity = max_mult;
    // covering and multiplicity are reported, not gated: a single-chart atlas
    // whose subgraph spans the full cuboid width is still admissible
    rep.pass = rep.margins_ok && rep.shrunk_nonempty && rep.charts_ok;
    return rep;
}

vecd chart_localize(const atlas& at, size_t j, const vecd& x) {
    if (j >= at.charts.size()) throw schema_error("chart index out of range");
    if (!at.charts[j].in_V(x)) throw schema_error("point outside the requested chart cuboid");
    return at.charts[j].to_chart(x);
}

vecd chart_delocalize(const atlas& at, size_t j, const vecd& y) {
    if (j >= at.charts.size()) throw schema_error("chart index out of range");
    return at.charts[j].to_world(y);
}

}  // namespace holder
