#include "holder/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "holder/mollifier.hpp"
#include "holder/norms.hpp"

namespace holder {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw schema_error("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const ojson& req(const ojson& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw schema_error("missing key '" + key + "' in " + where);
    return *it;
}

double num(const ojson& j, const std::string& key, const std::string& where) {
    const ojson& v = req(j, key, where);
    if (!v.is_number()) throw schema_error("key '" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

double num_or(const ojson& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw schema_error("key '" + key + "' must be a number");
    return it->get<double>();
}

std::string str_or(const ojson& j, const std::string& key, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) throw schema_error("key '" + key + "' must be a string");
    return it->get<std::string>();
}

bool flag_or(const ojson& j, const std::string& key, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) throw schema_error("key '" + key + "' must be a boolean");
    return it->get<bool>();
}

vecd vec_of(const ojson& j, const std::string& key, const std::string& where) {
    const ojson& v = req(j, key, where);
    if (!v.is_array()) throw schema_error("key '" + key + "' in " + where + " must be an array");
    vecd out;
    for (const auto& e : v) {
        if (!e.is_number()) throw schema_error("array '" + key + "' in " + where +
                                               " must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

phi_fn parse_phi(const ojson& j, int nb) {
    std::string kind = str_or(j, "kind", "");
    if (kind == "flat") return phi_flat(num(j, "c0", "phi"));
    if (kind == "affine") {
        vecd grad = vec_of(j, "grad", "phi");
        if (static_cast<int>(grad.size()) != nb)
            throw schema_error("affine phi gradient length must be n-1");
        return phi_affine(num(j, "c0", "phi"), grad);
    }
    if (kind == "cusp") {
        vecd vx;
        if (j.contains("vertex")) vx = vec_of(j, "vertex", "phi");
        return phi_cusp(num(j, "c0", "phi"), num(j, "amp", "phi"), num(j, "gamma", "phi"), vx);
    }
    if (kind == "wedge") {
        vecd vx;
        if (j.contains("vertex")) vx = vec_of(j, "vertex", "phi");
        return phi_wedge(num(j, "c0", "phi"), num(j, "slope", "phi"), vx);
    }
    if (kind == "samples") {
        return phi_samples(vec_of(j, "xs", "phi"), vec_of(j, "ys", "phi"));
    }
    throw schema_error("unknown phi kind '" + kind + "'");
}

elementary_domain parse_domain(const ojson& j) {
    double gamma = num(j, "gamma", "domain");
    int n = static_cast<int>(num(j, "n", "domain"));
    gamma_metric m = make_metric(gamma, n);
    phi_fn phi = parse_phi(req(j, "phi", "domain"), n - 1);
    double lip = num(j, "lip", "domain");
    double margin = num_or(j, "delta_margin", 0.0);
    if (flag_or(j, "whole_cylinder", true)) {
        double a = num_or(j, "a", -64.0);
        double halfwidth = num_or(j, "validation_halfwidth", 4.0);
        return make_elementary_whole(m, phi, a, lip, margin, halfwidth);
    }
    vecd wlo = vec_of(j, "W_lo", "domain"), whi = vec_of(j, "W_hi", "domain");
    return make_elementary(m, phi, wlo, whi, num(j, "a", "domain"), false, lip, margin);
}

std::string fmt(double x) { return format_double(x); }

report_context make_context(const experiment& ex) {
    report_context ctx;
    ctx.name = ex.name;
    ctx.config_hash = ex.config_hash;
    ctx.kernel_hash = std::to_string(build_kernel_1d(ex.kernel_l).hash());
    ctx.seed = ex.seed;
    return ctx;
}

std::string out_path(const experiment& ex, const std::string& leaf) {
    return ex.out_dir + "/" + leaf;
}

void emit(run_result& rr, const experiment& ex, const std::string& leaf,
          const std::string& content) {
    std::string path = out_path(ex, leaf);
    write_text_file(path, content);
    rr.artifacts.push_back(path);
}

std::vector<std::vector<std::string>> witness_rows(const check_report& rep) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(rep.witnesses.size());
    for (const auto& [d, o] : rep.witnesses)
        rows.push_back({fmt(std::log(d)), fmt(std::log(std::max(o, 1e-300))), fmt(d), fmt(o)});
    return rows;
}

const test_function& named_function(const experiment& ex, const std::string& name,
                                    const std::string& where) {
    for (const auto& f : ex.functions)
        if (f.name == name) return f;
    throw schema_error("function '" + name + "' requested by " + where +
                       " is not in the configured family");
}

}  // namespace

void run_result::merge(const run_result& other) {
    exit_code = std::max(exit_code, other.exit_code);
    artifacts.insert(artifacts.end(), other.artifacts.begin(), other.artifacts.end());
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

experiment parse_experiment(const std::string& path, const cli_overrides& ov) {
    std::string bytes = slurp(path);
    ojson j;
    try {
        j = ojson::parse(bytes);
    } catch (const std::exception& e) {
        throw schema_error("config parse error in " + path + ": " + e.what());
    }
    experiment ex;
    ex.config_hash = hex_hash(bytes);
    ex.name = str_or(j, "name", "experiment");
    ex.seed = static_cast<std::uint64_t>(num_or(j, "seed", 2026));
    ex.threads = static_cast<int>(num_or(j, "threads", 1));
    ex.out_dir = str_or(j, "out_dir", "out/" + ex.name);

    ex.dom = parse_domain(req(j, "domain", "config"));
    int n = ex.dom.m.n;
    const ojson& box = req(j, "box", "config");
    ex.box_lo = vec_of(box, "lo", "box");
    ex.box_hi = vec_of(box, "hi", "box");
    if (static_cast<int>(ex.box_lo.size()) != n || static_cast<int>(ex.box_hi.size()) != n)
        throw schema_error("box lo/hi must have length n");

    const ojson& fns = req(j, "functions", "config");
    if (!fns.is_array() || fns.empty())
        throw schema_error("config needs a nonempty 'functions' array");
    for (const auto& e : fns) {
        if (!e.is_string()) throw schema_error("'functions' entries must be names");
        ex.functions.push_back(catalog_entry(e.get<std::string>(), ex.dom.m));
    }

    if (j.contains("kernel")) ex.kernel_l = static_cast<int>(num(j["kernel"], "l", "kernel"));

    if (j.contains("extension")) {
        const ojson& e = j["extension"];
        ex.ecfg.A = num_or(e, "A", 0.0);
        ex.ecfg.Q = static_cast<int>(num_or(e, "Q", 64));
        ex.ecfg.k_min = e.contains("k_min") ? static_cast<int>(num(e, "k_min", "extension"))
                                            : extension_config::k_auto;
        ex.ecfg.k_max = static_cast<int>(num_or(e, "k_max", 40));
        ex.ecfg.smooth_eps = num_or(e, "psi_smoothing_eps", 0.0);
        ex.extend_function = str_or(e, "function", "");
    }
    ex.ecfg.l = ex.kernel_l;

    if (j.contains("norms")) {
        const ojson& e = j["norms"];
        ex.norm_l = static_cast<int>(num_or(e, "l", 2));
        ex.norm_p = num_or(e, "p", 2.0);
        ex.norm_lambda = num_or(e, "lambda", 1.5);
        ex.resolution = static_cast<int>(num_or(e, "resolution", 96));
        ex.profile_function = str_or(e, "function", "");
    }

    if (j.contains("geometry")) {
        const ojson& e = j["geometry"];
        ex.geom_r_min = num_or(e, "r_min", 0.02);
        ex.geom_r_max = num_or(e, "r_max", 0.4);
        ex.geom_per_octave = static_cast<int>(num_or(e, "per_octave", 4));
        ex.geom_resolution = static_cast<int>(num_or(e, "resolution", 192));
        ex.geom_centers = static_cast<std::size_t>(num_or(e, "centers", 12));
    }

    ex.vc.seed = ex.seed;
    if (j.contains("verify")) {
        const ojson& e = j["verify"];
        ex.vc.grid_res = static_cast<int>(num_or(e, "grid_res", ex.vc.grid_res));
        ex.vc.base_pairs = static_cast<std::size_t>(num_or(e, "base_pairs", 1500));
        ex.vc.levels = static_cast<int>(num_or(e, "levels", ex.vc.levels));
        ex.vc.d_base = num_or(e, "d_base", ex.vc.d_base);
        ex.vc.floor_shrink = num_or(e, "floor_shrink", ex.vc.floor_shrink);
        ex.vc.growth_gate = num_or(e, "growth_gate", ex.vc.growth_gate);
        ex.vc.c0 = num_or(e, "c0", ex.vc.c0);
        ex.vc.eps = num_or(e, "eps", ex.vc.eps);
        ex.vc.tau = num_or(e, "tau", ex.vc.tau);
        ex.vc.seed = static_cast<std::uint64_t>(num_or(e, "seed", static_cast<double>(ex.seed)));
        if (e.contains("checks")) {
            if (!e["checks"].is_array()) throw schema_error("verify.checks must be an array");
            ex.checks = e["checks"];
        }
    }

    static const std::set<std::string> known = {"kernel", "geometry", "extend", "norm", "verify"};
    if (j.contains("run")) {
        for (const auto& e : j["run"]) {
            if (!e.is_string() || !known.count(e.get<std::string>()))
                throw schema_error("'run' entries must be one of kernel|geometry|extend|norm|verify");
            ex.stages.push_back(e.get<std::string>());
        }
    } else {
        ex.stages = {"kernel", "geometry", "extend", "norm", "verify"};
    }

    if (!ov.out_dir.empty()) ex.out_dir = ov.out_dir;
    if (ov.seed) {
        ex.seed = *ov.seed;
        ex.vc.seed = *ov.seed;
    }
    if (ov.threads) ex.threads = *ov.threads;
    if (ov.resolution) {
        ex.resolution = *ov.resolution;
        ex.vc.grid_res = *ov.resolution;
        ex.geom_resolution = *ov.resolution;
    }
    ex.vc.threads = ex.threads;
    ex.ecfg.threads = ex.threads;
    return ex;
}

run_result run_kernel_stage(const experiment& ex) {
    run_result rr;
    report_context ctx = make_context(ex);
    mollifier_kernel ker = build_kernel_1d(ex.kernel_l);

    ojson payload;
    payload["l"] = ker.l;
    payload["hash"] = ker.hash();
    payload["condition"] = ker.condition;
    payload["moment_residuals"] = ker.moment_residuals;
    payload["production_nodes"] = ker.rule.size();
    emit(rr, ex, "kernel.json", render_json(wrap_report(ctx, "kernel", payload)));

    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 512; ++i) {
        double t = 0.45 + 0.65 * i / 511.0;
        rows.push_back({fmt(t), fmt(ker.eval(t))});
    }
    std::string csv = out_path(ex, "kernel_profile.csv");
    write_csv(csv, {"t", "omega"}, rows);
    rr.artifacts.push_back(csv);
    return rr;
}

run_result run_geometry_stage(const experiment& ex) {
    run_result rr;
    report_context ctx = make_context(ex);
    vecd radii = geometric_radii(ex.geom_r_min, ex.geom_r_max, ex.geom_per_octave);
    auto centers = sample_domain_points(ex.dom, ex.box_lo, ex.box_hi, ex.geom_centers, ex.seed);
    if (centers.empty()) throw hard_error("no geometry sample centers inside the domain");

    std::vector<std::vector<std::string>> rows;
    for (const auto& x : centers) {
        for (double r : radii) {
            auto est = ball_intersection_measure(ex.dom, x, r, ex.dom.m, ex.geom_resolution);
            std::vector<std::string> row;
            for (double c : x) row.push_back(fmt(c));
            row.push_back(fmt(r));
            row.push_back(fmt(est.value));
            row.push_back(fmt(est.error));
            rows.push_back(std::move(row));
        }
    }
    std::vector<std::string> header;
    for (int i = 0; i < ex.dom.m.n; ++i) header.push_back("x" + std::to_string(i));
    header.insert(header.end(), {"r", "measure", "error"});
    std::string csv = out_path(ex, "ball_measure.csv");
    write_csv(csv, header, rows);
    rr.artifacts.push_back(csv);

    // exponent fit at the shallowest center: boundary intersections are the
    // regime where the n_gamma power is visible
    const vecd* probe = &centers.front();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : centers) {
        double depth = std::abs(ex.dom.rho(x));
        if (depth < best) {
            best = depth;
            probe = &x;
        }
    }
    auto fit = fit_measure_exponent(ex.dom, *probe, radii, ex.dom.m, ex.geom_resolution);

    ojson payload;
    payload["n_gamma"] = ex.dom.m.n_gamma();
    payload["fit_slope"] = fit.slope;
    payload["fit_intercept"] = fit.intercept;
    payload["fit_points"] = fit.points;
    payload["probe_center"] = *probe;
    payload["centers"] = centers.size();
    payload["radii"] = radii;
    emit(rr, ex, "geometry.json", render_json(wrap_report(ctx, "geometry", payload)));
    return rr;
}

run_result run_extend_stage(const experiment& ex) {
    run_result rr;
    report_context ctx = make_context(ex);
    mollifier_kernel ker = build_kernel_1d(ex.kernel_l);
    const test_function& f =
        ex.extend_function.empty() ? ex.functions.front()
                                   : named_function(ex, ex.extend_function, "extension");
    field_source src;
    src.fn = [&](const vecd& x) { return f.eval(x); };
    extend_result er = extend_elementary(ex.dom, src, ker, ex.ecfg, ex.box_lo, ex.box_hi,
                                         std::vector<int>(ex.dom.m.n, ex.resolution));

    std::string base = out_path(ex, "extension_field");
    write_grid_field(base, er.field);
    rr.artifacts.push_back(base + ".bin");
    rr.artifacts.push_back(base + ".json");

    ojson payload;
    payload["function"] = f.name;
    payload["A"] = er.A;
    payload["low_A"] = er.low_A;
    payload["k_min"] = er.k_min;
    payload["k_max"] = er.k_max;
    payload["omega_cells"] = er.omega_cells;
    payload["layer_cells"] = er.layer_cells;
    payload["decay_cells"] = er.decay_cells;
    payload["tail_cells"] = er.tail_cells;
    payload["kernel_hash"] = er.kernel_hash;
    emit(rr, ex, "extension.json", render_json(wrap_report(ctx, "extension", payload)));
    return rr;
}

run_result run_norm_stage(const experiment& ex) {
    run_result rr;
    report_context ctx = make_context(ex);
    weight_spec w = weight_power(ex.norm_lambda);
    int n = ex.dom.m.n;
    vecd spacing(n);
    for (int i = 0; i < n; ++i) spacing[i] = (ex.box_hi[i] - ex.box_lo[i]) / ex.resolution;

    ojson entries = ojson::array();
    const test_function* profile_f = nullptr;
    grid_field profile_grid;
    norm_estimate profile_est;
    for (const auto& f : ex.functions) {
        grid_field g = sample_to_grid([&](const vecd& x) { return f.eval(x); }, ex.box_lo,
                                      spacing, std::vector<int>(n, ex.resolution),
                                      [&](const vecd& x) { return ex.dom.contains(x); });
        norm_grids grids = default_norm_grids(g, ex.dom.m);
        auto mor = morrey_norm(g, ex.norm_p, w, ex.dom.m, grids, ex.threads);
        auto cam = campanato_seminorm(g, ex.norm_p, w, ex.dom.m, grids, ex.threads);
        auto sob = sobolev_morrey_norm(g, ex.norm_l, ex.norm_p, w, ex.dom.m, grids, ex.threads);
        ojson e;
        e["function"] = f.name;
        e["morrey"] = mor.value;
        e["campanato"] = cam.value;
        e["sobolev_morrey"] = sob.value;
        e["dominant_term_value"] = sob.dominant.value;
        e["argmax_center"] = mor.argmax_center;
        e["argmax_radius"] = mor.argmax_radius;
        entries.push_back(std::move(e));
        bool wanted = ex.profile_function.empty() ? &f == &ex.functions.front()
                                                  : f.name == ex.profile_function;
        if (wanted) {
            profile_f = &f;
            profile_grid = std::move(g);
            profile_est = mor;
        }
    }
    if (!profile_f && !ex.profile_function.empty())
        throw schema_error("norms.function '" + ex.profile_function +
                           "' is not in the configured family");

    ojson payload;
    payload["p"] = ex.norm_p;
    payload["lambda"] = ex.norm_lambda;
    payload["l"] = ex.norm_l;
    payload["resolution"] = ex.resolution;
    payload["entries"] = entries;
    emit(rr, ex, "norms.json", render_json(wrap_report(ctx, "norms", payload)));

    if (profile_f) {
        norm_grids grids = default_norm_grids(profile_grid, ex.dom.m);
        vecd prof = morrey_profile(profile_grid, ex.norm_p, w, ex.dom.m,
                                   profile_est.argmax_center, grids.radii);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < prof.size(); ++i)
            rows.push_back({fmt(grids.radii[i]), fmt(prof[i])});
        std::string csv = out_path(ex, "morrey_profile.csv");
        write_csv(csv, {"radius", "value"}, rows);
        rr.artifacts.push_back(csv);
    }
    return rr;
}

run_result run_verify_stage(const experiment& ex) {
    run_result rr;
    if (ex.checks.empty()) throw schema_error("verify stage has no checks configured");
    report_context ctx = make_context(ex);
    mollifier_kernel ker = build_kernel_1d(ex.kernel_l);

    std::vector<std::vector<std::string>> summary;
    int idx = 0;
    for (const auto& spec : ex.checks) {
        std::string kind = str_or(spec, "check", "");
        if (kind.empty()) throw schema_error("each verify check needs a 'check' kind");
        std::string tag = "check_" + std::to_string(idx) + "_" + kind;
        std::string fname = str_or(spec, "function", "");
        if (!fname.empty()) tag += "_" + fname;

        ojson payload;
        bool pass = false;
        std::string label = kind + (fname.empty() ? "" : ":" + fname);
        if (kind == "campanato_embedding") {
            auto rep = check_campanato_embedding(
                ex.dom, named_function(ex, fname, kind), num(spec, "p", kind),
                num(spec, "lambda", kind), ex.box_lo, ex.box_hi, ex.vc);
            payload = check_report_to_json(rep);
            pass = rep.pass;
            write_csv(out_path(ex, tag + "_pairs.csv"),
                      {"log_distance", "log_oscillation", "distance", "oscillation"},
                      witness_rows(rep));
            rr.artifacts.push_back(out_path(ex, tag + "_pairs.csv"));
            summary.push_back({label, pass ? "1" : "0", fmt(rep.predicted), fmt(rep.measured),
                               fmt(rep.growth), fmt(rep.fitted_exponent)});
        } else if (kind == "morrey_campanato_equivalence") {
            auto rep = check_morrey_campanato_equivalence(ex.dom, ex.functions,
                                                          num(spec, "p", kind),
                                                          num(spec, "lambda", kind), ex.box_lo,
                                                          ex.box_hi, ex.vc);
            payload = check_report_to_json(rep);
            pass = rep.pass;
            summary.push_back({label, pass ? "1" : "0", fmt(rep.predicted), fmt(rep.measured),
                               fmt(rep.growth), fmt(rep.fitted_exponent)});
        } else if (kind == "sobolev_morrey_embedding") {
            auto rep = check_sobolev_morrey_embedding(
                ex.dom, named_function(ex, fname, kind),
                static_cast<int>(num(spec, "l", kind)), num(spec, "p", kind),
                num(spec, "lambda", kind), ex.box_lo, ex.box_hi, ex.vc,
                flag_or(spec, "parallelepiped", false));
            payload = check_report_to_json(rep);
            pass = rep.pass;
            write_csv(out_path(ex, tag + "_pairs.csv"),
                      {"log_distance", "log_oscillation", "distance", "oscillation"},
                      witness_rows(rep));
            rr.artifacts.push_back(out_path(ex, tag + "_pairs.csv"));
            summary.push_back({label, pass ? "1" : "0", fmt(rep.predicted), fmt(rep.measured),
                               fmt(rep.growth), fmt(rep.fitted_exponent)});
        } else if (kind == "daprato") {
            auto rep = check_daprato(ex.dom, named_function(ex, fname, kind),
                                     num(spec, "p", kind), num(spec, "lambda", kind), ex.box_lo,
                                     ex.box_hi, ex.vc, num_or(spec, "eta_tilde", 0.0));
            payload = check_report_to_json(rep);
            pass = rep.pass;
            summary.push_back({label, pass ? "1" : "0", fmt(rep.predicted), fmt(rep.measured),
                               fmt(rep.growth), fmt(rep.fitted_exponent)});
        } else if (kind == "poincare") {
            auto centers = sample_domain_points(
                ex.dom, ex.box_lo, ex.box_hi,
                static_cast<std::size_t>(num_or(spec, "centers", 40)), ex.vc.seed);
            vecd radii = vec_of(spec, "radii", kind);
            auto rep = poincare_ratio(ex.dom, ex.functions, num(spec, "p", kind), ex.box_lo,
                                      ex.box_hi, centers, radii, ex.vc,
                                      flag_or(spec, "convex", false));
            payload = poincare_report_to_json(rep);
            pass = rep.pass;
            std::vector<std::vector<std::string>> rows;
            for (const auto& d : rep.details) {
                std::vector<std::string> row = {std::to_string(d.f_index)};
                for (double c : d.center) row.push_back(fmt(c));
                row.insert(row.end(), {fmt(d.r), fmt(d.lhs), fmt(d.rhs), fmt(d.ratio),
                                       fmt(d.convex_bound), d.violation ? "1" : "0"});
                rows.push_back(std::move(row));
            }
            std::vector<std::string> header = {"f_index"};
            for (int i = 0; i < ex.dom.m.n; ++i) header.push_back("x" + std::to_string(i));
            header.insert(header.end(), {"r", "lhs", "rhs", "ratio", "bound", "violation"});
            write_csv(out_path(ex, tag + "_samples.csv"), header, rows);
            rr.artifacts.push_back(out_path(ex, tag + "_samples.csv"));
            summary.push_back({label, pass ? "1" : "0", fmt(rep.eta_fit),
                               fmt(static_cast<double>(rep.samples)),
                               fmt(static_cast<double>(rep.convex_violations)), "0"});
        } else if (kind == "geometric_lemma") {
            vecd lo = spec.contains("box_lo") ? vec_of(spec, "box_lo", kind) : ex.box_lo;
            vecd hi = spec.contains("box_hi") ? vec_of(spec, "box_hi", kind) : ex.box_hi;
            auto cfgs = sample_lemma_configs(
                lo, hi, static_cast<std::size_t>(num_or(spec, "configs", 300)),
                num(spec, "r_lo", kind), num(spec, "r_hi", kind),
                num_or(spec, "shift_bound", 0.5), ex.vc.seed);
            auto rep = check_geometric_lemma(ex.dom, cfgs, ex.vc);
            payload = lemma_report_to_json(rep);
            pass = rep.pass;
            summary.push_back({label, pass ? "1" : "0", fmt(rep.worst_margin), fmt(rep.s_fit),
                               fmt(static_cast<double>(rep.gap_checks)),
                               fmt(static_cast<double>(rep.violations))});
        } else if (kind == "extension_corollary") {
            auto rep = check_extension_corollary(
                ex.dom, named_function(ex, fname, kind),
                static_cast<int>(num(spec, "l", kind)), num(spec, "p", kind),
                num(spec, "lambda", kind), ker, ex.ecfg, ex.box_lo, ex.box_hi, ex.vc);
            payload = check_report_to_json(rep);
            pass = rep.pass;
            write_csv(out_path(ex, tag + "_pairs.csv"),
                      {"log_distance", "log_oscillation", "distance", "oscillation"},
                      witness_rows(rep));
            rr.artifacts.push_back(out_path(ex, tag + "_pairs.csv"));
            summary.push_back({label, pass ? "1" : "0", fmt(rep.predicted), fmt(rep.measured),
                               fmt(rep.growth), fmt(rep.fitted_exponent)});
        } else if (kind == "classical_limit") {
            auto rep = verify_classical_limit(static_cast<int>(num(spec, "n", kind)),
                                              static_cast<int>(num(spec, "l", kind)),
                                              num(spec, "p", kind), num(spec, "lambda", kind));
            payload = check_report_to_json(rep);
            pass = rep.pass;
            summary.push_back({label, pass ? "1" : "0", fmt(rep.predicted), fmt(rep.measured),
                               "0", "0"});
        } else {
            throw schema_error("unknown verify check kind '" + kind + "'");
        }

        emit(rr, ex, tag + ".json", render_json(wrap_report(ctx, kind, payload)));
        if (!pass) {
            rr.exit_code = 1;
            rr.failures.push_back(label);
        }
        ++idx;
    }
    write_csv(out_path(ex, "verify_summary.csv"),
              {"check", "pass", "predicted", "measured", "growth", "fitted_exponent"}, summary);
    rr.artifacts.push_back(out_path(ex, "verify_summary.csv"));
    return rr;
}

run_result run_config(const std::string& path, const cli_overrides& ov) {
    experiment ex = parse_experiment(path, ov);
    run_result rr;
    for (const auto& stage : ex.stages) {
        if (stage == "kernel") rr.merge(run_kernel_stage(ex));
        else if (stage == "geometry") rr.merge(run_geometry_stage(ex));
        else if (stage == "extend") rr.merge(run_extend_stage(ex));
        else if (stage == "norm") rr.merge(run_norm_stage(ex));
        else if (stage == "verify") rr.merge(run_verify_stage(ex));
    }
    return rr;
}

int run_config_guarded(const std::string& path, const cli_overrides& ov, std::string* message) {
    try {
        run_result rr = run_config(path, ov);
        if (message && !rr.failures.empty()) {
            *message = "failed checks:";
            for (const auto& f : rr.failures) *message += " " + f;
        }
        return rr.exit_code;
    } catch (const schema_error& e) {
        if (message) *message = e.what();
        return 2;
    } catch (const hard_error& e) {
        if (message) *message = e.what();
        return 3;
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        return 3;
    }
}

}  // namespace holder
