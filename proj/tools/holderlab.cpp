#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "holder/experiment.hpp"

namespace {

struct common_flags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    int resolution = 0;
};

void add_common(CLI::App* cmd, common_flags& fl) {
    cmd->add_option("--config", fl.config, "experiment config (json)")->required();
    cmd->add_option("--out", fl.out, "output directory override");
    cmd->add_option("--seed", fl.seed, "seed override")->each([&fl](const std::string&) {
        fl.seed_set = true;
    });
    cmd->add_option("--threads", fl.threads, "worker thread count");
    cmd->add_option("--resolution", fl.resolution, "grid resolution override");
}

holder::cli_overrides to_overrides(const common_flags& fl) {
    holder::cli_overrides ov;
    ov.out_dir = fl.out;
    if (fl.seed_set) ov.seed = fl.seed;
    if (fl.threads > 0) ov.threads = fl.threads;
    if (fl.resolution > 0) ov.resolution = fl.resolution;
    return ov;
}

int run_stage(const common_flags& fl, const std::string& stage) {
    using namespace holder;
    try {
        experiment ex = parse_experiment(fl.config, to_overrides(fl));
        run_result rr;
        if (stage == "geometry") rr = run_geometry_stage(ex);
        else if (stage == "kernel") rr = run_kernel_stage(ex);
        else if (stage == "extend") rr = run_extend_stage(ex);
        else if (stage == "norm") rr = run_norm_stage(ex);
        else if (stage == "verify") rr = run_verify_stage(ex);
        for (const auto& a : rr.artifacts) std::printf("wrote %s\n", a.c_str());
        for (const auto& f : rr.failures) std::printf("FAIL %s\n", f.c_str());
        return rr.exit_code;
    } catch (const schema_error& e) {
        std::fprintf(stderr, "schema violation: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic Sobolev-Morrey toolbox"};
    app.require_subcommand(1);

    common_flags fl_geometry, fl_kernel, fl_extend, fl_norm, fl_verify, fl_run;
    auto* c_geometry = app.add_subcommand("geometry", "ball measures and boundary layer data");
    add_common(c_geometry, fl_geometry);
    auto* c_kernel = app.add_subcommand("kernel", "vanishing-moment mollifier reports");
    add_common(c_kernel, fl_kernel);
    auto* c_extend = app.add_subcommand("extend", "run the extension operator, save the field");
    add_common(c_extend, fl_extend);
    auto* c_norm = app.add_subcommand("norm", "morrey / campanato / sobolev-morrey estimates");
    add_common(c_norm, fl_norm);
    auto* c_verify = app.add_subcommand("verify", "run the configured inequality checks");
    add_common(c_verify, fl_verify);
    auto* c_run = app.add_subcommand("run", "full pipeline in dependency order");
    add_common(c_run, fl_run);

    CLI11_PARSE(app, argc, argv);

    if (c_geometry->parsed()) return run_stage(fl_geometry, "geometry");
    if (c_kernel->parsed()) return run_stage(fl_kernel, "kernel");
    if (c_extend->parsed()) return run_stage(fl_extend, "extend");
    if (c_norm->parsed()) return run_stage(fl_norm, "norm");
    if (c_verify->parsed()) return run_stage(fl_verify, "verify");

    std::string message;
    int code = holder::run_config_guarded(fl_run.config, to_overrides(fl_run), &message);
    if (!message.empty()) {
        std::fprintf(code == 0 ? stdout : stderr, "%s\n", message.c_str());
    }
    return code;
}
