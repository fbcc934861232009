#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "holder/extension.hpp"
#include "holder/report.hpp"
#include "holder/verify.hpp"

namespace holder {

struct cli_overrides {
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> resolution;
};

// a parsed, validated experiment config
struct experiment {
    std::string name = "experiment";
    std::uint64_t seed = 2026;
    int threads = 1;
    std::string out_dir = "out";
    elementary_domain dom;
    vecd box_lo, box_hi;
    std::vector<test_function> functions;
    int kernel_l = 2;
    extension_config ecfg;
    std::string extend_function;  // empty = first configured function
    int resolution = 96;
    int norm_l = 2;
    double norm_p = 2.0;
    double norm_lambda = 1.5;
    std::string profile_function;
    double geom_r_min = 0.02, geom_r_max = 0.4;
    int geom_per_octave = 4;
    int geom_resolution = 192;
    std::size_t geom_centers = 12;
    verify_config vc;
    ojson checks = ojson::array();
    std::vector<std::string> stages;
    std::string config_hash;
};

experiment parse_experiment(const std::string& path, const cli_overrides& ov);

struct run_result {
    int exit_code = 0;  // 0 ok, 1 at least one check failed
    std::vector<std::string> artifacts;
    std::vector<std::string> failures;

    void merge(const run_result& other);
};

run_result run_kernel_stage(const experiment& ex);
run_result run_geometry_stage(const experiment& ex);
run_result run_extend_stage(const experiment& ex);
run_result run_norm_stage(const experiment& ex);
run_result run_verify_stage(const experiment& ex);

// stages in dependency order; exit 1 iff any check failed
run_result run_config(const std::string& path, const cli_overrides& ov);

// maps exceptions onto the exit-code contract: 2 for schema violations,
// 3 for numerical hard errors
int run_config_guarded(const std::string& path, const cli_overrides& ov,
                       std::string* message = nullptr);

}  // namespace holder
