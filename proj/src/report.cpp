#include "holder/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace holder {

namespace {

void ensure_parent(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

ojson pairs_to_json(const std::vector<std::pair<std::string, double>>& params) {
    ojson out = ojson::object();
    for (const auto& [k, v] : params) out[k] = v;
    return out;
}

}  // namespace

std::string hex_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ojson check_report_to_json(const check_report& rep) {
    ojson j;
    j["id"] = rep.id;
    j["params"] = pairs_to_json(rep.params);
    j["predicted"] = rep.predicted;
    j["measured"] = rep.measured;
    j["tolerance"] = rep.tolerance;
    j["growth"] = rep.growth;
    j["fitted_exponent"] = rep.fitted_exponent;
    j["boundary_case"] = rep.boundary_case;
    j["pass"] = rep.pass;
    j["notes"] = rep.notes;
    j["witness_count"] = rep.witnesses.size();
    return j;
}

ojson poincare_report_to_json(const poincare_report& rep) {
    ojson j;
    j["id"] = "poincare_ratio";
    j["convex_mode"] = rep.convex_mode;
    j["eta_fit"] = rep.eta_fit;
    j["samples"] = rep.samples;
    j["skipped"] = rep.skipped;
    j["convex_violations"] = rep.convex_violations;
    j["pass"] = rep.pass;
    j["radii"] = rep.radii;
    j["sup_ratio"] = rep.sup_ratio;
    j["notes"] = rep.notes;
    return j;
}

ojson lemma_report_to_json(const geometric_lemma_report& rep) {
    ojson j;
    j["id"] = "geometric_lemma";
    j["configs"] = rep.configs;
    j["vacuous"] = rep.vacuous;
    j["gap_checks"] = rep.gap_checks;
    j["violations"] = rep.violations;
    j["worst_margin"] = rep.worst_margin;
    j["s_fit"] = rep.s_fit;
    j["pass"] = rep.pass;
    j["notes"] = rep.notes;
    return j;
}

ojson wrap_report(const report_context& ctx, const std::string& id, ojson payload) {
    ojson j;
    j["name"] = ctx.name;
    j["report"] = id;
    j["config_hash"] = ctx.config_hash;
    j["kernel_hash"] = ctx.kernel_hash;
    j["seed"] = ctx.seed;
    j["payload"] = std::move(payload);
    return j;
}

std::string render_json(const ojson& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw hard_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw hard_error("short write to " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string body;
    auto append_row = [&body](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body += ',';
            body += cells[i];
        }
        body += '\n';
    };
    append_row(header);
    for (const auto& r : rows) {
        if (r.size() != header.size())
            throw schema_error("csv row width does not match the header");
        append_row(r);
    }
    write_text_file(path, body);
}

std::vector<std::pair<std::size_t, std::uint8_t>> mask_rle(
    const std::vector<std::uint8_t>& mask) {
    std::vector<std::pair<std::size_t, std::uint8_t>> runs;
    for (std::size_t i = 0; i < mask.size();) {
        std::size_t j = i;
        while (j < mask.size() && mask[j] == mask[i]) ++j;
        runs.emplace_back(j - i, mask[i]);
        i = j;
    }
    return runs;
}

void write_grid_field(const std::string& path_base, const grid_field& f) {
    ensure_parent(path_base);
    {
        std::ofstream bin(path_base + ".bin", std::ios::binary);
        if (!bin) throw hard_error("cannot open " + path_base + ".bin for writing");
        bin.write(reinterpret_cast<const char*>(f.values.data()),
                  static_cast<std::streamsize>(f.values.size() * sizeof(double)));
        if (!bin) throw hard_error("short write to " + path_base + ".bin");
    }
    ojson j;
    j["origin"] = f.origin;
    j["spacing"] = f.spacing;
    j["extents"] = f.extents;
    ojson runs = ojson::array();
    for (const auto& [len, val] : mask_rle(f.mask)) runs.push_back({len, val});
    j["mask_rle"] = runs;
    write_text_file(path_base + ".json", render_json(j));
}

grid_field read_grid_field(const std::string& path_base) {
    std::ifstream hdr(path_base + ".json");
    if (!hdr) throw schema_error("missing field header " + path_base + ".json");
    ojson j;
    try {
        j = ojson::parse(hdr);
    } catch (const std::exception& e) {
        throw schema_error("bad field header " + path_base + ".json: " + e.what());
    }
    grid_field f = make_grid(j.at("origin").get<vecd>(), j.at("spacing").get<vecd>(),
                             j.at("extents").get<std::vector<int>>());
    std::size_t at = 0;
    for (const auto& run : j.at("mask_rle")) {
        std::size_t len = run.at(0).get<std::size_t>();
        std::uint8_t val = run.at(1).get<std::uint8_t>();
        if (at + len > f.mask.size()) throw schema_error("mask rle overruns the field");
        for (std::size_t i = 0; i < len; ++i) f.mask[at++] = val;
    }
    if (at != f.mask.size()) throw schema_error("mask rle does not cover the field");
    std::ifstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw schema_error("missing field data " + path_base + ".bin");
    bin.read(reinterpret_cast<char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (static_cast<std::size_t>(bin.gcount()) != f.values.size() * sizeof(double))
        throw schema_error("field data size mismatch in " + path_base + ".bin");
    return f;
}

}  // namespace holder
