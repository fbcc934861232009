#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "holder/fields.hpp"
#include "holder/verify.hpp"

namespace holder {

using ojson = nlohmann::ordered_json;

// provenance stamped into every emitted report
struct report_context {
    std::string name;
    std::string config_hash;
    std::string kernel_hash = "0";
    std::uint64_t seed = 0;
};

std::string hex_hash(const std::string& bytes);  // fnv1a-64 as 16 hex chars

ojson check_report_to_json(const check_report& rep);
ojson poincare_report_to_json(const poincare_report& rep);
ojson lemma_report_to_json(const geometric_lemma_report& rep);
ojson wrap_report(const report_context& ctx, const std::string& id, ojson payload);

std::string render_json(const ojson& j);
void write_text_file(const std::string& path, const std::string& content);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// (run_length, value) pairs covering the mask in order
std::vector<std::pair<std::size_t, std::uint8_t>> mask_rle(const std::vector<std::uint8_t>& mask);

// values as flat little-endian doubles at <base>.bin, geometry and the
// run-length encoded mask at <base>.json
void write_grid_field(const std::string& path_base, const grid_field& f);
grid_field read_grid_field(const std::string& path_base);

}  // namespace holder
