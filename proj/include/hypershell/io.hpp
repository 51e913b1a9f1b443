#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hypershell/gridfield.hpp"
#include "hypershell/interp.hpp"
#include "hypershell/korn.hpp"
#include "hypershell/regions.hpp"

namespace hypershell {
namespace io {

// Round-trip decimal formatting; every writer below uses it, so repeated
// runs emit byte-identical files.
std::string fmt(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// CSV with a header row; cells formatted with fmt().
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Raw grid dump: magic "HGD1", int32 n1 and n2, doubles x1_0, x2_0, dx1,
// dx2, then n1*n2 doubles with the first index fastest. A sidecar
// <path>.json records the layout and the field name.
void write_grid_binary(const std::string& path, const GridSpec& spec,
                       const std::vector<double>& values,
                       const std::string& field_name);
std::vector<double> read_grid_binary(const std::string& path,
                                     GridSpec* spec_out = nullptr);

// Planar regions round-trip through JSON; curves are stored as dense samples
// and rebuilt with the same monotone interpolants.
nlohmann::json region_to_json(const PlanarRegion& region);
PlanarRegion region_from_json(const nlohmann::json& j);

// Parses the file as JSON; wraps stream and parse failures in
// ValidationError so the caller maps them to the config exit code.
nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// Quotient experiment export: one row per record plus plot-ready log
// columns, and a JSON summary carrying the fit when one is available.
void write_quotient_csv(const std::string& path,
                        const std::vector<QuotientRecord>& records);
nlohmann::json quotient_summary(const std::vector<QuotientRecord>& records,
                                const LineFit* fit);

}  // namespace io
}  // namespace hypershell
