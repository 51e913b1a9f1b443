#include "hypershell/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hypershell {
namespace io {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream ss;
  for (size_t i = 0; i < header.size(); ++i)
    ss << (i ? "," : "") << header[i];
  ss << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ValidationError("csv row width does not match the header");
    for (size_t i = 0; i < row.size(); ++i)
      ss << (i ? "," : "") << fmt(row[i]);
    ss << "\n";
  }
  write_text_file(path, ss.str());
}

void write_grid_binary(const std::string& path, const GridSpec& spec,
                       const std::vector<double>& values,
                       const std::string& field_name) {
  if (values.size() != spec.size())
    throw ValidationError("grid dump size does not match the spec");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out.write("HGD1", 4);
  const int32_t n1 = spec.n1, n2 = spec.n2;
  out.write(reinterpret_cast<const char*>(&n1), 4);
  out.write(reinterpret_cast<const char*>(&n2), 4);
  const double geo[4] = {spec.x1_0, spec.x2_0, spec.dx1, spec.dx2};
  out.write(reinterpret_cast<const char*>(geo), sizeof geo);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw ValidationError("write failed: " + path);

  json side;
  side["format"] = "HGD1";
  side["field"] = field_name;
  side["n1"] = spec.n1;
  side["n2"] = spec.n2;
  side["x1_0"] = spec.x1_0;
  side["x2_0"] = spec.x2_0;
  side["dx1"] = spec.dx1;
  side["dx2"] = spec.dx2;
  side["layout"] = "x1-fastest";
  write_json_file(path + ".json", side);
}

std::vector<double> read_grid_binary(const std::string& path,
                                     GridSpec* spec_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HGD1", 4) != 0)
    throw ValidationError("not a grid dump: " + path);
  int32_t n1 = 0, n2 = 0;
  in.read(reinterpret_cast<char*>(&n1), 4);
  in.read(reinterpret_cast<char*>(&n2), 4);
  double geo[4];
  in.read(reinterpret_cast<char*>(geo), sizeof geo);
  if (!in || n1 < 1 || n2 < 1)
    throw ValidationError("corrupt grid dump header: " + path);
  GridSpec spec;
  spec.n1 = n1;
  spec.n2 = n2;
  spec.x1_0 = geo[0];
  spec.x2_0 = geo[1];
  spec.dx1 = geo[2];
  spec.dx2 = geo[3];
  std::vector<double> values(spec.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw ValidationError("corrupt grid dump payload: " + path);
  if (spec_out) *spec_out = spec;
  return values;
}

namespace {

json curve_to_json(const PlanarCurve& c, int n = 129) {
  json j;
  j["cls"] = (c.cls() == CurveClass::EType) ? "E" : "P";
  std::vector<double> t(n), x1(n), x2(n);
  for (int i = 0; i < n; ++i) {
    t[i] = c.t0() + (c.t1() - c.t0()) * i / (n - 1);
    x1[i] = c.x1(t[i]);
    x2[i] = c.x2(t[i]);
  }
  j["t"] = t;
  j["x1"] = x1;
  j["x2"] = x2;
  return j;
}

PlanarCurve curve_from_json(const json& j) {
  if (!j.contains("cls") || !j.contains("t") || !j.contains("x1") ||
      !j.contains("x2"))
    throw ValidationError("curve JSON needs cls, t, x1, x2");
  const std::string cls = j.at("cls").get<std::string>();
  if (cls != "E" && cls != "P")
    throw ValidationError("curve class must be E or P");
  return PlanarCurve::from_samples(
      j.at("t").get<std::vector<double>>(),
      j.at("x1").get<std::vector<double>>(),
      j.at("x2").get<std::vector<double>>(),
      cls == "E" ? CurveClass::EType : CurveClass::PType);
}

}  // namespace

json region_to_json(const PlanarRegion& region) {
  json j;
  j["kind"] = to_string(region.kind);
  switch (region.kind) {
    case RegionKind::R:
      j["z"] = {region.z[0], region.z[1]};
      j["a"] = region.a;
      j["b"] = region.b;
      break;
    case RegionKind::E:
      j["gamma"] = curve_to_json(*region.curve);
      break;
    case RegionKind::Pminus:
    case RegionKind::Pplus:
      j["beta"] = curve_to_json(*region.curve);
      break;
    case RegionKind::XiMinus:
    case RegionKind::XiPlus:
      j["beta"] = curve_to_json(*region.curve);
      j["gamma"] = curve_to_json(*region.curve2);
      break;
    case RegionKind::Phi:
      j["beta"] = curve_to_json(*region.curve);
      j["gamma"] = curve_to_json(*region.curve2);
      j["beta_hat"] = curve_to_json(*region.curve3);
      break;
  }
  return j;
}

PlanarRegion region_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "R") {
    const auto z = j.at("z").get<std::vector<double>>();
    if (z.size() != 2) throw ValidationError("region corner needs two numbers");
    return make_region_R(Vec2{z[0], z[1]}, j.at("a").get<double>(),
                         j.at("b").get<double>());
  }
  if (kind == "E") return make_region_E(curve_from_json(j.at("gamma")));
  if (kind == "P-") return make_region_Pminus(curve_from_json(j.at("beta")));
  if (kind == "P+") return make_region_Pplus(curve_from_json(j.at("beta")));
  if (kind == "Xi-")
    return make_region_XiMinus(curve_from_json(j.at("beta")),
                               curve_from_json(j.at("gamma")));
  if (kind == "Xi+")
    return make_region_XiPlus(curve_from_json(j.at("beta")),
                              curve_from_json(j.at("gamma")));
  if (kind == "Phi")
    return make_region_Phi(curve_from_json(j.at("beta")),
                           curve_from_json(j.at("gamma")),
                           curve_from_json(j.at("beta_hat")));
  throw ValidationError("unknown region kind: " + kind);
}

json load_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw ValidationError("invalid JSON in " + path);
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_quotient_csv(const std::string& path,
                        const std::vector<QuotientRecord>& records) {
  std::vector<std::vector<double>> rows;
  rows.reserve(records.size());
  for (const auto& r : records)
    rows.push_back({r.h, r.quotient, std::log(r.h), std::log(r.quotient),
                    static_cast<double>(r.basis_dim), r.eigen_residual,
                    static_cast<double>(r.deflated),
                    r.saturated ? 1.0 : 0.0, r.saturation_change});
  write_csv(path,
            {"h", "quotient", "log_h", "log_quotient", "basis_dim",
             "eigen_residual", "deflated", "saturated", "saturation_change"},
            rows);
}

json quotient_summary(const std::vector<QuotientRecord>& records,
                      const LineFit* fit) {
  json j;
  j["records"] = json::array();
  for (const auto& r : records) {
    json e;
    e["h"] = r.h;
    e["quotient"] = r.quotient;
    e["basis_dim"] = r.basis_dim;
    e["eigen_residual"] = r.eigen_residual;
    e["deflated"] = r.deflated;
    e["saturated"] = r.saturated;
    e["saturation_change"] = r.saturation_change;
    j["records"].push_back(e);
  }
  if (fit) {
    j["fit"]["slope"] = fit->slope;
    j["fit"]["intercept"] = fit->intercept;
    j["fit"]["slope_stderr"] = fit->slope_stderr;
  }
  return j;
}

}  // namespace io
}  // namespace hypershell
