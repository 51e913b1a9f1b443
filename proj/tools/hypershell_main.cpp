#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hypershell/atlas.hpp"
#include "hypershell/charsolve.hpp"
#include "hypershell/geometry.hpp"
#include "hypershell/io.hpp"
#include "hypershell/korn.hpp"
#include "hypershell/principal.hpp"
#include "hypershell/strain.hpp"
#include "hypershell/types.hpp"

namespace hs = hypershell;
using nlohmann::json;

namespace {

// Exit codes: 2 invalid config, 3 non-hyperbolic input, 4 solver failure,
// 5 basis saturation not reached, 6 appendix check failure.
constexpr int kExitConfig = 2;
constexpr int kExitNotHyperbolic = 3;
constexpr int kExitSolver = 4;
constexpr int kExitSaturation = 5;
constexpr int kExitAppendix = 6;

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  int grid = 0;        // 0 = use config/default
  double tol = 0;      // 0 = use config/default
  uint64_t seed = 0;   // 0 = use config/default
  bool seed_set = false;
};

double unit_uniform(std::mt19937_64& rng) {
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

json load_config(const Options& opt, bool required) {
  if (opt.config_path.empty()) {
    if (required) throw hs::ValidationError("this command needs --config");
    return json::object();
  }
  json j = hs::io::load_json_file(opt.config_path);
  if (!j.is_object()) throw hs::ValidationError("config root must be an object");
  return j;
}

double cfg_num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw hs::ValidationError("config key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int cfg_int(const json& j, const std::string& key, int fallback) {
  const double v = cfg_num(j, key, fallback);
  if (v != std::floor(v))
    throw hs::ValidationError("config key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::string cfg_str(const json& j, const std::string& key,
                    const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string())
    throw hs::ValidationError("config key '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::string out_path(const Options& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return (std::filesystem::path(opt.out_dir) / name).string();
}

// Principal curvatures by an independent numeric route: eigenvalues of the
// metric-whitened second form.
hs::Vec2 curvature_rootsolve(const hs::SurfaceChart& s, hs::Vec2 u) {
  const hs::Mat2 g = s.metric(u);
  const hs::Mat2 pi = s.second_form(u);
  Eigen::SelfAdjointEigenSolver<hs::Mat2> gs(g);
  const hs::Mat2 gi_half = gs.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<hs::Mat2> es(gi_half * pi * gi_half);
  return es.eigenvalues();
}

int cmd_surface_info(const Options& opt) {
  const json cfg = load_config(opt, true);
  const std::string name = cfg_str(cfg, "surface", "");
  if (name.empty()) throw hs::ValidationError("config needs a surface name");
  const hs::SurfaceChart surf = hs::surface_by_name(name);

  double u1lo = -1, u1hi = 1, u2lo = -1, u2hi = 1;
  if (name == "monkey_saddle") {
    u1lo = 0.5;
    u1hi = 2.0;
    u2lo = -0.5;
    u2hi = 0.5;
  }
  if (cfg.contains("box")) {
    const json& b = cfg.at("box");
    const auto u1 = b.at("u1").get<std::vector<double>>();
    const auto u2 = b.at("u2").get<std::vector<double>>();
    if (u1.size() != 2 || u2.size() != 2 || u1[0] >= u1[1] || u2[0] >= u2[1])
      throw hs::ValidationError("box needs increasing u1 and u2 pairs");
    u1lo = u1[0];
    u1hi = u1[1];
    u2lo = u2[0];
    u2hi = u2[1];
  }
  const int n = opt.grid > 0 ? opt.grid : cfg_int(cfg, "grid", 65);
  if (n < 2) throw hs::ValidationError("grid must be at least 2");

  double kmin = 0, kmax = 0;
  bool first = true;
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const hs::Vec2 u(u1lo + (u1hi - u1lo) * i / (n - 1),
                       u2lo + (u2hi - u2lo) * j / (n - 1));
      const double k = surf.gauss_curvature(u);
      const hs::Vec2 pc = curvature_rootsolve(surf, u);
      if (first || k < kmin) kmin = k;
      if (first || k > kmax) kmax = k;
      first = false;
      rows.push_back({u[0], u[1], k, pc[0], pc[1]});
    }
  hs::io::write_csv(out_path(opt, "kappa_grid.csv"),
                    {"u1", "u2", "kappa", "k_min", "k_max"}, rows);

  json rep;
  rep["surface"] = name;
  rep["box"] = {{"u1", {u1lo, u1hi}}, {"u2", {u2lo, u2hi}}};
  rep["grid"] = n;
  rep["kappa_min"] = kmin;
  rep["kappa_max"] = kmax;
  rep["orientation"] = surf.orientation();
  rep["hyperbolic"] = kmax < 0;
  if (kmax < 0) {
    const hs::Vec2 uc(0.5 * (u1lo + u1hi), 0.5 * (u2lo + u2hi));
    const auto dirs = hs::asymptotic_directions(surf, uc);
    json sample;
    sample["u"] = {uc[0], uc[1]};
    sample["kappa"] = surf.gauss_curvature(uc);
    sample["asymptotic_1"] = {dirs.first[0], dirs.first[1]};
    sample["asymptotic_2"] = {dirs.second[0], dirs.second[1]};
    rep["center_sample"] = sample;
  }
  hs::io::write_json_file(out_path(opt, "surface_info.json"), rep);
  std::cout << "surface " << name << ": kappa in [" << hs::io::fmt(kmin)
            << ", " << hs::io::fmt(kmax) << "] over " << n << "x" << n
            << " nodes\n";
  if (!(kmax < 0))
    throw hs::NotHyperbolicError("surface is not hyperbolic on the box");
  return 0;
}

// Chart anchors for the built-in surfaces: a diagonal asymptotic-transversal
// segment through a hyperbolic base point.
hs::CurveOnSurface builtin_anchor(const std::string& surface, double span) {
  hs::Vec2 base(0, 0);
  if (surface == "monkey_saddle") base = hs::Vec2(1, -1);
  return hs::CurveOnSurface(
      [base](double t) { return hs::Vec2(base[0] + t, base[1] - t); },
      [](double) { return hs::Vec2(1, -1); }, -span, span);
}

struct Manufactured {
  std::function<double(hs::Vec2)> W1, W2, w;
  std::function<double(hs::Vec2)> dW1_1, dW1_2, dW2_1, dW2_2;
};

Manufactured builtin_field() {
  Manufactured m;
  m.W1 = [](hs::Vec2 x) {
    return 0.4 * std::sin(1.1 * x[0] + 0.3) * std::cos(0.8 * x[1]);
  };
  m.dW1_1 = [](hs::Vec2 x) {
    return 0.44 * std::cos(1.1 * x[0] + 0.3) * std::cos(0.8 * x[1]);
  };
  m.dW1_2 = [](hs::Vec2 x) {
    return -0.32 * std::sin(1.1 * x[0] + 0.3) * std::sin(0.8 * x[1]);
  };
  m.W2 = [](hs::Vec2 x) {
    return 0.3 * std::cos(0.9 * x[0]) * std::sin(1.2 * x[1] - 0.2);
  };
  m.dW2_1 = [](hs::Vec2 x) {
    return -0.27 * std::sin(0.9 * x[0]) * std::sin(1.2 * x[1] - 0.2);
  };
  m.dW2_2 = [](hs::Vec2 x) {
    return 0.36 * std::cos(0.9 * x[0]) * std::cos(1.2 * x[1] - 0.2);
  };
  m.w = [](hs::Vec2 x) {
    return 0.25 * std::sin(0.7 * x[0] + 1.3 * x[1] + 0.4);
  };
  return m;
}

// Strain of the manufactured field with analytic in-plane derivatives and
// the chart's connection coefficients.
hs::StrainTensorField manufactured_strain(const hs::AsymptoticChart& chart,
                                          const Manufactured& m) {
  hs::StrainTensorField U = hs::StrainTensorField::zero(chart);
  for (int j = 0; j < chart.spec.n2; ++j)
    for (int i = 0; i < chart.spec.n1; ++i) {
      const int n = chart.spec.idx(i, j);
      const hs::Vec2 x = chart.spec.node(i, j);
      const double w1 = m.W1(x), w2 = m.W2(x), w = m.w(x);
      U.U11[n] = m.dW1_1(x) - chart.c111[n] * w1 - chart.c211[n] * w2;
      U.U12[n] = 0.5 * (m.dW1_2(x) + m.dW2_1(x)) - chart.c112[n] * w1 -
                 chart.c212[n] * w2 + w * chart.omega[n];
      U.U22[n] = m.dW2_2(x) - chart.c122[n] * w1 - chart.c222[n] * w2;
    }
  return U;
}

struct StrainErrors {
  double e_w1 = 0, e_w2 = 0, e_w = 0, scale = 0;
};

StrainErrors compare_displacement(const hs::ShellDisplacementSurface& sol,
                                  const Manufactured& m) {
  StrainErrors e;
  for (int j = 0; j < sol.spec.n2; ++j)
    for (int i = 0; i < sol.spec.n1; ++i) {
      const int n = sol.spec.idx(i, j);
      if (!sol.mask.empty() && !sol.mask[n]) continue;
      const hs::Vec2 x = sol.spec.node(i, j);
      e.e_w1 = std::max(e.e_w1, std::abs(sol.W1[n] - m.W1(x)));
      e.e_w2 = std::max(e.e_w2, std::abs(sol.W2[n] - m.W2(x)));
      e.e_w = std::max(e.e_w, std::abs(sol.w[n] - m.w(x)));
      e.scale = std::max({e.scale, std::abs(m.W1(x)), std::abs(m.W2(x)),
                          std::abs(m.w(x))});
    }
  return e;
}

int cmd_solve_strain(const Options& opt) {
  const json cfg = load_config(opt, true);
  const std::string surface = cfg_str(cfg, "surface", "hyperbolic_paraboloid");
  const hs::SurfaceChart surf = hs::surface_by_name(surface);
  const double span =
      cfg_num(cfg, "anchor_span", surface == "monkey_saddle" ? 0.3 : 0.9);
  const double extent =
      cfg_num(cfg, "extent", surface == "monkey_saddle" ? 0.25 : 0.8);
  const int chart_n = cfg_int(cfg, "chart_n", 129);
  const int grid = opt.grid > 0 ? opt.grid : cfg_int(cfg, "grid", 129);
  const double tol = opt.tol > 0 ? opt.tol : cfg_num(cfg, "tol", 1e-3);
  const std::string data = cfg_str(cfg, "data", "manufactured");
  if (data != "manufactured" && data != "zero")
    throw hs::ValidationError("data must be 'manufactured' or 'zero'");
  if (span <= 0 || extent <= 0) throw hs::ValidationError("span and extent must be positive");

  const hs::CurveOnSurface anchor = builtin_anchor(surface, span);
  const hs::AsymptoticChart chart = hs::build_chart(surf, anchor, extent, chart_n);
  const hs::ChartView view(chart);

  // Transversal-anchor region inside the chart square.
  const double f = cfg_num(cfg, "region_frac", 0.7);
  const double rise = cfg_num(cfg, "transversal_slope", 0.2);
  if (f <= 0 || f >= 1 || rise <= 0)
    throw hs::ValidationError("region_frac must be in (0,1), slope positive");
  const double x1lo = -f * extent, x1hi = f * extent;
  hs::PlanarCurve gamma = hs::PlanarCurve::from_callable(
      [](double t) { return hs::Vec2(t, -t); },
      [](double) { return hs::Vec2(1, -1); }, x1lo, x1hi,
      hs::CurveClass::EType);
  const double smax = 0.9 * (x1hi - x1lo);
  hs::PlanarCurve beta = hs::PlanarCurve::from_callable(
      [x1lo, rise](double s) { return hs::Vec2(x1lo + s, -x1lo + rise * s); },
      [rise](double) { return hs::Vec2(1, rise); }, 0, smax,
      hs::CurveClass::PType);
  const hs::PlanarRegion region = hs::make_region_XiMinus(beta, gamma);

  hs::SolveOptions sopt;
  sopt.n_long_side = grid;
  sopt.tol = cfg_num(cfg, "solver_tol", 1e-10);
  sopt.mode = hs::ExecMode::parallel;

  const Manufactured m = builtin_field();
  const bool manufactured = data == "manufactured";
  hs::StrainTensorField U = manufactured
                                ? manufactured_strain(chart, m)
                                : hs::StrainTensorField::zero(chart);
  std::function<double(double)> q1, phi1, phi2;
  if (manufactured) {
    const hs::PlanarCurve bcopy = *region.curve;
    q1 = [bcopy, &m](double s) { return m.W1(bcopy.at(s)) * bcopy.v1(s); };
    phi1 = [&chart, &m](double t) {
      const hs::Vec2 x(t, -t);
      const hs::Mat2 g = chart.metric_of(x);
      const double det = g.determinant();
      return (g(1, 1) * m.W1(x) - g(0, 1) * m.W2(x)) / det;
    };
    phi2 = [&chart, &m](double t) {
      const hs::Vec2 x(t, -t);
      const hs::Mat2 g = chart.metric_of(x);
      const double det = g.determinant();
      return (-g(0, 1) * m.W1(x) + g(0, 0) * m.W2(x)) / det;
    };
  } else {
    q1 = [](double) { return 0.0; };
    phi1 = [](double) { return 0.0; };
    phi2 = [](double) { return 0.0; };
  }

  std::vector<std::vector<double>> error_rows;
  hs::ShellDisplacementSurface sol;
  const int coarse = (grid + 1) / 2;
  for (int n : {coarse, grid}) {
    hs::SolveOptions so = sopt;
    so.n_long_side = n;
    sol = hs::solve_strain_local(view, region, U, q1, phi1, phi2, {}, so);
    if (manufactured) {
      const StrainErrors e = compare_displacement(sol, m);
      error_rows.push_back({static_cast<double>(n), e.e_w1, e.e_w2, e.e_w,
                            e.scale});
    } else {
      double mx = 0;
      for (size_t k = 0; k < sol.W1.size(); ++k)
        if (sol.mask.empty() || sol.mask[k])
          mx = std::max({mx, std::abs(sol.W1[k]), std::abs(sol.W2[k]),
                         std::abs(sol.w[k])});
      error_rows.push_back({static_cast<double>(n), mx, mx, mx, 1.0});
    }
  }
  hs::io::write_csv(out_path(opt, "strain_error.csv"),
                    {"grid", "err_w1", "err_w2", "err_w", "field_scale"},
                    error_rows);
  hs::io::write_grid_binary(out_path(opt, "disp_w1.bin"), sol.spec, sol.W1,
                            "W1");
  hs::io::write_grid_binary(out_path(opt, "disp_w2.bin"), sol.spec, sol.W2,
                            "W2");
  hs::io::write_grid_binary(out_path(opt, "disp_w.bin"), sol.spec, sol.w, "w");

  const auto& last = error_rows.back();
  const double worst = std::max({last[1], last[2], last[3]});
  json rep;
  rep["surface"] = surface;
  rep["data"] = data;
  rep["grid"] = grid;
  rep["tol"] = tol;
  rep["max_error"] = worst;
  rep["pass"] = worst <= tol;
  hs::io::write_json_file(out_path(opt, "strain_summary.json"), rep);
  std::cout << "strain solve on " << surface << ": max error "
            << hs::io::fmt(worst) << " (tol " << hs::io::fmt(tol) << ")\n";
  if (worst > tol)
    throw hs::SolveError("reconstruction error above the configured tolerance");
  return 0;
}

int cmd_korn_scale(const Options& opt) {
  const json cfg = load_config(opt, true);
  const std::string mode = cfg_str(cfg, "mode", "surface");
  uint64_t seed = opt.seed_set ? opt.seed
                               : static_cast<uint64_t>(
                                     cfg_num(cfg, "seed", 0xC0FFEE));
  if (!cfg.contains("h_list"))
    throw hs::ValidationError("config needs h_list");
  const auto h_list = cfg.at("h_list").get<std::vector<double>>();

  std::vector<hs::QuotientRecord> records;
  if (mode == "synthetic") {
    const double pre = cfg_num(cfg, "prefactor", 1.0);
    const double expo = cfg_num(cfg, "exponent", -4.0 / 3.0);
    const double noise = cfg_num(cfg, "noise", 0.0);
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < h_list.size(); ++i) {
      hs::QuotientRecord r;
      r.h = h_list[i];
      r.quotient = pre * std::pow(r.h, expo);
      if (noise > 0) r.quotient *= 1.0 + noise * unit_uniform(rng);
      r.basis_dim = 100 * static_cast<int>(i + 1);
      r.saturated = true;
      records.push_back(r);
    }
  } else if (mode == "surface") {
    const std::string surface = cfg_str(cfg, "surface", "monkey_saddle");
    const hs::SurfaceChart surf = hs::surface_by_name(surface);
    std::vector<double> center = {1.1, 0.0};
    double angle_deg = 45.0, half1 = 0.42, half2 = 0.42;
    if (cfg.contains("patch")) {
      const json& p = cfg.at("patch");
      if (p.contains("center")) center = p.at("center").get<std::vector<double>>();
      angle_deg = cfg_num(p, "angle_deg", angle_deg);
      half1 = cfg_num(p, "half1", half1);
      half2 = cfg_num(p, "half2", half2);
    }
    if (center.size() != 2)
      throw hs::ValidationError("patch center needs two numbers");
    const hs::SurfaceChart patch =
        hs::rotated_patch(surf, hs::Vec2(center[0], center[1]),
                          angle_deg * M_PI / 180.0, half1, half2);
    hs::ShellModel model;
    model.surface = &patch;
    model.u1a = -half1;
    model.u1b = half1;
    model.u2a = -half2;
    model.u2b = half2;
    records = hs::korn_scaling_experiment(model, h_list, seed);
  } else {
    throw hs::ValidationError("mode must be 'surface' or 'synthetic'");
  }

  hs::io::write_quotient_csv(out_path(opt, "korn_records.csv"), records);
  const hs::LineFit fit = hs::fit_scaling(records);
  hs::io::write_json_file(out_path(opt, "korn_summary.json"),
                          hs::io::quotient_summary(records, &fit));
  std::cout << "korn scaling: slope " << hs::io::fmt(fit.slope) << " +- "
            << hs::io::fmt(fit.slope_stderr) << " over " << records.size()
            << " thicknesses\n";
  return 0;
}

int cmd_appendix_verify(const Options& opt) {
  const json cfg = load_config(opt, false);
  (void)cfg;
  using namespace hs::principal;
  bool ok = true;
  json rep;

  // Closed-form branches against the numeric eigen route.
  const hs::SurfaceChart saddle = hs::make_monkey_saddle();
  double worst = 0;
  const int n = 21;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const hs::Vec2 x(-2.0 + 4.0 * i / (n - 1), -2.0 + 4.0 * j / (n - 1));
      if (x.norm() < 0.05) continue;
      const PrincipalPair p = principal_curvatures(x);
      const hs::Vec2 ev = [&] {
        const hs::Mat2 g = saddle.metric(x);
        const hs::Mat2 pi = saddle.second_form(x);
        Eigen::SelfAdjointEigenSolver<hs::Mat2> gs(g);
        const hs::Mat2 gih = gs.operatorInverseSqrt();
        Eigen::SelfAdjointEigenSolver<hs::Mat2> es(gih * pi * gih);
        return hs::Vec2(es.eigenvalues());
      }();
      const double scale = std::max({1.0, std::abs(p.lambda1), std::abs(p.lambda2)});
      worst = std::max(worst, std::abs(p.lambda1 - ev[1]) / scale);
      worst = std::max(worst, std::abs(p.lambda2 - ev[0]) / scale);
    }
  rep["curvature_formula_vs_rootsolve"] = worst;
  ok = ok && worst <= 1e-10;

  const ObstructionReport rob = principal_obstruction_report(-1.0, 1.0);
  const double target = rob.x2eta_closed_form;  // -1.375 at x1 = -1
  rep["x2eta_above"] = rob.x2eta_above.value;
  rep["x2eta_below"] = rob.x2eta_below.value;
  rep["x2eta_closed_form"] = target;
  ok = ok && std::abs(rob.x2eta_above.value - target) <= 1e-3;
  ok = ok && std::abs(rob.x2eta_below.value - target) <= 1e-3;

  rep["eta_outflow_above"] = rob.eta_above.value;
  rep["eta_outflow_below"] = rob.eta_below.value;
  ok = ok && std::abs(rob.eta_above.value) <= 1e-3;
  ok = ok && std::abs(rob.eta_below.value) <= 1e-3;

  const double z1mag = 1.0 / std::sqrt(10.0);
  rep["zeta1_above"] = rob.zeta1_above.value;
  rep["zeta1_below"] = rob.zeta1_below.value;
  rep["zeta1_jump"] = rob.zeta1_jump;
  ok = ok && std::abs(std::abs(rob.zeta1_above.value) - z1mag) <= 1e-3;
  ok = ok && std::abs(std::abs(rob.zeta1_below.value) - z1mag) <= 1e-3;
  ok = ok && rob.zeta1_above.value * rob.zeta1_below.value < 0;
  ok = ok && std::abs(rob.zeta1_jump - 2 * z1mag) <= 2e-3;

  const PrincipalField field =
      sample_principal_field({-2, -2}, {2, 2}, 41, 41);
  rep["max_eigen_residual"] = field.max_eigen_residual;
  ok = ok && field.max_eigen_residual <= 1e-8;

  rep["pass"] = ok;
  hs::io::write_json_file(out_path(opt, "appendix_report.json"), rep);
  std::cout << "appendix checks: formula-vs-rootsolve "
            << hs::io::fmt(worst) << ", x2*eta " << hs::io::fmt(rob.x2eta_above.value)
            << " / " << hs::io::fmt(rob.x2eta_below.value) << " (target "
            << hs::io::fmt(target) << "), zeta1 jump "
            << hs::io::fmt(rob.zeta1_jump) << "\n";
  return ok ? 0 : kExitAppendix;
}

int cmd_region_selftest(const Options& opt) {
  const json cfg = load_config(opt, false);
  const int grid = opt.grid > 0 ? opt.grid : cfg_int(cfg, "grid", 129);
  const double tol = opt.tol > 0 ? opt.tol : cfg_num(cfg, "tol", 1e-4);

  hs::CharSystem sys = hs::CharSystem::zero();
  sys.a11 = [](hs::Vec2) { return 1.0; };
  hs::BoundaryData bc;
  bc.f1_in = [](hs::Vec2) { return 1.0; };
  bc.f2_in = [](hs::Vec2) { return 0.0; };
  const hs::PlanarRegion box = hs::make_region_R({0, 0}, 1, 1);

  std::vector<double> dx, err;
  json runs = json::array();
  for (int n : {33, 65, grid}) {
    hs::SolveOptions so;
    so.n_long_side = n;
    so.mode = hs::ExecMode::parallel;
    const hs::CharSolution sol = hs::solve_region(sys, box, bc, so);
    double e = 0;
    for (int j = 0; j < sol.grid.spec.n2; ++j)
      for (int i = 0; i < sol.grid.spec.n1; ++i) {
        const int k = sol.grid.spec.idx(i, j);
        if (!sol.grid.mask[k]) continue;
        e = std::max(e, std::abs(sol.f1[k] - std::exp(sol.grid.spec.x1(i))));
      }
    dx.push_back(std::log(1.0 / (n - 1)));
    err.push_back(std::log(e));
    runs.push_back({{"grid", n}, {"max_error", e}});
  }
  const hs::LineFit fit = hs::fit_line(dx, err);
  const double final_err = std::exp(err.back());

  // Contraction probe on a small box: geometric residual decay.
  hs::SolveOptions so;
  so.n_long_side = 65;
  const hs::PieceProblem pp = hs::assemble_piece(
      sys, hs::make_region_R({0, 0}, 0.3, 0.3), bc.f1_in, bc.f2_in, 0.3 / 64);
  const hs::PieceResult pr = hs::solve_piece(pp, so);
  double worst_ratio = 0;
  for (size_t k = so.burn_in + 1; k < pr.history.size(); ++k)
    if (pr.history[k - 1] > 0)
      worst_ratio = std::max(worst_ratio, pr.history[k] / pr.history[k - 1]);

  const bool pass = final_err <= tol && fit.slope >= 1.5 && pr.converged &&
                    worst_ratio < 0.9;
  json rep;
  rep["runs"] = runs;
  rep["order"] = fit.slope;
  rep["final_error"] = final_err;
  rep["contraction_ratio"] = worst_ratio;
  rep["pass"] = pass;
  hs::io::write_json_file(out_path(opt, "region_selftest.json"), rep);
  std::cout << "characteristic solver selftest: error "
            << hs::io::fmt(final_err) << ", order " << hs::io::fmt(fit.slope)
            << ", contraction ratio " << hs::io::fmt(worst_ratio) << "\n";
  if (!pass) throw hs::SolveError("characteristic solver selftest failed");
  return 0;
}

int dispatch(const Options& opt) {
  try {
    if (opt.command == "surface-info") return cmd_surface_info(opt);
    if (opt.command == "solve-strain") return cmd_solve_strain(opt);
    if (opt.command == "korn-scale") return cmd_korn_scale(opt);
    if (opt.command == "appendix-verify") return cmd_appendix_verify(opt);
    if (opt.command == "region-selftest") return cmd_region_selftest(opt);
    std::cerr << "unknown command\n";
    return kExitConfig;
  } catch (const hs::NotHyperbolicError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotHyperbolic;
  } catch (const hs::CharacteristicDirectionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotHyperbolic;
  } catch (const hs::SaturationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSaturation;
  } catch (const hs::FoldError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const hs::ContractionFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const hs::SolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const hs::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const hs::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hs::DegenerateConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic shell toolkit"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"surface-info", "curvature and hyperbolicity report for a surface"},
      {"solve-strain", "solve the strain system on an asymptotic chart"},
      {"korn-scale", "thickness scaling of the gradient/symmetric-gradient quotient"},
      {"appendix-verify", "principal-frame obstruction checks on the monkey saddle"},
      {"region-selftest", "characteristic solver oracle and contraction checks"}};
  for (const auto& [name, desc] : cmds) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->add_option("--config", opt.config_path, "JSON config file");
    sc->add_option("--out", opt.out_dir, "output directory");
    sc->add_option("--grid", opt.grid, "grid override");
    sc->add_option("--tol", opt.tol, "tolerance override");
    sc->add_option("--seed", opt.seed, "random seed override")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    sc->callback([&opt, name = name]() { opt.command = name; });
  }
  CLI11_PARSE(app, argc, argv);
  return dispatch(opt);
}
