// Timing comparison of the serial reference kernels against the OpenMP
// builds of the same loops. On single-core machines the two are expected to
// tie; the point of the binary is the apples-to-apples wall-clock table and
// a bitwise identity check of the results.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "hypershell/charsolve.hpp"
#include "hypershell/geometry.hpp"
#include "hypershell/korn.hpp"
#include "hypershell/parallel.hpp"

namespace hs = hypershell;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

void bench_picard() {
  hs::CharSystem sys = hs::CharSystem::zero();
  sys.a11 = [](hs::Vec2 x) { return std::cos(x[0] + x[1]); };
  sys.a12 = [](hs::Vec2 x) { return 0.3 * std::sin(x[0]); };
  sys.a21 = [](hs::Vec2 x) { return 0.2 * std::cos(x[1]); };
  sys.a22 = [](hs::Vec2 x) { return std::sin(x[0] - x[1]); };
  sys.p1 = [](hs::Vec2) { return 1.0; };
  sys.p2 = [](hs::Vec2) { return -0.5; };
  const hs::PlanarRegion box = hs::make_region_R({0, 0}, 1, 1);
  const hs::PieceProblem pp = hs::assemble_piece(
      sys, box, [](hs::Vec2) { return 1.0; }, [](hs::Vec2) { return 0.5; },
      1.0 / 512);
  const size_t n = pp.grid.spec.size();
  std::vector<double> f1(n, 0), f2(n, 0), g1(n), g2(n), h1(n), h2(n);

  const int reps = 20;
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r)
    hs::picard_sweep(pp, f1, f2, g1, g2, hs::ExecMode::serial);
  auto t1 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r)
    hs::picard_sweep(pp, f1, f2, h1, h2, hs::ExecMode::parallel);
  auto t2 = std::chrono::steady_clock::now();

  bool identical = true;
  for (size_t i = 0; i < n; ++i)
    identical = identical && g1[i] == h1[i] && g2[i] == h2[i];
  std::printf("picard_sweep  513x513 x%d   serial %8.3f s   parallel %8.3f s   bitwise %s\n",
              reps, seconds(t0, t1), seconds(t1, t2),
              identical ? "identical" : "DIFFERENT");
}

void bench_gram() {
  const hs::SurfaceChart saddle = hs::make_monkey_saddle();
  const hs::SurfaceChart patch =
      hs::rotated_patch(saddle, {1.1, 0.0}, M_PI / 4, 0.42, 0.42);
  hs::ShellModel model;
  model.surface = &patch;
  model.u1a = -0.42;
  model.u1b = 0.42;
  model.u2a = -0.42;
  model.u2b = 0.42;
  model.h = 0.1;

  auto t0 = std::chrono::steady_clock::now();
  const hs::KornForms fs =
      hs::assemble_korn_forms(model, 8, 3, false, hs::ExecMode::serial);
  auto t1 = std::chrono::steady_clock::now();
  const hs::KornForms fp =
      hs::assemble_korn_forms(model, 8, 3, false, hs::ExecMode::parallel);
  auto t2 = std::chrono::steady_clock::now();

  const bool identical = fs.A == fp.A && fs.B == fp.B && fs.M == fp.M &&
                         fs.Mw == fp.Mw;
  std::printf("gram assembly dim %-4d      serial %8.3f s   parallel %8.3f s   bitwise %s\n",
              fs.dim, seconds(t0, t1), seconds(t1, t2),
              identical ? "identical" : "DIFFERENT");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", hs::hardware_threads());
  bench_picard();
  bench_gram();
  return 0;
}
