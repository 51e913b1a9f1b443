#pragma once

#include <functional>
#include <vector>

#include "hypershell/parallel.hpp"
#include "hypershell/regions.hpp"
#include "hypershell/types.hpp"

namespace hypershell {

// First-order hyperbolic system in characteristic coordinates:
//   d f1 / d x1 = a11 f1 + a12 f2 + p1
//   d f2 / d x2 = a21 f1 + a22 f2 + p2
// integrated from the inflow boundary (f1 rightward, f2 upward).
struct CharSystem {
  std::function<double(Vec2)> a11, a12, a21, a22, p1, p2;
  static CharSystem zero();
};

// Inflow data as point functions: f1_in is evaluated on the left inflow
// boundary, f2_in on the bottom inflow boundary of the region it is used for.
struct BoundaryData {
  std::function<double(Vec2)> f1_in;
  std::function<double(Vec2)> f2_in;
};

struct SolveOptions {
  int n_long_side = 129;     // nodes along the long side of the outer box
  double tol = 1e-10;        // relative to 1 + data norm
  int max_iters = 200;
  int max_depth = 8;         // auto-subdivision recursion limit
  double contraction_guard = 0.9;
  int burn_in = 3;           // iterations before the ratio test engages
  ExecMode mode = ExecMode::serial;
};

// One primitive solve unit: grid, node-sampled coefficients, inflow values.
struct PieceProblem {
  RegionGrid grid;
  std::vector<double> A11, A12, A21, A22, P1, P2;
  std::vector<double> bc_row;  // f1 at the row inflow point, NaN if empty
  std::vector<double> bc_col;  // f2 at the column inflow point
  std::vector<double> row_h0;  // gap from the inflow point to the first node
  std::vector<double> col_h0;
  std::vector<int> row_last;   // last masked node per row/column
  std::vector<int> col_last;
  double data_norm = 0;        // max inflow/source magnitude
};

PieceProblem assemble_piece(const CharSystem& sys, const PlanarRegion& region,
                            const std::function<double(Vec2)>& f1_in,
                            const std::function<double(Vec2)>& f2_in,
                            double dx_target);

// One Picard update (Jacobi form): integrate the current iterate's right-hand
// side along rows into g1 and along columns into g2. Trapezoid rule with a
// short leading interval from the inflow point to the first masked node.
// Rows/columns are independent, so the parallel mode is bit-identical to the
// serial one.
void picard_sweep(const PieceProblem& pp, const std::vector<double>& f1,
                  const std::vector<double>& f2, std::vector<double>& g1,
                  std::vector<double>& g2, ExecMode mode);

struct PieceResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0;          // L2 norm of the last Picard increment
  std::vector<double> history;  // residual per iteration
  std::vector<double> f1, f2;
};

// Iterates from f = 0 (or the optional initial guess) until the L2 increment
// drops below tol * (1 + data norm), the ratio test flags stalling, or the
// iteration budget runs out.
PieceResult solve_piece(const PieceProblem& pp, const SolveOptions& opt,
                        const std::vector<double>* f1_init = nullptr,
                        const std::vector<double>* f2_init = nullptr);

struct PieceReport {
  RegionKind kind;
  Vec2 z;  // lower corner of the piece's bounding box
  int depth = 0;
  int iterations = 0;
  double residual = 0;
};

// One converged constituent solve on its own grid. Kept alongside the
// stitched fields because the per-piece solutions are smooth up to their
// boundaries, which the stitched grid cannot guarantee across seams.
struct SolvedPiece {
  PlanarRegion region;
  RegionGrid grid;
  std::vector<double> f1, f2;
};

struct CharSolution {
  RegionGrid grid;  // outer region grid holding the assembled fields
  std::vector<double> f1, f2;
  std::vector<PieceReport> pieces;
  std::vector<SolvedPiece> piece_fields;  // in solve (stitch-claim) order
  double residual = 0;
  int total_iterations = 0;

  double eval_f1(Vec2 x) const;
  double eval_f2(Vec2 x) const;
};

// Solve over a primitive or composite region. Composites are solved
// constituent by constituent in dependency order; any piece whose Picard
// iteration stalls is subdivided (staircase for E, halving for R, strip
// splits for P-/P+) until it contracts or max_depth is exceeded.
CharSolution solve_region(const CharSystem& sys, const PlanarRegion& region,
                          const BoundaryData& bc, const SolveOptions& opt);

// Sampled restriction of a solution to a line or curve, with trapezoid L2
// norms. Samples falling outside the solved region are dropped; an entirely
// outside locus is an error.
struct Trace {
  std::vector<double> s;       // locus parameter at the kept samples
  std::vector<Vec2> points;
  std::vector<double> f1, f2;
  double l2_f1 = 0, l2_f2 = 0;
};

Trace extract_trace_vertical(const CharSolution& sol, double x1, int n = 129);
Trace extract_trace_horizontal(const CharSolution& sol, double x2, int n = 129);
Trace extract_trace_curve(const CharSolution& sol,
                          const std::function<Vec2(double)>& pos, double t0,
                          double t1, int n = 129);

}  // namespace hypershell
