#pragma once

// Experiment harness: set generators, curve incidences, projection and pinned
// distance sweeps, and the regularize -> multiscale -> per-scale projection
// pipeline.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "frostlab/dyadic.hpp"

namespace frostlab {

using Json = nlohmann::json;
using Point2 = std::array<double, 2>;

// ---- generators ----

// Names: cantor_product, ifs_self_similar, train_track, grid, sphere_sample,
// random_tree, atom. Unknown names raise kUnknownGenerator. The result is a
// normalized measure; set-type generators put equal mass on every cell.
DyadicMeasure Generate(const std::string& name, const Json& params);
std::vector<std::string> GeneratorNames();

struct TrainTrack {
  int m = 0;
  double delta = 0.0;
  std::vector<double> X;     // column abscissae i 2^{-m/2}
  std::vector<Point2> E;     // X x {j delta : j < rows}
  std::vector<Point2> A;     // horizontal lines y = j delta, as (slope, intercept)
};

// m even. rows defaults to 2^{m/2}.
TrainTrack MakeTrainTrack(int m, int rows = 0);

// Lower-left corners of the cells of a planar set.
std::vector<Point2> CellCorners(const DyadicSet& s);

// ---- curve families ----

struct CurveFamily {
  std::string name;
  std::function<double(double x, const Point2& a)> G;
  std::function<Point2(double x, const Point2& a)> dGda;
  std::function<double(double x, const Point2& a)> dGdx;
};

// y = a0 x + a1.
CurveFamily LineFamily();
// y = a0 x^2 + a1 x.
CurveFamily ParabolaFamily();
// "lines" or "parabolas".
CurveFamily FamilyByName(const std::string& name);

struct FamilyBounds {
  double grad_min = 0.0;     // min |dG/da|
  double turn_min = 0.0;     // min |d/dx dir(dG/da)|
  double c2_norm = 0.0;      // max of |G| and its first and second partials
  double slope = 0.0;        // max |dG/dx|
  double c = 0.0;            // min(grad_min, turn_min, 1/c2_norm)
  std::size_t samples = 0;
};

// Sampled over x on an even grid of [x_lo, x_hi] and a in params; second
// partials by central differences.
FamilyBounds SampleBounds(const CurveFamily& fam, const std::vector<Point2>& params,
                          double x_lo = -1.0, double x_hi = 1.0, int x_samples = 65);

// ---- incidences ----

// min pairwise distance >= delta (1 - 1e-12).
bool IsSeparated(const std::vector<Point2>& pts, double delta);
bool IsSeparated(const std::vector<double>& xs, double delta);

struct IncidenceResult {
  std::uint64_t count = 0;
  std::size_t E = 0, A = 0, X = 0;  // X: distinct abscissae of E
  double delta = 0.0;
  double slope = 0.0;               // slope bound L over A and the columns
  double width = 0.0;               // vertical half width delta sqrt(1+L^2)
  std::uint64_t multiplicity = 0;   // max points of one column near one curve
  double ratio = 0.0;               // count / (|X||A|)
};

// Pairs (p, a) with |p_y - G_a(p_x)| / sqrt(1+L^2) < delta. E and A must be
// delta-separated (kPreconditionFailed otherwise).
IncidenceResult IncidenceCount(const std::vector<Point2>& E,
                               const std::vector<Point2>& A,
                               const CurveFamily& fam, double delta);

struct AuditReport {
  double delta = 0.0, kappa = 0.0, eps = 0.0;
  // |E| <= delta^{-eps} |X| |A|^{1/2}
  double size_lhs = 0.0, size_rhs = 0.0;
  bool size_ok = false;
  // |A cap B(a, delta |A|^{1/2})| <= delta^kappa |A| over centers a in A
  double a_radius = 0.0;
  std::size_t a_max = 0;
  double a_bound = 0.0;
  Point2 a_witness{0, 0};
  std::size_t a_centers = 0;
  std::size_t a_max_double = 0;  // same at twice the radius; covers off-A centers
  bool a_ok = false;
  // |X cap B(x, r)| <= delta^{-eps} r^kappa |X| for dyadic r in [delta, 1]
  struct XRow {
    double r = 0.0;
    std::size_t max = 0;
    double bound = 0.0;
    double witness = 0.0;
  };
  std::vector<XRow> x_rows;
  bool x_ok = false;
  bool ok() const { return size_ok && a_ok && x_ok; }
};

AuditReport NonconcentrationAudit(const std::vector<Point2>& E,
                                  const std::vector<Point2>& A,
                                  const std::vector<double>& X, double delta,
                                  double kappa, double eps,
                                  std::size_t max_centers = 4096);

// ---- sweeps ----

struct Quantiles {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};
Quantiles QuantilesOf(std::vector<double> v);

// n evenly spaced angles in [0, pi), or n seeded uniform angles.
std::vector<double> SweepAngles(std::size_t n, bool random, std::uint64_t seed);

// Number of 2^{-level} intervals of R meeting the projection of the union of
// cells onto the direction (cos t, sin t). Planar sets.
std::size_t ProjectionCount(const DyadicSet& X, double theta, int level);
// Same for {|x - y| : x in X}.
std::size_t DistanceCount(const DyadicSet& X, const Point2& y, int level);

struct SweepRow {
  double theta = 0.0;
  std::size_t count = 0;
  double exponent = 0.0;  // log2 count / level
  double slope = 0.0;     // log2(count / count at level-2) / 2
};

struct Sweep {
  int level = 0;
  std::vector<SweepRow> rows;
  Quantiles exponent, slope;
  std::string csv() const;
};

// Rows come back in input order; parallel over angles.
Sweep ProjectionGainSweep(const DyadicSet& X, const std::vector<double>& angles,
                          int level);

struct PinRow {
  Point2 pin{0, 0};
  bool in_support = false;  // pin lies in a cell of X
  std::size_t count = 0;
  double exponent = 0.0;
};

struct PinSweep {
  int level = 0;
  std::vector<PinRow> rows;
  Quantiles exponent;
  std::string csv() const;
};

PinSweep PinnedDistanceExperiment(const DyadicSet& X, const std::vector<Point2>& pins,
                                  int level);
// Seeded uniform pins in [lo, hi]^2.
std::vector<Point2> RandomPins(std::size_t n, std::uint64_t seed, double lo, double hi);

// ---- pipeline ----

struct PipelineScale {
  int piece = 0;
  int A = 0, B = 0, m = 0;
  double alpha = 0.0;
  double baseline = 0.0;       // alpha / d
  std::size_t cubes = 0, trials = 0, passes = 0;
  double median_exponent = 0.0;  // log2 (min cells for mass 2^{-delta m_j}) / m_j
  double pass_rate() const { return trials ? double(passes) / trials : 0.0; }
};

struct PipelineReport {
  std::string name;
  Json scenario;
  int d = 0, m = 0, T = 0, ell = 0;
  std::size_t support = 0;
  double log_count = 0.0;      // log2 N(X, m)
  bool degenerate = false;
  std::size_t pieces = 0;
  double union_mass = 0.0;
  std::vector<std::string> stages;  // "<stage>: <what happened>"
  std::vector<Json> decompositions;
  std::vector<PipelineScale> scales;
  double aggregate = 0.0;      // mass-weighted over pieces of sum m_j exp_j / m
  double baseline = 0.0;       // log N(X,m) / (d m)
  Json to_json() const;
  std::string scales_csv() const;
};

// Scenario keys: name, generator {name, params}, T, ell, eps_reg, u, eps,
// robust_delta, directions, seed, max_pieces, max_cubes, output (directory,
// optional). Stage errors are rethrown with the stage name prefixed.
PipelineReport PipelineRun(const Json& scenario);

}  // namespace frostlab
