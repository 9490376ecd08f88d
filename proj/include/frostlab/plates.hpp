#pragma once

// k-plates, tube nets in the plane, the greedy heavy-plate structure and a
// finite-depth radial pruning.
//
// Measures live on [0,1)^d; plates are clipped to the ball B(c, sqrt(d)/2)
// around the cube center c, which contains the whole cube.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frostlab/dyadic.hpp"
#include "frostlab/maps.hpp"

namespace frostlab {

struct Plate {
  KPlane plane;               // directions
  std::vector<double> base;   // a point of the affine plane
  double width = 0.0;         // points at distance < width belong to the plate

  int d() const { return plane.d; }
  int k() const { return plane.k(); }
  double distance(const double* x) const;  // to the affine plane
  bool contains(const double* x) const;    // plate and clip ball
};

// Validates width > 0 and base inside the clip ball.
Plate MakePlate(KPlane plane, std::vector<double> base, double width);
std::vector<double> CubeCenter(int d);
double ClipRadius(int d);

// Mass of the cells whose centers lie in the plate.
double PlateMass(const DyadicMeasure& nu, const Plate& p);

// Tube-in-tube test (k = 1): every point of W within the clip ball lies
// within T's width of T's axis. Certified through the two ends of W's axis,
// extended by W's width.
bool TubeContains(const Plate& T, const Plate& W);

// Largest principal angle between the axes of two tubes, in [0, pi/2].
double TubeAngle(const Plate& a, const Plate& b);

// Net of planar delta-tubes: axis angles phi_a = a pi / dirs with dirs =
// ceil(2 pi / delta), offsets o_j = -R + j delta / 2 along the normal
// (-sin phi, cos phi) from the cube center. Tube (a, j) holds the points with
// o_j - delta <= <n_a, x - c> < o_j + delta.
struct TubeNet {
  double delta = 0.0;
  int dirs = 0;
  int offsets = 0;
  double R = 0.0;
  std::vector<double> cos_a, sin_a;  // of each axis angle

  double angle(int a) const;
  double offset(int j) const;
  // Half-open bin of width delta/2 along n_a; tube (a, j) is bins j-2..j+1.
  long bin(int a, const double* x) const;
  bool in_tube(int a, int j, const double* x) const;
  Plate tube(int a, int j) const;
};

TubeNet MakeTubeNet(double delta);

struct NetTube {
  int a = 0, j = 0;
  double mass = 0.0;
};

// Every net tube with mass >= threshold, ordered by decreasing mass, then
// (a, j). Parallel over directions.
std::vector<NetTube> HeavyNetTubes(const DyadicMeasure& nu, const TubeNet& net,
                                   double threshold);

struct BallDecay {
  std::vector<double> r;
  std::vector<double> sup_net;    // closed balls around grid points of step r/2
  std::vector<double> sup_upper;  // radius 2r, bounds every r-ball
  double exponent = 0.0;          // least-squares slope of log sup_net vs log r
};

// d = 2, depth <= 11.
BallDecay BallNonconcentration(const DyadicMeasure& mu, std::span<const double> r_list);

struct GreedyStep {
  int m = 0;            // family size after the step
  double S = 0.0;       // sum of nu(Y_i)
  double sum_sq = 0.0;  // int f^2 = sum_{i,j} nu(Y_i cap Y_j)
  bool ok = false;      // S^2 <= nu(R^d) int f^2 < nu(R^d) (S + m^2 delta^{2 eta} / 2)
};

struct HeavyStructure {
  double delta = 0.0, eta = 0.0, kappa = 0.0;
  double C_nu = 0.0;       // supplied decay constant
  double C_eff = 0.0;      // max(C_nu, certified sup over all delta-balls / delta^kappa)
  double threshold = 0.0;  // delta^eta
  double overlap = 0.0;    // delta^{2 eta} / 2
  double sin_bound = 1.0;  // bound on sin angle(W, Y_j) forced by a heavy overlap
  double t_width = 0.0;    // 3 delta + (2R + 2 delta) sin_bound
  double m_bound = 0.0;    // 2 delta^{-eta}
  std::vector<NetTube> Y;
  std::vector<Plate> T;
  std::vector<GreedyStep> steps;
  std::size_t heavy_candidates = 0;
  std::size_t uncontained = 0;  // heavy net tubes outside every T_j
  bool steps_ok = true;

  int M() const { return static_cast<int>(Y.size()); }
  bool contained() const { return uncontained == 0; }
  bool ok() const { return steps_ok && contained() && M() <= m_bound; }
};

// d = 2, k = 1. kNuDecayFailed if some net delta-ball exceeds C_nu delta^kappa.
// nu need not be normalized (restrictions keep their mass).
HeavyStructure HeavyPlateStructure(const DyadicMeasure& nu, double delta, double eta,
                                   double kappa, double C_nu);

struct RadialOptions {
  double kappa = 0.5;    // decay exponent used for the nu hypothesis at each stage
  int max_centers = 16;  // sampled x in L for the decay report
};

struct RadialStage {
  int n = 0;
  double delta = 0.0;
  double C_nu = 0.0;        // measured sup_delta nu(B) / delta^kappa on nu|K_n
  int M = 0;
  bool structure_ok = false;
  double mu_E = 0.0;        // mu(E_n)
  double bad = 0.0;         // mu(E_n cap bad)
  double badbad = 0.0;
  bool pruned = false;
  std::optional<Plate> P;
  double nu_loss = 0.0;     // nu(K_n cap P)
  double mu_next = 0.0;     // mu(E_{n+1})
};

struct RadialReport {
  std::vector<RadialStage> stages;
  DyadicSet L;
  DyadicSet K;
  double mu_L = 0.0;
  double nu_K = 0.0;
  double loss_sum = 0.0;
  double mu_exponent = 0.0;  // ball decay fit of mu
  double nu_exponent = 0.0;
  bool budget_ok = false;    // nu(K) >= 1/2
  bool concentration = false;
  bool degenerate = false;
  std::vector<double> r;     // dyadic radii in [delta_N^{1/2}, delta_1]
  std::vector<std::vector<double>> sup;  // per sampled center, per r
  std::vector<double> fitted;            // per sampled center
  std::vector<std::string> flags;
};

// delta_n = delta0^{2^n}, n = 1..depth; needs delta_depth >= 2^{-m} of nu.
RadialReport RadialPrune(const DyadicMeasure& mu, const DyadicMeasure& nu, double delta0,
                         double eta, int depth, RadialOptions opt = {});

}  // namespace frostlab
