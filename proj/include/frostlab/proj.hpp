#pragma once

// Projections of dyadic measures, Riesz energies, the projection-theorem
// inequalities, sphere measures and plate geometry.

#include <cstddef>
#include <span>
#include <vector>

#include "frostlab/dyadic.hpp"
#include "frostlab/maps.hpp"

namespace frostlab {

// Finite weighted sample on S^{d-1}.
struct SphereMeasure {
  int d = 2;
  std::vector<double> points;   // n x d, unit rows
  std::vector<double> weights;  // sums to 1

  std::size_t size() const { return weights.size(); }
  const double* point(std::size_t i) const { return points.data() + i * d; }
};

// Checks unit norms (1e-9) and non-negative weights; weights are normalized.
SphereMeasure MakeSphereMeasure(int d, std::vector<double> points,
                                std::vector<double> weights);
SphereMeasure UniformCircle(int n);
// Fibonacci lattice on S^2.
SphereMeasure FibonacciSphere(int n);
// Uniform on the great circle {x_3 = 0} of S^2.
SphereMeasure Equator(int n);
SphereMeasure SphereAtom(std::vector<double> theta);

// Pushforward by cell centers. The image box [-sqrt d, sqrt d)^k is mapped
// affinely onto [0,1)^k and binned at out_level.
DyadicMeasure Project(const DyadicMeasure& mu, const KPlane& V, int out_level);
DyadicMeasure Project(const DyadicMeasure& mu, std::span<const double> theta,
                      int out_level);

struct Energy {
  double total = 0.0;
  double self = 0.0;  // diagonal pairs, each |x-x| floored
  double off = 0.0;
  int level = 0;            // resolution the sum was taken at
  bool approximate = false; // coarsened to fit exact_limit
};

// sum over pairs of max(|x-y|, floor)^{-sigma} w_x w_y.
Energy PointEnergy(std::span<const double> pts, std::span<const double> w, int k,
                   double sigma, double floor);
// Cell centers with floor 2^{-m}. Above exact_limit cells the measure is
// coarsened to the deepest level that fits, and the floor follows the level.
Energy EnergyOf(const DyadicMeasure& mu, double sigma,
                std::size_t exact_limit = 20000);

struct DecayFit {
  std::vector<double> r;
  std::vector<double> sup_net;    // max slab mass over the normal net
  std::vector<double> sup_upper;  // same at radius 2r, bounds the true sup
  double kappa = 0.0;             // least-squares slope of log sup_net vs log r
};

// sup over linear hyperplanes H of rho(H^{(r)}); normal nets at angular
// resolution r/4. d in {2, 3}.
DecayFit HyperplaneNonconcentration(const SphereMeasure& rho,
                                    std::span<const double> r_list);

struct KaufmanReport {
  double lhs = 0.0, rhs = 0.0;          // floored energies, diagonal included
  double lhs_off = 0.0, rhs_off = 0.0;  // diagonal excluded
  double factor = 0.0;                  // 1 + C sigma / (kappa - sigma)
  bool pass = false;
};

// kRhoDecayFailed if the net sup exceeds C r^kappa for some r = 2^{-k},
// k = 0..8.
KaufmanReport KaufmanCheck(const DyadicMeasure& mu, const SphereMeasure& rho,
                           double sigma, double kappa, double C, double tol = 1e-2);

// sum_i w_i || density of P_{theta_i} mu ||_2^2 with bins of width 2^{-m}.
double ProjectedL2(const DyadicMeasure& mu, const SphereMeasure& rho);

struct FalconerReport {
  std::vector<int> levels;
  std::vector<double> lhs, rhs, ratio;
  std::vector<int> energy_levels;  // where each rhs was summed, see EnergyOf
  bool non_increasing = false;
  bool exact = true;               // every rhs at its own level
};

// mu is coarsened to each level; rhs = E_{d-kappa} at that level, computed
// through EnergyOf with the given exact_limit.
FalconerReport FalconerCheck(const DyadicMeasure& mu, const SphereMeasure& rho,
                             double kappa, std::span<const int> levels,
                             std::size_t exact_limit = 20000);

// Exponent of the robust projections: k = 1 gives the rank-one table.
double GammaExponent(double alpha, double kappa, double delta, double eta, int d,
                     int k = 1);

struct LevelClass {
  int j = 0;  // cells with 2^{-j-1} < mu(Q) <= 2^{-j}
  double mass = 0.0;
  DyadicSet cells;
};

struct LevelSets {
  std::vector<LevelClass> classes;  // increasing j
  std::vector<int> J;               // classes with mass >= 2^{-2 delta m}
  double z_mass = 0.0;              // mass outside the J classes
  double z_bound = 0.0;             // 3 d m 2^{-2 delta m}
  bool z_ok = false;
};

LevelSets LevelSetDecomposition(const DyadicMeasure& mu, int m, double delta);

// Unit direction of the gradient with the canonical sign (rank-one maps).
std::vector<double> DirectionField(const SmoothMap& F, std::span<const double> x);

// |det(P_{W^perp}|_V)| for V of dim k and W of dim d - k.
double PlateDistance(const KPlane& V, const KPlane& W);
// |P_{V^perp} x|.
double DistToPlane(std::span<const double> x, const KPlane& V);

}  // namespace frostlab
