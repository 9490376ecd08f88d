#pragma once

// Shannon entropy of dyadic partitions, robust entropy, robustness, and the
// multiscale lower bounds for entropies of smooth images. Bits throughout.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "frostlab/dyadic.hpp"
#include "frostlab/maps.hpp"
#include "frostlab/multiscale.hpp"

namespace frostlab {

// -sum p log2 p over the positive entries (not renormalized).
double EntropyOfMasses(std::span<const double> p);

double Entropy(const DyadicMeasure& mu, int j);
double Entropy(const ExactMeasure& mu, int j);

// H(mu, D_fine | D_coarse) as H_fine - H_coarse.
double ConditionalEntropy(const DyadicMeasure& mu, int fine, int coarse);
// Same, as sum over coarse cubes G of mu(G) H(mu_G, D_fine).
double ConditionalEntropyDirect(const DyadicMeasure& mu, int fine, int coarse);

template <class M>
struct RobustFill {
  std::vector<M> nu;  // same order as the input masses
  double bits = 0.0;
};

// min H(nu) over nu <= Delta p, sum nu = 1. Greedy capacity fill in
// decreasing mass order; p must sum to 1.
template <class M>
RobustFill<M> RobustEntropyOfMasses(std::span<const M> p, const M& delta);
// Exhaustive over the vertices of the capacity polytope; at most 12 entries.
template <class M>
RobustFill<M> RobustEntropyOracle(std::span<const M> p, const M& delta);

double RobustEntropy(const DyadicMeasure& mu, int j, double delta);
double RobustEntropy(const ExactMeasure& mu, int j, const Rational& delta);
double RobustEntropyOracle(const ExactMeasure& mu, int j, const Rational& delta);

// Smallest number of level-m cells carrying mass >= 2^{-delta m}.
template <class M>
std::size_t MinCellsForMass(const BasicMeasure<M>& mu, double delta, int m);
// Same by enumerating all subsets (support <= 20 cells).
template <class M>
std::size_t MinCellsForMassBrute(const BasicMeasure<M>& mu, double delta, int m);

// (alpha, delta, m)-robustness.
template <class M>
bool RobustCheck(const BasicMeasure<M>& mu, double alpha, double delta, int m);
template <class M>
bool RobustCheckBrute(const BasicMeasure<M>& mu, double alpha, double delta, int m);

struct RobustEntropyReport {
  double delta_cap = 0.0;  // 2^{delta m / 2}
  double lhs = 0.0;        // robust entropy at level m
  double rhs = 0.0;        // (alpha - eps) m
  bool holds = false;
};

// kPreconditionFailed unless mu is (alpha, delta, m)-robust.
RobustEntropyReport RobustToEntropyCheck(const DyadicMeasure& mu, double alpha,
                                         double delta, int m, double eps);

// Level intervals [A_i, B_i) of the entropy bounds.
using LevelIntervals = std::vector<std::pair<int, int>>;
// [T A_j, T B_j) for each scale.
LevelIntervals LevelsOf(const ScaleDecomposition& dec);

// Image F mu binned into level-j cells of R^k by image of cell centers.
std::vector<double> PushforwardMasses(const DyadicMeasure& mu, const SmoothMap& F,
                                      int j);
double ImageEntropy(const DyadicMeasure& mu, const SmoothMap& F, int j);

struct EntropyBound {
  double lhs = 0.0;        // H(F mu, D_m)
  double rhs = 0.0;        // sum of weighted linearized conditional entropies
  double rhs_joint = 0.0;  // same sum via joint minus coarse entropy
  double deficit = 0.0;    // rhs - lhs
  std::vector<double> terms;  // per interval
  int q = 0;
};

EntropyBound MultiscaleEntropyBound(const DyadicMeasure& mu, const SmoothMap& F,
                                    const LevelIntervals& iv);

// nu <= Delta mu cellwise (kNotDominated otherwise); the inner entropies are
// (m Delta)-robust entropies of the projected conditionals of mu.
EntropyBound RobustMultiscaleBound(const DyadicMeasure& nu, const DyadicMeasure& mu,
                                   double delta, const SmoothMap& F,
                                   const LevelIntervals& iv);

// |H(F mu_Q, D_B) - H(P_{V(x)} mu_Q, D_B)| with B = target_level <= 2 level(Q).
double LinearizationDefect(const DyadicMeasure& mu, const SmoothMap& F,
                           const CubeIndex& q, std::span<const double> x,
                           int target_level);

}  // namespace frostlab
