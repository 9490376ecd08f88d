#pragma once

// Multiscale Frostman decompositions of regular measures, with a report that
// re-checks every conclusion against the measure itself.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "frostlab/liplib.hpp"
#include "frostlab/regular.hpp"

namespace frostlab {

struct ScaleInterval {
  int A = 0, B = 0;    // block indices, [A, B] inside [0, ell]
  double alpha = 0.0;  // d * slope of the branching function on [A, B]
  int length() const { return B - A; }
};

struct ScaleDecomposition {
  int d = 1, T = 1, ell = 1;
  bool ahlfors = false;
  std::vector<ScaleInterval> intervals;
  double eps = 0.0;
  double xi = 0.0;       // 0 for the two-sided variant
  double tau = 0.0;
  double s = 0.0, t = 0.0;
  double eps_lip = 0.0;  // level handed to the interval decomposition
  std::vector<std::string> warnings;

  int m() const { return T * ell; }
  int m(const ScaleInterval& iv) const { return T * iv.length(); }
};

struct VerifyOptions {
  // Per scale: at most this many cubes Q, and per cube this many centers.
  // 0 means all of them.
  std::size_t max_cubes = 256;
  std::size_t max_centers = 64;
};

struct ScaleCheck {
  int A = 0, B = 0;
  double alpha = 0.0;
  int m = 0;
  std::size_t cubes_total = 0, cubes_checked = 0, probes = 0;
  // Extremes over probes of (log2 mu^Q(B(x,r)) - alpha log2 r) / m_j.
  double max_excess = 0.0;
  double min_excess = 0.0;
};

struct NonConcentration {
  double radius = 0.0;    // |X|^{1/d}
  double max_mass = 0.0;  // largest ball mass seen
  double bound = 0.0;     // 2^{-um}
  std::size_t centers = 0;
  bool ok = false;
};

struct VerificationReport {
  bool two_sided = false;
  bool i_ok = true, ii_ok = true, iii_ok = true, iv_ok = true, gaps_ok = true;
  double eps = 0.0, tau = 0.0, xi = 0.0;
  double sum_alpha_m = 0.0, iii_target = 0.0;
  int iv_mass = 0;
  double iv_target = 0.0;
  int gap_blocks = 0;
  double gap_bound = 0.0;
  // Smallest eps for which (ii) holds on every probe.
  double eps_needed = 0.0;
  NonConcentration eq41;
  std::vector<ScaleCheck> scales;
  std::vector<std::string> failures;

  bool ok() const { return i_ok && ii_ok && iii_ok && iv_ok && gaps_ok; }
};

struct MultiscaleResult {
  ScaleDecomposition dec;
  VerificationReport report;
};

// f(j) = (sigma_1 + ... + sigma_j) / d on [0, ell], one grid step per block.
PLFunction BranchingFunction(std::span<const double> sigma, int d);
PLFunction BranchingFunction(const RegularPiece& piece);

// Wraps a normalized measure as a regular piece; kHypothesisFailed if it is
// not (sigma;T)-regular.
RegularPiece MakeRegularPiece(const DyadicMeasure& mu, std::vector<double> sigma,
                              int T);

// mu(B(x, |X|^{1/d})) <= 2^{-um} at cell centers (all of them up to
// max_centers, an even stride beyond that).
NonConcentration CheckNonConcentration(const DyadicMeasure& mu, double u,
                                       std::size_t max_centers = 1u << 16);

MultiscaleResult FrostmanMultiscale(const RegularPiece& piece, double u,
                                    double eps, VerifyOptions opt = {});

MultiscaleResult AhlforsMultiscale(const RegularPiece& piece, double eps,
                                   VerifyOptions opt = {});

// Direct check of the conclusions for a given decomposition.
VerificationReport VerifyScales(const RegularPiece& piece,
                                const ScaleDecomposition& dec,
                                VerifyOptions opt = {});

}  // namespace frostlab
