#pragma once

// Decompositions of 1-Lipschitz piecewise-linear functions into almost
// linear / superlinear pieces. All interval endpoints are grid indices.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frostlab/error.hpp"

namespace frostlab {

class PLFunction {
 public:
  PLFunction() = default;
  // values[k] = f(a + k(b-a)/G), G = values.size() - 1. Rejects steps larger
  // than the grid spacing (+1e-12).
  PLFunction(double a, double b, std::vector<double> values);

  template <class Fn>
  static PLFunction Sample(double a, double b, int G, Fn&& fn) {
    std::vector<double> v(G + 1);
    for (int k = 0; k <= G; ++k) v[k] = fn(a + (b - a) * k / G);
    return PLFunction(a, b, std::move(v));
  }

  double a() const { return a_; }
  double b() const { return b_; }
  int grid() const { return static_cast<int>(values_.size()) - 1; }
  double step() const { return (b_ - a_) / grid(); }
  double x(int k) const { return a_ + (b_ - a_) * k / grid(); }
  double at(int k) const { return values_[k]; }
  const std::vector<double>& values() const { return values_; }
  // Linear interpolation; x clamped to [a,b].
  double eval(double x) const;
  bool non_decreasing() const;

 private:
  double a_ = 0.0, b_ = 1.0;
  std::vector<double> values_{0.0, 0.0};
};

inline constexpr double kLipTol = 1e-12;

// s_f(a,b) on real endpoints.
double Slope(const PLFunction& f, double a, double b);
// Same on grid indices.
double SlopeIdx(const PLFunction& f, int lo, int hi);

struct Deviation {
  double above = 0.0;  // max of f - L
  double below = 0.0;  // max of L - f
};

// Extremes of f - L_{f,lo,hi} over the grid points of [lo,hi].
Deviation DeviationIdx(const PLFunction& f, int lo, int hi);

bool IsEpsLinearIdx(const PLFunction& f, int lo, int hi, double eps);
bool IsEpsSuperlinearIdx(const PLFunction& f, int lo, int hi, double eps);
// Real endpoints: tested at a, b and every grid point strictly between.
bool IsEpsLinear(const PLFunction& f, double a, double b, double eps);
bool IsEpsSuperlinear(const PLFunction& f, double a, double b, double eps);

struct Interval {
  int lo = 0;
  int hi = 0;
  double slope = 0.0;
  int length() const { return hi - lo; }
};

enum class DecompositionKind { kLinear, kSuperlinear };

struct IntervalDecomposition {
  DecompositionKind kind = DecompositionKind::kLinear;
  int lo = 0, hi = 0;      // the decomposed range
  double eps = 0.0;        // guarantee level of every piece
  double tau = 0.0;        // every piece has length >= tau * (hi - lo)
  int generations = 0;     // rounds of the covering recursion
  std::vector<Interval> intervals;  // sorted, interiors disjoint
  std::vector<std::string> warnings;

  int covered() const;
  int leftover() const { return (hi - lo) - covered(); }
};

struct LinearSubinterval {
  int lo = 0, hi = 0;
  int depth = 0;                 // recursion steps taken
  std::vector<double> slopes;    // sign-normalized slope at each step
};

// Recursion of the basic linear-piece lemma. Witness: smallest grid point
// maximizing |f - L|. Asserts the slope gain of at least eps per step.
LinearSubinterval FindLinearSubinterval(const PLFunction& f, int lo, int hi,
                                        double eps);

// Breadth-first covering by eps-linear pieces: every gap gets one
// FindLinearSubinterval per round until the gaps total <= (eps/2)L; then
// pieces shorter than tau L, tau = eps 2^{-(N+1)}, are dropped.
IntervalDecomposition CoverByLinear(const PLFunction& f, int lo, int hi,
                                    double eps);

// Covering over dyadic annuli [lo + ceil(h/2), lo + h] (h halving from the
// full length, rounded to `quantum`), so each piece satisfies
// d - c <= c - lo. Guarantees: 2 eps linear-leftover, tau as reported.
IntervalDecomposition CoverByLinearGraded(const PLFunction& f, int lo, int hi,
                                          double eps, int quantum = 1);

// eps-superlinear chain with slopes non-decreasing from left to right.
IntervalDecomposition SuperlinearChain(const PLFunction& f, int lo, int hi,
                                       double eps);

struct Block {
  int lo = 0, hi = 0;
  int cls = 0;  // 0 for I_0, else 1..4
  IntervalDecomposition dec;
};

struct SuperlinearResult {
  IntervalDecomposition dec;
  double s = 0.0, t = 0.0;
  double sigma = 0.0;      // formula value from (s, t)
  double sigma_eff = 0.0;  // block unit actually used, as a fraction of B
  double zeta = 0.0;
  double eps = 0.0;        // requested (and guaranteed) level
  double eps0 = 0.0;       // level used inside the blocks
  double eps1 = 0.0;       // admissible upper bound for eps
  double xi = 0.0;
  double tau = 0.0;
  bool early_exit = false;  // a block of class I_4 was found
  std::optional<Interval> bridge;
  int bridge_block = -1;    // index n of the block right of the bridge point
  std::vector<Block> blocks;
};

struct SuperlinearOptions {
  int quantum = 1;  // block boundaries are multiples of this many grid steps
};

// Decomposition of a non-decreasing 1-Lipschitz f on [0,B] with f(0)=0,
// f((1-s)B) >= tB, f(B)=sB into superlinear pieces, a positive share of
// which has slope in [xi, 1-xi].
SuperlinearResult SuperlinearDecomposition(const PLFunction& f, double s,
                                           double t, double eps,
                                           SuperlinearOptions opt = {});

// Constants used by SuperlinearDecomposition.
double SuperlinearSigma(double s, double t);
double SuperlinearEps1();

// Rounds a up and b down to the lattice (B/ell) N_0; collapsed pieces are
// dropped with a warning. eps and tau of the result are 2 eps and tau / 2.
IntervalDecomposition SnapEndpoints(const IntervalDecomposition& dec,
                                    const PLFunction& f, int ell);

// Sum of piece lengths (grid units) whose slope lies in [lo, hi].
int LengthWithSlopeIn(const IntervalDecomposition& dec, double lo, double hi);

// Random 1-Lipschitz zig-zag on [0,1] with G steps: runs of random length
// and random slope in [-1,1]. With monotone=true the slopes are in [0,1].
PLFunction RandomZigZag(int G, std::uint64_t seed, bool monotone = false);

}  // namespace frostlab
