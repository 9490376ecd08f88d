#pragma once

// (sigma;T)-regular measures: recognition, extraction and decomposition.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frostlab/dyadic.hpp"

namespace frostlab {

// Mean of the first j entries of sigma (1 <= j <= len).
double Beta(std::span<const double> sigma, int j);
// Mean of all entries.
double Beta(std::span<const double> sigma);

struct RegularityViolation {
  int block = 0;       // j in 1..ell
  CubeIndex cube;      // offending level-jT cube
  double ratio = 0.0;  // mu(Q) / mu(parent)
};

struct RegularityCheck {
  bool regular = true;
  std::optional<RegularityViolation> violation;
};

// The per-block ratio 2^{-T sigma_j}; exact for integral T*sigma_j.
template <class M>
M BlockFactor(double sigma_j, int T) {
  return Pow2Neg<M>(T * sigma_j);
}

template <class M>
RegularityCheck IsRegular(const BasicMeasure<M>& mu,
                          std::span<const double> sigma, int T);

template <class M>
struct BasicRegularPiece {
  DyadicSet support;
  std::vector<double> sigma;
  int T = 1;
  BasicMeasure<M> measure;  // normalized restriction to support
  M mass = M(0);            // share of the input measure carried by support
};

struct ExtractOptions {
  // Exponent classes per unit of T*sigma. 1 gives the ratio grid 2^{-k}.
  int classes_per_bit = 1;
};

template <class M>
BasicRegularPiece<M> ExtractRegularSubset(const BasicMeasure<M>& mu, int T,
                                          int ell, ExtractOptions opt = {});

template <class M>
struct BasicRegularDecomposition {
  std::vector<BasicRegularPiece<M>> pieces;
  std::vector<BasicRegularPiece<M>> residual;  // extracted but below the floor
  double eps = 0.0;
  double delta = 0.0;        // eps + log2(2dT+2)/T
  M union_mass = M(0);
  M remainder_mass = M(0);   // never assigned to a piece or the residual
  std::vector<std::string> warnings;
};

template <class M>
BasicRegularDecomposition<M> DecomposeRegular(const BasicMeasure<M>& mu, int T,
                                              int ell, double eps,
                                              ExtractOptions opt = {});

// Lower bound (2dT+2)^{-ell} on the extracted mass.
double ExtractionMassBound(int d, int T, int ell);

using RegularPiece = BasicRegularPiece<double>;
using RegularDecomposition = BasicRegularDecomposition<double>;

extern template RegularityCheck IsRegular(const BasicMeasure<double>&,
                                          std::span<const double>, int);
extern template RegularityCheck IsRegular(const BasicMeasure<Rational>&,
                                          std::span<const double>, int);
extern template BasicRegularPiece<double> ExtractRegularSubset(
    const BasicMeasure<double>&, int, int, ExtractOptions);
extern template BasicRegularPiece<Rational> ExtractRegularSubset(
    const BasicMeasure<Rational>&, int, int, ExtractOptions);
extern template BasicRegularDecomposition<double> DecomposeRegular(
    const BasicMeasure<double>&, int, int, double, ExtractOptions);
extern template BasicRegularDecomposition<Rational> DecomposeRegular(
    const BasicMeasure<Rational>&, int, int, double, ExtractOptions);

}  // namespace frostlab
