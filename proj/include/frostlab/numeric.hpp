#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace frostlab {

// Exact mass type used by the oracle tests.
using Rational = boost::multiprecision::cpp_rational;

template <class M>
struct MassTraits;

template <>
struct MassTraits<double> {
  static constexpr bool kExact = false;
  static double ToDouble(double x) { return x; }
  static double FromDouble(double x) { return x; }
  // Multiplicative slack used by float-mode inequality checks.
  static double Slack() { return 1.0 + 1e-9; }
};

template <>
struct MassTraits<Rational> {
  static constexpr bool kExact = true;
  static double ToDouble(const Rational& x) { return x.convert_to<double>(); }
  static Rational FromDouble(double x) { return Rational(x); }
  static Rational Slack() { return Rational(1); }
};

// Pairwise (tree) summation. The reduction order depends only on the length,
// so results are reproducible regardless of how the input was produced.
double PairwiseSum(std::span<const double> v);

template <class M>
M PairwiseSumT(std::span<const M> v) {
  if (v.empty()) return M(0);
  if (v.size() <= 8) {
    M s = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) s += v[i];
    return s;
  }
  std::size_t h = v.size() / 2;
  return PairwiseSumT<M>(v.subspan(0, h)) + PairwiseSumT<M>(v.subspan(h));
}

// x * log2(1/x) with the 0 log 0 = 0 convention.
inline double EntropyTerm(double p) {
  return p > 0.0 ? -p * std::log2(p) : 0.0;
}

// Entropy in bits of a probability vector. Terms are sorted before summing so
// permutations of the same vector give bit-identical results.
double EntropyBits(std::vector<double> probs);

// Least-squares slope of y against x.
double FitSlope(std::span<const double> x, std::span<const double> y);

// 2^{-e}; exact when e is an integer and M is exact.
template <class M>
M Pow2Neg(double e) {
  double r = std::round(e);
  if (MassTraits<M>::kExact && std::fabs(e - r) < 1e-12 && std::fabs(r) < 4000) {
    M one(1);
    M p(1);
    long k = static_cast<long>(r);
    M two(2);
    for (long i = 0; i < (k < 0 ? -k : k); ++i) p *= two;
    return k >= 0 ? M(one / p) : p;
  }
  return MassTraits<M>::FromDouble(std::exp2(-e));
}

}  // namespace frostlab
