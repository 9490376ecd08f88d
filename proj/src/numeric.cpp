#include "frostlab/numeric.hpp"

#include <algorithm>
#include <functional>

namespace frostlab {

double PairwiseSum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t h = v.size() / 2;
  return PairwiseSum(v.subspan(0, h)) + PairwiseSum(v.subspan(h));
}

double EntropyBits(std::vector<double> probs) {
  std::sort(probs.begin(), probs.end(), std::greater<double>());
  std::vector<double> terms;
  terms.reserve(probs.size());
  for (double p : probs)
    if (p > 0) terms.push_back(EntropyTerm(p));
  return PairwiseSum(terms);
}

double FitSlope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace frostlab
