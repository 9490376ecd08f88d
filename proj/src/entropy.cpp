#include "frostlab/entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "frostlab/parallel.hpp"

namespace frostlab {

namespace {

using Bin = std::array<long long, 3>;

template <class M>
bool Same(const M& a, const M& b) {
  if constexpr (MassTraits<M>::kExact) {
    return a == b;
  } else {
    return std::fabs(a - b) <= 1e-12;
  }
}

// Entropy of a mass vector, summed in decreasing order so equal multisets give
// identical bits.
template <class M>
double BitsOf(const std::vector<M>& nu) {
  std::vector<double> v;
  v.reserve(nu.size());
  for (const auto& x : nu) v.push_back(MassTraits<M>::ToDouble(x));
  std::sort(v.begin(), v.end(), std::greater<>());
  return EntropyOfMasses(v);
}

void CheckLevel(int j, int m) {
  Require(j >= 0 && j <= m, ErrorCode::kOutOfRange, "level outside [0, m]");
}

Bin BinOf(const double* y, int k, int level) {
  Bin b{0, 0, 0};
  const double s = std::ldexp(1.0, level);
  for (int i = 0; i < k; ++i) b[i] = static_cast<long long>(std::floor(y[i] * s));
  return b;
}

// Sums masses with equal bins; returns the sums in bin order.
std::vector<double> Collapse(std::vector<std::pair<Bin, double>>& v) {
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    double s = 0;
    while (j < v.size() && v[j].first == v[i].first) s += v[j++].second;
    out.push_back(s);
    i = j;
  }
  return out;
}

void CheckMap(const DyadicMeasure& mu, const SmoothMap& F) {
  Require(F.in_dim() == mu.dim(), ErrorCode::kDimensionMismatch,
          "map input dimension differs from the measure");
  Require(F.out_dim() >= 1 && F.out_dim() <= 3 && F.out_dim() <= mu.dim(),
          ErrorCode::kDimensionMismatch, "map rank must be in [1, min(d, 3)]");
}

void CheckIntervals(const LevelIntervals& iv, int m, bool linear) {
  auto s = iv;
  std::sort(s.begin(), s.end());
  int prev = 0;
  for (auto [a, b] : s) {
    Require(a >= prev && a < b && b <= m, ErrorCode::kOutOfRange,
            "intervals must be disjoint inside [0, m]");
    if (!linear)
      Require(b <= 2 * a, ErrorCode::kLinearizationOutOfRange,
              "need B <= 2A for a nonlinear map");
    prev = b;
  }
}

void CheckRank(const DyadicMeasure& mu, const SmoothMap& F) {
  const int d = mu.dim();
  std::vector<double> x(d);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu.center(i, x.data());
    (void)F.kernel_perp(x.data());
  }
}

struct Group {
  std::size_t lo, hi;
  Key key;
};

std::vector<Group> Groups(const DyadicMeasure& mu, int level) {
  const int shift = mu.dim() * (mu.depth() - level);
  std::vector<Group> g;
  const auto& keys = mu.keys();
  for (std::size_t i = 0; i < keys.size();) {
    Key k = shift >= 64 ? 0 : keys[i] >> shift;
    std::size_t j = i;
    while (j < keys.size() && (shift >= 64 ? 0 : keys[j] >> shift) == k) ++j;
    g.push_back({i, j, k});
    i = j;
  }
  return g;
}

// Projected conditional of mu on the group's cube, binned at level B - A;
// absolute masses per bin.
std::vector<double> ProjectedConditional(const DyadicMeasure& mu, const SmoothMap& F,
                                         const Group& g, int A, int B) {
  const int d = mu.dim();
  CubeIndex q = KeyToCube(g.key, d, A);
  std::vector<double> corner(d), xq(d), c(d), local(d), p(3);
  CubeCorner(q, corner.data());
  const double side = std::ldexp(1.0, -A);
  for (int a = 0; a < d; ++a) xq[a] = corner[a] + side / 2;
  KPlane V = F.kernel_perp(xq.data());
  const int k = V.k();
  std::vector<std::pair<Bin, double>> bins;
  bins.reserve(g.hi - g.lo);
  for (std::size_t i = g.lo; i < g.hi; ++i) {
    mu.center(i, c.data());
    for (int a = 0; a < d; ++a) local[a] = (c[a] - corner[a]) / side;
    V.project(local.data(), p.data());
    bins.push_back({BinOf(p.data(), k, B - A), mu.mass(i)});
  }
  return Collapse(bins);
}

template <class Inner>
EntropyBound Bound(const DyadicMeasure& mu, const DyadicMeasure& weight,
                   const SmoothMap& F, const LevelIntervals& iv, Inner&& inner) {
  const int m = mu.depth();
  EntropyBound out;
  out.q = static_cast<int>(iv.size());
  out.lhs = EntropyOfMasses(PushforwardMasses(weight, F, m));
  for (auto [A, B] : iv) {
    auto groups = Groups(mu, A);
    std::vector<double> term(groups.size(), 0.0);
    std::vector<std::vector<double>> absbins(groups.size());
    ParallelFor(groups.size(), [&](std::size_t gi) {
      const auto& g = groups[gi];
      double wq = weight.range_mass(weight.range(g.key, A).first,
                                    weight.range(g.key, A).second);
      if (!(wq > 0)) return;
      absbins[gi] = ProjectedConditional(mu, F, g, A, B);
      double mq = mu.range_mass(g.lo, g.hi);
      std::vector<double> cond(absbins[gi].size());
      for (std::size_t b = 0; b < cond.size(); ++b) cond[b] = absbins[gi][b] / mq;
      term[gi] = wq * inner(cond);
    });
    double t = 0;
    for (double x : term) t += x;
    out.terms.push_back(t);
    out.rhs += t;

    // Joint partition {Q x bin} minus the coarse partition {Q}.
    std::vector<double> joint, coarse;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (absbins[gi].empty()) continue;
      double s = 0;
      for (double x : absbins[gi]) {
        joint.push_back(x);
        s += x;
      }
      coarse.push_back(s);
    }
    out.rhs_joint += EntropyOfMasses(joint) - EntropyOfMasses(coarse);
  }
  out.deficit = out.rhs - out.lhs;
  return out;
}

}  // namespace

double EntropyOfMasses(std::span<const double> p) {
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log2(x);
  // A total mass of 1 - 1e-16 in a single cell would give -1e-16 here.
  return std::max(h, 0.0);
}

double Entropy(const DyadicMeasure& mu, int j) {
  CheckLevel(j, mu.depth());
  std::vector<double> p;
  for (auto& [k, w] : mu.level_masses(j)) p.push_back(w);
  return EntropyOfMasses(p);
}

double Entropy(const ExactMeasure& mu, int j) {
  CheckLevel(j, mu.depth());
  std::vector<Rational> p;
  for (auto& [k, w] : mu.level_masses(j)) p.push_back(w);
  return BitsOf(p);
}

double ConditionalEntropy(const DyadicMeasure& mu, int fine, int coarse) {
  CheckLevel(fine, mu.depth());
  Require(coarse >= 0 && coarse <= fine, ErrorCode::kInvalidArgument,
          "coarse level above fine level");
  return Entropy(mu, fine) - Entropy(mu, coarse);
}

double ConditionalEntropyDirect(const DyadicMeasure& mu, int fine, int coarse) {
  CheckLevel(fine, mu.depth());
  Require(coarse >= 0 && coarse <= fine, ErrorCode::kInvalidArgument,
          "coarse level above fine level");
  const int d = mu.dim();
  auto fm = mu.level_masses(fine);
  double h = 0;
  for (std::size_t i = 0; i < fm.size();) {
    Key g = fm[i].first >> (d * (fine - coarse));
    std::size_t j = i;
    double s = 0;
    while (j < fm.size() && (fm[j].first >> (d * (fine - coarse))) == g) s += fm[j++].second;
    std::vector<double> cond;
    for (std::size_t t = i; t < j; ++t) cond.push_back(fm[t].second / s);
    h += s * EntropyOfMasses(cond);
    i = j;
  }
  return h;
}

template <class M>
RobustFill<M> RobustEntropyOfMasses(std::span<const M> p, const M& delta) {
  Require(!(delta < M(1)), ErrorCode::kBadDelta, "robust entropy needs Delta >= 1");
  std::vector<std::size_t> ord(p.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  RobustFill<M> out;
  out.nu.assign(p.size(), M(0));
  M rem(1);
  for (std::size_t i : ord) {
    if (!(rem > M(0))) break;
    M cap = delta * p[i];
    M take = cap < rem ? cap : rem;
    out.nu[i] = take;
    rem -= take;
  }
  out.bits = BitsOf(out.nu);
  return out;
}

template <class M>
RobustFill<M> RobustEntropyOracle(std::span<const M> p, const M& delta) {
  Require(!(delta < M(1)), ErrorCode::kBadDelta, "robust entropy needs Delta >= 1");
  const std::size_t n = p.size();
  Require(n <= 12, ErrorCode::kSupportTooLarge, "oracle limited to 12 cells");
  std::vector<M> cap(n);
  for (std::size_t i = 0; i < n; ++i) cap[i] = delta * p[i];
  RobustFill<M> best;
  best.bits = std::numeric_limits<double>::infinity();
  auto consider = [&](std::vector<M> nu) {
    double b = BitsOf(nu);
    if (b < best.bits) {
      best.bits = b;
      best.nu = std::move(nu);
    }
  };
  // A vertex has every coordinate at 0 or at capacity except at most one.
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    M s(0);
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += cap[i];
    if (s > M(1) && !Same(s, M(1))) continue;
    std::vector<M> nu(n, M(0));
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) nu[i] = cap[i];
    if (Same(s, M(1))) {
      consider(nu);
      continue;
    }
    const M r = M(1) - s;
    for (std::size_t f = 0; f < n; ++f) {
      if (mask >> f & 1 || cap[f] < r) continue;
      auto v = nu;
      v[f] = r;
      consider(std::move(v));
    }
  }
  Require(std::isfinite(best.bits), ErrorCode::kInternal, "no feasible vertex");
  return best;
}

double RobustEntropy(const DyadicMeasure& mu, int j, double delta) {
  CheckLevel(j, mu.depth());
  std::vector<double> p;
  for (auto& [k, w] : mu.level_masses(j)) p.push_back(w);
  return RobustEntropyOfMasses<double>(p, delta).bits;
}

double RobustEntropy(const ExactMeasure& mu, int j, const Rational& delta) {
  CheckLevel(j, mu.depth());
  std::vector<Rational> p;
  for (auto& [k, w] : mu.level_masses(j)) p.push_back(w);
  return RobustEntropyOfMasses<Rational>(p, delta).bits;
}

double RobustEntropyOracle(const ExactMeasure& mu, int j, const Rational& delta) {
  CheckLevel(j, mu.depth());
  std::vector<Rational> p;
  for (auto& [k, w] : mu.level_masses(j)) p.push_back(w);
  return RobustEntropyOracle<Rational>(p, delta).bits;
}

template <class M>
std::size_t MinCellsForMass(const BasicMeasure<M>& mu, double delta, int m) {
  CheckLevel(m, mu.depth());
  Require(delta > 0, ErrorCode::kInvalidArgument, "delta must be positive");
  const M thr = MassTraits<M>::FromDouble(std::exp2(-delta * m));
  std::vector<M> p;
  for (auto& [k, w] : mu.level_masses(m)) p.push_back(w);
  std::sort(p.begin(), p.end(), std::greater<>());
  M acc(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (!(acc < thr)) return i + 1;
  }
  return p.size() + 1;  // threshold above the total mass
}

template <class M>
std::size_t MinCellsForMassBrute(const BasicMeasure<M>& mu, double delta, int m) {
  CheckLevel(m, mu.depth());
  Require(delta > 0, ErrorCode::kInvalidArgument, "delta must be positive");
  const M thr = MassTraits<M>::FromDouble(std::exp2(-delta * m));
  std::vector<M> p;
  for (auto& [k, w] : mu.level_masses(m)) p.push_back(w);
  const std::size_t n = p.size();
  Require(n <= 20, ErrorCode::kSupportTooLarge, "brute force limited to 20 cells");
  std::vector<M> sum(std::size_t{1} << n, M(0));
  std::size_t best = n + 1;
  for (std::size_t mask = 1; mask < sum.size(); ++mask) {
    std::size_t low = static_cast<std::size_t>(__builtin_ctzll(mask));
    sum[mask] = sum[mask & (mask - 1)] + p[low];
    std::size_t c = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (c < best && !(sum[mask] < thr)) best = c;
  }
  return best;
}

template <class M>
bool RobustCheck(const BasicMeasure<M>& mu, double alpha, double delta, int m) {
  Require(alpha > 0, ErrorCode::kInvalidArgument, "alpha must be positive");
  return static_cast<double>(MinCellsForMass(mu, delta, m)) >= std::exp2(alpha * m);
}

template <class M>
bool RobustCheckBrute(const BasicMeasure<M>& mu, double alpha, double delta, int m) {
  Require(alpha > 0, ErrorCode::kInvalidArgument, "alpha must be positive");
  return static_cast<double>(MinCellsForMassBrute(mu, delta, m)) >= std::exp2(alpha * m);
}

RobustEntropyReport RobustToEntropyCheck(const DyadicMeasure& mu, double alpha,
                                         double delta, int m, double eps) {
  Require(RobustCheck(mu, alpha, delta, m), ErrorCode::kPreconditionFailed,
          "measure is not (alpha, delta, m)-robust");
  RobustEntropyReport r;
  r.delta_cap = std::exp2(delta * m / 2);
  r.lhs = RobustEntropy(mu, m, r.delta_cap);
  r.rhs = (alpha - eps) * m;
  r.holds = r.lhs >= r.rhs - 1e-12;
  return r;
}

LevelIntervals LevelsOf(const ScaleDecomposition& dec) {
  LevelIntervals out;
  for (const auto& iv : dec.intervals) out.emplace_back(dec.T * iv.A, dec.T * iv.B);
  return out;
}

std::vector<double> PushforwardMasses(const DyadicMeasure& mu, const SmoothMap& F,
                                      int j) {
  CheckMap(mu, F);
  const int d = mu.dim(), k = F.out_dim();
  std::vector<double> x(d), y(3);
  std::vector<std::pair<Bin, double>> bins;
  bins.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu.center(i, x.data());
    F.eval(x.data(), y.data());
    bins.push_back({BinOf(y.data(), k, j), mu.mass(i)});
  }
  return Collapse(bins);
}

double ImageEntropy(const DyadicMeasure& mu, const SmoothMap& F, int j) {
  return EntropyOfMasses(PushforwardMasses(mu, F, j));
}

EntropyBound MultiscaleEntropyBound(const DyadicMeasure& mu, const SmoothMap& F,
                                    const LevelIntervals& iv) {
  CheckMap(mu, F);
  CheckIntervals(iv, mu.depth(), F.linear());
  CheckRank(mu, F);
  return Bound(mu, mu, F, iv,
               [](const std::vector<double>& c) { return EntropyOfMasses(c); });
}

EntropyBound RobustMultiscaleBound(const DyadicMeasure& nu, const DyadicMeasure& mu,
                                   double delta, const SmoothMap& F,
                                   const LevelIntervals& iv) {
  CheckMap(mu, F);
  Require(nu.dim() == mu.dim() && nu.depth() == mu.depth(),
          ErrorCode::kDimensionMismatch, "nu and mu live on different grids");
  Require(delta >= 1, ErrorCode::kBadDelta, "Delta must be >= 1");
  CheckIntervals(iv, mu.depth(), F.linear());
  std::size_t j = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    while (j < mu.size() && mu.keys()[j] < nu.keys()[i]) ++j;
    bool ok = j < mu.size() && mu.keys()[j] == nu.keys()[i] &&
              nu.mass(i) <= delta * mu.mass(j) * (1 + 1e-12);
    if (!ok)
      Fail(ErrorCode::kNotDominated,
           "nu exceeds Delta mu at cell " + std::to_string(i) + " of nu");
  }
  CheckRank(mu, F);
  const double cap = mu.depth() * delta;
  return Bound(mu, nu, F, iv, [cap](const std::vector<double>& c) {
    return RobustEntropyOfMasses<double>(c, std::max(1.0, cap)).bits;
  });
}

double LinearizationDefect(const DyadicMeasure& mu, const SmoothMap& F,
                           const CubeIndex& q, std::span<const double> x,
                           int target_level) {
  CheckMap(mu, F);
  Require(q.dim() == mu.dim() && q.level <= mu.depth(), ErrorCode::kDimensionMismatch,
          "cube does not fit the measure");
  Require(target_level <= 2 * q.level, ErrorCode::kLinearizationOutOfRange,
          "target level must be at most twice the cube level");
  const int d = mu.dim(), k = F.out_dim();
  std::vector<double> corner(d);
  CubeCorner(q, corner.data());
  const double side = std::ldexp(1.0, -q.level);
  for (int a = 0; a < d; ++a)
    Require(x[a] >= corner[a] && x[a] <= corner[a] + side, ErrorCode::kInvalidArgument,
            "x must lie in Q");
  auto [lo, hi] = mu.range(q);
  Require(hi > lo, ErrorCode::kZeroMassCube, "Q carries no mass");
  KPlane V = F.kernel_perp(x.data());
  std::vector<double> c(d), y(3), p(3);
  std::vector<std::pair<Bin, double>> fb, lb;
  for (std::size_t i = lo; i < hi; ++i) {
    mu.center(i, c.data());
    F.eval(c.data(), y.data());
    V.project(c.data(), p.data());
    fb.push_back({BinOf(y.data(), k, target_level), mu.mass(i)});
    lb.push_back({BinOf(p.data(), k, target_level), mu.mass(i)});
  }
  const double w = mu.range_mass(lo, hi);
  auto norm = [w](std::vector<double> v) {
    for (double& t : v) t /= w;
    return EntropyOfMasses(v);
  };
  return std::fabs(norm(Collapse(fb)) - norm(Collapse(lb)));
}

template RobustFill<double> RobustEntropyOfMasses(std::span<const double>, const double&);
template RobustFill<Rational> RobustEntropyOfMasses(std::span<const Rational>,
                                                    const Rational&);
template RobustFill<double> RobustEntropyOracle(std::span<const double>, const double&);
template RobustFill<Rational> RobustEntropyOracle(std::span<const Rational>,
                                                  const Rational&);
template std::size_t MinCellsForMass(const DyadicMeasure&, double, int);
template std::size_t MinCellsForMass(const ExactMeasure&, double, int);
template std::size_t MinCellsForMassBrute(const DyadicMeasure&, double, int);
template std::size_t MinCellsForMassBrute(const ExactMeasure&, double, int);
template bool RobustCheck(const DyadicMeasure&, double, double, int);
template bool RobustCheck(const ExactMeasure&, double, double, int);
template bool RobustCheckBrute(const DyadicMeasure&, double, double, int);
template bool RobustCheckBrute(const ExactMeasure&, double, double, int);

}  // namespace frostlab
