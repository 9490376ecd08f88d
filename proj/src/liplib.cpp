#include "frostlab/liplib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace frostlab {

PLFunction::PLFunction(double a, double b, std::vector<double> values)
    : a_(a), b_(b), values_(std::move(values)) {
  Require(b > a, ErrorCode::kInvalidArgument, "PL function needs b > a");
  Require(values_.size() >= 2, ErrorCode::kInvalidArgument,
          "PL function needs at least one grid step");
  const double h = step();
  for (std::size_t k = 0; k + 1 < values_.size(); ++k)
    Require(std::fabs(values_[k + 1] - values_[k]) <= h + kLipTol,
            ErrorCode::kInvalidArgument, "PL function is not 1-Lipschitz");
}

double PLFunction::eval(double x) const {
  const int G = grid();
  double u = (x - a_) / (b_ - a_) * G;
  if (u <= 0) return values_.front();
  if (u >= G) return values_.back();
  int k = static_cast<int>(std::floor(u));
  if (k >= G) k = G - 1;
  double w = u - k;
  return values_[k] + w * (values_[k + 1] - values_[k]);
}

bool PLFunction::non_decreasing() const {
  for (std::size_t k = 0; k + 1 < values_.size(); ++k)
    if (values_[k + 1] < values_[k] - kLipTol) return false;
  return true;
}

double Slope(const PLFunction& f, double a, double b) {
  Require(b > a, ErrorCode::kInvalidArgument, "slope of a degenerate interval");
  return (f.eval(b) - f.eval(a)) / (b - a);
}

double SlopeIdx(const PLFunction& f, int lo, int hi) {
  Require(hi > lo, ErrorCode::kInvalidArgument, "slope of a degenerate interval");
  return (f.at(hi) - f.at(lo)) / ((hi - lo) * f.step());
}

Deviation DeviationIdx(const PLFunction& f, int lo, int hi) {
  Deviation dv;
  if (hi <= lo + 1) return dv;
  const double s = SlopeIdx(f, lo, hi);
  const double h = f.step();
  const double f0 = f.at(lo);
  for (int i = lo + 1; i < hi; ++i) {
    double g = f.at(i) - (f0 + s * (i - lo) * h);
    dv.above = std::max(dv.above, g);
    dv.below = std::max(dv.below, -g);
  }
  return dv;
}

bool IsEpsLinearIdx(const PLFunction& f, int lo, int hi, double eps) {
  Deviation dv = DeviationIdx(f, lo, hi);
  double lim = eps * (hi - lo) * f.step() + kLipTol;
  return dv.above <= lim && dv.below <= lim;
}

bool IsEpsSuperlinearIdx(const PLFunction& f, int lo, int hi, double eps) {
  return DeviationIdx(f, lo, hi).below <= eps * (hi - lo) * f.step() + kLipTol;
}

namespace {

Deviation DeviationReal(const PLFunction& f, double a, double b) {
  Require(b > a, ErrorCode::kInvalidArgument, "degenerate interval");
  const double s = Slope(f, a, b);
  const double fa = f.eval(a);
  Deviation dv;
  const int G = f.grid();
  int k0 = static_cast<int>(std::floor((a - f.a()) / f.step())) + 1;
  for (int k = std::max(k0, 0); k <= G && f.x(k) < b; ++k) {
    if (f.x(k) <= a) continue;
    double g = f.at(k) - (fa + s * (f.x(k) - a));
    dv.above = std::max(dv.above, g);
    dv.below = std::max(dv.below, -g);
  }
  return dv;
}

}  // namespace

bool IsEpsLinear(const PLFunction& f, double a, double b, double eps) {
  Deviation dv = DeviationReal(f, a, b);
  double lim = eps * (b - a) + kLipTol;
  return dv.above <= lim && dv.below <= lim;
}

bool IsEpsSuperlinear(const PLFunction& f, double a, double b, double eps) {
  return DeviationReal(f, a, b).below <= eps * (b - a) + kLipTol;
}

int IntervalDecomposition::covered() const {
  int c = 0;
  for (const auto& iv : intervals) c += iv.length();
  return c;
}

LinearSubinterval FindLinearSubinterval(const PLFunction& f, int lo, int hi,
                                        double eps) {
  Require(lo >= 0 && hi <= f.grid() && lo < hi, ErrorCode::kOutOfRange,
          "interval outside the grid");
  Require(eps > 0 && eps < 1, ErrorCode::kInvalidArgument, "need 0 < eps < 1");
  const double h = f.step();
  const double sign = f.at(hi) >= f.at(lo) ? 1.0 : -1.0;
  LinearSubinterval out{lo, hi, 0, {}};
  double slope = sign * SlopeIdx(f, lo, hi);
  out.slopes.push_back(slope);
  while (out.hi - out.lo > 1) {
    const int a = out.lo, b = out.hi;
    const double fa = sign * f.at(a);
    int wit = -1;
    double best = -1.0, gw = 0.0;
    for (int i = a + 1; i < b; ++i) {
      double g = sign * f.at(i) - (fa + slope * (i - a) * h);
      if (std::fabs(g) > best) {
        best = std::fabs(g);
        gw = g;
        wit = i;
      }
    }
    if (best <= eps * (b - a) * h + kLipTol) break;
    if (gw > 0) {
      out.hi = wit;
    } else {
      out.lo = wit;
    }
    double ns = sign * SlopeIdx(f, out.lo, out.hi);
    Require(ns >= slope + eps - 1e-12, ErrorCode::kInternal,
            "linear-piece recursion did not gain eps in slope");
    slope = ns;
    out.slopes.push_back(slope);
    ++out.depth;
  }
  return out;
}

namespace {

void SortAndSlope(const PLFunction& f, std::vector<Interval>& v) {
  std::sort(v.begin(), v.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  for (auto& iv : v) iv.slope = SlopeIdx(f, iv.lo, iv.hi);
}

}  // namespace

IntervalDecomposition CoverByLinear(const PLFunction& f, int lo, int hi,
                                    double eps) {
  Require(lo >= 0 && hi <= f.grid() && lo < hi, ErrorCode::kOutOfRange,
          "interval outside the grid");
  const int L = hi - lo;
  std::vector<std::pair<int, int>> gaps{{lo, hi}};
  std::vector<Interval> found;
  int gap_total = L;
  int N = 0;
  while (gap_total > 0.5 * eps * L) {
    ++N;
    std::vector<std::pair<int, int>> next;
    for (auto [g0, g1] : gaps) {
      auto r = FindLinearSubinterval(f, g0, g1, eps);
      found.push_back({r.lo, r.hi, 0.0});
      if (r.lo > g0) next.emplace_back(g0, r.lo);
      if (r.hi < g1) next.emplace_back(r.hi, g1);
    }
    gaps = std::move(next);
    gap_total = 0;
    for (auto [g0, g1] : gaps) gap_total += g1 - g0;
  }
  IntervalDecomposition out;
  out.kind = DecompositionKind::kLinear;
  out.lo = lo;
  out.hi = hi;
  out.eps = eps;
  out.generations = N;
  out.tau = eps * std::exp2(-(N + 1));
  for (const auto& iv : found)
    if (iv.length() >= out.tau * L) out.intervals.push_back(iv);
  SortAndSlope(f, out.intervals);
  return out;
}

IntervalDecomposition CoverByLinearGraded(const PLFunction& f, int lo, int hi,
                                          double eps, int quantum) {
  Require(lo >= 0 && hi <= f.grid() && lo < hi, ErrorCode::kOutOfRange,
          "interval outside the grid");
  Require(quantum >= 1, ErrorCode::kInvalidArgument, "quantum must be positive");
  const int L = hi - lo;
  IntervalDecomposition out;
  out.kind = DecompositionKind::kLinear;
  out.lo = lo;
  out.hi = hi;
  out.eps = 2 * eps;
  out.tau = std::numeric_limits<double>::infinity();
  int top = L;
  while (top > eps * L && top > quantum) {
    int half = (top + 1) / 2;
    half = (half + quantum - 1) / quantum * quantum;
    if (half >= top) break;
    auto sub = CoverByLinear(f, lo + half, lo + top, eps);
    out.tau = std::min(out.tau, sub.tau * (top - half) / L);
    out.generations = std::max(out.generations, sub.generations);
    for (const auto& iv : sub.intervals) out.intervals.push_back(iv);
    top = half;
  }
  if (top > eps * L)
    out.warnings.push_back("innermost annulus reached the quantum; " +
                           std::to_string(top) + " grid steps left uncovered");
  if (out.intervals.empty()) out.tau = 0.0;
  SortAndSlope(f, out.intervals);
  return out;
}

IntervalDecomposition SuperlinearChain(const PLFunction& f, int lo, int hi,
                                       double eps) {
  auto inner = CoverByLinear(f, lo, hi, eps * eps / 4);
  const int L = hi - lo;
  std::vector<int> C{lo};
  for (const auto& iv : inner.intervals) {
    C.push_back(iv.lo);
    C.push_back(iv.hi);
  }
  std::sort(C.begin(), C.end());
  C.erase(std::unique(C.begin(), C.end()), C.end());

  // Covered length inside [x, y]; the cover pieces never straddle a point of C.
  const auto& cov = inner.intervals;
  auto covered_in = [&](int x, int y) {
    int c = 0;
    for (const auto& iv : cov)
      if (iv.lo >= x && iv.hi <= y) c += iv.length();
    return c;
  };

  std::vector<Interval> chain;
  int y = hi;
  while (y > lo) {
    int best = -1;
    double bs = -std::numeric_limits<double>::infinity();
    for (int c : C) {
      if (c >= y) break;
      double s = SlopeIdx(f, c, y);
      if (s >= bs) {
        bs = s;
        best = c;
      }
    }
    chain.push_back({best, y, bs});
    y = best;
  }

  IntervalDecomposition out;
  out.kind = DecompositionKind::kSuperlinear;
  out.lo = lo;
  out.hi = hi;
  out.eps = eps;
  out.tau = inner.tau;
  out.generations = inner.generations;
  for (const auto& iv : chain) {
    int len = iv.length();
    int in_e = len - covered_in(iv.lo, iv.hi);
    if (in_e >= 0.5 * eps * len) continue;
    if (len < inner.tau * L) continue;
    out.intervals.push_back(iv);
  }
  SortAndSlope(f, out.intervals);
  return out;
}

double SuperlinearSigma(double s, double t) {
  double r = std::min(t / s, 1.0);
  return 0.99 * std::min({1.0 - std::sqrt(1.0 - r), t / 6.0, 1.0});
}

double SuperlinearEps1() { return 4.0 / 11.0; }

namespace {

void Hyp(bool ok, const std::string& what) {
  Require(ok, ErrorCode::kHypothesisFailed, what);
}

// Near-equal pieces of [lo, hi) in units, each at least `unit` long.
void SplitBlocks(int lo, int hi, int unit, std::vector<std::pair<int, int>>& out) {
  int L = hi - lo;
  if (L <= 0) return;
  int k = std::max(1, L / unit);
  int prev = lo;
  for (int i = 1; i <= k; ++i) {
    int nxt = lo + static_cast<int>((static_cast<long long>(i) * L) / k);
    out.emplace_back(prev, nxt);
    prev = nxt;
  }
}

int Length(const IntervalDecomposition& d, double lo, double hi) {
  int n = 0;
  for (const auto& iv : d.intervals)
    if (iv.slope >= lo && iv.slope <= hi) n += iv.length();
  return n;
}

}  // namespace

int LengthWithSlopeIn(const IntervalDecomposition& dec, double lo, double hi) {
  return Length(dec, lo, hi);
}

SuperlinearResult SuperlinearDecomposition(const PLFunction& f, double s,
                                           double t, double eps,
                                           SuperlinearOptions opt) {
  Hyp(f.a() == 0.0, "domain must start at 0");
  const double B = f.b();
  const int G = f.grid();
  const double tol = 1e-9 * B;
  Hyp(s > 0 && s < 1, "s in (0,1)");
  Hyp(t > 0 && t < 1, "t in (0,1)");
  Hyp(f.non_decreasing(), "f non-decreasing");
  Hyp(std::fabs(f.at(0)) <= tol, "f(0) = 0");
  Hyp(std::fabs(f.at(G) - s * B) <= tol, "f(B) = sB");
  Hyp(f.eval((1 - s) * B) >= t * B - tol, "f((1-s)B) >= tB");
  Hyp(eps > 0 && eps <= SuperlinearEps1() + 1e-12, "eps <= eps1 = 4/11");
  const int q = opt.quantum;
  Require(q >= 1 && G % q == 0, ErrorCode::kInvalidArgument,
          "quantum must divide the grid");

  SuperlinearResult res;
  res.s = s;
  res.t = t;
  res.eps = eps;
  res.eps1 = SuperlinearEps1();
  res.sigma = SuperlinearSigma(s, t);

  const int units = G / q;
  const int su = std::max(1, static_cast<int>(std::ceil(res.sigma * units - 1e-9)));
  const int c1 = 4 * su;
  const int cn0 = static_cast<int>(std::floor((1 - s) * units + 1e-9));
  Hyp(c1 <= cn0, "grid too coarse: the initial 4 sigma block passes (1-s)B");

  std::vector<std::pair<int, int>> spans{{0, c1}};
  SplitBlocks(c1, cn0, su, spans);
  SplitBlocks(cn0, units, su, spans);

  res.sigma_eff = static_cast<double>(su) / units;
  res.zeta = res.sigma_eff / 11;
  res.eps0 = eps * res.sigma_eff / 4;
  const double se = res.sigma_eff;
  const double zeta = res.zeta;

  double tau = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < spans.size(); ++n) {
    Block blk;
    blk.lo = spans[n].first * q;
    blk.hi = spans[n].second * q;
    if (n == 0) {
      blk.dec = CoverByLinearGraded(f, blk.lo, blk.hi, res.eps0, q);
    } else {
      blk.dec = SuperlinearChain(f, blk.lo, blk.hi, res.eps0);
      const double len = blk.hi - blk.lo;
      int low = Length(blk.dec, -2.0, zeta);
      int high = Length(blk.dec, 1 - zeta, 2.0);
      int out = blk.dec.covered() - Length(blk.dec, zeta, 1 - zeta);
      if (low >= (1 - se) * len) blk.cls = 1;
      else if (high >= (1 - se) * len) blk.cls = 2;
      else if (out >= (1 - se / 2) * len) blk.cls = 3;
      else blk.cls = 4;
    }
    tau = std::min(tau, blk.dec.tau * (blk.hi - blk.lo) / G);
    res.blocks.push_back(std::move(blk));
  }

  IntervalDecomposition& dec = res.dec;
  dec.kind = DecompositionKind::kSuperlinear;
  dec.lo = 0;
  dec.hi = G;
  dec.eps = eps;
  for (const auto& b : res.blocks)
    for (const auto& w : b.dec.warnings) dec.warnings.push_back(w);

  bool has4 = std::any_of(res.blocks.begin(), res.blocks.end(),
                          [](const Block& b) { return b.cls == 4; });
  if (has4) {
    res.early_exit = true;
    res.xi = std::min(se * se / 4, zeta);
    for (const auto& b : res.blocks)
      for (const auto& iv : b.dec.intervals) dec.intervals.push_back(iv);
  } else {
    const int N = static_cast<int>(res.blocks.size()) - 1;
    int n = -1;
    for (int k = 2; k <= N; ++k) {
      int pc = res.blocks[k - 1].cls, cc = res.blocks[k].cls;
      if ((pc == 2 || pc == 3) && (cc == 1 || cc == 3)) {
        n = k;
        break;
      }
    }
    Hyp(n > 0, "no block of slope ~1 is followed by a block of slope ~0");
    const auto& prev = res.blocks[n - 1].dec.intervals;
    const auto& cur = res.blocks[n].dec.intervals;
    int at = -1, bt = -1;
    for (const auto& iv : prev)
      if (iv.slope >= 1 - zeta) {
        at = iv.lo;
        break;
      }
    for (const auto& iv : cur)
      if (iv.slope <= zeta) bt = iv.hi;
    Require(at >= 0 && bt >= 0, ErrorCode::kInternal, "bridge endpoints missing");
    Interval br{at, bt, SlopeIdx(f, at, bt)};
    res.bridge = br;
    res.bridge_block = n;
    res.xi = std::min(se * se / 2, zeta);
    for (const auto& b : res.blocks)
      for (const auto& iv : b.dec.intervals)
        if (iv.hi <= at || iv.lo >= bt) dec.intervals.push_back(iv);
    dec.intervals.push_back(br);
    tau = std::min(tau, static_cast<double>(br.length()) / G);
  }
  std::sort(dec.intervals.begin(), dec.intervals.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  res.tau = tau;
  dec.tau = tau;
  return res;
}

IntervalDecomposition SnapEndpoints(const IntervalDecomposition& dec,
                                    const PLFunction& f, int ell) {
  const int G = f.grid();
  Require(ell >= 1 && G % ell == 0, ErrorCode::kInvalidArgument,
          "lattice size must divide the grid");
  const int unit = G / ell;
  IntervalDecomposition out = dec;
  out.intervals.clear();
  out.eps = 2 * dec.eps;
  out.tau = dec.tau / 2;
  for (const auto& iv : dec.intervals) {
    int lo = (iv.lo + unit - 1) / unit * unit;
    int hi = iv.hi / unit * unit;
    if (hi <= lo) {
      out.warnings.push_back("interval [" + std::to_string(iv.lo) + "," +
                             std::to_string(iv.hi) + "] collapsed on the lattice");
      continue;
    }
    out.intervals.push_back({lo, hi, SlopeIdx(f, lo, hi)});
  }
  return out;
}

PLFunction RandomZigZag(int G, std::uint64_t seed, bool monotone) {
  Require(G >= 1, ErrorCode::kInvalidArgument, "grid must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> run(1, std::max(1, G / 8));
  std::uniform_real_distribution<double> sl(monotone ? 0.0 : -1.0, 1.0);
  const double h = 1.0 / G;
  std::vector<double> v(G + 1, 0.0);
  int k = 0;
  while (k < G) {
    int r = std::min(run(rng), G - k);
    double s = sl(rng);
    for (int i = 0; i < r; ++i, ++k) v[k + 1] = v[k] + s * h;
  }
  return PLFunction(0.0, 1.0, std::move(v));
}

}  // namespace frostlab
