#include "frostlab/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frostlab/parallel.hpp"

namespace frostlab {

namespace {

constexpr double kTol = 1e-9;

std::vector<std::size_t> Sample(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> idx;
  if (cap == 0 || n <= cap) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  } else {
    idx.resize(cap);
    for (std::size_t i = 0; i < cap; ++i) idx[i] = i * n / cap;
  }
  return idx;
}

void CheckPiece(const RegularPiece& p) {
  const int ell = static_cast<int>(p.sigma.size());
  Require(ell >= 1 && p.T >= 1 && p.measure.depth() == p.T * ell,
          ErrorCode::kDepthMismatch, "piece depth must equal T*ell");
  Require(!p.measure.empty(), ErrorCode::kEmptySupport, "empty piece");
  const int d = p.measure.dim();
  for (double s : p.sigma)
    Require(s >= 0 && s <= d, ErrorCode::kInvalidArgument, "sigma_j outside [0,d]");
}

ScaleDecomposition Skeleton(const RegularPiece& p, double eps) {
  ScaleDecomposition dec;
  dec.d = p.measure.dim();
  dec.T = p.T;
  dec.ell = static_cast<int>(p.sigma.size());
  dec.eps = eps;
  return dec;
}

void TakeIntervals(ScaleDecomposition& dec, const IntervalDecomposition& id,
                   const PLFunction& f) {
  for (const auto& iv : id.intervals)
    dec.intervals.push_back({iv.lo, iv.hi, dec.d * SlopeIdx(f, iv.lo, iv.hi)});
  for (const auto& w : id.warnings) dec.warnings.push_back(w);
}

}  // namespace

PLFunction BranchingFunction(std::span<const double> sigma, int d) {
  Require(d >= 1, ErrorCode::kInvalidArgument, "dimension must be positive");
  Require(!sigma.empty(), ErrorCode::kInvalidArgument, "empty sigma");
  const int ell = static_cast<int>(sigma.size());
  std::vector<double> v(ell + 1, 0.0);
  double acc = 0;
  for (int j = 1; j <= ell; ++j) {
    acc += sigma[j - 1];
    v[j] = acc / d;
  }
  return PLFunction(0.0, ell, std::move(v));
}

PLFunction BranchingFunction(const RegularPiece& piece) {
  return BranchingFunction(piece.sigma, piece.measure.dim());
}

RegularPiece MakeRegularPiece(const DyadicMeasure& mu, std::vector<double> sigma,
                              int T) {
  auto chk = IsRegular(mu, sigma, T);
  if (!chk.regular) {
    const auto& v = *chk.violation;
    Fail(ErrorCode::kHypothesisFailed,
         "measure is not regular at block " + std::to_string(v.block) +
             " (ratio " + std::to_string(v.ratio) + ")");
  }
  RegularPiece p;
  p.support = mu.support();
  p.sigma = std::move(sigma);
  p.T = T;
  p.measure = mu.normalized();
  p.mass = 1.0;
  return p;
}

NonConcentration CheckNonConcentration(const DyadicMeasure& mu, double u,
                                       std::size_t max_centers) {
  Require(!mu.empty(), ErrorCode::kEmptySupport, "empty measure");
  const int d = mu.dim();
  const int m = mu.depth();
  NonConcentration out;
  // |X| = N 2^{-dm}, so |X|^{1/d} = N^{1/d} 2^{-m}.
  out.radius = std::pow(static_cast<double>(mu.size()), 1.0 / d) * std::exp2(-m);
  out.bound = std::exp2(-u * m);
  auto idx = Sample(mu.size(), max_centers);
  std::vector<double> got(idx.size());
  ParallelFor(idx.size(), [&](std::size_t i) {
    std::vector<double> x(d);
    mu.center(idx[i], x.data());
    got[i] = mu.ball_mass(x, out.radius);
  });
  for (double g : got) out.max_mass = std::max(out.max_mass, g);
  out.centers = idx.size();
  out.ok = out.max_mass <= out.bound * (1 + 1e-12);
  return out;
}

VerificationReport VerifyScales(const RegularPiece& piece,
                                const ScaleDecomposition& dec,
                                VerifyOptions opt) {
  CheckPiece(piece);
  const DyadicMeasure& mu = piece.measure;
  const int d = dec.d, T = dec.T, ell = dec.ell, m = dec.m();
  VerificationReport rep;
  rep.two_sided = dec.ahlfors;
  rep.eps = dec.eps;
  rep.tau = dec.tau;
  rep.xi = dec.xi;
  auto fail = [&](bool& flag, const std::string& msg) {
    flag = false;
    if (rep.failures.size() < 32) rep.failures.push_back(msg);
  };

  // (i) and ordering.
  int prev = 0;
  for (const auto& iv : dec.intervals) {
    const std::string tag = "[" + std::to_string(iv.A) + "," + std::to_string(iv.B) + "]";
    if (iv.A < prev || iv.B <= iv.A || iv.B > ell)
      fail(rep.i_ok, "interval " + tag + " out of order or outside [0,ell]");
    if (iv.length() > iv.A) fail(rep.i_ok, "interval " + tag + " has B-A > A");
    if (iv.length() < dec.tau * ell - kTol)
      fail(rep.i_ok, "interval " + tag + " shorter than tau*ell");
    if (iv.alpha < -kTol || iv.alpha > d + kTol)
      fail(rep.i_ok, "alpha outside [0,d] on " + tag);
    prev = iv.B;
  }

  // (iii) from the block exponents: alpha_j m_j = T (sigma_{A+1}+...+sigma_B).
  int covered = 0;
  for (const auto& iv : dec.intervals) {
    double s = 0;
    for (int k = iv.A; k < iv.B; ++k) s += piece.sigma[k];
    rep.sum_alpha_m += T * s;
    covered += iv.length();
  }
  rep.iii_target = (Beta(piece.sigma) - dec.eps) * m;
  if (rep.sum_alpha_m < rep.iii_target - kTol)
    fail(rep.iii_ok, "sum alpha_j m_j below (beta - eps) m");

  rep.gap_blocks = ell - covered;
  rep.gap_bound = dec.eps * ell;
  if (rep.gap_blocks > rep.gap_bound + kTol)
    fail(rep.gaps_ok, "uncovered blocks exceed eps*ell");

  if (!dec.ahlfors) {
    for (const auto& iv : dec.intervals)
      if (iv.alpha >= dec.xi - kTol && iv.alpha <= d - dec.xi + kTol)
        rep.iv_mass += dec.m(iv);
    rep.iv_target = dec.xi * m;
    if (!(dec.xi > 0) || rep.iv_mass < rep.iv_target - kTol)
      fail(rep.iv_ok, "mid-exponent scales below xi*m");
  }

  // (ii): dyadic radii 2^{-k}, k = 0..m_j, centered at cells of mu^Q.
  for (const auto& iv : dec.intervals) {
    ScaleCheck sc;
    sc.A = iv.A;
    sc.B = iv.B;
    sc.alpha = iv.alpha;
    sc.m = dec.m(iv);
    auto cubes = mu.level_masses(T * iv.A);
    sc.cubes_total = cubes.size();
    auto pick = Sample(cubes.size(), opt.max_cubes);
    sc.cubes_checked = pick.size();
    struct Slot {
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      std::size_t probes = 0;
    };
    std::vector<Slot> slots(pick.size());
    ParallelFor(pick.size(), [&](std::size_t i) {
      CubeIndex q = KeyToCube(cubes[pick[i]].first, d, T * iv.A);
      DyadicMeasure mq = mu.conditional(q);
      auto centers = Sample(mq.size(), opt.max_centers);
      std::vector<double> x(d);
      Slot& sl = slots[i];
      for (std::size_t c : centers) {
        mq.center(c, x.data());
        for (int k = 0; k <= sc.m; ++k) {
          double w = mq.ball_mass(x, std::exp2(-k));
          double e = (std::log2(w) + iv.alpha * k) / sc.m;
          sl.hi = std::max(sl.hi, e);
          sl.lo = std::min(sl.lo, e);
          ++sl.probes;
        }
      }
    });
    sc.max_excess = -std::numeric_limits<double>::infinity();
    sc.min_excess = std::numeric_limits<double>::infinity();
    for (const auto& sl : slots) {
      sc.max_excess = std::max(sc.max_excess, sl.hi);
      sc.min_excess = std::min(sc.min_excess, sl.lo);
      sc.probes += sl.probes;
    }
    double need = dec.ahlfors ? std::max(sc.max_excess, -sc.min_excess) : sc.max_excess;
    rep.eps_needed = std::max(rep.eps_needed, need);
    const std::string tag = "[" + std::to_string(iv.A) + "," + std::to_string(iv.B) + "]";
    if (sc.max_excess > dec.eps + kTol)
      fail(rep.ii_ok, "upper Frostman bound fails on " + tag);
    if (dec.ahlfors && sc.min_excess < -dec.eps - kTol)
      fail(rep.ii_ok, "lower Frostman bound fails on " + tag);
    rep.scales.push_back(sc);
  }
  return rep;
}

MultiscaleResult FrostmanMultiscale(const RegularPiece& piece, double u,
                                    double eps, VerifyOptions opt) {
  CheckPiece(piece);
  Require(u > 0, ErrorCode::kInvalidArgument, "u must be positive");
  Require(eps > 0, ErrorCode::kInvalidArgument, "eps must be positive");
  Require(eps >= 4.0 / piece.T, ErrorCode::kEpsTooSmallForT,
          "eps = " + std::to_string(eps) + " below 4/T = " +
              std::to_string(4.0 / piece.T));
  const DyadicMeasure& mu = piece.measure;
  const int d = mu.dim();
  const int ell = static_cast<int>(piece.sigma.size());

  NonConcentration nc = CheckNonConcentration(mu, u);
  if (!nc.ok)
    Fail(ErrorCode::kNonConcentrationFailed,
         "ball of radius " + std::to_string(nc.radius) + " carries mass " +
             std::to_string(nc.max_mass) + " > 2^{-um} = " + std::to_string(nc.bound));

  PLFunction f = BranchingFunction(piece);
  ScaleDecomposition dec = Skeleton(piece, eps);
  dec.s = Beta(piece.sigma) / d;
  Require(dec.s > 0 && dec.s < 1, ErrorCode::kHypothesisFailed,
          "beta/d = " + std::to_string(dec.s) + " not in (0,1)");
  dec.t = f.eval((1 - dec.s) * ell) / ell;
  Require(dec.t >= u / (2.0 * d) - kTol, ErrorCode::kHypothesisFailed,
          "f((1-s)ell)/ell = " + std::to_string(dec.t) + " below u/(2d) = " +
              std::to_string(u / (2.0 * d)));
  // On short lattices the initial 4 sigma block of the interval decomposition
  // may not fit before (1-s)ell. Then f is resampled R times finer and the
  // pieces are snapped back to block boundaries, which doubles the level.
  const double sig = SuperlinearSigma(dec.s, dec.t);
  auto fits = [&](int r) {
    const int units = r * ell;
    const int su = std::max(1, static_cast<int>(std::ceil(sig * units - 1e-9)));
    return 4 * su <= static_cast<int>(std::floor((1 - dec.s) * units + 1e-9));
  };
  int R = 1;
  while (R < 256 && !fits(R)) R *= 2;

  SuperlinearResult res;
  if (R == 1) {
    dec.eps_lip = std::min(SuperlinearEps1(), eps / (2.0 * d));
    res = SuperlinearDecomposition(f, dec.s, dec.t, dec.eps_lip);
    TakeIntervals(dec, res.dec, f);
    dec.tau = res.tau;
  } else {
    dec.eps_lip = std::min(SuperlinearEps1(), eps / (4.0 * d));
    PLFunction fine = PLFunction::Sample(0.0, ell, R * ell, [&](double x) { return f.eval(x); });
    res = SuperlinearDecomposition(fine, dec.s, dec.t, dec.eps_lip);
    IntervalDecomposition snapped = SnapEndpoints(res.dec, fine, ell);
    for (auto& iv : snapped.intervals) {
      iv.lo /= R;
      iv.hi /= R;
    }
    TakeIntervals(dec, snapped, f);
    // tau/2 survives snapping only for pieces of at least 4 blocks
    dec.tau = snapped.tau;
    for (const auto& iv : dec.intervals)
      dec.tau = std::min(dec.tau, static_cast<double>(iv.length()) / ell);
    dec.warnings.push_back("block grid refined " + std::to_string(R) +
                           "x, endpoints snapped to blocks");
  }
  dec.xi = res.xi;
  if (res.early_exit) dec.warnings.push_back("block of class I4 found");

  MultiscaleResult out{dec, VerifyScales(piece, dec, opt)};
  out.report.eq41 = nc;
  return out;
}

MultiscaleResult AhlforsMultiscale(const RegularPiece& piece, double eps,
                                   VerifyOptions opt) {
  CheckPiece(piece);
  Require(eps > 0, ErrorCode::kInvalidArgument, "eps must be positive");
  const int d = piece.measure.dim();
  const int ell = static_cast<int>(piece.sigma.size());
  PLFunction f = BranchingFunction(piece);
  ScaleDecomposition dec = Skeleton(piece, eps);
  dec.ahlfors = true;
  dec.s = Beta(piece.sigma) / d;
  // The graded cover returns 2 eps_g-linear pieces; 2d times that is eps.
  dec.eps_lip = std::min(0.5, eps / (4.0 * d));
  IntervalDecomposition id = CoverByLinearGraded(f, 0, ell, dec.eps_lip);
  TakeIntervals(dec, id, f);
  dec.tau = id.tau;
  return {dec, VerifyScales(piece, dec, opt)};
}

}  // namespace frostlab
