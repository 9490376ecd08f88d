#include "frostlab/plates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "frostlab/parallel.hpp"
#include "frostlab/proj.hpp"

namespace frostlab {

namespace {

double Dot(const double* a, const double* b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

double Fit(const std::vector<double>& r, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(y[i] > 0)) continue;
    double a = std::log2(r[i]), b = std::log2(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++n;
  }
  double den = n * sxx - sx * sx;
  return n >= 2 && den > 0 ? (n * sxy - sx * sy) / den : 0.0;
}

std::vector<double> Centers(const DyadicMeasure& mu) {
  std::vector<double> c(mu.size() * mu.dim());
  for (std::size_t i = 0; i < mu.size(); ++i) mu.center(i, c.data() + i * mu.dim());
  return c;
}

void RequirePlanar(const DyadicMeasure& mu) {
  Require(mu.dim() == 2, ErrorCode::kDimensionMismatch, "tube nets are planar (d = 2)");
}

}  // namespace

std::vector<double> CubeCenter(int d) { return std::vector<double>(d, 0.5); }
double ClipRadius(int d) { return std::sqrt(static_cast<double>(d)) / 2; }

double Plate::distance(const double* x) const {
  std::vector<double> v(d());
  for (int i = 0; i < d(); ++i) v[i] = x[i] - base[i];
  return DistToPlane(v, plane);
}

bool Plate::contains(const double* x) const {
  double r2 = 0;
  for (int i = 0; i < d(); ++i) r2 += (x[i] - 0.5) * (x[i] - 0.5);
  return distance(x) < width && r2 <= d() / 4.0 + 1e-12;
}

Plate MakePlate(KPlane plane, std::vector<double> base, double width) {
  Require(static_cast<int>(base.size()) == plane.d, ErrorCode::kDimensionMismatch,
          "base point dimension");
  Require(width > 0, ErrorCode::kInvalidArgument, "plate width must be positive");
  double r2 = 0;
  for (double b : base) r2 += (b - 0.5) * (b - 0.5);
  Require(std::sqrt(r2) <= ClipRadius(plane.d) + 1e-12, ErrorCode::kInvalidArgument,
          "plate base outside the clip ball");
  return {std::move(plane), std::move(base), width};
}

double PlateMass(const DyadicMeasure& nu, const Plate& p) {
  Require(nu.dim() == p.d(), ErrorCode::kDimensionMismatch, "plate dimension");
  std::vector<double> x(nu.dim());
  double s = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    nu.center(i, x.data());
    if (p.contains(x.data())) s += nu.mass(i);
  }
  return s;
}

bool TubeContains(const Plate& T, const Plate& W) {
  Require(T.k() == 1 && W.k() == 1 && T.d() == W.d(), ErrorCode::kInvalidArgument,
          "tube containment needs two 1-plates");
  const int d = W.d();
  const double* u = W.plane.row(0);
  std::vector<double> p(d);
  for (int i = 0; i < d; ++i) p[i] = W.base[i] - 0.5;
  const double R = ClipRadius(d) + W.width;
  double b = Dot(p.data(), u, d);
  double disc = b * b - (Dot(p.data(), p.data(), d) - R * R);
  if (disc <= 0) return true;  // W misses the clip ball
  double h = std::sqrt(disc);
  for (double s : {-b - h, -b + h}) {
    std::vector<double> e(d);
    for (int i = 0; i < d; ++i) e[i] = W.base[i] + s * u[i];
    if (T.distance(e.data()) + W.width > T.width) return false;
  }
  return true;
}

double TubeAngle(const Plate& a, const Plate& b) {
  Require(a.k() == 1 && b.k() == 1, ErrorCode::kInvalidArgument, "tube angle needs 1-plates");
  double c = std::fabs(Dot(a.plane.row(0), b.plane.row(0), a.d()));
  return std::acos(std::min(1.0, c));
}

double TubeNet::angle(int a) const { return a * std::numbers::pi / dirs; }
double TubeNet::offset(int j) const { return -R + j * delta / 2; }

long TubeNet::bin(int a, const double* x) const {
  double t = -sin_a[a] * (x[0] - 0.5) + cos_a[a] * (x[1] - 0.5);
  return static_cast<long>(std::floor((t + R) / (delta / 2)));
}

bool TubeNet::in_tube(int a, int j, const double* x) const {
  long b = bin(a, x);
  return b >= j - 2 && b <= j + 1;
}

Plate TubeNet::tube(int a, int j) const {
  double phi = angle(a);
  double o = offset(j);
  return {MakeKPlane(2, {std::cos(phi), std::sin(phi)}),
          {0.5 - o * std::sin(phi), 0.5 + o * std::cos(phi)},
          delta};
}

TubeNet MakeTubeNet(double delta) {
  Require(delta > 0 && delta <= 1, ErrorCode::kInvalidArgument, "delta in (0,1]");
  TubeNet n;
  n.delta = delta;
  n.R = ClipRadius(2);
  n.dirs = static_cast<int>(std::ceil(2 * std::numbers::pi / delta));
  n.offsets = static_cast<int>(std::ceil(4 * n.R / delta)) + 1;
  for (int a = 0; a < n.dirs; ++a) {
    n.cos_a.push_back(std::cos(n.angle(a)));
    n.sin_a.push_back(std::sin(n.angle(a)));
  }
  return n;
}

std::vector<NetTube> HeavyNetTubes(const DyadicMeasure& nu, const TubeNet& net,
                                   double threshold) {
  RequirePlanar(nu);
  auto c = Centers(nu);
  std::vector<std::vector<NetTube>> per(net.dirs);
  ParallelFor(static_cast<std::size_t>(net.dirs), [&](std::size_t a) {
    std::vector<double> bins(net.offsets + 4, 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
      long b = net.bin(static_cast<int>(a), c.data() + 2 * i);
      bins[std::clamp<long>(b, 0, net.offsets + 3)] += nu.mass(i);
    }
    for (int j = 0; j < net.offsets; ++j) {
      double s = 0;
      for (int b = std::max(0, j - 2); b <= j + 1; ++b) s += bins[b];
      if (s >= threshold) per[a].push_back({static_cast<int>(a), j, s});
    }
  });
  std::vector<NetTube> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const NetTube& x, const NetTube& y) { return x.mass > y.mass; });
  return out;
}

BallDecay BallNonconcentration(const DyadicMeasure& mu, std::span<const double> r_list) {
  RequirePlanar(mu);
  const int m = mu.depth();
  Require(m <= 11, ErrorCode::kOutOfRange, "ball nets use a dense grid (depth <= 11)");
  const long n = 1L << m;
  const double h = 1.0 / n;
  std::vector<double> grid(n * n, 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto q = mu.cell(i);
    grid[q.coords[1] * n + q.coords[0]] += mu.mass(i);
  }
  auto sup = [&](double step, double r) {
    const long g = static_cast<long>(std::ceil(1.0 / step)) + 1;
    std::vector<double> rows(g, 0.0);
    ParallelFor(static_cast<std::size_t>(g), [&](std::size_t iy) {
      double y = iy * step, best = 0;
      for (long ix = 0; ix < g; ++ix) {
        double x = ix * step, s = 0;
        long x0 = std::max(0L, static_cast<long>(std::floor((x - r) * n)));
        long x1 = std::min(n - 1, static_cast<long>(std::floor((x + r) * n)));
        long y0 = std::max(0L, static_cast<long>(std::floor((y - r) * n)));
        long y1 = std::min(n - 1, static_cast<long>(std::floor((y + r) * n)));
        for (long b = y0; b <= y1; ++b) {
          double dy = (b + 0.5) * h - y;
          for (long a = x0; a <= x1; ++a) {
            double w = grid[b * n + a];
            if (w == 0) continue;
            double dx = (a + 0.5) * h - x;
            if (dx * dx + dy * dy <= r * r) s += w;
          }
        }
        best = std::max(best, s);
      }
      rows[iy] = best;
    });
    return *std::max_element(rows.begin(), rows.end());
  };
  BallDecay out;
  for (double r : r_list) {
    Require(r > 0 && r <= 1, ErrorCode::kInvalidArgument, "radius in (0,1]");
    out.r.push_back(r);
    out.sup_net.push_back(sup(r / 2, r));
    out.sup_upper.push_back(sup(r / 2, 2 * r));
  }
  out.exponent = Fit(out.r, out.sup_net);
  return out;
}

HeavyStructure HeavyPlateStructure(const DyadicMeasure& nu, double delta, double eta,
                                   double kappa, double C_nu) {
  RequirePlanar(nu);
  Require(eta > 0 && kappa > 0 && C_nu > 0, ErrorCode::kInvalidArgument,
          "eta, kappa and C_nu must be positive");
  Require(!nu.empty(), ErrorCode::kEmptySupport, "heavy plates of a null measure");
  HeavyStructure hs;
  hs.delta = delta;
  hs.eta = eta;
  hs.kappa = kappa;
  hs.C_nu = C_nu;
  const double dk = std::pow(delta, kappa);
  const double rr[] = {delta};
  auto balls = BallNonconcentration(nu, rr);
  if (balls.sup_net[0] > C_nu * dk * (1 + 1e-9))
    Fail(ErrorCode::kNuDecayFailed, "a delta-ball carries " + std::to_string(balls.sup_net[0]) +
                                        " > C_nu delta^kappa = " + std::to_string(C_nu * dk));
  hs.C_eff = std::max(C_nu, balls.sup_upper[0] / dk);
  hs.threshold = std::pow(delta, eta);
  hs.overlap = std::pow(delta, 2 * eta) / 2;
  hs.m_bound = 2 * std::pow(delta, -eta);

  // A heavy overlap W cap Y_j sits in a rhombus covered by
  // 2 (2 sqrt2 / sin + 1) balls of radius delta.
  const double den = hs.overlap - 2 * hs.C_eff * dk;
  hs.sin_bound = den > 0 ? std::min(1.0, 4 * std::sqrt(2.0) * hs.C_eff * dk / den) : 1.0;
  const TubeNet net = MakeTubeNet(delta);
  hs.t_width = 3 * delta + (2 * net.R + 2 * delta) * hs.sin_bound;

  auto heavy = HeavyNetTubes(nu, net, hs.threshold);
  hs.heavy_candidates = heavy.size();
  auto c = Centers(nu);
  double tot = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) tot += nu.mass(i);

  std::vector<std::vector<std::size_t>> cells;  // per accepted Y_i
  double S = 0, sum_sq = 0;
  for (const NetTube& w : heavy) {
    std::vector<double> inter;
    bool ok = true;
    for (std::size_t i = 0; i < hs.Y.size() && ok; ++i) {
      double s = 0;
      for (std::size_t p : cells[i])
        if (net.in_tube(w.a, w.j, c.data() + 2 * p)) s += nu.mass(p);
      inter.push_back(s);
      if (s > hs.overlap) ok = false;
    }
    if (!ok) continue;
    std::vector<std::size_t> mine;
    for (std::size_t p = 0; p < nu.size(); ++p)
      if (net.in_tube(w.a, w.j, c.data() + 2 * p)) mine.push_back(p);
    cells.push_back(std::move(mine));
    hs.Y.push_back(w);
    S += w.mass;
    sum_sq += w.mass;
    for (double s : inter) sum_sq += 2 * s;
    GreedyStep st;
    st.m = hs.M();
    st.S = S;
    st.sum_sq = sum_sq;
    const double m2 = static_cast<double>(st.m) * st.m;
    st.ok = S * S <= tot * sum_sq * (1 + 1e-12) + 1e-15 &&
            sum_sq < tot * (S + m2 * hs.overlap) + 1e-15;
    hs.steps_ok = hs.steps_ok && st.ok;
    hs.steps.push_back(st);
    Require(st.m <= hs.m_bound, ErrorCode::kInternal, "greedy family exceeds 2 delta^-eta");
  }
  for (const NetTube& y : hs.Y) {
    Plate t = net.tube(y.a, y.j);
    t.width = hs.t_width;
    hs.T.push_back(std::move(t));
  }
  std::vector<char> inside(heavy.size(), 0);
  ParallelFor(heavy.size(), [&](std::size_t h) {
    Plate w = net.tube(heavy[h].a, heavy[h].j);
    for (const Plate& t : hs.T)
      if (TubeContains(t, w)) {
        inside[h] = 1;
        break;
      }
  });
  for (char v : inside) hs.uncontained += v ? 0 : 1;
  return hs;
}

RadialReport RadialPrune(const DyadicMeasure& mu, const DyadicMeasure& nu, double delta0,
                         double eta, int depth, RadialOptions opt) {
  RequirePlanar(mu);
  RequirePlanar(nu);
  Require(delta0 > 0 && delta0 < 1 && eta > 0 && eta < 1 && depth >= 1,
          ErrorCode::kInvalidArgument, "need delta0, eta in (0,1) and depth >= 1");
  Require(std::pow(delta0, std::exp2(depth)) >= std::ldexp(1.0, -nu.depth()) * (1 - 1e-12),
          ErrorCode::kPreconditionFailed, "delta_N below the resolution of nu");
  RadialReport rep;
  {
    std::vector<double> rs;
    for (int k = 1; k <= std::min({8, mu.depth(), nu.depth()}); ++k)
      rs.push_back(std::ldexp(1.0, -k));
    rep.mu_exponent = BallNonconcentration(mu, rs).exponent;
    rep.nu_exponent = BallNonconcentration(nu, rs).exponent;
  }
  auto cm = Centers(mu);
  auto cn = Centers(nu);
  std::vector<char> inE(mu.size(), 1), inK(nu.size(), 1);

  for (int n = 0; n < depth; ++n) {
    RadialStage st;
    st.n = n + 1;
    st.delta = std::pow(delta0, std::exp2(n + 1));
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (inE[i]) st.mu_E += mu.mass(i);
    std::vector<Cell<double>> kept;
    for (std::size_t i = 0; i < nu.size(); ++i)
      if (inK[i]) kept.push_back({nu.keys()[i], nu.mass(i)});
    if (kept.empty() || st.mu_E <= 0) {
      rep.degenerate = true;
      rep.stages.push_back(st);
      break;
    }
    DyadicMeasure nuK(2, nu.depth(), kept);
    const double rr[] = {st.delta};
    st.C_nu = std::max(BallNonconcentration(nuK, rr).sup_net[0] / std::pow(st.delta, opt.kappa),
                       1e-300);
    HeavyStructure hs = HeavyPlateStructure(nuK, st.delta, eta, opt.kappa, st.C_nu);
    st.M = hs.M();
    st.structure_ok = hs.ok();
    if (!st.structure_ok) rep.flags.push_back("structure_failed:" + std::to_string(st.n));

    const TubeNet net = MakeTubeNet(st.delta);
    auto heavy = HeavyNetTubes(nuK, net, hs.threshold);
    std::vector<std::vector<char>> heavy_j(net.dirs);
    for (auto& t : heavy) {
      if (heavy_j[t.a].empty()) heavy_j[t.a].assign(net.offsets, 0);
      heavy_j[t.a][t.j] = 1;
    }
    std::vector<char> bad(mu.size(), 0), badbad(mu.size(), 0);
    std::vector<std::vector<int>> member(mu.size());
    const double min_angle = std::pow(st.delta, eta);
    ParallelFor(mu.size(), [&](std::size_t i) {
      if (!inE[i]) return;
      const double* x = cm.data() + 2 * i;
      for (int a = 0; a < net.dirs && !bad[i]; ++a) {
        if (heavy_j[a].empty()) continue;
        long b = net.bin(a, x);
        for (long j = b - 1; j <= b + 2; ++j)
          if (j >= 0 && j < net.offsets && heavy_j[a][j]) {
            bad[i] = 1;
            break;
          }
      }
      if (!bad[i]) return;
      for (int t = 0; t < hs.M(); ++t)
        if (hs.T[t].contains(x)) member[i].push_back(t);
      for (std::size_t p = 0; p < member[i].size() && !badbad[i]; ++p)
        for (std::size_t q = p + 1; q < member[i].size(); ++q)
          if (TubeAngle(hs.T[member[i][p]], hs.T[member[i][q]]) >= min_angle) {
            badbad[i] = 1;
            break;
          }
    });
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (bad[i]) st.bad += mu.mass(i);
      if (badbad[i]) st.badbad += mu.mass(i);
    }
    if (st.bad <= st.mu_E / 2) {
      for (std::size_t i = 0; i < mu.size(); ++i)
        if (bad[i]) inE[i] = 0;
    } else {
      st.pruned = true;
      rep.concentration = true;
      std::vector<double> g(hs.M(), 0.0);
      for (std::size_t i = 0; i < mu.size(); ++i)
        if (bad[i] && !badbad[i])
          for (int t : member[i]) g[t] += mu.mass(i);
      int t0 = 0;
      for (int t = 1; t < hs.M(); ++t)
        if (g[t] > g[t0]) t0 = t;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        bool keep = inE[i] && bad[i] && !badbad[i] &&
                    std::find(member[i].begin(), member[i].end(), t0) != member[i].end();
        inE[i] = keep;
      }
      if (hs.M() > 0) {
        Plate P = hs.T[t0];
        P.width = std::pow(st.delta, eta / 2);
        for (std::size_t i = 0; i < nu.size(); ++i)
          if (inK[i] && P.contains(cn.data() + 2 * i)) {
            st.nu_loss += nu.mass(i);
            inK[i] = 0;
          }
        st.P = P;
      }
    }
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (inE[i]) st.mu_next += mu.mass(i);
    rep.loss_sum += st.nu_loss;
    rep.stages.push_back(std::move(st));
  }

  std::vector<Key> lk, kk;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (inE[i]) {
      lk.push_back(mu.keys()[i]);
      rep.mu_L += mu.mass(i);
    }
  for (std::size_t i = 0; i < nu.size(); ++i)
    if (inK[i]) {
      kk.push_back(nu.keys()[i]);
      rep.nu_K += nu.mass(i);
    }
  rep.L = DyadicSet(2, mu.depth(), lk);
  rep.K = DyadicSet(2, nu.depth(), kk);
  rep.budget_ok = rep.nu_K >= 0.5;
  if (lk.empty() || kk.empty()) rep.degenerate = true;
  if (rep.degenerate) rep.flags.push_back("degenerate");
  if (rep.concentration) rep.flags.push_back("concentration");
  if (!rep.budget_ok) rep.flags.push_back("budget_failed");
  if (rep.degenerate) return rep;

  const double dN = std::pow(delta0, std::exp2(depth));
  const double d1 = delta0 * delta0;
  for (int k = 0; k <= 60; ++k) {
    double r = std::ldexp(1.0, -k);
    if (r <= d1 * (1 + 1e-12) && r >= std::sqrt(dN) * (1 - 1e-12)) rep.r.push_back(r);
  }
  if (rep.r.empty()) return rep;
  std::vector<std::size_t> xs;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (inE[i]) xs.push_back(i);
  const std::size_t want = std::min<std::size_t>(xs.size(), std::max(1, opt.max_centers));
  const double h = std::ldexp(1.0, -nu.depth());
  for (std::size_t s = 0; s < want; ++s) {
    const double* x = cm.data() + 2 * xs[s * xs.size() / want];
    std::vector<double> pts, w;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (!inK[i]) continue;
      double dx = cn[2 * i] - x[0], dy = cn[2 * i + 1] - x[1];
      double r = std::hypot(dx, dy);
      if (r < h / 2) continue;
      pts.push_back(dx / r);
      pts.push_back(dy / r);
      w.push_back(nu.mass(i));
    }
    if (w.empty()) continue;
    auto fit = HyperplaneNonconcentration(MakeSphereMeasure(2, pts, w), rep.r);
    rep.sup.push_back(fit.sup_net);
    rep.fitted.push_back(fit.kappa);
  }
  return rep;
}

}  // namespace frostlab
