#include "frostlab/xlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <unordered_map>

#include "frostlab/entropy.hpp"
#include "frostlab/io.hpp"
#include "frostlab/multiscale.hpp"
#include "frostlab/parallel.hpp"
#include "frostlab/proj.hpp"
#include "frostlab/regular.hpp"

namespace frostlab {

namespace {

constexpr std::size_t kMaxCells = std::size_t{1} << 24;

template <class V>
V Param(const Json& p, const char* key, V def) {
  if (!p.is_object() || !p.contains(key)) return def;
  try {
    return p.at(key).get<V>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("parameter ") + key + ": " + e.what());
  }
}

DyadicMeasure UniformCells(int d, int m, std::vector<Key> keys) {
  Require(!keys.empty(), ErrorCode::kEmptySupport, "generator produced no cells");
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return UniformOn<double>(DyadicSet(d, m, std::move(keys)));
}

// Bins points of [0,1)^d at level m; points on the upper faces go to the
// last cell.
DyadicMeasure BinPoints(int d, int m, const std::vector<double>& pts,
                        const std::vector<double>& w) {
  const std::size_t n = w.size();
  const double scale = std::ldexp(1.0, m);
  const auto top = static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1);
  std::vector<Cell<double>> cells;
  cells.reserve(n);
  std::vector<std::uint32_t> c(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      double x = pts[i * d + k];
      Require(x >= 0 && x <= 1, ErrorCode::kOutOfRange, "generated point outside the unit cube");
      c[k] = std::min<std::uint32_t>(top, static_cast<std::uint32_t>(x * scale));
    }
    cells.push_back({EncodeKey(c, m), w[i]});
  }
  return DyadicMeasure(d, m, std::move(cells)).normalized();
}

std::vector<std::uint32_t> DigitLine(int T, int blocks, const std::vector<int>& keep) {
  std::vector<std::uint32_t> idx{0};
  for (int b = 0; b < blocks; ++b) {
    std::vector<std::uint32_t> nxt;
    nxt.reserve(idx.size() * keep.size());
    for (auto i : idx)
      for (int g : keep) nxt.push_back((i << T) | static_cast<std::uint32_t>(g));
    idx.swap(nxt);
  }
  return idx;
}

DyadicMeasure CantorProduct(const Json& p) {
  const int d = Param(p, "d", 2);
  const int m = Param(p, "m", 8);
  const int T = Param(p, "T", 2);
  Require(T >= 1 && T <= 16, ErrorCode::kInvalidArgument, "T out of range");
  std::vector<int> keep = Param(p, "keep", std::vector<int>{0, (1 << T) - 1});
  CheckShape(d, m);
  Require(m % T == 0, ErrorCode::kDepthMismatch, "m must be a multiple of T");
  Require(!keep.empty(), ErrorCode::kInvalidArgument, "empty digit set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int g : keep)
    Require(g >= 0 && g < (1 << T), ErrorCode::kInvalidArgument, "digit out of range");
  const double cells = std::pow(double(keep.size()), double(m / T) * d);
  Require(cells <= double(kMaxCells), ErrorCode::kSupportTooLarge,
          "product Cantor set too large");
  auto line = DigitLine(T, m / T, keep);
  std::vector<Key> keys;
  keys.reserve(static_cast<std::size_t>(cells));
  std::vector<std::size_t> pos(d, 0);
  std::vector<std::uint32_t> c(d);
  while (true) {
    for (int k = 0; k < d; ++k) c[k] = line[pos[k]];
    keys.push_back(EncodeKey(c, m));
    int k = 0;
    while (k < d && ++pos[k] == line.size()) pos[k++] = 0;
    if (k == d) break;
  }
  return UniformCells(d, m, std::move(keys));
}

DyadicMeasure IfsSelfSimilar(const Json& p) {
  const int d = Param(p, "d", 2);
  const int m = Param(p, "m", 8);
  const double r = Param(p, "ratio", 1.0 / 3.0);
  CheckShape(d, m);
  Require(r > 0 && r < 1, ErrorCode::kInvalidArgument, "ratio must be in (0,1)");
  std::vector<std::vector<double>> t;
  if (p.is_object() && p.contains("translations")) {
    t = Param(p, "translations", t);
  } else {
    for (int i = 0; i < (1 << d); ++i) {
      if (i == (1 << d) - 1 && d > 1) continue;
      std::vector<double> v(d);
      for (int k = 0; k < d; ++k) v[k] = (i >> k & 1) ? 1 - r : 0.0;
      t.push_back(v);
    }
  }
  Require(!t.empty(), ErrorCode::kInvalidArgument, "no maps");
  for (const auto& v : t) {
    Require(static_cast<int>(v.size()) == d, ErrorCode::kDimensionMismatch,
            "translation dimension");
    for (double x : v)
      Require(x >= 0 && x + r <= 1, ErrorCode::kOutOfRange,
              "map does not send the unit cube into itself");
  }
  std::vector<double> w = Param(p, "weights", std::vector<double>(t.size(), 1.0));
  Require(w.size() == t.size(), ErrorCode::kDimensionMismatch, "weights size");
  const int n = static_cast<int>(std::ceil(m / -std::log2(r) - 1e-9));
  Require(std::pow(double(t.size()), n) <= double(1 << 22), ErrorCode::kSupportTooLarge,
          "too many IFS words");
  // Points sum_k r^k t_{i_k} over words of length n, with product weights.
  std::vector<double> pts(d, 0.0), wt{1.0};
  double scale = 1.0;
  for (int lvl = 0; lvl < n; ++lvl) {
    std::vector<double> np, nw;
    np.reserve(pts.size() * t.size());
    for (std::size_t i = 0; i < wt.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j) {
        for (int k = 0; k < d; ++k) np.push_back(pts[i * d + k] + scale * t[j][k]);
        nw.push_back(wt[i] * w[j]);
      }
    pts.swap(np);
    wt.swap(nw);
    scale *= r;
  }
  return BinPoints(d, m, pts, wt);
}

DyadicMeasure TrainTrackMeasure(const Json& p) {
  const int m = Param(p, "m", 8);
  TrainTrack tt = MakeTrainTrack(m, Param(p, "rows", 0));
  std::vector<Key> keys;
  for (const auto& e : tt.E) {
    std::vector<std::uint32_t> c{static_cast<std::uint32_t>(std::ldexp(e[0], m)),
                                 static_cast<std::uint32_t>(std::ldexp(e[1], m))};
    keys.push_back(EncodeKey(c, m));
  }
  return UniformCells(2, m, std::move(keys));
}

DyadicMeasure Grid(const Json& p) {
  const int d = Param(p, "d", 2);
  const int m = Param(p, "m", 8);
  CheckShape(d, m);
  Require(d * m <= 26, ErrorCode::kSupportTooLarge, "grid too large");
  return UniformOn<double>(DyadicSet::Full(d, m));
}

DyadicMeasure SphereSample(const Json& p) {
  const int d = Param(p, "d", 2);
  const int m = Param(p, "m", 8);
  Require(d == 2 || d == 3, ErrorCode::kInvalidArgument, "sphere_sample needs d in {2,3}");
  CheckShape(d, m);
  std::vector<double> c = Param(p, "center", std::vector<double>(d, 0.5));
  const double R = Param(p, "radius", 0.25);
  Require(static_cast<int>(c.size()) == d, ErrorCode::kDimensionMismatch, "center dimension");
  Require(R > 0, ErrorCode::kInvalidArgument, "radius must be positive");
  const int def = d == 2 ? (1 << std::min(m + 3, 22)) : (1 << std::min(2 * m + 2, 22));
  const int n = Param(p, "samples", def);
  Require(n >= 1, ErrorCode::kInvalidArgument, "samples must be positive");
  SphereMeasure s = d == 2 ? UniformCircle(n) : FibonacciSphere(n);
  std::vector<double> pts(s.points.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (int k = 0; k < d; ++k) pts[i * d + k] = c[k] + R * s.point(i)[k];
  return BinPoints(d, m, pts, s.weights);
}

DyadicMeasure RandomTreeMeasure(const Json& p) {
  const int d = Param(p, "d", 2);
  const int m = Param(p, "m", 8);
  const auto seed = Param<std::uint64_t>(p, "seed", 1);
  const double keep = Param(p, "keep_prob", 0.6);
  CheckShape(d, m);
  Require(keep > 0 && keep <= 1, ErrorCode::kInvalidArgument, "keep_prob in (0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Cell<double>> cells;
  struct Node {
    Key key;
    int level;
    double w;
  };
  std::vector<Node> stack{{0, 0, 1.0}};
  const int nc = 1 << d;
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (n.level == m) {
      cells.push_back({n.key, n.w});
      Require(cells.size() <= kMaxCells, ErrorCode::kSupportTooLarge, "random tree too large");
      continue;
    }
    std::vector<double> wt(nc, 0.0);
    double s = 0;
    while (s == 0) {
      for (int c = 0; c < nc; ++c) {
        wt[c] = U(rng) < keep ? U(rng) + 0.05 : 0.0;
        s += wt[c];
      }
    }
    for (int c = nc - 1; c >= 0; --c)
      if (wt[c] > 0) stack.push_back({(n.key << d) | Key(c), n.level + 1, n.w * wt[c] / s});
  }
  return DyadicMeasure(d, m, std::move(cells)).normalized();
}

DyadicMeasure Atom(const Json& p) {
  const int d = Param(p, "d", 2);
  const int m = Param(p, "m", 8);
  CheckShape(d, m);
  std::vector<std::uint32_t> idx = Param(p, "idx", std::vector<std::uint32_t>(d, 0));
  Require(static_cast<int>(idx.size()) == d, ErrorCode::kDimensionMismatch, "atom index");
  for (auto i : idx)
    Require(m >= 32 || i < (std::uint32_t{1} << m), ErrorCode::kOutOfRange, "atom index");
  return AtomMeasure<double>(d, m, CubeIndex{m, idx});
}

}  // namespace

std::vector<std::string> GeneratorNames() {
  return {"cantor_product", "ifs_self_similar", "train_track", "grid",
          "sphere_sample",  "random_tree",      "atom"};
}

DyadicMeasure Generate(const std::string& name, const Json& params) {
  if (name == "cantor_product") return CantorProduct(params);
  if (name == "ifs_self_similar") return IfsSelfSimilar(params);
  if (name == "train_track") return TrainTrackMeasure(params);
  if (name == "grid") return Grid(params);
  if (name == "sphere_sample") return SphereSample(params);
  if (name == "random_tree") return RandomTreeMeasure(params);
  if (name == "atom") return Atom(params);
  Fail(ErrorCode::kUnknownGenerator, "unknown generator '" + name + "'");
}

TrainTrack MakeTrainTrack(int m, int rows) {
  Require(m >= 2 && m % 2 == 0 && m <= 30, ErrorCode::kInvalidArgument,
          "train track needs an even m in [2,30]");
  const int half = 1 << (m / 2);
  if (rows == 0) rows = half;
  Require(rows >= 1 && rows <= (1 << m), ErrorCode::kInvalidArgument, "rows out of range");
  TrainTrack tt;
  tt.m = m;
  tt.delta = std::ldexp(1.0, -m);
  for (int i = 0; i < half; ++i) tt.X.push_back(std::ldexp(double(i), -m / 2));
  for (double x : tt.X)
    for (int j = 0; j < rows; ++j) tt.E.push_back({x, j * tt.delta});
  for (int j = 0; j < rows; ++j) tt.A.push_back({0.0, j * tt.delta});
  return tt;
}

std::vector<Point2> CellCorners(const DyadicSet& s) {
  Require(s.dim() == 2, ErrorCode::kDimensionMismatch, "planar set expected");
  std::vector<Point2> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CubeIndex q = s.cell(i);
    out[i] = {std::ldexp(double(q.coords[0]), -q.level),
              std::ldexp(double(q.coords[1]), -q.level)};
  }
  return out;
}

// ---- curve families ----

CurveFamily LineFamily() {
  CurveFamily f;
  f.name = "lines";
  f.G = [](double x, const Point2& a) { return a[0] * x + a[1]; };
  f.dGda = [](double x, const Point2&) { return Point2{x, 1.0}; };
  f.dGdx = [](double, const Point2& a) { return a[0]; };
  return f;
}

CurveFamily ParabolaFamily() {
  CurveFamily f;
  f.name = "parabolas";
  f.G = [](double x, const Point2& a) { return a[0] * x * x + a[1] * x; };
  f.dGda = [](double x, const Point2&) { return Point2{x * x, x}; };
  f.dGdx = [](double x, const Point2& a) { return 2 * a[0] * x + a[1]; };
  return f;
}

CurveFamily FamilyByName(const std::string& name) {
  if (name == "lines") return LineFamily();
  if (name == "parabolas") return ParabolaFamily();
  Fail(ErrorCode::kInvalidArgument, "unknown curve family '" + name + "'");
}

FamilyBounds SampleBounds(const CurveFamily& fam, const std::vector<Point2>& params,
                          double x_lo, double x_hi, int x_samples) {
  Require(!params.empty(), ErrorCode::kEmptySupport, "no parameters to sample");
  Require(x_samples >= 2 && x_hi > x_lo, ErrorCode::kInvalidArgument, "x grid");
  const double h = 1e-5;
  const std::size_t stride = std::max<std::size_t>(1, params.size() / 256);
  FamilyBounds b;
  b.grad_min = b.turn_min = INFINITY;
  auto dir = [&](double x, const Point2& a) {
    Point2 g = fam.dGda(x, a);
    double n = std::hypot(g[0], g[1]);
    return n > 0 ? Point2{g[0] / n, g[1] / n} : Point2{0, 0};
  };
  for (std::size_t i = 0; i < params.size(); i += stride) {
    const Point2& a = params[i];
    for (int k = 0; k < x_samples; ++k) {
      const double x = x_lo + (x_hi - x_lo) * k / (x_samples - 1);
      Point2 g = fam.dGda(x, a);
      b.grad_min = std::min(b.grad_min, std::hypot(g[0], g[1]));
      Point2 u1 = dir(x + h, a), u0 = dir(x - h, a);
      b.turn_min = std::min(b.turn_min, std::hypot(u1[0] - u0[0], u1[1] - u0[1]) / (2 * h));
      const double s = std::abs(fam.dGdx(x, a));
      b.slope = std::max(b.slope, s);
      double c2 = std::max({std::abs(fam.G(x, a)), s, std::abs(g[0]), std::abs(g[1])});
      c2 = std::max(c2, std::abs(fam.dGdx(x + h, a) - fam.dGdx(x - h, a)) / (2 * h));
      Point2 gp = fam.dGda(x + h, a), gm = fam.dGda(x - h, a);
      for (int j = 0; j < 2; ++j) c2 = std::max(c2, std::abs(gp[j] - gm[j]) / (2 * h));
      for (int j = 0; j < 2; ++j) {
        Point2 ap = a, am = a;
        ap[j] += h;
        am[j] -= h;
        Point2 qp = fam.dGda(x, ap), qm = fam.dGda(x, am);
        for (int l = 0; l < 2; ++l) c2 = std::max(c2, std::abs(qp[l] - qm[l]) / (2 * h));
      }
      b.c2_norm = std::max(b.c2_norm, c2);
      ++b.samples;
    }
  }
  b.c = std::min({b.grad_min, b.turn_min, b.c2_norm > 0 ? 1.0 / b.c2_norm : INFINITY});
  return b;
}

// ---- incidences ----

namespace {

// Grid buckets of side `cell` for neighbour queries.
class Buckets {
 public:
  Buckets(const std::vector<Point2>& pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t i = 0; i < pts.size(); ++i) map_[KeyOf(Idx(pts[i][0]), Idx(pts[i][1]))].push_back(i);
  }
  // Number of points within distance r (<= cell) of p, closed ball.
  std::size_t count(const Point2& p, double r) const {
    std::size_t n = 0;
    visit(p, [&](std::size_t j) {
      if (std::hypot(pts_[j][0] - p[0], pts_[j][1] - p[1]) <= r * (1 + 1e-12)) ++n;
    });
    return n;
  }
  template <class Fn>
  void visit(const Point2& p, Fn&& fn) const {
    const long long ix = Idx(p[0]), iy = Idx(p[1]);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = map_.find(KeyOf(ix + dx, iy + dy));
        if (it == map_.end()) continue;
        for (std::size_t j : it->second) fn(j);
      }
  }

 private:
  long long Idx(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
  static long long KeyOf(long long a, long long b) { return a * 2000003LL + b; }
  const std::vector<Point2>& pts_;
  double cell_;
  std::unordered_map<long long, std::vector<std::size_t>> map_;
};

}  // namespace

bool IsSeparated(const std::vector<Point2>& pts, double delta) {
  if (pts.size() < 2) return true;
  Require(delta > 0, ErrorCode::kInvalidArgument, "delta must be positive");
  Buckets b(pts, delta);
  const double lim = delta * (1 - 1e-12);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool ok = true;
    b.visit(pts[i], [&](std::size_t j) {
      if (j != i && std::hypot(pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]) < lim) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

bool IsSeparated(const std::vector<double>& xs, double delta) {
  std::vector<double> s(xs);
  std::sort(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] - s[i - 1] < delta * (1 - 1e-12)) return false;
  return true;
}

IncidenceResult IncidenceCount(const std::vector<Point2>& E, const std::vector<Point2>& A,
                               const CurveFamily& fam, double delta) {
  Require(delta > 0, ErrorCode::kInvalidArgument, "delta must be positive");
  Require(IsSeparated(E, delta), ErrorCode::kPreconditionFailed, "E is not delta-separated");
  Require(IsSeparated(A, delta), ErrorCode::kPreconditionFailed, "A is not delta-separated");
  IncidenceResult out;
  out.E = E.size();
  out.A = A.size();
  out.delta = delta;
  std::vector<Point2> pts(E);
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs;
  std::vector<std::size_t> start;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (i == 0 || pts[i][0] != pts[i - 1][0]) {
      xs.push_back(pts[i][0]);
      start.push_back(i);
    }
  start.push_back(pts.size());
  out.X = xs.size();
  if (E.empty() || A.empty()) return out;
  std::vector<double> ys(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ys[i] = pts[i][1];

  for (const auto& a : A)
    for (double x : xs) out.slope = std::max(out.slope, std::abs(fam.dGdx(x, a)));
  out.width = delta * std::sqrt(1 + out.slope * out.slope);

  std::vector<std::uint64_t> cnt(A.size()), mult(A.size());
  ParallelFor(A.size(), [&](std::size_t i) {
    std::uint64_t c = 0, mx = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double g = fam.G(xs[k], A[i]);
      auto lo = std::upper_bound(ys.begin() + start[k], ys.begin() + start[k + 1], g - out.width);
      auto hi = std::lower_bound(lo, ys.begin() + start[k + 1], g + out.width);
      auto n = static_cast<std::uint64_t>(hi - lo);
      c += n;
      mx = std::max(mx, n);
    }
    cnt[i] = c;
    mult[i] = mx;
  });
  for (std::size_t i = 0; i < A.size(); ++i) {
    out.count += cnt[i];
    out.multiplicity = std::max(out.multiplicity, mult[i]);
  }
  out.ratio = double(out.count) / (double(out.X) * double(out.A));
  return out;
}

AuditReport NonconcentrationAudit(const std::vector<Point2>& E, const std::vector<Point2>& A,
                                  const std::vector<double>& X, double delta, double kappa,
                                  double eps, std::size_t max_centers) {
  Require(delta > 0 && delta < 1, ErrorCode::kInvalidArgument, "delta must be in (0,1)");
  AuditReport r;
  r.delta = delta;
  r.kappa = kappa;
  r.eps = eps;
  std::vector<double> xs(X);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const double nx = double(xs.size()), na = double(A.size());

  r.size_lhs = double(E.size());
  r.size_rhs = std::pow(delta, -eps) * nx * std::sqrt(na);
  r.size_ok = r.size_lhs <= r.size_rhs;

  r.a_radius = delta * std::sqrt(na);
  r.a_bound = std::pow(delta, kappa) * na;
  if (!A.empty()) {
    const std::size_t stride =
        max_centers == 0 ? 1 : std::max<std::size_t>(1, (A.size() + max_centers - 1) / max_centers);
    std::vector<std::size_t> centers;
    for (std::size_t i = 0; i < A.size(); i += stride) centers.push_back(i);
    r.a_centers = centers.size();
    std::vector<std::size_t> c1(centers.size()), c2(centers.size());
    Buckets b1(A, r.a_radius), b2(A, 2 * r.a_radius);
    ParallelFor(centers.size(), [&](std::size_t i) {
      c1[i] = b1.count(A[centers[i]], r.a_radius);
      c2[i] = b2.count(A[centers[i]], 2 * r.a_radius);
    });
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (c1[i] > r.a_max) {
        r.a_max = c1[i];
        r.a_witness = A[centers[i]];
      }
      r.a_max_double = std::max(r.a_max_double, c2[i]);
    }
  }
  r.a_ok = double(r.a_max) <= r.a_bound;

  r.x_ok = true;
  for (double rad = 1.0; rad >= delta * (1 - 1e-12); rad /= 2) {
    AuditReport::XRow row;
    row.r = rad;
    row.bound = std::pow(delta, -eps) * std::pow(rad, kappa) * nx;
    for (double x : xs) {
      auto lo = std::lower_bound(xs.begin(), xs.end(), x - rad * (1 + 1e-12));
      auto hi = std::upper_bound(xs.begin(), xs.end(), x + rad * (1 + 1e-12));
      auto n = static_cast<std::size_t>(hi - lo);
      if (n > row.max) {
        row.max = n;
        row.witness = x;
      }
    }
    if (double(row.max) > row.bound) r.x_ok = false;
    r.x_rows.push_back(row);
  }
  return r;
}

// ---- sweeps ----

Quantiles QuantilesOf(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    double pos = p * (v.size() - 1);
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (pos - i) * (v[i + 1] - v[i]);
  };
  q.min = v.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = v.back();
  return q;
}

std::vector<double> SweepAngles(std::size_t n, bool random, std::uint64_t seed) {
  std::vector<double> out(n);
  if (!random) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::numbers::pi * double(i) / double(n);
    return out;
  }
  std::mt19937_64 rng(seed);
  for (auto& t : out) t = std::numbers::pi * (double(rng() >> 11) * 0x1.0p-53);
  return out;
}

namespace {

// Marks the 2^{-level} intervals meeting [a, b); near-integers snap.
struct Marker {
  double lo, inv;
  std::vector<char> hit;
  Marker(double lo_, double hi_, int level) : lo(lo_), inv(std::ldexp(1.0, level)) {
    hit.assign(static_cast<std::size_t>((hi_ - lo_) * inv) + 4, 0);
  }
  void mark(double a, double b) {
    double fa = (a - lo) * inv, fb = (b - lo) * inv;
    auto ka = static_cast<long long>(std::floor(fa + 1e-9));
    auto kb = static_cast<long long>(std::ceil(fb - 1e-9)) - 1;
    if (kb < ka) kb = ka;
    ka = std::max(0LL, ka);
    kb = std::min<long long>(kb, static_cast<long long>(hit.size()) - 1);
    for (long long k = ka; k <= kb; ++k) hit[k] = 1;
  }
  std::size_t count() const { return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1)); }
};

double Snap(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

}  // namespace

namespace {

std::vector<std::uint32_t> Corners(const DyadicSet& X) {
  Require(X.dim() == 2, ErrorCode::kDimensionMismatch, "planar set expected");
  std::vector<std::uint32_t> q(2 * X.size());
  for (std::size_t i = 0; i < X.size(); ++i) DecodeKey(X.keys()[i], 2, X.depth(), &q[2 * i]);
  return q;
}

// Counts at level and, from the same marks, at level - 2: a coarse interval
// is hit iff one of its four children is.
std::pair<std::size_t, std::size_t> ProjCounts(const std::vector<std::uint32_t>& q, int depth,
                                               double theta, int level) {
  Require(level >= 0 && level <= 26, ErrorCode::kOutOfRange, "level out of range");
  if (q.empty()) return {0, 0};
  const double c = Snap(std::cos(theta)), s = Snap(std::sin(theta));
  const double h = std::ldexp(1.0, -depth);
  const double lo_off = h * (std::min(0.0, c) + std::min(0.0, s));
  const double hi_off = h * (std::max(0.0, c) + std::max(0.0, s));
  Marker mk(-2.0, 2.0, level);
  const double ch = c * h, sh = s * h;
  for (std::size_t i = 0; i < q.size(); i += 2) {
    const double t = ch * q[i] + sh * q[i + 1];
    mk.mark(t + lo_off, t + hi_off);
  }
  // -2 is a multiple of every 2^{-level}, so the coarse grid is aligned.
  std::size_t coarse = 0;
  for (std::size_t k = 0; k < mk.hit.size(); k += 4) {
    bool any = false;
    for (std::size_t j = k; j < k + 4 && j < mk.hit.size(); ++j) any |= mk.hit[j] != 0;
    coarse += any;
  }
  return {mk.count(), coarse};
}

}  // namespace

std::size_t ProjectionCount(const DyadicSet& X, double theta, int level) {
  return ProjCounts(Corners(X), X.depth(), theta, level).first;
}

std::size_t DistanceCount(const DyadicSet& X, const Point2& y, int level) {
  Require(X.dim() == 2, ErrorCode::kDimensionMismatch, "planar set expected");
  Require(level >= 0 && level <= 26, ErrorCode::kOutOfRange, "level out of range");
  if (X.empty()) return 0;
  const double h = std::ldexp(1.0, -X.depth());
  double far = 0;
  for (double cx : {0.0, 1.0})
    for (double cy : {0.0, 1.0}) far = std::max(far, std::hypot(cx - y[0], cy - y[1]));
  Marker mk(0.0, far + 1.0, level);
  std::uint32_t q[2];
  for (Key k : X.keys()) {
    DecodeKey(k, 2, X.depth(), q);
    const double x0 = q[0] * h, y0 = q[1] * h;
    const double dx = std::max({x0 - y[0], 0.0, y[0] - x0 - h});
    const double dy = std::max({y0 - y[1], 0.0, y[1] - y0 - h});
    const double fx = std::max(std::abs(x0 - y[0]), std::abs(x0 + h - y[0]));
    const double fy = std::max(std::abs(y0 - y[1]), std::abs(y0 + h - y[1]));
    mk.mark(std::hypot(dx, dy), std::hypot(fx, fy));
  }
  return mk.count();
}

Sweep ProjectionGainSweep(const DyadicSet& X, const std::vector<double>& angles, int level) {
  Require(level >= 1, ErrorCode::kOutOfRange, "level must be positive");
  Sweep out;
  out.level = level;
  out.rows.resize(angles.size());
  const auto q = Corners(X);
  ParallelFor(angles.size(), [&](std::size_t i) {
    SweepRow& r = out.rows[i];
    r.theta = angles[i];
    auto [fine, coarse] = ProjCounts(q, X.depth(), angles[i], level);
    r.count = fine;
    r.exponent = fine ? std::log2(double(fine)) / level : 0.0;
    if (level >= 2 && fine) r.slope = std::log2(double(fine) / double(coarse)) / 2;
  });
  std::vector<double> e, s;
  for (const auto& r : out.rows) {
    e.push_back(r.exponent);
    s.push_back(r.slope);
  }
  out.exponent = QuantilesOf(e);
  out.slope = QuantilesOf(s);
  return out;
}

std::string Sweep::csv() const {
  std::string s = "theta,count,exponent,slope\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12f,%zu,%.9f,%.9f\n", r.theta, r.count, r.exponent,
                  r.slope);
    s += buf;
  }
  return s;
}

PinSweep PinnedDistanceExperiment(const DyadicSet& X, const std::vector<Point2>& pins,
                                  int level) {
  Require(level >= 1, ErrorCode::kOutOfRange, "level must be positive");
  Require(X.dim() == 2, ErrorCode::kDimensionMismatch, "planar set expected");
  PinSweep out;
  out.level = level;
  out.rows.resize(pins.size());
  const double scale = std::ldexp(1.0, X.depth());
  ParallelFor(pins.size(), [&](std::size_t i) {
    PinRow& r = out.rows[i];
    r.pin = pins[i];
    const Point2& y = pins[i];
    if (y[0] >= 0 && y[0] < 1 && y[1] >= 0 && y[1] < 1) {
      std::uint32_t c[2] = {static_cast<std::uint32_t>(y[0] * scale),
                            static_cast<std::uint32_t>(y[1] * scale)};
      r.in_support = X.contains(EncodeKey(c, X.depth()));
    }
    r.count = DistanceCount(X, y, level);
    r.exponent = r.count ? std::log2(double(r.count)) / level : 0.0;
  });
  std::vector<double> e;
  for (const auto& r : out.rows) e.push_back(r.exponent);
  out.exponent = QuantilesOf(e);
  return out;
}

std::string PinSweep::csv() const {
  std::string s = "pin_x,pin_y,in_support,count,exponent\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12f,%.12f,%d,%zu,%.9f\n", r.pin[0], r.pin[1],
                  r.in_support ? 1 : 0, r.count, r.exponent);
    s += buf;
  }
  return s;
}

std::vector<Point2> RandomPins(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  auto u = [&] { return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53); };
  std::vector<Point2> out(n);
  for (auto& p : out) {
    p[0] = u();
    p[1] = u();
  }
  return out;
}

// ---- pipeline ----

namespace {

std::vector<std::vector<double>> Directions(int d, std::size_t n, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  if (d == 1) return {{1.0}};
  if (d == 2) {
    for (double t : SweepAngles(n, true, seed)) out.push_back({std::cos(t), std::sin(t)});
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  while (out.size() < n) {
    std::vector<double> v(d);
    double s = 0;
    for (auto& x : v) {
      x = N(rng);
      s += x * x;
    }
    if (s < 1e-12) continue;
    for (auto& x : v) x /= std::sqrt(s);
    out.push_back(v);
  }
  return out;
}

[[noreturn]] void Rethrow(const char* stage, const Error& e) {
  throw Error(e.code(), std::string(stage) + ": " + e.detail());
}

}  // namespace

PipelineReport PipelineRun(const Json& sc) {
  Require(sc.is_object(), ErrorCode::kParseError, "scenario must be a JSON object");
  Require(sc.contains("generator") && sc["generator"].is_object(), ErrorCode::kParseError,
          "scenario needs a generator object");
  PipelineReport rep;
  rep.scenario = sc;
  rep.name = Param<std::string>(sc, "name", "scenario");
  const Json& gen = sc["generator"];

  DyadicMeasure mu;
  try {
    mu = Generate(Param<std::string>(gen, "name", ""), gen.value("params", Json::object()));
  } catch (const Error& e) {
    Rethrow("generate", e);
  }
  rep.d = mu.dim();
  rep.m = mu.depth();
  rep.T = Param(sc, "T", 2);
  Require(rep.T >= 1 && rep.m % rep.T == 0, ErrorCode::kDepthMismatch,
          "generate: depth is not a multiple of T");
  rep.ell = rep.m / rep.T;
  rep.support = mu.size();
  rep.log_count = std::log2(double(mu.size()));
  rep.baseline = rep.log_count / (rep.d * rep.m);
  rep.stages.push_back("generate: " + std::to_string(mu.size()) + " cells at depth " +
                       std::to_string(rep.m));

  if (mu.size() == 1) {
    rep.degenerate = true;
    rep.stages.push_back("regularize: skipped, single cell");
  } else {
    const double eps_reg = Param(sc, "eps_reg", 0.2);
    const double u = Param(sc, "u", 0.1);
    const double eps = Param(sc, "eps", std::max(2.0, 4.0 / rep.T));
    const double rdelta = Param(sc, "robust_delta", 0.1);
    const auto ndir = Param<std::size_t>(sc, "directions", 8);
    const auto seed = Param<std::uint64_t>(sc, "seed", 1);
    const auto max_pieces = Param<std::size_t>(sc, "max_pieces", 3);
    const auto max_cubes = Param<std::size_t>(sc, "max_cubes", 8);
    VerifyOptions vopt{Param<std::size_t>(sc, "verify_cubes", 32),
                       Param<std::size_t>(sc, "verify_centers", 16)};

    RegularDecomposition reg;
    try {
      reg = DecomposeRegular(mu, rep.T, rep.ell, eps_reg);
    } catch (const Error& e) {
      Rethrow("regularize", e);
    }
    rep.pieces = reg.pieces.size();
    rep.union_mass = reg.union_mass;
    rep.stages.push_back("regularize: " + std::to_string(reg.pieces.size()) +
                         " pieces, union mass " + std::to_string(reg.union_mass));

    const auto dirs = Directions(rep.d, ndir, seed);
    const int pad = static_cast<int>(std::ceil(std::log2(2 * std::sqrt(double(rep.d))) - 1e-9));
    // Heaviest pieces first.
    std::vector<std::size_t> order(reg.pieces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return reg.pieces[a].mass > reg.pieces[b].mass;
    });
    double wsum = 0, agg = 0;
    for (std::size_t pi = 0; pi < order.size() && pi < max_pieces; ++pi) {
      const RegularPiece& piece = reg.pieces[order[pi]];
      const std::string tag = "[" + std::to_string(pi) + "]";
      MultiscaleResult ms;
      try {
        try {
          ms = FrostmanMultiscale(piece, u, eps, vopt);
          rep.stages.push_back("multiscale" + tag + ": frostman");
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNonConcentrationFailed &&
              e.code() != ErrorCode::kHypothesisFailed)
            throw;
          rep.stages.push_back("multiscale" + tag + ": " + ErrorName(e.code()) + " (" +
                               e.detail() + "), two-sided fallback");
          ms = AhlforsMultiscale(piece, eps, vopt);
        }
      } catch (const Error& e) {
        Rethrow("multiscale", e);
      }
      Json dj = ToJson(ms);
      dj["mass"] = piece.mass;
      rep.decompositions.push_back(dj);

      double contrib = 0;
      for (const auto& iv : ms.dec.intervals) {
        if (iv.length() == 0) continue;
        PipelineScale sc_row;
        sc_row.piece = static_cast<int>(pi);
        sc_row.A = iv.A;
        sc_row.B = iv.B;
        sc_row.m = ms.dec.m(iv);
        sc_row.alpha = iv.alpha;
        sc_row.baseline = iv.alpha / rep.d;
        const int L0 = rep.T * iv.A;
        auto cubes = piece.measure.level_masses(L0);
        const std::size_t stride =
            std::max<std::size_t>(1, (cubes.size() + max_cubes - 1) / std::max<std::size_t>(1, max_cubes));
        std::vector<Key> chosen;
        for (std::size_t i = 0; i < cubes.size(); i += stride) chosen.push_back(cubes[i].first);
        sc_row.cubes = chosen.size();
        const std::size_t n = chosen.size() * dirs.size();
        std::vector<double> ex(n);
        const int mj = sc_row.m;
        const int out_level = mj + pad;
        try {
          ParallelFor(chosen.size(), [&](std::size_t qi) {
            DyadicMeasure nu =
                piece.measure.conditional(KeyToCube(chosen[qi], rep.d, L0)).coarsen(mj);
            for (std::size_t k = 0; k < dirs.size(); ++k) {
              DyadicMeasure pn = Project(nu, dirs[k], out_level);
              std::size_t cells = MinCellsForMass(pn, rdelta, out_level);
              ex[qi * dirs.size() + k] = std::log2(double(cells)) / mj;
            }
          });
        } catch (const Error& e) {
          Rethrow("projection", e);
        }
        sc_row.trials = n;
        for (double x : ex)
          if (x >= sc_row.baseline - 1e-12) ++sc_row.passes;
        sc_row.median_exponent = QuantilesOf(ex).median;
        contrib += mj * sc_row.median_exponent;
        rep.scales.push_back(sc_row);
      }
      agg += piece.mass * contrib / rep.m;
      wsum += piece.mass;
    }
    if (wsum > 0) rep.aggregate = agg / wsum;
    rep.stages.push_back("projection: " + std::to_string(rep.scales.size()) + " scales");
  }

  if (sc.contains("output")) {
    const std::string dir = Param<std::string>(sc, "output", "");
    try {
      std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& e) {
      Fail(ErrorCode::kIoError, std::string("persist: ") + e.what());
    }
    WriteTextFile(dir + "/report.json", rep.to_json().dump(2) + "\n");
    WriteTextFile(dir + "/scales.csv", rep.scales_csv());
    WriteTextFile(dir + "/measure.json", MeasureToJson(mu).dump() + "\n");
  }
  return rep;
}

Json PipelineReport::to_json() const {
  Json sc = Json::array();
  for (const auto& s : scales)
    sc.push_back({{"piece", s.piece},
                  {"A", s.A},
                  {"B", s.B},
                  {"m", s.m},
                  {"alpha", s.alpha},
                  {"baseline", s.baseline},
                  {"cubes", s.cubes},
                  {"trials", s.trials},
                  {"passes", s.passes},
                  {"pass_rate", s.pass_rate()},
                  {"median_exponent", s.median_exponent}});
  return {{"name", name},
          {"scenario", scenario},
          {"d", d},
          {"m", m},
          {"T", T},
          {"ell", ell},
          {"support", support},
          {"log_count", log_count},
          {"degenerate", degenerate},
          {"pieces", pieces},
          {"union_mass", union_mass},
          {"stages", stages},
          {"decompositions", decompositions},
          {"scales", sc},
          {"aggregate", aggregate},
          {"baseline", baseline},
          {"gain", aggregate - baseline}};
}

std::string PipelineReport::scales_csv() const {
  std::string s = "piece,A,B,m,alpha,baseline,cubes,trials,passes,median_exponent\n";
  char buf[256];
  for (const auto& r : scales) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.9f,%.9f,%zu,%zu,%zu,%.9f\n", r.piece, r.A,
                  r.B, r.m, r.alpha, r.baseline, r.cubes, r.trials, r.passes,
                  r.median_exponent);
    s += buf;
  }
  return s;
}

}  // namespace frostlab
