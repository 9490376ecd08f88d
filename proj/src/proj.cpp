#include "frostlab/proj.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "frostlab/parallel.hpp"

namespace frostlab {

namespace {

double Dot(const double* a, const double* b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> Centers(const DyadicMeasure& mu) {
  const int d = mu.dim();
  std::vector<double> c(mu.size() * d);
  for (std::size_t i = 0; i < mu.size(); ++i) mu.center(i, c.data() + i * d);
  return c;
}

std::vector<double> Masses(const DyadicMeasure& mu) {
  std::vector<double> w(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) w[i] = mu.mass(i);
  return w;
}

// Slab masses of rho around the normals of a net, max over the net.
double NetSup(const SphereMeasure& rho, const std::vector<double>& normals, double r) {
  const int d = rho.d;
  const std::size_t nn = normals.size() / d;
  std::vector<double> best(nn, 0.0);
  ParallelFor(nn, [&](std::size_t a) {
    double s = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (std::fabs(Dot(rho.point(i), normals.data() + a * d, d)) < r) s += rho.weights[i];
    best[a] = s;
  });
  return nn == 0 ? 0.0 : *std::max_element(best.begin(), best.end());
}

std::vector<double> NormalNet(int d, double r) {
  std::vector<double> n;
  const double step = r / 4;
  if (d == 2) {
    int cnt = static_cast<int>(std::ceil(std::numbers::pi / step));
    for (int i = 0; i < cnt; ++i) {
      double phi = i * std::numbers::pi / cnt;
      n.push_back(std::cos(phi));
      n.push_back(std::sin(phi));
    }
    return n;
  }
  // Upper hemisphere of a Fibonacci lattice with spacing about r/4.
  std::size_t cnt = static_cast<std::size_t>(std::ceil(4 * std::numbers::pi / (step * step)));
  cnt = std::clamp<std::size_t>(cnt, 64, std::size_t{1} << 17);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < cnt; ++i) {
    double z = 1 - (i + 0.5) * 2.0 / cnt;
    if (z < 0) break;
    double rad = std::sqrt(std::max(0.0, 1 - z * z));
    double t = golden * i;
    n.push_back(rad * std::cos(t));
    n.push_back(rad * std::sin(t));
    n.push_back(z);
  }
  return n;
}

double Energy1D(std::vector<double>& p, std::span<const double> w, double sigma,
                double floor) {
  double s = 0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      row += w[j] * std::pow(std::max(std::fabs(p[i] - p[j]), floor), -sigma);
    s += 2 * w[i] * row + w[i] * w[i] * std::pow(floor, -sigma);
  }
  return s;
}

}  // namespace

SphereMeasure MakeSphereMeasure(int d, std::vector<double> points,
                                std::vector<double> weights) {
  Require(d >= 2 && points.size() == weights.size() * d && !weights.empty(),
          ErrorCode::kInvalidArgument, "sphere measure shape");
  double tot = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double n = std::sqrt(Dot(points.data() + i * d, points.data() + i * d, d));
    Require(std::fabs(n - 1) <= 1e-9, ErrorCode::kInvalidArgument,
            "sphere point is not a unit vector");
    Require(weights[i] >= 0, ErrorCode::kInvalidArgument, "negative weight");
    tot += weights[i];
  }
  Require(tot > 0, ErrorCode::kInvalidArgument, "zero total weight");
  for (double& w : weights) w /= tot;
  return {d, std::move(points), std::move(weights)};
}

SphereMeasure UniformCircle(int n) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "need at least one point");
  std::vector<double> p;
  for (int i = 0; i < n; ++i) {
    double t = 2 * std::numbers::pi * i / n;
    p.push_back(std::cos(t));
    p.push_back(std::sin(t));
  }
  return MakeSphereMeasure(2, std::move(p), std::vector<double>(n, 1.0));
}

SphereMeasure FibonacciSphere(int n) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "need at least one point");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<double> p;
  for (int i = 0; i < n; ++i) {
    double z = 1 - (i + 0.5) * 2.0 / n;
    double rad = std::sqrt(std::max(0.0, 1 - z * z));
    p.push_back(rad * std::cos(golden * i));
    p.push_back(rad * std::sin(golden * i));
    p.push_back(z);
  }
  return MakeSphereMeasure(3, std::move(p), std::vector<double>(n, 1.0));
}

SphereMeasure Equator(int n) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "need at least one point");
  std::vector<double> p;
  for (int i = 0; i < n; ++i) {
    double t = 2 * std::numbers::pi * i / n;
    p.insert(p.end(), {std::cos(t), std::sin(t), 0.0});
  }
  return MakeSphereMeasure(3, std::move(p), std::vector<double>(n, 1.0));
}

SphereMeasure SphereAtom(std::vector<double> theta) {
  const int d = static_cast<int>(theta.size());
  return MakeSphereMeasure(d, std::move(theta), {1.0});
}

DyadicMeasure Project(const DyadicMeasure& mu, const KPlane& V, int out_level) {
  Require(V.d == mu.dim(), ErrorCode::kDimensionMismatch, "plane dimension");
  const int k = V.k();
  Require(k >= 1, ErrorCode::kInvalidArgument, "empty plane");
  const double half = std::sqrt(static_cast<double>(mu.dim()));
  const double cells = std::ldexp(1.0, out_level);
  std::vector<double> c(mu.dim()), y(k);
  std::vector<Cell<double>> out;
  out.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu.center(i, c.data());
    V.project(c.data(), y.data());
    CubeIndex q{out_level, std::vector<std::uint32_t>(k)};
    for (int a = 0; a < k; ++a) {
      double t = (y[a] + half) / (2 * half) * cells;
      q.coords[a] = static_cast<std::uint32_t>(std::clamp(std::floor(t), 0.0, cells - 1));
    }
    out.push_back({CubeToKey(q), mu.mass(i)});
  }
  return DyadicMeasure(k, out_level, std::move(out));
}

DyadicMeasure Project(const DyadicMeasure& mu, std::span<const double> theta,
                      int out_level) {
  return Project(mu, MakeKPlane(static_cast<int>(theta.size()),
                                std::vector<double>(theta.begin(), theta.end())),
                 out_level);
}

Energy PointEnergy(std::span<const double> pts, std::span<const double> w, int k,
                   double sigma, double floor) {
  Require(sigma > 0, ErrorCode::kInvalidArgument, "sigma must be positive");
  Require(floor > 0, ErrorCode::kInvalidArgument, "floor must be positive");
  const std::size_t n = w.size();
  Require(pts.size() == n * k, ErrorCode::kDimensionMismatch, "points shape");
  std::vector<double> rows(n, 0.0);
  const double f2 = floor * floor;
  ParallelFor(n, [&](std::size_t i) {
    double row = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0;
      for (int a = 0; a < k; ++a) {
        double t = pts[i * k + a] - pts[j * k + a];
        d2 += t * t;
      }
      row += w[j] * std::pow(std::max(d2, f2), -sigma / 2);
    }
    rows[i] = 2 * w[i] * row;
  });
  Energy e;
  for (double r : rows) e.off += r;
  for (double x : w) e.self += x * x;
  e.self *= std::pow(floor, -sigma);
  e.total = e.off + e.self;
  return e;
}

Energy EnergyOf(const DyadicMeasure& mu, double sigma, std::size_t exact_limit) {
  Require(!mu.empty(), ErrorCode::kEmptySupport, "energy of a null measure");
  int level = mu.depth();
  while (level > 0 && mu.count_cubes(level) > exact_limit) --level;
  const DyadicMeasure nu = level == mu.depth() ? mu : mu.coarsen(level);
  Energy e = PointEnergy(Centers(nu), Masses(nu), nu.dim(), sigma, std::ldexp(1.0, -level));
  e.level = level;
  e.approximate = level != mu.depth();
  return e;
}

DecayFit HyperplaneNonconcentration(const SphereMeasure& rho,
                                    std::span<const double> r_list) {
  Require(rho.d == 2 || rho.d == 3, ErrorCode::kDimensionMismatch,
          "hyperplane nets are implemented for d = 2, 3");
  DecayFit fit;
  for (double r : r_list) {
    Require(r > 0 && r <= 1, ErrorCode::kInvalidArgument, "r must lie in (0,1]");
    auto net = NormalNet(rho.d, r);
    fit.r.push_back(r);
    fit.sup_net.push_back(NetSup(rho, net, r));
    fit.sup_upper.push_back(NetSup(rho, net, 2 * r));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < fit.r.size(); ++i) {
    if (!(fit.sup_net[i] > 0)) continue;
    double x = std::log2(fit.r[i]), y = std::log2(fit.sup_net[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  double den = n * sxx - sx * sx;
  fit.kappa = n >= 2 && den > 0 ? (n * sxy - sx * sy) / den : 0.0;
  return fit;
}

KaufmanReport KaufmanCheck(const DyadicMeasure& mu, const SphereMeasure& rho,
                           double sigma, double kappa, double C, double tol) {
  Require(sigma > 0 && sigma < kappa && kappa <= 1, ErrorCode::kInvalidArgument,
          "need 0 < sigma < kappa <= 1");
  Require(rho.d == mu.dim(), ErrorCode::kDimensionMismatch, "sphere dimension");
  std::vector<double> rs;
  for (int k = 0; k <= 8; ++k) rs.push_back(std::ldexp(1.0, -k));
  auto fit = HyperplaneNonconcentration(rho, rs);
  for (std::size_t i = 0; i < rs.size(); ++i)
    if (fit.sup_net[i] > C * std::pow(rs[i], kappa) * (1 + 1e-9))
      Fail(ErrorCode::kRhoDecayFailed,
           "rho(H^(r)) = " + std::to_string(fit.sup_net[i]) + " exceeds C r^kappa at r = " +
               std::to_string(rs[i]));

  const int d = mu.dim();
  const double floor = std::ldexp(1.0, -mu.depth());
  auto c = Centers(mu);
  auto w = Masses(mu);
  std::vector<double> per(rho.size()), per_self(rho.size());
  ParallelFor(rho.size(), [&](std::size_t t) {
    std::vector<double> p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) p[i] = Dot(rho.point(t), c.data() + i * d, d);
    per[t] = Energy1D(p, w, sigma, floor);
  });
  Energy e = PointEnergy(c, w, d, sigma, floor);
  KaufmanReport r;
  for (std::size_t t = 0; t < rho.size(); ++t) r.lhs += rho.weights[t] * per[t];
  r.factor = 1 + C * sigma / (kappa - sigma);
  r.rhs = r.factor * e.total;
  r.lhs_off = r.lhs - e.self;  // a projected atom keeps its floored self-term
  r.rhs_off = r.factor * e.off;
  r.pass = r.lhs <= r.rhs * (1 + tol);
  return r;
}

double ProjectedL2(const DyadicMeasure& mu, const SphereMeasure& rho) {
  Require(rho.d == mu.dim(), ErrorCode::kDimensionMismatch, "sphere dimension");
  const int d = mu.dim();
  const double scale = std::ldexp(1.0, mu.depth());
  // |<theta, x>| <= sqrt(d) on the unit cube, so the bins fit in one array.
  const long long off = static_cast<long long>(std::ceil(std::sqrt(d) * scale)) + 1;
  auto c = Centers(mu);
  std::vector<double> per(rho.size());
  ParallelFor(rho.size(), [&](std::size_t t) {
    std::vector<double> bins(2 * off + 1, 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      auto b = static_cast<long long>(std::floor(Dot(rho.point(t), c.data() + i * d, d) * scale));
      bins[b + off] += mu.mass(i);
    }
    double s = 0;
    for (double m : bins) s += m * m;
    per[t] = s * scale;
  });
  double out = 0;
  for (std::size_t t = 0; t < rho.size(); ++t) out += rho.weights[t] * per[t];
  return out;
}

FalconerReport FalconerCheck(const DyadicMeasure& mu, const SphereMeasure& rho,
                             double kappa, std::span<const int> levels,
                             std::size_t exact_limit) {
  Require(kappa > 0 && kappa < mu.dim(), ErrorCode::kInvalidArgument, "kappa in (0,d)");
  FalconerReport r;
  for (int L : levels) {
    Require(L >= 1 && L <= mu.depth(), ErrorCode::kOutOfRange, "level above the depth");
    DyadicMeasure nu = L == mu.depth() ? mu : mu.coarsen(L);
    r.levels.push_back(L);
    r.lhs.push_back(ProjectedL2(nu, rho));
    Energy e = EnergyOf(nu, mu.dim() - kappa, exact_limit);
    r.rhs.push_back(e.total);
    r.energy_levels.push_back(e.level);
    r.exact = r.exact && !e.approximate;
    r.ratio.push_back(r.lhs.back() / r.rhs.back());
  }
  r.non_increasing = true;
  for (std::size_t i = 1; i < r.ratio.size(); ++i)
    if (r.ratio[i] > r.ratio[i - 1] * (1 + 1e-9)) r.non_increasing = false;
  return r;
}

double GammaExponent(double alpha, double kappa, double delta, double eta, int d, int k) {
  Require(d >= 1 && k >= 1 && k < d, ErrorCode::kInvalidArgument, "need 1 <= k < d");
  Require(alpha >= 0 && alpha <= d, ErrorCode::kInvalidArgument, "alpha in [0,d]");
  Require(kappa > 0 && kappa < 1, ErrorCode::kInvalidArgument, "kappa in (0,1)");
  if (alpha < kappa / 2) return alpha - 6 * delta;
  if (alpha <= d - kappa / 2) return static_cast<double>(k) / d * alpha + eta;
  return k - 6 * delta;
}

LevelSets LevelSetDecomposition(const DyadicMeasure& mu, int m, double delta) {
  Require(m >= 0 && m <= mu.depth(), ErrorCode::kOutOfRange, "level outside [0, depth]");
  Require(delta > 0, ErrorCode::kInvalidArgument, "delta must be positive");
  std::map<int, std::pair<double, std::vector<Key>>> cls;
  for (auto& [k, w] : mu.level_masses(m)) {
    int j = static_cast<int>(std::floor(-std::log2(w)));
    if (j < 0) j = 0;
    auto& c = cls[j];
    c.first += w;
    c.second.push_back(k);
  }
  LevelSets out;
  const double thr = std::exp2(-2 * delta * m);
  for (auto& [j, c] : cls) {
    out.classes.push_back({j, c.first, DyadicSet(mu.dim(), m, std::move(c.second))});
    if (c.first >= thr)
      out.J.push_back(j);
    else
      out.z_mass += c.first;
  }
  out.z_bound = 3.0 * mu.dim() * m * thr;
  out.z_ok = out.z_mass <= out.z_bound;
  return out;
}

std::vector<double> DirectionField(const SmoothMap& F, std::span<const double> x) {
  Require(F.out_dim() == 1, ErrorCode::kDimensionMismatch, "direction field needs k = 1");
  Require(static_cast<int>(x.size()) == F.in_dim(), ErrorCode::kDimensionMismatch,
          "point dimension");
  KPlane v = F.kernel_perp(x.data());
  return CanonicalDirection(v.rows);
}

double PlateDistance(const KPlane& V, const KPlane& W) {
  Require(V.d == W.d && V.k() + W.k() == V.d && V.k() >= 1, ErrorCode::kDimensionMismatch,
          "plate distance needs complementary dimensions");
  KPlane U = Complement(W);
  const int k = V.k();
  Eigen::MatrixXd M(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) M(i, j) = Dot(U.row(i), V.row(j), V.d);
  return std::min(1.0, std::fabs(M.determinant()));
}

double DistToPlane(std::span<const double> x, const KPlane& V) {
  Require(static_cast<int>(x.size()) == V.d, ErrorCode::kDimensionMismatch, "point dimension");
  double n2 = Dot(x.data(), x.data(), V.d);
  for (int i = 0; i < V.k(); ++i) {
    double t = Dot(x.data(), V.row(i), V.d);
    n2 -= t * t;
  }
  return std::sqrt(std::max(0.0, n2));
}

}  // namespace frostlab
