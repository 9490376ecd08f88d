#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "frostlab/plates.hpp"
#include "support.hpp"

using namespace frostlab;
using testsupport::RandomTree;

namespace {

struct Line {
  double angle, offset, weight;
};

// Level-m measure with density bg plus weight on each |<n, x - c> - o| < width.
DyadicMeasure Tubes(int m, const std::vector<Line>& lines, double bg, double width) {
  const int n = 1 << m;
  std::vector<Cell<double>> cells;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double cx = (x + 0.5) / n - 0.5, cy = (y + 0.5) / n - 0.5, w = bg;
      for (const Line& l : lines) {
        double t = -std::sin(l.angle) * cx + std::cos(l.angle) * cy;
        if (std::fabs(t - l.offset) < width) w += l.weight;
      }
      if (w > 0)
        cells.push_back({CubeToKey(CubeIndex{m, {static_cast<std::uint32_t>(x),
                                                 static_cast<std::uint32_t>(y)}}),
                         w});
    }
  double s = 0;
  for (auto& c : cells) s += c.mass;
  for (auto& c : cells) c.mass /= s;
  return DyadicMeasure(2, m, cells);
}

DyadicMeasure Circle(int m, double radius, int samples) {
  const int n = 1 << m;
  std::vector<Cell<double>> cells;
  for (int i = 0; i < samples; ++i) {
    double t = 2 * std::numbers::pi * i / samples;
    auto x = static_cast<std::uint32_t>((0.5 + radius * std::cos(t)) * n);
    auto y = static_cast<std::uint32_t>((0.5 + radius * std::sin(t)) * n);
    cells.push_back({CubeToKey(CubeIndex{m, {x, y}}), 1.0 / samples});
  }
  return DyadicMeasure(2, m, cells);
}

double MeasuredC(const DyadicMeasure& nu, double delta, double kappa) {
  const double rr[] = {delta};
  return BallNonconcentration(nu, rr).sup_net[0] / std::pow(delta, kappa);
}

// Recomputes the greedy invariants from the returned family.
void CheckFamily(const DyadicMeasure& nu, const HeavyStructure& hs) {
  const TubeNet net = MakeTubeNet(hs.delta);
  std::vector<double> c(2);
  double sum_sq = 0, S = 0;
  for (auto& y : hs.Y) S += y.mass;
  std::vector<double> pair(hs.M() * hs.M(), 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    nu.center(i, c.data());
    int f = 0;
    std::vector<int> in;
    for (int t = 0; t < hs.M(); ++t)
      if (net.in_tube(hs.Y[t].a, hs.Y[t].j, c.data())) {
        ++f;
        in.push_back(t);
      }
    sum_sq += nu.mass(i) * f * f;
    for (int a : in)
      for (int b : in) pair[a * hs.M() + b] += nu.mass(i);
  }
  if (hs.M() > 0) {
    CHECK(hs.steps.back().sum_sq == doctest::Approx(sum_sq).epsilon(1e-9));
    CHECK(hs.steps.back().S == doctest::Approx(S).epsilon(1e-12));
  }
  for (int a = 0; a < hs.M(); ++a) {
    CHECK(hs.Y[a].mass >= hs.threshold);
    for (int b = a + 1; b < hs.M(); ++b) CHECK(pair[a * hs.M() + b] <= hs.overlap + 1e-12);
  }
  // Maximality: every heavy tube left out overlaps some chosen one too much.
  auto heavy = HeavyNetTubes(nu, net, hs.threshold);
  CHECK(heavy.size() == hs.heavy_candidates);
  for (std::size_t h = 0; h < heavy.size(); h += std::max<std::size_t>(1, heavy.size() / 200)) {
    bool chosen = false;
    for (auto& y : hs.Y) chosen = chosen || (y.a == heavy[h].a && y.j == heavy[h].j);
    if (chosen) continue;
    double worst = 0;
    for (int t = 0; t < hs.M(); ++t) {
      double s = 0;
      for (std::size_t i = 0; i < nu.size(); ++i) {
        nu.center(i, c.data());
        if (net.in_tube(heavy[h].a, heavy[h].j, c.data()) &&
            net.in_tube(hs.Y[t].a, hs.Y[t].j, c.data()))
          s += nu.mass(i);
      }
      worst = std::max(worst, s);
    }
    CHECK(worst > hs.overlap);
  }
}

}  // namespace

TEST_SUITE("plates") {

TEST_CASE("plate mass examples") {
  auto u = UniformOn<double>(DyadicSet::Full(2, 8));
  auto full = MakePlate(MakeKPlane(2, {1, 0}), CubeCenter(2), 1.0);
  CHECK(PlateMass(u, full) == doctest::Approx(1.0));

  auto strip = MakePlate(MakeKPlane(2, {1, 0}), {0.5, 0.5}, 1.0 / 16);
  CHECK(PlateMass(u, strip) == doctest::Approx(0.125));

  CubeIndex q{6, {9, 40}};
  auto atom = AtomMeasure<double>(2, 6, q);
  double x[2];
  atom.center(0, x);
  auto through = MakePlate(MakeKPlane(2, {0.6, 0.8}), {x[0], x[1]}, 1e-3);
  CHECK(PlateMass(atom, through) == doctest::Approx(1.0));
  auto away = MakePlate(MakeKPlane(2, {0.6, 0.8}), {0.5, 0.5}, 1e-3);
  CHECK(PlateMass(atom, away) == 0.0);

  auto cube = UniformOn<double>(DyadicSet::Full(3, 4));
  auto slab = MakePlate(MakeKPlane(3, {1, 0, 0, 0, 1, 0}), CubeCenter(3), 1.0);
  CHECK(PlateMass(cube, slab) == doctest::Approx(1.0));

  CHECK_THROWS_AS(MakePlate(MakeKPlane(2, {1, 0}), {2.0, 2.0}, 0.1), Error);
  CHECK_THROWS_AS(MakePlate(MakeKPlane(2, {1, 0}), {0.5, 0.5}, 0.0), Error);
}

TEST_CASE("tube containment and angles") {
  auto h = MakePlate(MakeKPlane(2, {1, 0}), {0.5, 0.5}, 0.01);
  auto wide = MakePlate(MakeKPlane(2, {1, 0}), {0.5, 0.5}, 0.05);
  auto tilted = MakePlate(MakeKPlane(2, {1, 0.02}), {0.5, 0.5}, 0.01);
  auto vert = MakePlate(MakeKPlane(2, {0, 1}), {0.5, 0.5}, 0.01);
  CHECK(TubeContains(wide, h));
  CHECK_FALSE(TubeContains(h, wide));
  CHECK(TubeContains(wide, tilted));
  CHECK_FALSE(TubeContains(wide, vert));
  CHECK(TubeAngle(h, vert) == doctest::Approx(std::numbers::pi / 2));
  CHECK(TubeAngle(h, tilted) == doctest::Approx(std::atan(0.02)));

  // Sampled points of the inner tube stay inside the outer one.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.3, 1.3);
  for (int it = 0; it < 20000; ++it) {
    double p[] = {U(rng), U(rng)};
    if (tilted.contains(p)) CHECK(wide.contains(p));
  }
}

TEST_CASE("net tube masses agree with plate masses") {
  auto nu = RandomTree(2, 7, 17);
  const TubeNet net = MakeTubeNet(1.0 / 32);
  auto all = HeavyNetTubes(nu, net, 0.0);
  CHECK(all.size() == static_cast<std::size_t>(net.dirs) * net.offsets);
  for (std::size_t i = 0; i < all.size(); i += 97) {
    const auto& t = all[i];
    Plate p = net.tube(t.a, t.j);
    // Offsets are irrational multiples of the grid, so boundary ties do not occur.
    CHECK(t.mass == doctest::Approx(PlateMass(nu, p)).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].mass >= all[i].mass);
}

TEST_CASE("ball decay") {
  auto u = UniformOn<double>(DyadicSet::Full(2, 8));
  std::vector<double> rs = {0.25, 0.125, 0.0625, 0.03125};
  auto b = BallNonconcentration(u, rs);
  CHECK(b.exponent == doctest::Approx(2.0).epsilon(0.1));
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(b.sup_net[i] == doctest::Approx(std::numbers::pi * rs[i] * rs[i]).epsilon(0.1));
    CHECK(b.sup_upper[i] >= b.sup_net[i]);
  }
  auto tube = Tubes(8, {{0.0, 0.0, 1.0}}, 0, 1.0 / 256);
  CHECK(BallNonconcentration(tube, rs).exponent == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("heavy plates of a single tube") {
  const double delta = 1.0 / 256;
  auto nu = Tubes(8, {{0.0, 0.0, 1.0}}, 0, delta);
  for (double eta : {0.05, 0.1, 0.2}) {
    auto hs = HeavyPlateStructure(nu, delta, eta, 1.0, MeasuredC(nu, delta, 1.0));
    CHECK(hs.M() == 1);
    CHECK(hs.heavy_candidates >= 1);
    CHECK(hs.contained());
    CHECK(hs.ok());
    CheckFamily(nu, hs);
  }
}

TEST_CASE("uniform square has no heavy tubes") {
  const double delta = 1.0 / 256;
  auto nu = UniformOn<double>(DyadicSet::Full(2, 8));
  auto hs = HeavyPlateStructure(nu, delta, 0.1, 1.0, MeasuredC(nu, delta, 1.0));
  CHECK(hs.M() == 0);
  CHECK(hs.heavy_candidates == 0);
  CHECK(hs.ok());
}

TEST_CASE("two crossing tubes give at most two plates") {
  const double delta = 1.0 / 256;
  auto nu = Tubes(8, {{0.3, 0.05, 1.0}, {1.9, -0.1, 1.0}}, 0, delta);
  for (double eta : {0.2, 0.25, 0.3}) {
    auto hs = HeavyPlateStructure(nu, delta, eta, 1.0, MeasuredC(nu, delta, 1.0));
    CHECK(hs.M() == 2);
    CHECK(hs.M() <= hs.m_bound);
    for (auto& st : hs.steps) CHECK(st.ok);
    CHECK(hs.contained());
    CheckFamily(nu, hs);
  }
}

TEST_CASE("decay hypothesis is enforced") {
  const double delta = 1.0 / 64;
  auto nu = Tubes(6, {{0.0, 0.0, 1.0}}, 0, delta);
  try {
    HeavyPlateStructure(nu, delta, 0.1, 1.0, 0.01);
    FAIL("expected NuDecayFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNuDecayFailed);
  }
}

TEST_CASE("random tube mixtures satisfy the greedy invariants") {
  const double delta = 1.0 / 64;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> A(0, std::numbers::pi), O(-0.3, 0.3), W(0.5, 2);
  for (int it = 0; it < 8; ++it) {
    std::vector<Line> lines;
    int k = 1 + it % 4;
    for (int i = 0; i < k; ++i) lines.push_back({A(rng), O(rng), W(rng)});
    auto nu = Tubes(6, lines, it % 2 ? 0.01 : 0.0, delta);
    for (double eta : {0.15, 0.3}) {
      auto hs = HeavyPlateStructure(nu, delta, eta, 1.0, MeasuredC(nu, delta, 1.0));
      CHECK(hs.ok());
      CheckFamily(nu, hs);
    }
  }
}

TEST_CASE("radial pruning leaves a spread measure alone") {
  auto nu = Circle(8, 0.4, 4000);
  auto mu = RandomTree(2, 8, 7, 0.55);
  auto rep = RadialPrune(mu, nu, 0.5, 0.2, 3);
  REQUIRE(rep.stages.size() == 3);
  for (auto& st : rep.stages) CHECK_FALSE(st.pruned);
  CHECK(rep.nu_K == doctest::Approx(1.0));
  CHECK(rep.budget_ok);
  CHECK_FALSE(rep.concentration);
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.mu_L > 0);
  REQUIRE_FALSE(rep.r.empty());
  CHECK(rep.r.front() == doctest::Approx(0.25));
  CHECK(rep.r.back() == doctest::Approx(1.0 / 16));
  CHECK_FALSE(rep.fitted.empty());
  for (auto& s : rep.sup)
    for (double v : s) CHECK(v < 1.0);
}

TEST_CASE("radial pruning removes a heavy line") {
  // nu sits on the line y = 0.5 + 0.3, mu is away from it.
  auto nu = Tubes(8, {{0.0, 0.3, 1.0}}, 0.0, 1.0 / 256);
  auto mu = Tubes(8, {{0.0, -0.25, 1.0}}, 0.01, 0.05);
  auto rep = RadialPrune(mu, nu, 0.5, 0.3, 2);
  CHECK(rep.concentration);
  bool any = false;
  for (auto& st : rep.stages) any = any || (st.pruned && st.nu_loss > 0.5);
  CHECK(any);
  CHECK(rep.nu_K < 0.5);
  CHECK_FALSE(rep.budget_ok);
  CHECK(rep.loss_sum == doctest::Approx(1.0 - rep.nu_K));
}

TEST_CASE("radial pruning of an atom is degenerate") {
  CubeIndex q{8, {100, 100}};
  auto nu = AtomMeasure<double>(2, 8, q);
  auto mu = RandomTree(2, 8, 3);
  auto rep = RadialPrune(mu, nu, 0.5, 0.2, 2);
  CHECK(rep.degenerate);
  CHECK(rep.nu_K == 0.0);
  CHECK(rep.concentration);
}

TEST_CASE("radial pruning checks the depth against the resolution") {
  auto nu = RandomTree(2, 6, 1);
  CHECK_THROWS_AS(RadialPrune(nu, nu, 0.5, 0.2, 3), Error);
}

}  // TEST_SUITE
