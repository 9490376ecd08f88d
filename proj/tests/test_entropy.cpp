#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "frostlab/entropy.hpp"
#include "support.hpp"

using namespace frostlab;
using testsupport::RandomTree;

namespace {

DyadicMeasure Uniform(int d, int m) {
  return UniformOn<double>(DyadicSet::Full(d, m));
}

DyadicMeasure Atom(int d, int m) {
  CubeIndex q{m, std::vector<std::uint32_t>(d, 1)};
  return AtomMeasure<double>(d, m, q);
}

DyadicMeasure Mix(const DyadicMeasure& a, const DyadicMeasure& b, double t) {
  std::vector<Cell<double>> cells;
  for (std::size_t i = 0; i < a.size(); ++i) cells.push_back({a.keys()[i], t * a.mass(i)});
  for (std::size_t i = 0; i < b.size(); ++i)
    cells.push_back({b.keys()[i], (1 - t) * b.mass(i)});
  return DyadicMeasure(a.dim(), a.depth(), cells);
}

// Entropy of the level-j partition shifted by 2^{-j-1} along every axis.
double ShiftedEntropy(const DyadicMeasure& mu, int j) {
  const int d = mu.dim();
  std::map<std::vector<long long>, double> bins;
  std::vector<double> x(d);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu.center(i, x.data());
    std::vector<long long> b(d);
    for (int a = 0; a < d; ++a)
      b[a] = static_cast<long long>(std::floor((x[a] + std::ldexp(1.0, -j - 1)) * std::ldexp(1.0, j)));
    bins[b] += mu.mass(i);
  }
  std::vector<double> p;
  for (auto& [k, w] : bins) p.push_back(w);
  return EntropyOfMasses(p);
}

// All vectors of n positive integers summing to total.
void Compositions(int total, int n, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (n == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 1; k <= total - n + 1; ++k) {
    cur.push_back(k);
    Compositions(total - k, n - 1, cur, out);
    cur.pop_back();
  }
}

std::vector<Rational> SortedDesc(std::vector<Rational> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

DyadicMeasure HeavyHalf(const DyadicMeasure& mu) {
  std::vector<Cell<double>> cells;
  double s = 0;
  for (std::size_t i = 0; i < mu.size() && s < 0.5; ++i) {
    cells.push_back({mu.keys()[i], mu.mass(i)});
    s += mu.mass(i);
  }
  for (auto& c : cells) c.mass /= s;
  return DyadicMeasure(mu.dim(), mu.depth(), cells);
}

// [2,4) followed by [4,m) split in two; B <= 2A throughout.
LevelIntervals ThreeScales(int m) {
  int h = (m - 4 + 1) / 2;
  return {{2, 4}, {4, 4 + h}, {4 + h, m}};
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("entropy examples") {
  CHECK(Entropy(Uniform(2, 4), 4) == doctest::Approx(8.0));
  CHECK(Entropy(Uniform(2, 4), 2) == doctest::Approx(4.0));
  CHECK(Entropy(Atom(2, 5), 5) == 0.0);
  DyadicMeasure two(1, 3, {{0, 0.5}, {5, 0.5}});
  CHECK(Entropy(two, 3) == doctest::Approx(1.0));
  CHECK(Entropy(two, 0) == 0.0);
  CHECK(Entropy(ToExact(two), 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Entropy(two, 4), Error);
}

TEST_CASE("entropy bounds on random trees") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    int d = 1 + seed % 2;
    auto mu = RandomTree(d, 8, seed);
    for (int j = 0; j <= 8; ++j) {
      double h = Entropy(mu, j);
      CHECK(h >= 0);
      CHECK(h <= std::log2(static_cast<double>(mu.count_cubes(j))) + 1e-9);
      CHECK(h <= d * j + 1e-9);
    }
  }
}

TEST_CASE("conditional entropy") {
  CHECK(ConditionalEntropy(Uniform(2, 5), 5, 0) == doctest::Approx(10.0));
  auto mu = RandomTree(2, 6, 99);
  CHECK(ConditionalEntropy(mu, 4, 4) == 0.0);
  CHECK(ConditionalEntropyDirect(mu, 4, 4) == doctest::Approx(0.0));
  CHECK_THROWS_AS(ConditionalEntropy(mu, 3, 4), Error);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto nu = RandomTree(1 + seed % 2, 6, seed);
    for (int c = 0; c <= 6; ++c)
      for (int f = c; f <= 6; ++f)
        CHECK(std::fabs(ConditionalEntropy(nu, f, c) - ConditionalEntropyDirect(nu, f, c)) <
              1e-9);
  }
}

TEST_CASE("concavity of conditional entropy") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto a = RandomTree(2, 6, seed);
    auto b = RandomTree(2, 6, seed + 1000);
    for (double t : {0.25, 0.5, 0.75}) {
      auto mix = Mix(a, b, t);
      for (auto [f, c] : {std::pair{6, 0}, std::pair{6, 3}, std::pair{4, 2}}) {
        double lhs = ConditionalEntropyDirect(mix, f, c);
        double rhs = t * ConditionalEntropyDirect(a, f, c) +
                     (1 - t) * ConditionalEntropyDirect(b, f, c);
        CHECK(lhs >= rhs - 1e-9);
      }
    }
  }
}

TEST_CASE("shifted partitions change entropy by at most d") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    int d = 1 + seed % 2;
    auto mu = RandomTree(d, 9, seed);
    for (int j = 2; j <= 8; ++j)
      CHECK(std::fabs(ShiftedEntropy(mu, j) - Entropy(mu, j)) <= d + 1e-9);
  }
}

TEST_CASE("robust entropy examples") {
  auto u4 = Uniform(2, 1);
  CHECK(RobustEntropy(u4, 1, 1.0) == doctest::Approx(2.0));
  CHECK(RobustEntropy(u4, 1, 2.0) == doctest::Approx(1.0));
  CHECK(RobustEntropy(u4, 1, 4.0) == doctest::Approx(0.0));
  CHECK(RobustEntropy(ToExact(u4), 1, Rational(2)) == doctest::Approx(1.0));
  CHECK(RobustEntropyOracle(ToExact(u4), 1, Rational(2)) == doctest::Approx(1.0));
  CHECK(RobustEntropy(Atom(1, 4), 4, 3.0) == 0.0);
  try {
    RobustEntropy(u4, 1, 0.5);
    FAIL("expected BadDelta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadDelta);
  }
}

TEST_CASE("robust entropy monotone in Delta") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto mu = RandomTree(2, 5, seed);
    double prev = Entropy(mu, 5);
    CHECK(RobustEntropy(mu, 5, 1.0) == doctest::Approx(prev));
    for (double D : {1.1, 1.5, 2.0, 3.0, 8.0, 64.0}) {
      double h = RobustEntropy(mu, 5, D);
      CHECK(h <= prev + 1e-12);
      prev = h;
    }
    double mn = 1;
    for (std::size_t i = 0; i < mu.size(); ++i) mn = std::min(mn, mu.mass(i));
    CHECK(RobustEntropy(mu, 5, 1.0 / mn) == doctest::Approx(0.0));
  }
}

TEST_CASE("greedy robust entropy equals the vertex oracle exactly") {
  const std::vector<Rational> deltas{Rational(1), Rational(3, 2), Rational(2), Rational(4)};
  int instances = 0;
  for (int total : {6, 10, 12}) {
    for (int n = 1; n <= 6; ++n) {
      std::vector<std::vector<int>> comps;
      std::vector<int> cur;
      Compositions(total, n, cur, comps);
      for (const auto& c : comps) {
        std::vector<Rational> p;
        for (int k : c) p.push_back(Rational(k, total));
        for (const auto& D : deltas) {
          auto g = RobustEntropyOfMasses<Rational>(p, D);
          auto o = RobustEntropyOracle<Rational>(p, D);
          CHECK(g.bits == o.bits);
          CHECK(SortedDesc(g.nu) == SortedDesc(o.nu));
          Rational s(0);
          for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(g.nu[i] <= D * p[i]);
            s += g.nu[i];
          }
          CHECK(s == 1);
          ++instances;
        }
      }
    }
  }
  CHECK(instances > 1000);
}

TEST_CASE("robust check examples") {
  CHECK(RobustCheck(Uniform(1, 10), 0.8, 0.1, 10));
  CHECK(MinCellsForMass(Uniform(1, 10), 0.1, 10) == 512);
  CHECK_FALSE(RobustCheck(Atom(1, 10), 0.1, 0.1, 10));
  CHECK_FALSE(RobustCheck(Uniform(1, 10), 1.0, 0.1, 10));
}

TEST_CASE("robust check equals subset enumeration") {
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    int d = 1 + seed % 2;
    int m = d == 1 ? 4 : 2;
    auto mu = ToExact(RandomTree(d, m, seed, 0.7)).normalized();
    for (double delta : {0.05, 0.2, 0.5, 1.0})
      for (double alpha : {0.1, 0.3, 0.5, 0.8}) {
        CHECK(MinCellsForMass(mu, delta, m) == MinCellsForMassBrute(mu, delta, m));
        CHECK(RobustCheck(mu, alpha, delta, m) == RobustCheckBrute(mu, alpha, delta, m));
        ++n;
      }
  }
  CHECK(n == 2400);
}

TEST_CASE("robust measures have large robust entropy") {
  auto r = RobustToEntropyCheck(Uniform(1, 10), 0.8, 0.1, 10, 0.1);
  CHECK(r.holds);
  CHECK(r.lhs >= r.rhs);
  try {
    RobustToEntropyCheck(Atom(1, 10), 0.8, 0.1, 10, 0.1);
    FAIL("expected PreconditionFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPreconditionFailed);
  }
  int robust = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto mu = RandomTree(1 + seed % 2, 10, seed, 0.8);
    const double alpha = 0.5;
    if (!RobustCheck(mu, alpha, 0.1, 10)) continue;
    ++robust;
    auto rep = RobustToEntropyCheck(mu, alpha, 0.1, 10, 0.1);
    CAPTURE(seed);
    CHECK(rep.holds);
  }
  CHECK(robust >= 10);
}

TEST_CASE("image entropy bound: atom and linear projections") {
  auto F = Projection({std::cos(0.3), std::sin(0.3)});
  auto a = MultiscaleEntropyBound(Atom(2, 8), *F, {{0, 8}});
  CHECK(a.lhs == 0.0);
  CHECK(a.rhs == 0.0);
  CHECK(a.deficit == 0.0);
  std::vector<double> worst;
  for (int m : {8, 12, 16}) {
    double w = -1e9;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto mu = RandomTree(2, m, seed, 0.45);
      auto b = MultiscaleEntropyBound(mu, *F, {{0, m}});
      CHECK(std::fabs(b.rhs - b.rhs_joint) < 1e-9);
      w = std::max(w, b.deficit);
    }
    worst.push_back(w);
  }
  // One interval, exact linearization: only partition-comparison slack.
  for (double w : worst) CHECK(w <= 2.0);
}

TEST_CASE("image entropy bound: pinned distance") {
  auto F = PinnedDistance({2.0, 0.5});
  for (int m : {8, 10, 12}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto mu = RandomTree(2, 12, seed, 0.5).coarsen(m);
      auto b = MultiscaleEntropyBound(mu, *F, ThreeScales(m));
      CHECK(b.q == 3);
      CHECK(std::fabs(b.rhs - b.rhs_joint) < 1e-9);
      CHECK(b.deficit / b.q <= 3.0);
    }
  }
  CHECK_THROWS_AS(MultiscaleEntropyBound(Uniform(2, 6), *F, {{1, 4}}), Error);
  auto G = PinnedDistance({0.5 + 1.0 / 128, 0.5 + 1.0 / 128});
  try {
    MultiscaleEntropyBound(Uniform(2, 6), *G, {{2, 4}});
    FAIL("expected SingularPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingularPoint);
  }
}

TEST_CASE("robust image bound") {
  auto F = PinnedDistance({2.0, 0.5});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto mu = RandomTree(2, 10, seed, 0.5);
    auto iv = ThreeScales(10);
    auto plain = MultiscaleEntropyBound(mu, *F, iv);
    auto same = RobustMultiscaleBound(mu, mu, 1.0, *F, iv);
    CHECK(same.rhs <= plain.rhs + 1e-12);
    CHECK(same.lhs == doctest::Approx(plain.lhs));
    auto nu = HeavyHalf(mu);
    auto half = RobustMultiscaleBound(nu, mu, 2.0, *F, iv);
    CHECK(half.deficit / half.q <= 3.0);
    CHECK_THROWS_AS(RobustMultiscaleBound(nu, mu, 1.0, *F, iv), Error);
  }
  auto a = Atom(2, 8);
  auto r = RobustMultiscaleBound(a, a, 1.0, *F, {{4, 8}});
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);
  CHECK(r.deficit == 0.0);
}

TEST_CASE("linearization defect") {
  auto mu = RandomTree(2, 14, 5, 0.5);
  auto P = Projection({std::cos(1.1), std::sin(1.1)});
  auto D = PinnedDistance({2.0, 0.5});
  for (int lvl : {4, 6}) {
    auto cubes = mu.level_masses(lvl);
    for (std::size_t i = 0; i < cubes.size(); i += std::max<std::size_t>(1, cubes.size() / 8)) {
      CubeIndex q = KeyToCube(cubes[i].first, 2, lvl);
      double x[2];
      CubeCorner(q, x);
      x[0] += std::ldexp(0.5, -lvl);
      x[1] += std::ldexp(0.5, -lvl);
      CHECK(LinearizationDefect(mu, *P, q, x, 2 * lvl) == 0.0);
      double dd = LinearizationDefect(mu, *D, q, x, 2 * lvl);
      CHECK(dd <= 2.0);
    }
  }
  CubeIndex q{3, {1, 1}};
  double x[2] = {0.2, 0.2};
  try {
    LinearizationDefect(mu, *D, q, x, 7);
    FAIL("expected LinearizationOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLinearizationOutOfRange);
  }
  auto a = Atom(2, 8);
  CubeIndex qa{4, {0, 0}};
  double xa[2] = {0.01, 0.01};
  CHECK(LinearizationDefect(a, *D, qa, xa, 8) == 0.0);
}

}  // TEST_SUITE
