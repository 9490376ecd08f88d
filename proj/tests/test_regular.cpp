#include <cmath>

#include "doctest.h"
#include "frostlab/regular.hpp"
#include "support.hpp"

using namespace frostlab;
using testsupport::DigitCantor1D;
using testsupport::RandomTree;

namespace {

template <class M>
void CheckLemmaBounds(const BasicRegularPiece<M>& p) {
  const auto& nu = p.measure;
  const int d = nu.dim(), T = p.T;
  const int ell = static_cast<int>(p.sigma.size());
  const double tol = 1e-9;
  for (int j = 1; j <= ell; ++j) {
    double b = Beta(p.sigma, j);
    double hi = std::exp2(-j * T * b);
    double lo = std::exp2(-j) * hi;
    for (auto& [k, w] : nu.level_masses(j * T)) {
      double x = MassTraits<M>::ToDouble(w);
      CHECK(x <= hi * (1 + tol));
      CHECK(x >= lo * (1 - tol));
    }
  }
  double beta = Beta(p.sigma);
  double m = nu.depth();
  double n = static_cast<double>(p.support.size());
  CHECK(n >= std::exp2(beta * m) * (1 - tol));
  CHECK(n <= std::exp2((beta + 1.0 / T) * m) * (1 + tol));
  double u = 1.0 / n;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    double v = MassTraits<M>::ToDouble(nu.mass(i));
    CHECK(u >= std::exp2(-ell) * v * (1 - tol));
    CHECK(u <= std::exp2(ell) * v * (1 + tol));
  }
  (void)d;
}

DyadicMeasure Mixture(const DyadicMeasure& a, const DyadicMeasure& b, double t) {
  std::vector<Cell<double>> cells;
  for (std::size_t i = 0; i < a.size(); ++i) cells.push_back({a.keys()[i], t * a.mass(i)});
  for (std::size_t i = 0; i < b.size(); ++i)
    cells.push_back({b.keys()[i], (1 - t) * b.mass(i)});
  return DyadicMeasure(a.dim(), a.depth(), cells);
}

}  // namespace

TEST_SUITE("regular") {

TEST_CASE("beta") {
  std::vector<double> s1{1, 2};
  CHECK(Beta(s1, 2) == 1.5);
  std::vector<double> c(7, 0.75);
  for (int j = 1; j <= 7; ++j) CHECK(Beta(c, j) == doctest::Approx(0.75));
  std::vector<double> s3{0.5, 1.5, 1.0};
  CHECK(Beta(s3, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Beta(s3, 0), Error);
  CHECK_THROWS_AS(Beta(s3, 4), Error);
}

TEST_CASE("is_regular") {
  for (int d = 1; d <= 2; ++d) {
    auto u = UniformOn<double>(DyadicSet::Full(d, 6));
    std::vector<double> s(3, d);
    CHECK(IsRegular(u, s, 2).regular);
    CHECK(IsRegular(ToExact(u), s, 2).regular);
  }
  auto cantor = DigitCantor1D(2, 4, {0, 3});
  std::vector<double> half(4, 0.5);
  CHECK(IsRegular(cantor, half, 2).regular);
  CHECK(IsRegular(ToExact(cantor), half, 2).regular);
  std::vector<double> off(4, 0.6);
  auto bad = IsRegular(cantor, off, 2);
  CHECK_FALSE(bad.regular);
  REQUIRE(bad.violation.has_value());
  CHECK(bad.violation->block == 1);
  CHECK(bad.violation->ratio == doctest::Approx(0.5));

  try {
    IsRegular(cantor, std::vector<double>(3, 0.5), 2);
    FAIL("expected DepthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDepthMismatch);
  }
}

TEST_CASE("extract keeps regular input whole") {
  auto cantor = DigitCantor1D(2, 4, {0, 3});
  auto p = ExtractRegularSubset(ToExact(cantor), 2, 4);
  CHECK(p.support.size() == cantor.size());
  CHECK(p.mass == Rational(1));
  for (double s : p.sigma) CHECK(s == 0.5);

  for (int d = 1; d <= 2; ++d) {
    auto u = UniformOn<Rational>(DyadicSet::Full(d, 4));
    auto q = ExtractRegularSubset(u, 2, 2);
    CHECK(q.support.size() == u.size());
    for (double s : q.sigma) CHECK(s == d);
  }
}

TEST_CASE("extract on half uniform half atom") {
  // left half uniform with mass 1/2, an atom of mass 1/2 at the right end
  std::vector<Cell<Rational>> cells;
  for (std::uint32_t i = 0; i < 8; ++i)
    cells.push_back({CubeToKey(CubeIndex{4, {i}}), Rational(1, 16)});
  cells.push_back({CubeToKey(CubeIndex{4, {15}}), Rational(1, 2)});
  ExactMeasure mu(1, 4, cells);
  auto p = ExtractRegularSubset(mu, 1, 4);
  CHECK(IsRegular(p.measure, p.sigma, 1).regular);
  CHECK(p.mass >= Rational(1, 256));
  CheckLemmaBounds(p);
}

TEST_CASE("extract on random trees satisfies the regularity lemma bounds") {
  int below = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    int d = 1 + seed % 2;
    int T = 1 + seed % 3;
    int ell = 8 / (d * T) + 1;
    auto mu = RandomTree(d, T * ell, seed);
    auto p = ExtractRegularSubset(mu, T, ell);
    auto ex = ExtractRegularSubset(ToExact(mu), T, ell);
    CHECK(ex.sigma == p.sigma);
    CHECK(ex.support.keys() == p.support.keys());
    CHECK(IsRegular(ex.measure, ex.sigma, T).regular);
    CHECK(IsRegular(p.measure, p.sigma, T).regular);
    for (double s : p.sigma) {
      CHECK(s >= 0);
      CHECK(s <= d);
    }
    CheckLemmaBounds(p);
    ++total;
    if (p.mass < ExtractionMassBound(d, T, ell)) ++below;
  }
  MESSAGE("extractions below the (2dT+2)^-ell bound: " << below << "/" << total);
  CHECK(below == 0);
}

TEST_CASE("decompose_regular") {
  auto cantor = DigitCantor1D(2, 5, {0, 3});
  auto one = DecomposeRegular(cantor, 2, 5, 0.1);
  REQUIRE(one.pieces.size() == 1);
  CHECK(one.pieces[0].support.size() == cantor.size());

  auto u = UniformOn<double>(DyadicSet::Full(1, 10));
  CHECK(DecomposeRegular(u, 2, 5, 0.1).pieces.size() == 1);

  // shares 1/3 against shares 1: no single ratio serves both
  auto a = DigitCantor1D(2, 5, {0, 1, 2});
  auto b = DigitCantor1D(2, 5, {3});
  auto mix = ToExact(Mixture(a, b, 0.5));
  auto dec = DecomposeRegular(mix, 2, 5, 0.1);
  CHECK(dec.pieces.size() >= 2);
  CHECK(dec.union_mass >= Rational(1) - Rational(1, 2));
  for (auto& p : dec.pieces) CHECK(IsRegular(p.measure, p.sigma, 2).regular);
}

TEST_CASE("decompose_regular postconditions on random trees") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    int d = 1 + seed % 2;
    int T = 2;
    int ell = d == 1 ? 5 : 3;
    int m = T * ell;
    double eps = 0.1;
    auto mu = ToExact(RandomTree(d, m, seed)).normalized();
    auto dec = DecomposeRegular(mu, T, ell, eps);
    Rational floor(std::exp2(-dec.delta * m));
    Rational stop(std::exp2(-eps * m));
    DyadicSet seen(d, m, {});
    Rational sum(0);
    for (auto& p : dec.pieces) {
      CHECK(p.support.set_difference(seen).size() == p.support.size());
      seen = seen.set_union(p.support);
      CHECK(p.mass >= floor);
      CHECK(IsRegular(p.measure, p.sigma, T).regular);
      sum += p.mass;
    }
    CHECK(sum == dec.union_mass);
    CHECK(mu.restrict(seen).total() == sum);
    if (!dec.pieces.empty()) CHECK(dec.union_mass >= Rational(1) - stop);
  }
}

}  // TEST_SUITE
