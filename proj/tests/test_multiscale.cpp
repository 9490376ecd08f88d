#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "frostlab/multiscale.hpp"
#include "support.hpp"

using namespace frostlab;
using testsupport::Moran;
using testsupport::MoranSigma;
using testsupport::RandomDigits;

namespace {

std::vector<std::vector<int>> Repeat(std::vector<int> digs, int ell) {
  return std::vector<std::vector<int>>(ell, digs);
}

RegularPiece Piece(int d, int T, const std::vector<std::vector<int>>& blocks) {
  return MakeRegularPiece(Moran(d, T, blocks), MoranSigma(T, blocks), T);
}

// Digits {0,3} on each axis of a T=2 block, Morton-interleaved.
std::vector<int> ProductCorners() { return {0b0000, 0b0101, 0b1010, 0b1111}; }

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

void ExpectOk(const VerificationReport& r) {
  for (const auto& f : r.failures) INFO(f);
  CHECK(r.ok());
}

}  // namespace

TEST_SUITE("multiscale") {

TEST_CASE("branching function examples") {
  std::vector<double> full(6, 2.0), zero(6, 0.0), one(6, 1.0);
  auto f = BranchingFunction(full, 2);
  auto g = BranchingFunction(zero, 2);
  auto h = BranchingFunction(one, 2);
  CHECK(f.grid() == 6);
  for (int j = 0; j <= 6; ++j) {
    CHECK(f.at(j) == doctest::Approx(j));
    CHECK(g.at(j) == 0.0);
    CHECK(h.at(j) == doctest::Approx(j / 2.0));
  }
  CHECK(h.eval(2.5) == doctest::Approx(1.25));
}

TEST_CASE("make piece rejects irregular input") {
  auto mu = Moran(1, 2, Repeat({0, 3}, 4));
  CHECK(CodeOf([&] { MakeRegularPiece(mu, std::vector<double>(4, 1.0), 2); }) ==
        ErrorCode::kHypothesisFailed);
  CHECK(CodeOf([&] { MakeRegularPiece(mu, std::vector<double>(4, 0.5), 2); }) ==
        ErrorCode::kOk);
}

TEST_CASE("uniform measure fails non-concentration") {
  auto p = Piece(2, 2, Repeat([] {
                   std::vector<int> v(16);
                   for (int i = 0; i < 16; ++i) v[i] = i;
                   return v;
                 }(), 4));
  auto nc = CheckNonConcentration(p.measure, 0.1);
  CHECK_FALSE(nc.ok);
  CHECK(nc.max_mass > 0.5);
  CHECK(CodeOf([&] { FrostmanMultiscale(p, 0.1, 2.0); }) ==
        ErrorCode::kNonConcentrationFailed);
}

TEST_CASE("eps floor") {
  auto p = Piece(1, 2, Repeat({0, 3}, 10));
  CHECK(CodeOf([&] { FrostmanMultiscale(p, 0.1, 1.9); }) == ErrorCode::kEpsTooSmallForT);
  CHECK(CodeOf([&] { FrostmanMultiscale(p, 0.1, 2.0); }) == ErrorCode::kOk);
}

TEST_CASE("product Cantor with sigma 1 in the plane") {
  auto p = Piece(2, 2, Repeat(ProductCorners(), 8));
  auto nc = CheckNonConcentration(p.measure, 0.4);
  CHECK(nc.ok);
  auto r = FrostmanMultiscale(p, 0.4, 2.0, {0, 16});
  ExpectOk(r.report);
  REQUIRE_FALSE(r.dec.intervals.empty());
  for (const auto& iv : r.dec.intervals) CHECK(iv.alpha == doctest::Approx(1.0));
  CHECK(r.dec.s == doctest::Approx(0.5));
  CHECK(r.dec.t == doctest::Approx(0.25));
  int covered = 0;
  for (const auto& iv : r.dec.intervals) covered += r.dec.m(iv);
  CHECK(r.report.iv_mass == covered);
  // The measure is exactly 1-dimensional at every scale, so the measured
  // exponent excess stays well below the floor.
  CHECK(r.report.eps_needed < 1.0);
}

TEST_CASE("concave staircase has a mid-exponent bridge") {
  // Full branching for six blocks, then atoms.
  std::vector<std::vector<int>> b = Repeat({0, 1, 2, 3}, 6);
  for (int j = 0; j < 4; ++j) b.push_back({1});
  auto p = Piece(1, 2, b);
  auto r = FrostmanMultiscale(p, 0.3, 2.0, {0, 0});
  ExpectOk(r.report);
  CHECK(r.dec.s == doctest::Approx(0.6));
  CHECK(r.dec.t == doctest::Approx(0.4));
  CHECK(r.dec.xi > 0);
  bool mid = false;
  for (const auto& iv : r.dec.intervals)
    if (iv.alpha >= r.dec.xi && iv.alpha <= 1 - r.dec.xi) mid = true;
  CHECK(mid);
  CHECK(r.report.iv_mass >= r.dec.xi * r.dec.m());
}

TEST_CASE("planar staircase") {
  // T = 1 keeps the support small; the floor is then eps >= 4.
  std::vector<std::vector<int>> b = Repeat({0, 1, 2, 3}, 6);
  for (int j = 0; j < 4; ++j) b.push_back({2});
  auto p = Piece(2, 1, b);
  CHECK(CodeOf([&] { FrostmanMultiscale(p, 0.3, 3.9); }) == ErrorCode::kEpsTooSmallForT);
  auto r = FrostmanMultiscale(p, 0.3, 4.0, {0, 0});
  ExpectOk(r.report);
  bool mid = false;
  for (const auto& iv : r.dec.intervals)
    if (iv.alpha >= r.dec.xi && iv.alpha <= 2 - r.dec.xi) mid = true;
  CHECK(mid);
}

TEST_CASE("random Moran measures") {
  int verified = 0;
  for (int d = 1; d <= 2; ++d) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      auto b = RandomDigits(d, 2, 8, 2, d == 1 ? 3 : 4, seed * 31 + d);
      auto p = Piece(d, 2, b);
      CAPTURE(seed);
      CAPTURE(d);
      try {
        auto r = FrostmanMultiscale(p, 0.1, 2.0, {32, 16});
        ExpectOk(r.report);
        for (const auto& iv : r.dec.intervals) {
          CHECK(iv.alpha >= 0);
          CHECK(iv.alpha <= d);
        }
        ++verified;
      } catch (const Error& e) {
        // Only hypothesis rejections are acceptable here.
        CHECK((e.code() == ErrorCode::kNonConcentrationFailed ||
               e.code() == ErrorCode::kHypothesisFailed));
      }
    }
  }
  CHECK(verified >= 12);
}

TEST_CASE("short lattices are refined and snapped back") {
  // s = log2(3)/2 leaves no room for the first block on a 10-block grid.
  auto p = Piece(1, 2, Repeat({0, 1, 3}, 10));
  auto r = FrostmanMultiscale(p, 0.1, 2.0, {0, 0});
  ExpectOk(r.report);
  bool refined = false;
  for (const auto& w : r.dec.warnings) refined = refined || w.find("refined") != std::string::npos;
  CHECK(refined);
  for (const auto& iv : r.dec.intervals) {
    CHECK(iv.length() >= 1);
    CHECK(iv.alpha == doctest::Approx(std::log2(3.0) / 2));
  }
}

TEST_CASE("verify flags broken decompositions") {
  auto p = Piece(1, 2, Repeat({0, 3}, 8));
  ScaleDecomposition dec;
  dec.d = 1;
  dec.T = 2;
  dec.ell = 8;
  dec.eps = 0.1;
  dec.xi = 0.1;
  dec.tau = 0.2;
  dec.intervals = {{4, 8, 0.5}};
  auto ok = VerifyScales(p, dec, {0, 0});
  CHECK(ok.i_ok);
  CHECK(ok.iv_ok);
  dec.intervals = {{4, 8, 0.9}};
  CHECK_FALSE(VerifyScales(p, dec, {0, 0}).ii_ok);
  dec.intervals = {{2, 8, 0.5}};
  CHECK_FALSE(VerifyScales(p, dec, {0, 0}).i_ok);
  dec.intervals = {{4, 5, 0.5}};
  CHECK_FALSE(VerifyScales(p, dec, {0, 0}).i_ok);  // shorter than tau*ell
  CHECK_FALSE(VerifyScales(p, dec, {0, 0}).gaps_ok);
}

TEST_CASE("ahlfors uniform") {
  auto p = Piece(1, 2, Repeat({0, 1, 2, 3}, 8));
  auto r = AhlforsMultiscale(p, 1.0, {64, 32});
  ExpectOk(r.report);
  REQUIRE_FALSE(r.dec.intervals.empty());
  for (const auto& iv : r.dec.intervals) CHECK(iv.alpha == doctest::Approx(1.0));
  CHECK(r.dec.intervals.back().B == 8);
}

TEST_CASE("ahlfors product Cantor") {
  auto p = Piece(2, 2, Repeat(ProductCorners(), 8));
  auto r = AhlforsMultiscale(p, 2.0, {0, 16});
  ExpectOk(r.report);
  for (const auto& iv : r.dec.intervals) CHECK(iv.alpha == doctest::Approx(1.0));
}

TEST_CASE("ahlfors random Moran measures") {
  for (int d = 1; d <= 2; ++d) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const int n = 1 << (2 * d);
      auto b = RandomDigits(d, 2, 8, 1, d == 1 ? n : 4, seed * 17 + d);
      auto p = Piece(d, 2, b);
      CAPTURE(seed);
      auto r = AhlforsMultiscale(p, 2.0, {32, 16});
      ExpectOk(r.report);
      CHECK(r.report.sum_alpha_m >= r.report.iii_target);
    }
  }
}

TEST_CASE("report does not depend on the thread count") {
  auto p = Piece(2, 2, Repeat(ProductCorners(), 6));
  setenv("FROSTLAB_THREADS", "1", 1);
  auto a = AhlforsMultiscale(p, 2.0, {0, 0});
  setenv("FROSTLAB_THREADS", "3", 1);
  auto b = AhlforsMultiscale(p, 2.0, {0, 0});
  unsetenv("FROSTLAB_THREADS");
  REQUIRE(a.report.scales.size() == b.report.scales.size());
  for (std::size_t i = 0; i < a.report.scales.size(); ++i) {
    CHECK(a.report.scales[i].max_excess == b.report.scales[i].max_excess);
    CHECK(a.report.scales[i].min_excess == b.report.scales[i].min_excess);
    CHECK(a.report.scales[i].probes == b.report.scales[i].probes);
  }
}

}  // TEST_SUITE
