#pragma once

// Independent measure builders for the unit tests. These do not go through
// the library generators on purpose.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "frostlab/dyadic.hpp"

namespace testsupport {

using frostlab::Cell;
using frostlab::CubeIndex;
using frostlab::DyadicMeasure;
using frostlab::Key;

// 1-d set whose base-2^T digits all lie in `digits`; uniform measure.
inline DyadicMeasure DigitCantor1D(int T, int ell, const std::vector<int>& digits) {
  std::vector<std::uint32_t> idx{0};
  for (int b = 0; b < ell; ++b) {
    std::vector<std::uint32_t> nxt;
    for (auto i : idx)
      for (int g : digits) nxt.push_back((i << T) | g);
    idx = nxt;
  }
  std::vector<Cell<double>> cells;
  for (auto i : idx)
    cells.push_back({frostlab::CubeToKey(CubeIndex{T * ell, {i}}), 1.0 / idx.size()});
  return DyadicMeasure(1, T * ell, cells);
}

// Product of per-axis digit sets.
inline DyadicMeasure DigitCantor2D(int T, int ell, const std::vector<int>& dx,
                                   const std::vector<int>& dy) {
  auto a = DigitCantor1D(T, ell, dx);
  auto b = DigitCantor1D(T, ell, dy);
  std::vector<Cell<double>> cells;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      CubeIndex q{T * ell, {a.cell(i).coords[0], b.cell(j).coords[0]}};
      cells.push_back({frostlab::CubeToKey(q), a.mass(i) * b.mass(j)});
    }
  return DyadicMeasure(2, T * ell, cells);
}

// Random tree: each cube splits its mass over a random non-empty subset of
// its children with random weights.
inline DyadicMeasure RandomTree(int d, int m, std::uint64_t seed,
                                double keep_prob = 0.6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Cell<double>> cells;
  std::function<void(Key, int, double)> rec = [&](Key k, int lvl, double w) {
    if (lvl == m) {
      cells.push_back({k, w});
      return;
    }
    int nc = 1 << d;
    std::vector<double> wt(nc, 0.0);
    double s = 0;
    while (s == 0) {
      for (int c = 0; c < nc; ++c) {
        wt[c] = U(rng) < keep_prob ? U(rng) + 0.05 : 0.0;
        s += wt[c];
      }
    }
    for (int c = 0; c < nc; ++c)
      if (wt[c] > 0) rec((k << d) | c, lvl + 1, w * wt[c] / s);
  };
  rec(0, 0, 1.0);
  return DyadicMeasure(d, m, cells);
}

// Uniform measure whose level-jT cubes each keep the children listed in
// blocks[j-1]; a child is a dT-bit Morton suffix. Exactly regular with
// sigma_j = log2|blocks[j-1]| / T.
inline DyadicMeasure Moran(int d, int T, const std::vector<std::vector<int>>& blocks) {
  std::vector<Key> keys{0};
  for (const auto& digs : blocks) {
    std::vector<Key> nxt;
    for (Key k : keys)
      for (int g : digs) nxt.push_back((k << (d * T)) | static_cast<Key>(g));
    keys = nxt;
  }
  std::vector<Cell<double>> cells;
  for (Key k : keys) cells.push_back({k, 1.0 / keys.size()});
  return DyadicMeasure(d, T * static_cast<int>(blocks.size()), cells);
}

// Moran digit sets with a random count in [lo, hi] per block.
inline std::vector<std::vector<int>> RandomDigits(int d, int T, int ell, int lo,
                                                  int hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = 1 << (d * T);
  std::vector<std::vector<int>> out;
  for (int j = 0; j < ell; ++j) {
    int c = std::uniform_int_distribution<int>(lo, hi)(rng);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(c);
    std::sort(all.begin(), all.end());
    out.push_back(all);
  }
  return out;
}

inline std::vector<double> MoranSigma(int T, const std::vector<std::vector<int>>& blocks) {
  std::vector<double> s;
  for (const auto& b : blocks) s.push_back(std::log2(static_cast<double>(b.size())) / T);
  return s;
}

}  // namespace testsupport
