#pragma once

// Dyadic cubes, 2^-m sets and 2^-m measures on [0,1)^d.
//
// Cells are addressed by Morton keys: the coordinate bits of a level-j cube
// are interleaved from the most significant level down, coordinate 0 first.
// With that layout the level-m descendants of any cube occupy one contiguous
// key range, so cube masses are prefix-sum differences and conditionals are
// slices.

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "frostlab/error.hpp"
#include "frostlab/numeric.hpp"

namespace frostlab {

inline constexpr int kMaxDim = 4;

using Key = std::uint64_t;

struct CubeIndex {
  int level = 0;
  std::vector<std::uint32_t> coords;

  int dim() const { return static_cast<int>(coords.size()); }
  CubeIndex parent() const;
  bool operator==(const CubeIndex&) const = default;
};

// Morton helpers. Require d*level <= 63.
Key EncodeKey(std::span<const std::uint32_t> coords, int level);
void DecodeKey(Key key, int d, int level, std::uint32_t* coords);
CubeIndex KeyToCube(Key key, int d, int level);
Key CubeToKey(const CubeIndex& q);
void CheckShape(int d, int m);

// Lower corner and side of a cube.
void CubeCorner(const CubeIndex& q, double* corner);

class DyadicSet {
 public:
  DyadicSet() = default;
  DyadicSet(int d, int m, std::vector<Key> keys);

  static DyadicSet FromCubes(int d, int m, const std::vector<CubeIndex>& cells);
  static DyadicSet Full(int d, int m);

  int dim() const { return d_; }
  int depth() const { return m_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const std::vector<Key>& keys() const { return keys_; }
  bool contains(Key k) const {
    return std::binary_search(keys_.begin(), keys_.end(), k);
  }
  std::size_t count_cubes(int j) const;
  CubeIndex cell(std::size_t i) const { return KeyToCube(keys_[i], d_, m_); }

  DyadicSet set_union(const DyadicSet& o) const;
  DyadicSet set_difference(const DyadicSet& o) const;

 private:
  int d_ = 1;
  int m_ = 0;
  std::vector<Key> keys_;
};

template <class M>
struct Cell {
  Key key;
  M mass;
};

template <class M>
class BasicMeasure {
 public:
  BasicMeasure() = default;
  // Duplicate keys are merged; cells with zero mass are dropped.
  BasicMeasure(int d, int m, std::vector<Cell<M>> cells);

  int dim() const { return d_; }
  int depth() const { return m_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const std::vector<Key>& keys() const { return keys_; }
  const std::vector<M>& masses() const { return masses_; }
  const M& mass(std::size_t i) const { return masses_[i]; }
  M total() const { return prefix_.empty() ? M(0) : prefix_.back(); }
  CubeIndex cell(std::size_t i) const { return KeyToCube(keys_[i], d_, m_); }
  void center(std::size_t i, double* x) const;

  // Index range [lo, hi) of level-m cells inside the given cube.
  std::pair<std::size_t, std::size_t> range(const CubeIndex& q) const;
  std::pair<std::size_t, std::size_t> range(Key cube_key, int level) const;
  M range_mass(std::size_t lo, std::size_t hi) const {
    return prefix_[hi] - prefix_[lo];
  }
  M cube_mass(const CubeIndex& q) const {
    auto [lo, hi] = range(q);
    return range_mass(lo, hi);
  }

  // Positive-mass cubes at level j with their masses, in key order.
  std::vector<std::pair<Key, M>> level_masses(int j) const;
  std::size_t count_cubes(int j) const;
  DyadicSet support() const { return DyadicSet(d_, m_, keys_); }

  BasicMeasure coarsen(int j) const;
  BasicMeasure conditional(const CubeIndex& q) const;
  BasicMeasure restrict_normalize(const DyadicSet& a) const;
  // Restriction without normalization.
  BasicMeasure restrict(const DyadicSet& a) const;
  BasicMeasure normalized() const;

  // Mass of cells whose center lies in the closed ball B(x, r).
  M ball_mass(std::span<const double> x, double r) const;
  // Mass of cells whose center lies in the open r-neighborhood of the
  // hyperplane {y : <normal, y> = offset}.
  M slab_mass(std::span<const double> normal, double offset, double r) const;

 private:
  template <class Inside>
  M Descend(Inside&& classify) const;

  int d_ = 1;
  int m_ = 0;
  std::vector<Key> keys_;
  std::vector<M> masses_;
  std::vector<M> prefix_;
};

using DyadicMeasure = BasicMeasure<double>;
using ExactMeasure = BasicMeasure<Rational>;

template <class M>
BasicMeasure<M> UniformOn(const DyadicSet& set);

template <class M>
BasicMeasure<M> AtomMeasure(int d, int m, const CubeIndex& cell);

ExactMeasure ToExact(const DyadicMeasure& mu);
DyadicMeasure ToDouble(const ExactMeasure& mu);

// ---------------------------------------------------------------------------
// Template implementation.

template <class M>
BasicMeasure<M>::BasicMeasure(int d, int m, std::vector<Cell<M>> cells)
    : d_(d), m_(m) {
  CheckShape(d, m);
  const Key limit = m * d == 0 ? 1 : (Key{1} << (m * d));
  std::sort(cells.begin(), cells.end(),
            [](const Cell<M>& a, const Cell<M>& b) { return a.key < b.key; });
  for (std::size_t i = 0; i < cells.size();) {
    Key k = cells[i].key;
    Require(k < limit, ErrorCode::kOutOfRange, "cell key outside [0,1)^d");
    M s = cells[i].mass;
    std::size_t j = i + 1;
    while (j < cells.size() && cells[j].key == k) s += cells[j++].mass;
    Require(!(s < M(0)), ErrorCode::kInvalidArgument, "negative mass");
    if (s > M(0)) {
      keys_.push_back(k);
      masses_.push_back(s);
    }
    i = j;
  }
  prefix_.resize(keys_.size() + 1);
  prefix_[0] = M(0);
  for (std::size_t i = 0; i < keys_.size(); ++i)
    prefix_[i + 1] = prefix_[i] + masses_[i];
}

template <class M>
void BasicMeasure<M>::center(std::size_t i, double* x) const {
  std::uint32_t c[kMaxDim];
  DecodeKey(keys_[i], d_, m_, c);
  double h = std::ldexp(1.0, -m_);
  for (int a = 0; a < d_; ++a) x[a] = (c[a] + 0.5) * h;
}

template <class M>
std::pair<std::size_t, std::size_t> BasicMeasure<M>::range(Key cube_key,
                                                           int level) const {
  int shift = d_ * (m_ - level);
  Key lo_key = cube_key << shift;
  Key hi_key = (cube_key + 1) << shift;
  auto lo = std::lower_bound(keys_.begin(), keys_.end(), lo_key);
  auto hi = (level == 0) ? keys_.end()
                         : std::lower_bound(lo, keys_.end(), hi_key);
  return {static_cast<std::size_t>(lo - keys_.begin()),
          static_cast<std::size_t>(hi - keys_.begin())};
}

template <class M>
std::pair<std::size_t, std::size_t> BasicMeasure<M>::range(
    const CubeIndex& q) const {
  Require(q.dim() == d_, ErrorCode::kDimensionMismatch, "cube dimension");
  Require(q.level >= 0 && q.level <= m_, ErrorCode::kOutOfRange, "cube level");
  return range(CubeToKey(q), q.level);
}

template <class M>
std::vector<std::pair<Key, M>> BasicMeasure<M>::level_masses(int j) const {
  Require(j >= 0 && j <= m_, ErrorCode::kOutOfRange, "level");
  std::vector<std::pair<Key, M>> out;
  int shift = d_ * (m_ - j);
  std::size_t i = 0;
  while (i < keys_.size()) {
    Key a = keys_[i] >> shift;
    std::size_t k = i + 1;
    while (k < keys_.size() && (keys_[k] >> shift) == a) ++k;
    out.emplace_back(a, range_mass(i, k));
    i = k;
  }
  return out;
}

template <class M>
std::size_t BasicMeasure<M>::count_cubes(int j) const {
  Require(j >= 0 && j <= m_, ErrorCode::kOutOfRange, "level");
  int shift = d_ * (m_ - j);
  std::size_t n = 0;
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (i == 0 || (keys_[i] >> shift) != (keys_[i - 1] >> shift)) ++n;
  return n;
}

template <class M>
BasicMeasure<M> BasicMeasure<M>::coarsen(int j) const {
  auto lm = level_masses(j);
  std::vector<Cell<M>> cells;
  cells.reserve(lm.size());
  for (auto& [k, w] : lm) cells.push_back({k, w});
  return BasicMeasure(d_, j, std::move(cells));
}

template <class M>
BasicMeasure<M> BasicMeasure<M>::conditional(const CubeIndex& q) const {
  auto [lo, hi] = range(q);
  M w = range_mass(lo, hi);
  Require(w > M(0), ErrorCode::kZeroMassCube, "conditional on a null cube");
  int shift = d_ * (m_ - q.level);
  Key base = CubeToKey(q) << shift;
  std::vector<Cell<M>> cells;
  cells.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i)
    cells.push_back({keys_[i] - base, M(masses_[i] / w)});
  return BasicMeasure(d_, m_ - q.level, std::move(cells));
}

template <class M>
BasicMeasure<M> BasicMeasure<M>::restrict(const DyadicSet& a) const {
  Require(a.dim() == d_ && a.depth() == m_, ErrorCode::kDimensionMismatch,
          "set shape differs from measure");
  std::vector<Cell<M>> cells;
  const auto& ak = a.keys();
  std::size_t p = 0;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    while (p < ak.size() && ak[p] < keys_[i]) ++p;
    if (p < ak.size() && ak[p] == keys_[i]) cells.push_back({keys_[i], masses_[i]});
  }
  return BasicMeasure(d_, m_, std::move(cells));
}

template <class M>
BasicMeasure<M> BasicMeasure<M>::normalized() const {
  M w = total();
  Require(w > M(0), ErrorCode::kZeroMassSet, "normalizing a null measure");
  std::vector<Cell<M>> cells;
  cells.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i)
    cells.push_back({keys_[i], M(masses_[i] / w)});
  return BasicMeasure(d_, m_, std::move(cells));
}

template <class M>
BasicMeasure<M> BasicMeasure<M>::restrict_normalize(const DyadicSet& a) const {
  BasicMeasure r = restrict(a);
  Require(r.total() > M(0), ErrorCode::kZeroMassSet, "set has zero mass");
  return r.normalized();
}

// Walks the cube tree from the root. classify(lo, hi) receives the bounding
// box of the cell centers inside a cube and returns +1 (all inside), -1 (all
// outside) or 0 (undecided).
template <class M>
template <class Inside>
M BasicMeasure<M>::Descend(Inside&& classify) const {
  struct Frame {
    int level;
    Key key;
    std::size_t lo, hi;
    std::uint32_t c[kMaxDim];
  };
  M acc(0);
  if (keys_.empty()) return acc;
  std::vector<Frame> stack;
  Frame root{0, 0, 0, keys_.size(), {}};
  stack.push_back(root);
  const double half_cell = std::ldexp(0.5, -m_);
  double lo[kMaxDim], hi[kMaxDim];
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    double side = std::ldexp(1.0, -f.level);
    for (int a = 0; a < d_; ++a) {
      lo[a] = f.c[a] * side + half_cell;
      hi[a] = (f.c[a] + 1) * side - half_cell;
    }
    int v = classify(lo, hi);
    if (v > 0) {
      acc += range_mass(f.lo, f.hi);
      continue;
    }
    if (v < 0 || f.level == m_) continue;
    int shift = d_ * (m_ - f.level - 1);
    std::size_t start = f.lo;
    for (Key child = 0; child < (Key{1} << d_); ++child) {
      Key ck = (f.key << d_) | child;
      Key end_key = (ck + 1) << shift;
      auto it = std::lower_bound(keys_.begin() + start, keys_.begin() + f.hi,
                                 end_key);
      std::size_t stop = static_cast<std::size_t>(it - keys_.begin());
      if (stop > start) {
        Frame g{f.level + 1, ck, start, stop, {}};
        for (int a = 0; a < d_; ++a) {
          int bit = (child >> (d_ - 1 - a)) & 1;
          g.c[a] = f.c[a] * 2 + bit;
        }
        stack.push_back(g);
      }
      start = stop;
    }
  }
  return acc;
}

template <class M>
M BasicMeasure<M>::ball_mass(std::span<const double> x, double r) const {
  Require(static_cast<int>(x.size()) == d_, ErrorCode::kDimensionMismatch,
          "point dimension");
  Require(r > 0, ErrorCode::kInvalidArgument, "radius must be positive");
  const double r2 = r * r;
  const int d = d_;
  return Descend([&](const double* lo, const double* hi) {
    double near = 0, far = 0;
    for (int a = 0; a < d; ++a) {
      double dn = 0;
      if (x[a] < lo[a]) dn = lo[a] - x[a];
      else if (x[a] > hi[a]) dn = x[a] - hi[a];
      double df = std::max(std::fabs(x[a] - lo[a]), std::fabs(x[a] - hi[a]));
      near += dn * dn;
      far += df * df;
    }
    if (far <= r2) return 1;
    if (near > r2) return -1;
    return 0;
  });
}

template <class M>
M BasicMeasure<M>::slab_mass(std::span<const double> normal, double offset,
                             double r) const {
  Require(static_cast<int>(normal.size()) == d_, ErrorCode::kDimensionMismatch,
          "normal dimension");
  double n2 = 0;
  for (double v : normal) n2 += v * v;
  Require(std::fabs(std::sqrt(n2) - 1.0) <= 1e-9, ErrorCode::kBadNormal,
          "hyperplane normal must have unit norm");
  const int d = d_;
  return Descend([&](const double* lo, const double* hi) {
    // Range of <normal, y> - offset over the box.
    double mn = -offset, mx = -offset;
    for (int a = 0; a < d; ++a) {
      double p = normal[a] * lo[a], q = normal[a] * hi[a];
      mn += std::min(p, q);
      mx += std::max(p, q);
    }
    if (mn > -r && mx < r) return 1;
    if (mn >= r || mx <= -r) return -1;
    return 0;
  });
}

template <class M>
BasicMeasure<M> UniformOn(const DyadicSet& set) {
  Require(!set.empty(), ErrorCode::kEmptySupport, "uniform_on an empty set");
  M w = M(1) / M(static_cast<long long>(set.size()));
  std::vector<Cell<M>> cells;
  cells.reserve(set.size());
  for (Key k : set.keys()) cells.push_back({k, w});
  return BasicMeasure<M>(set.dim(), set.depth(), std::move(cells));
}

template <class M>
BasicMeasure<M> AtomMeasure(int d, int m, const CubeIndex& cell) {
  Require(cell.level == m && cell.dim() == d, ErrorCode::kInvalidArgument,
          "atom cell must be a level-m cube");
  return BasicMeasure<M>(d, m, {{CubeToKey(cell), M(1)}});
}

}  // namespace frostlab
