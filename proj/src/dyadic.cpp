#include "frostlab/dyadic.hpp"

#include <cmath>

namespace frostlab {

void CheckShape(int d, int m) {
  Require(d >= 1 && d <= kMaxDim, ErrorCode::kDimensionMismatch,
          "dimension must be in [1, 4]");
  Require(m >= 0 && d * m <= 63, ErrorCode::kOutOfRange,
          "depth too large for 64-bit cell keys");
}

CubeIndex CubeIndex::parent() const {
  Require(level > 0, ErrorCode::kOutOfRange, "root cube has no parent");
  CubeIndex p{level - 1, coords};
  for (auto& c : p.coords) c >>= 1;
  return p;
}

Key EncodeKey(std::span<const std::uint32_t> coords, int level) {
  const int d = static_cast<int>(coords.size());
  Key key = 0;
  for (int b = level - 1; b >= 0; --b)
    for (int a = 0; a < d; ++a) key = (key << 1) | ((coords[a] >> b) & 1u);
  return key;
}

void DecodeKey(Key key, int d, int level, std::uint32_t* coords) {
  for (int a = 0; a < d; ++a) coords[a] = 0;
  for (int b = level - 1; b >= 0; --b)
    for (int a = 0; a < d; ++a) {
      int pos = b * d + (d - 1 - a);
      coords[a] |= static_cast<std::uint32_t>((key >> pos) & 1u) << b;
    }
}

CubeIndex KeyToCube(Key key, int d, int level) {
  CubeIndex q{level, std::vector<std::uint32_t>(d)};
  DecodeKey(key, d, level, q.coords.data());
  return q;
}

Key CubeToKey(const CubeIndex& q) {
  CheckShape(q.dim(), q.level);
  for (auto c : q.coords)
    Require(q.level == 32 || c < (1u << q.level), ErrorCode::kOutOfRange,
            "cube coordinate outside [0, 2^j)");
  return EncodeKey(q.coords, q.level);
}

void CubeCorner(const CubeIndex& q, double* corner) {
  double side = std::ldexp(1.0, -q.level);
  for (int a = 0; a < q.dim(); ++a) corner[a] = q.coords[a] * side;
}

DyadicSet::DyadicSet(int d, int m, std::vector<Key> keys)
    : d_(d), m_(m), keys_(std::move(keys)) {
  CheckShape(d, m);
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  if (!keys_.empty())
    Require(m * d == 0 ? keys_.back() == 0 : keys_.back() < (Key{1} << (m * d)),
            ErrorCode::kOutOfRange, "cell key outside [0,1)^d");
}

DyadicSet DyadicSet::FromCubes(int d, int m,
                               const std::vector<CubeIndex>& cells) {
  std::vector<Key> keys;
  keys.reserve(cells.size());
  for (const auto& c : cells) {
    Require(c.level == m && c.dim() == d, ErrorCode::kInvalidArgument,
            "set cells must be level-m cubes");
    keys.push_back(CubeToKey(c));
  }
  return DyadicSet(d, m, std::move(keys));
}

DyadicSet DyadicSet::Full(int d, int m) {
  CheckShape(d, m);
  Require(d * m <= 30, ErrorCode::kOutOfRange, "full grid too large");
  std::vector<Key> keys(std::size_t{1} << (d * m));
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = i;
  return DyadicSet(d, m, std::move(keys));
}

std::size_t DyadicSet::count_cubes(int j) const {
  Require(j >= 0 && j <= m_, ErrorCode::kOutOfRange, "level");
  int shift = d_ * (m_ - j);
  std::size_t n = 0;
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (i == 0 || (keys_[i] >> shift) != (keys_[i - 1] >> shift)) ++n;
  return n;
}

DyadicSet DyadicSet::set_union(const DyadicSet& o) const {
  Require(o.d_ == d_ && o.m_ == m_, ErrorCode::kDimensionMismatch, "set shape");
  std::vector<Key> out;
  std::set_union(keys_.begin(), keys_.end(), o.keys_.begin(), o.keys_.end(),
                 std::back_inserter(out));
  return DyadicSet(d_, m_, std::move(out));
}

DyadicSet DyadicSet::set_difference(const DyadicSet& o) const {
  Require(o.d_ == d_ && o.m_ == m_, ErrorCode::kDimensionMismatch, "set shape");
  std::vector<Key> out;
  std::set_difference(keys_.begin(), keys_.end(), o.keys_.begin(),
                      o.keys_.end(), std::back_inserter(out));
  return DyadicSet(d_, m_, std::move(out));
}

ExactMeasure ToExact(const DyadicMeasure& mu) {
  std::vector<Cell<Rational>> cells;
  cells.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    cells.push_back({mu.keys()[i], Rational(mu.mass(i))});
  return ExactMeasure(mu.dim(), mu.depth(), std::move(cells));
}

DyadicMeasure ToDouble(const ExactMeasure& mu) {
  std::vector<Cell<double>> cells;
  cells.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    cells.push_back({mu.keys()[i], mu.mass(i).convert_to<double>()});
  return DyadicMeasure(mu.dim(), mu.depth(), std::move(cells));
}

template class BasicMeasure<double>;
template class BasicMeasure<Rational>;

}  // namespace frostlab
