#include "frostlab/regular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace frostlab {

double Beta(std::span<const double> sigma, int j) {
  Require(j >= 1 && j <= static_cast<int>(sigma.size()), ErrorCode::kOutOfRange,
          "beta index out of range");
  double s = 0;
  for (int i = 0; i < j; ++i) s += sigma[i];
  return s / j;
}

double Beta(std::span<const double> sigma) {
  return Beta(sigma, static_cast<int>(sigma.size()));
}

double ExtractionMassBound(int d, int T, int ell) {
  return std::pow(2.0 * d * T + 2.0, -ell);
}

namespace {

void CheckDepth(int m, int T, int ell) {
  Require(T >= 1 && ell >= 1 && m == T * ell, ErrorCode::kDepthMismatch,
          "measure depth must equal T*ell");
}

}  // namespace

template <class M>
RegularityCheck IsRegular(const BasicMeasure<M>& mu,
                          std::span<const double> sigma, int T) {
  const int ell = static_cast<int>(sigma.size());
  CheckDepth(mu.depth(), T, ell);
  const int d = mu.dim();
  const M slack = MassTraits<M>::Slack();
  RegularityCheck out;
  for (int j = 1; j <= ell; ++j) {
    const M a = BlockFactor<M>(sigma[j - 1], T);
    auto children = mu.level_masses(j * T);
    auto parents = mu.level_masses((j - 1) * T);
    std::size_t p = 0;
    for (const auto& [key, w] : children) {
      Key pk = key >> (d * T);
      while (parents[p].first != pk) ++p;
      const M& wp = parents[p].second;
      M scaled = a * wp;
      bool ok = !(w > scaled * slack) && !(scaled > M(2) * w * slack);
      if (!ok) {
        out.regular = false;
        out.violation = RegularityViolation{
            j, KeyToCube(key, d, j * T),
            MassTraits<M>::ToDouble(M(w / wp))};
        return out;
      }
    }
  }
  return out;
}

// Bottom-up pigeonhole. At block j every surviving level-(j-1)T parent keeps
// a window of its children (consecutive in mass order) whose shares of the
// kept total all lie in [a/2, a], for one ratio a = 2^{-k/q} shared by every
// parent at that block. The ratio maximizing the retained mass wins; ties go
// to the larger exponent. Pruning block j removes whole level-jT cubes, so
// the ratios fixed at deeper blocks are untouched.
template <class M>
BasicRegularPiece<M> ExtractRegularSubset(const BasicMeasure<M>& mu, int T,
                                          int ell, ExtractOptions opt) {
  CheckDepth(mu.depth(), T, ell);
  Require(!mu.empty(), ErrorCode::kEmptySupport, "extracting from a null measure");
  Require(opt.classes_per_bit >= 1, ErrorCode::kInvalidArgument,
          "classes_per_bit must be positive");
  const int d = mu.dim();
  const int m = mu.depth();
  const int q = opt.classes_per_bit;
  const int kmax = q * d * T;
  const std::size_t n = mu.size();

  std::vector<double> sigma_grid(kmax + 1);
  std::vector<M> ratio(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    sigma_grid[k] = static_cast<double>(k) / (q * T);
    ratio[k] = BlockFactor<M>(sigma_grid[k], T);
  }

  std::vector<char> keep(n, 1);
  std::vector<double> sigma(ell, 0.0);

  struct Child {
    Key key;
    M mass;
    std::size_t first, last;  // kept-cell positions [first, last)
  };

  for (int j = ell; j >= 1; --j) {
    const int shift = d * (m - j * T);
    std::vector<std::size_t> cells;  // kept cell indices in key order
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) cells.push_back(i);

    std::vector<Child> kids;
    for (std::size_t p = 0; p < cells.size();) {
      Key ck = mu.keys()[cells[p]] >> shift;
      std::size_t e = p;
      std::vector<M> parts;
      while (e < cells.size() && (mu.keys()[cells[e]] >> shift) == ck)
        parts.push_back(mu.mass(cells[e++]));
      kids.push_back({ck, PairwiseSumT<M>(parts), p, e});
      p = e;
    }

    // Group children by parent; children of a parent are contiguous.
    std::vector<std::pair<std::size_t, std::size_t>> fams;
    for (std::size_t c = 0; c < kids.size();) {
      Key pk = kids[c].key >> (d * T);
      std::size_t e = c;
      while (e < kids.size() && (kids[e].key >> (d * T)) == pk) ++e;
      fams.emplace_back(c, e);
      c = e;
    }

    // best[f][k] = retained mass of family f at ratio class k; window stored.
    const std::size_t F = fams.size();
    std::vector<M> best(F * (kmax + 1), M(0));
    std::vector<std::pair<int, int>> win(F * (kmax + 1), {-1, -1});
    std::vector<std::vector<std::size_t>> order(F);
    for (std::size_t f = 0; f < F; ++f) {
      auto [c0, c1] = fams[f];
      auto& ord = order[f];
      ord.resize(c1 - c0);
      std::iota(ord.begin(), ord.end(), c0);
      std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) {
        return kids[x].mass > kids[y].mass;
      });
      const int w = static_cast<int>(ord.size());
      std::vector<M> pre(w + 1, M(0));
      for (int i = 0; i < w; ++i) pre[i + 1] = pre[i] + kids[ord[i]].mass;
      for (int s = 0; s < w; ++s) {
        for (int e = s + 1; e <= w; ++e) {
          const M R = pre[e] - pre[s];
          const M& mx = kids[ord[s]].mass;
          const M& mn = kids[ord[e - 1]].mass;
          for (int k = 0; k <= kmax; ++k) {
            M aR = ratio[k] * R;
            if (mx > aR || aR > M(2) * mn) continue;
            M& b = best[f * (kmax + 1) + k];
            if (R > b) {
              b = R;
              win[f * (kmax + 1) + k] = {s, e};
            }
          }
        }
      }
    }

    int kbest = 0;
    M tbest(-1);
    for (int k = 0; k <= kmax; ++k) {
      std::vector<M> parts(F);
      for (std::size_t f = 0; f < F; ++f) parts[f] = best[f * (kmax + 1) + k];
      M tot = PairwiseSumT<M>(parts);
      if (!(tot < tbest)) {
        tbest = tot;
        kbest = k;
      }
    }
    sigma[j - 1] = sigma_grid[kbest];

    std::vector<char> child_keep(kids.size(), 0);
    for (std::size_t f = 0; f < F; ++f) {
      auto [s, e] = win[f * (kmax + 1) + kbest];
      for (int i = s; i >= 0 && i < e; ++i) child_keep[order[f][i]] = 1;
    }
    for (std::size_t c = 0; c < kids.size(); ++c)
      if (!child_keep[c])
        for (std::size_t p = kids[c].first; p < kids[c].last; ++p)
          keep[cells[p]] = 0;
  }

  std::vector<Key> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) kept.push_back(mu.keys()[i]);
  BasicRegularPiece<M> piece;
  piece.support = DyadicSet(d, m, std::move(kept));
  piece.sigma = std::move(sigma);
  piece.T = T;
  BasicMeasure<M> r = mu.restrict(piece.support);
  piece.mass = r.total() / mu.total();
  piece.measure = r.normalized();
  return piece;
}

template <class M>
BasicRegularDecomposition<M> DecomposeRegular(const BasicMeasure<M>& mu, int T,
                                              int ell, double eps,
                                              ExtractOptions opt) {
  CheckDepth(mu.depth(), T, ell);
  Require(eps > 0, ErrorCode::kInvalidArgument, "eps must be positive");
  Require(!mu.empty(), ErrorCode::kEmptySupport, "decomposing a null measure");
  const int d = mu.dim();
  const int m = mu.depth();
  BasicRegularDecomposition<M> out;
  out.eps = eps;
  out.delta = eps + std::log2(2.0 * d * T + 2.0) / T;
  const M stop = MassTraits<M>::FromDouble(std::exp2(-eps * m));
  const M floor = MassTraits<M>::FromDouble(std::exp2(-out.delta * m));
  const M total = mu.total();

  DyadicSet remaining = mu.support();
  M rem = M(1);
  while (!remaining.empty() && !(rem < stop)) {
    BasicMeasure<M> sub = mu.restrict(remaining);
    BasicRegularPiece<M> piece = ExtractRegularSubset(sub, T, ell, opt);
    piece.mass = mu.restrict(piece.support).total() / total;
    remaining = remaining.set_difference(piece.support);
    rem = mu.restrict(remaining).total() / total;
    if (piece.mass < floor) {
      out.residual.push_back(std::move(piece));
    } else {
      out.union_mass += piece.mass;
      out.pieces.push_back(std::move(piece));
    }
  }
  out.remainder_mass = rem;
  if (out.pieces.empty()) out.warnings.push_back("MTooSmall");
  return out;
}

template RegularityCheck IsRegular(const BasicMeasure<double>&,
                                   std::span<const double>, int);
template RegularityCheck IsRegular(const BasicMeasure<Rational>&,
                                   std::span<const double>, int);
template BasicRegularPiece<double> ExtractRegularSubset(
    const BasicMeasure<double>&, int, int, ExtractOptions);
template BasicRegularPiece<Rational> ExtractRegularSubset(
    const BasicMeasure<Rational>&, int, int, ExtractOptions);
template BasicRegularDecomposition<double> DecomposeRegular(
    const BasicMeasure<double>&, int, int, double, ExtractOptions);
template BasicRegularDecomposition<Rational> DecomposeRegular(
    const BasicMeasure<Rational>&, int, int, double, ExtractOptions);

}  // namespace frostlab
