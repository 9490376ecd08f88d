#pragma once

// k-planes and smooth maps R^d -> R^k with Jacobians.

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace frostlab {

// Orthonormal basis of a k-dimensional subspace of R^d, rows row-major.
struct KPlane {
  int d = 0;
  std::vector<double> rows;

  int k() const { return d == 0 ? 0 : static_cast<int>(rows.size()) / d; }
  const double* row(int i) const { return rows.data() + i * d; }
  // Coordinates of P_V x in this basis.
  void project(const double* x, double* out) const;
};

// Orthonormalizes the rows of a k x d matrix (kInvalidArgument if dependent).
KPlane MakeKPlane(int d, std::vector<double> rows);
// Orthonormal basis of the orthogonal complement.
KPlane Complement(const KPlane& v);
// Unit vector with the canonical sign: first nonzero coordinate positive.
std::vector<double> CanonicalDirection(std::span<const double> v);

// J_k(A) = sqrt(det(A A^T)) for a k x d matrix A of rank k, else 0.
double JacobianJk(std::span<const double> A, int k, int d);

class SmoothMap {
 public:
  virtual ~SmoothMap() = default;
  virtual int in_dim() const = 0;
  virtual int out_dim() const = 0;
  virtual void eval(const double* x, double* y) const = 0;
  // out_dim x in_dim, row-major.
  virtual void jacobian(const double* x, double* J) const = 0;
  virtual bool linear() const { return false; }
  virtual std::string name() const = 0;

  // V(x) = ker(DF(x))^perp; kSingularPoint if J_k(DF(x)) <= tol.
  KPlane kernel_perp(const double* x, double tol = 1e-9) const;
};

using MapPtr = std::shared_ptr<const SmoothMap>;

// x -> rows * x.
MapPtr LinearMap(int d, std::vector<double> rows);
// x -> <theta, x>, theta normalized.
MapPtr Projection(std::vector<double> theta);
// x -> |x - y|.
MapPtr PinnedDistance(std::vector<double> y);
// x -> |x - y|_p (p >= 2 even keeps the unit ball C^2 and curved).
MapPtr NormDistance(std::vector<double> y, double p);
// Planar only: x -> angle of x - y in radians.
MapPtr Radial(std::vector<double> y);

// "proj:<angle>" (planar), "proj:<v1,...,vd>", "dist:<y>", "norm<p>:<y>",
// "radial:<y>". d is the ambient dimension.
MapPtr ParseMap(const std::string& spec, int d);

}  // namespace frostlab
