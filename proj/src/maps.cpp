#include "frostlab/maps.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "frostlab/error.hpp"

namespace frostlab {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat AsMat(std::span<const double> a, int k, int d) {
  Mat m(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = a[i * d + j];
  return m;
}

std::vector<double> ParseList(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (...) {
      Fail(ErrorCode::kParseError, "bad number '" + tok + "' in map spec");
    }
  }
  return v;
}

class LinearF : public SmoothMap {
 public:
  LinearF(int d, std::vector<double> rows) : d_(d), rows_(std::move(rows)) {
    Require(d >= 1 && !rows_.empty() && rows_.size() % d == 0,
            ErrorCode::kInvalidArgument, "linear map shape");
  }
  int in_dim() const override { return d_; }
  int out_dim() const override { return static_cast<int>(rows_.size()) / d_; }
  void eval(const double* x, double* y) const override {
    for (int i = 0; i < out_dim(); ++i) {
      double s = 0;
      for (int j = 0; j < d_; ++j) s += rows_[i * d_ + j] * x[j];
      y[i] = s;
    }
  }
  void jacobian(const double*, double* J) const override {
    std::copy(rows_.begin(), rows_.end(), J);
  }
  bool linear() const override { return true; }
  std::string name() const override { return "proj"; }

 private:
  int d_;
  std::vector<double> rows_;
};

class DistF : public SmoothMap {
 public:
  explicit DistF(std::vector<double> y) : y_(std::move(y)) {}
  int in_dim() const override { return static_cast<int>(y_.size()); }
  int out_dim() const override { return 1; }
  void eval(const double* x, double* out) const override {
    double s = 0;
    for (std::size_t i = 0; i < y_.size(); ++i) s += (x[i] - y_[i]) * (x[i] - y_[i]);
    out[0] = std::sqrt(s);
  }
  void jacobian(const double* x, double* J) const override {
    double r;
    eval(x, &r);
    for (std::size_t i = 0; i < y_.size(); ++i) J[i] = r > 0 ? (x[i] - y_[i]) / r : 0.0;
  }
  std::string name() const override { return "dist"; }

 private:
  std::vector<double> y_;
};

class NormF : public SmoothMap {
 public:
  NormF(std::vector<double> y, double p) : y_(std::move(y)), p_(p) {
    Require(p >= 2, ErrorCode::kInvalidArgument, "norm exponent must be >= 2");
  }
  int in_dim() const override { return static_cast<int>(y_.size()); }
  int out_dim() const override { return 1; }
  void eval(const double* x, double* out) const override {
    double s = 0;
    for (std::size_t i = 0; i < y_.size(); ++i) s += std::pow(std::fabs(x[i] - y_[i]), p_);
    out[0] = std::pow(s, 1.0 / p_);
  }
  void jacobian(const double* x, double* J) const override {
    double n;
    eval(x, &n);
    for (std::size_t i = 0; i < y_.size(); ++i) {
      double z = x[i] - y_[i];
      J[i] = n > 0 ? std::copysign(std::pow(std::fabs(z) / n, p_ - 1), z) : 0.0;
    }
  }
  std::string name() const override { return "norm"; }

 private:
  std::vector<double> y_;
  double p_;
};

class RadialF : public SmoothMap {
 public:
  explicit RadialF(std::vector<double> y) : y_(std::move(y)) {
    Require(y_.size() == 2, ErrorCode::kDimensionMismatch, "radial map is planar");
  }
  int in_dim() const override { return 2; }
  int out_dim() const override { return 1; }
  void eval(const double* x, double* out) const override {
    out[0] = std::atan2(x[1] - y_[1], x[0] - y_[0]);
  }
  void jacobian(const double* x, double* J) const override {
    double a = x[0] - y_[0], b = x[1] - y_[1];
    double r2 = a * a + b * b;
    J[0] = r2 > 0 ? -b / r2 : 0.0;
    J[1] = r2 > 0 ? a / r2 : 0.0;
  }
  std::string name() const override { return "radial"; }

 private:
  std::vector<double> y_;
};

}  // namespace

void KPlane::project(const double* x, double* out) const {
  for (int i = 0; i < k(); ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += rows[i * d + j] * x[j];
    out[i] = s;
  }
}

KPlane MakeKPlane(int d, std::vector<double> rows) {
  Require(d >= 1 && !rows.empty() && rows.size() % d == 0,
          ErrorCode::kInvalidArgument, "plane shape");
  const int k = static_cast<int>(rows.size()) / d;
  Require(k <= d, ErrorCode::kDimensionMismatch, "more rows than dimensions");
  KPlane v{d, {}};
  for (int i = 0; i < k; ++i) {
    std::vector<double> r(rows.begin() + i * d, rows.begin() + (i + 1) * d);
    // Two Gram-Schmidt passes.
    for (int pass = 0; pass < 2; ++pass)
      for (int p = 0; p < i; ++p) {
        double dot = 0;
        for (int j = 0; j < d; ++j) dot += r[j] * v.rows[p * d + j];
        for (int j = 0; j < d; ++j) r[j] -= dot * v.rows[p * d + j];
      }
    double n = 0;
    for (double c : r) n += c * c;
    n = std::sqrt(n);
    Require(n > 1e-12, ErrorCode::kInvalidArgument, "plane rows are dependent");
    for (double c : r) v.rows.push_back(c / n);
  }
  return v;
}

KPlane Complement(const KPlane& v) {
  const int d = v.d, k = v.k();
  Mat a = AsMat(v.rows, k, d);
  Eigen::FullPivLU<Mat> lu(a);
  Mat ker = lu.kernel();  // d x (d-k)
  std::vector<double> rows;
  for (int c = 0; c < ker.cols(); ++c)
    for (int j = 0; j < d; ++j) rows.push_back(ker(j, c));
  if (rows.empty()) return KPlane{d, {}};
  return MakeKPlane(d, std::move(rows));
}

std::vector<double> CanonicalDirection(std::span<const double> v) {
  double n = 0;
  for (double c : v) n += c * c;
  n = std::sqrt(n);
  Require(n > 0, ErrorCode::kInvalidArgument, "zero direction");
  std::vector<double> u(v.begin(), v.end());
  double sign = 1;
  for (double c : u)
    if (c != 0) {
      sign = c > 0 ? 1 : -1;
      break;
    }
  for (double& c : u) c *= sign / n;
  return u;
}

double JacobianJk(std::span<const double> A, int k, int d) {
  Mat a = AsMat(A, k, d);
  double det = (a * a.transpose()).determinant();
  return det > 0 ? std::sqrt(det) : 0.0;
}

KPlane SmoothMap::kernel_perp(const double* x, double tol) const {
  const int k = out_dim(), d = in_dim();
  std::vector<double> J(k * d);
  jacobian(x, J.data());
  if (JacobianJk(J, k, d) <= tol) {
    std::ostringstream os;
    os << name() << " is singular at (";
    for (int i = 0; i < d; ++i) os << (i ? "," : "") << x[i];
    os << ")";
    Fail(ErrorCode::kSingularPoint, os.str());
  }
  return MakeKPlane(d, std::move(J));
}

MapPtr LinearMap(int d, std::vector<double> rows) {
  return std::make_shared<LinearF>(d, std::move(rows));
}

MapPtr Projection(std::vector<double> theta) {
  double n = 0;
  for (double c : theta) n += c * c;
  Require(n > 0, ErrorCode::kInvalidArgument, "zero direction");
  for (double& c : theta) c /= std::sqrt(n);
  const int d = static_cast<int>(theta.size());
  return std::make_shared<LinearF>(d, std::move(theta));
}

MapPtr PinnedDistance(std::vector<double> y) { return std::make_shared<DistF>(std::move(y)); }

MapPtr NormDistance(std::vector<double> y, double p) {
  return std::make_shared<NormF>(std::move(y), p);
}

MapPtr Radial(std::vector<double> y) { return std::make_shared<RadialF>(std::move(y)); }

MapPtr ParseMap(const std::string& spec, int d) {
  auto colon = spec.find(':');
  Require(colon != std::string::npos, ErrorCode::kParseError,
          "map spec needs the form name:params");
  std::string name = spec.substr(0, colon);
  auto v = ParseList(spec.substr(colon + 1));
  auto need_point = [&] {
    Require(static_cast<int>(v.size()) == d, ErrorCode::kDimensionMismatch,
            "map point has the wrong dimension");
  };
  if (name == "proj") {
    if (v.size() == 1 && d == 2) return Projection({std::cos(v[0]), std::sin(v[0])});
    need_point();
    return Projection(v);
  }
  if (name == "dist") {
    need_point();
    return PinnedDistance(v);
  }
  if (name == "radial") {
    need_point();
    return Radial(v);
  }
  if (name.rfind("norm", 0) == 0) {
    need_point();
    double p = name.size() > 4 ? std::stod(name.substr(4)) : 4.0;
    return NormDistance(v, p);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown map '" + name + "'");
}

}  // namespace frostlab
