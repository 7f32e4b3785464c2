#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace isotau {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

struct evaluation_error : std::runtime_error {
  cplx z, Omega;
  evaluation_error(const std::string& what, cplx z_, cplx Om_)
      : std::runtime_error(what), z(z_), Omega(Om_) {}
};
struct pole_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct orientation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct degenerate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Mat2 mat2(cplx a, cplx b, cplx c, cplx d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

inline Mat2 diag2(cplx a, cplx b) { return mat2(a, 0.0, 0.0, b); }

inline Mat2 inv2(const Mat2& m) {
  cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return mat2(m(1, 1), -m(0, 1), -m(1, 0), m(0, 0)) / det;
}

inline cplx det2(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline Mat2 comm(const Mat2& a, const Mat2& b) { return a * b - b * a; }

inline double maxabs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

// eigenvalues of a 2x2 matrix, ordered by real part
inline std::pair<cplx, cplx> eig2(const Mat2& m) {
  cplx tr = m.trace(), d = det2(m);
  cplx s = std::sqrt(tr * tr / 4.0 - d);
  cplx l1 = tr / 2.0 - s, l2 = tr / 2.0 + s;
  if (l1.real() > l2.real()) std::swap(l1, l2);
  return {l1, l2};
}

inline double reldiff(cplx a, cplx b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0 ? 0.0 : std::abs(a - b) / s;
}

// |a-b| relative to a floor so that values near zero don't blow up
inline double relerr(cplx a, cplx b, double floor = 1.0) {
  double d = std::max(floor, std::max(std::abs(a), std::abs(b)));
  return d == 0 ? 0.0 : std::abs(a - b) / d;
}

// principal log of a/b, small when a ~ b
inline cplx log_ratio(cplx a, cplx b) { return std::log(a / b); }

inline double dist_point_segment(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double L2 = std::norm(ab);
  if (L2 == 0) return std::abs(p - a);
  double s = std::clamp(((p - a) * std::conj(ab)).real() / L2, 0.0, 1.0);
  return std::abs(p - (a + s * ab));
}

inline double dist_point_ray(cplx p, cplx a, cplx dir) {
  double s = std::max(0.0, ((p - a) * std::conj(dir)).real() / std::norm(dir));
  return std::abs(p - (a + s * dir));
}

inline double cross2(cplx a, cplx b) { return (std::conj(a) * b).imag(); }

// segment [p, q] meets segment [a, b] (or the ray from a along b - a when ray is set)
inline bool segment_hits(cplx p, cplx q, cplx a, cplx b, bool ray = false) {
  cplx r = q - p, s = b - a;
  double den = cross2(r, s);
  if (den == 0) return false;
  double u = cross2(a - p, s) / den;  // along [p, q]
  double v = cross2(a - p, r) / den;  // along the cut
  return u >= 0 && u <= 1 && v >= 0 && (ray || v <= 1);
}

inline std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace isotau
