#pragma once

#include "theta.hpp"

namespace isotau {

// standard: argument u/omega1; half_argument: u/(2 omega1), kept for comparison only
enum class SigmaConvention { standard, half_argument };

struct Lattice {
  cplx omega1, omega2, Omega;
  cplx eta1, eta2;
  cplx g2, g3;
  cplx theta1p;  // d/dz theta11 at z = 0
  EvalConfig cfg;
  SigmaConvention convention = SigmaConvention::standard;
};

inline Lattice lattice_core(cplx w1, cplx w2, const EvalConfig& cfg) {
  cfg.validate();
  Lattice L;
  L.omega1 = w1;
  L.omega2 = w2;
  L.Omega = w2 / w1;
  L.cfg = cfg;
  if (!(L.Omega.imag() > 0)) throw orientation_error("lattice: Im(omega2/omega1) must be positive");
  auto j = theta_jet(odd_char, 0.0, L.Omega, 3, cfg);
  L.theta1p = j.dz[1];
  L.eta1 = -j.dz[3] / (3.0 * j.dz[1] * w1);
  L.eta2 = (L.eta1 * w2 - 2.0 * pi * I) / w1;
  return L;
}

// jet of log sigma_char at u, derivatives 1..order (order <= 6)
inline std::array<cplx, max_theta_order + 1> dlog_sigma_char_jet(const Lattice& L, ThetaChar c, cplx u, int order) {
  cplx z = u / L.omega1;
  auto j = theta_jet(c, z, L.Omega, order, L.cfg);
  auto ld = log_derivs(j.dz, order);
  std::array<cplx, max_theta_order + 1> out{};
  cplx s = 1.0 / L.omega1;
  cplx w = s;
  for (int k = 1; k <= order; ++k) {
    out[k] = ld[k] * w;
    w *= s;
  }
  out[1] += L.eta1 * u / L.omega1;
  if (order >= 2) out[2] += L.eta1 / L.omega1;
  return out;
}

// u = s*omega1 + r*omega2
inline std::pair<double, double> lattice_coords(const Lattice& L, cplx u) {
  double det = (std::conj(L.omega1) * L.omega2).imag();
  double r = (std::conj(L.omega1) * u).imag() / det;
  double s = -(u * std::conj(L.omega2)).imag() / det;
  return {s, r};
}

// representative of u in the parallelogram centred at 0
inline cplx reduce_to_cell(const Lattice& L, cplx u) {
  auto [s, r] = lattice_coords(L, u);
  return u - std::round(s) * L.omega1 - std::round(r) * L.omega2;
}

inline bool congruent(const Lattice& L, cplx u, cplx v, double tol) {
  return std::abs(reduce_to_cell(L, u - v)) < tol;
}

inline void check_not_lattice_point(const Lattice& L, cplx u) {
  if (std::abs(reduce_to_cell(L, u)) < 1e-12 * std::max(1.0, std::abs(L.omega1)))
    throw pole_error("u is at a lattice point");
}

inline cplx sigma_char(const Lattice& L, ThetaChar c, cplx u) {
  cplx z = L.convention == SigmaConvention::half_argument ? u / (2.0 * L.omega1) : u / L.omega1;
  return std::exp(L.eta1 * u * u / (2.0 * L.omega1)) * L.omega1 / L.theta1p * theta(c, z, L.Omega, L.cfg);
}

inline cplx sigma(const Lattice& L, cplx u) { return sigma_char(L, odd_char, u); }

inline cplx dlog_sigma_char(const Lattice& L, ThetaChar c, cplx u) { return dlog_sigma_char_jet(L, c, u, 1)[1]; }

inline cplx zeta(const Lattice& L, cplx u) {
  check_not_lattice_point(L, u);
  return dlog_sigma_char_jet(L, odd_char, u, 1)[1];
}

// k-th derivative of wp, k = 0..3
inline cplx wp_n(const Lattice& L, cplx u, int k) {
  if (k < 0 || k > 4) throw config_error("wp_n: order out of range");
  check_not_lattice_point(L, u);
  return -dlog_sigma_char_jet(L, odd_char, u, k + 2)[k + 2];
}

inline cplx wp(const Lattice& L, cplx u) { return wp_n(L, u, 0); }
inline cplx wp_prime(const Lattice& L, cplx u) { return wp_n(L, u, 1); }

struct WpJet {
  cplx zeta, wp, wp1, wp2, wp3;
};

inline WpJet wp_jet(const Lattice& L, cplx u) {
  check_not_lattice_point(L, u);
  auto d = dlog_sigma_char_jet(L, odd_char, u, 5);
  return {d[1], -d[2], -d[3], -d[4], -d[5]};
}

inline Lattice lattice_from_periods(cplx w1, cplx w2, const EvalConfig& cfg = {}) {
  Lattice L = lattice_core(w1, w2, cfg);
  cplx e1 = wp(L, w1 / 2.0), e2 = wp(L, (w1 + w2) / 2.0), e3 = wp(L, w2 / 2.0);
  L.g2 = -4.0 * (e1 * e2 + e1 * e3 + e2 * e3);
  L.g3 = 4.0 * e1 * e2 * e3;
  return L;
}

}  // namespace isotau
