#pragma once

#include "core.hpp"

#include <array>
#include <vector>

namespace isotau {

struct EvalConfig {
  double series_tol = 1e-16;
  int max_terms = 200;

  void validate() const {
    if (!(series_tol > 0)) throw config_error("EvalConfig: series_tol must be positive");
    if (max_terms < 8) throw config_error("EvalConfig: max_terms must be >= 8");
  }
};

struct ThetaChar {
  cplx p{0.0}, q{0.0};
};

inline const ThetaChar odd_char{0.5, 0.5};

inline constexpr int max_theta_order = 7;

// d^k/dz^k theta[p,q](z;Omega) for k = 0..order, and d/dOmega of the value
struct ThetaJet {
  std::array<cplx, max_theta_order + 1> dz{};
  cplx dOmega{0.0};
  int order = 0;
};

inline ThetaJet theta_jet(ThetaChar c, cplx z, cplx Omega, int order, const EvalConfig& cfg = {},
                          bool want_dOmega = false) {
  if (Omega.imag() <= 0) throw orientation_error("theta: Im(Omega) must be positive");
  if (order < 0 || order > max_theta_order) throw config_error("theta: derivative order out of range");

  ThetaJet jet;
  jet.order = order;
  // peak of |term| in n, real-part approximation
  double ImO = Omega.imag();
  double nstar = -c.p.real() - (z + c.q).imag() / ImO;
  long n0 = std::lround(nstar);

  std::array<double, max_theta_order + 1> absum{};
  double absum_om = 0;

  auto add = [&](long n) {
    cplx np = double(n) + c.p;
    cplx term = std::exp(I * pi * Omega * np * np + 2.0 * pi * I * np * (z + c.q));
    cplx f = 2.0 * pi * I * np;
    cplx w = term;
    double worst = 0;
    for (int k = 0; k <= order; ++k) {
      jet.dz[k] += w;
      absum[k] += std::abs(w);
      worst = std::max(worst, std::abs(w) / std::max(absum[k], 1e-300));
      w *= f;
    }
    if (want_dOmega) {
      cplx t = term * I * pi * np * np;
      jet.dOmega += t;
      absum_om += std::abs(t);
      worst = std::max(worst, std::abs(t) / std::max(absum_om, 1e-300));
    }
    return worst;
  };

  add(n0);
  int used = 1;
  for (long k = 1;; ++k) {
    double w1 = add(n0 + k);
    double w2 = add(n0 - k);
    used += 2;
    if (k >= 3 && w1 < cfg.series_tol && w2 < cfg.series_tol) break;
    if (used >= cfg.max_terms) throw evaluation_error("theta: series did not converge within max_terms", z, Omega);
  }
  for (int k = 0; k <= order; ++k)
    if (!std::isfinite(jet.dz[k].real()) || !std::isfinite(jet.dz[k].imag()))
      throw evaluation_error("theta: overflow, |Im z| too large for this Omega", z, Omega);
  return jet;
}

inline cplx theta(ThetaChar c, cplx z, cplx Omega, const EvalConfig& cfg = {}) {
  return theta_jet(c, z, Omega, 0, cfg).dz[0];
}

inline cplx theta_dz(ThetaChar c, cplx z, cplx Omega, int order, const EvalConfig& cfg = {}) {
  if (order < 1 || order > 5) throw config_error("theta_dz: order must be in 1..5");
  return theta_jet(c, z, Omega, order, cfg).dz[order];
}

inline cplx theta_dOmega(ThetaChar c, cplx z, cplx Omega, const EvalConfig& cfg = {}) {
  return theta_jet(c, z, Omega, 0, cfg, true).dOmega;
}

// derivatives of log f from derivatives of f: out[k] = d^k/dz^k log f, k >= 1
inline std::array<cplx, max_theta_order + 1> log_derivs(const std::array<cplx, max_theta_order + 1>& f, int order) {
  std::array<cplx, max_theta_order + 1> a{}, b{}, out{};
  double fact = 1;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) fact *= k;
    a[k] = f[k] / fact;
  }
  for (int k = 1; k <= order; ++k) {
    cplx s = double(k) * a[k];
    for (int j = 1; j < k; ++j) s -= double(j) * b[j] * a[k - j];
    b[k] = s / (double(k) * a[0]);
  }
  fact = 1;
  for (int k = 1; k <= order; ++k) {
    fact *= k;
    out[k] = b[k] * fact;
  }
  return out;
}

}  // namespace isotau
