#pragma once

#include "core.hpp"

#include <array>
#include <functional>

namespace isotau {

struct QuadConfig {
  double abs_tol = 1e-15;
  double rel_tol = 1e-14;
  int max_depth = 40;
  int max_evals = 200000;
};

namespace detail {

inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> g7_w = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                               0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GKState {
  const std::function<cplx(double)>* f;
  const QuadConfig* cfg;
  int evals = 0;
};

inline std::pair<cplx, double> gk15(GKState& st, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  cplx k = 0, g = 0;
  for (int i = 0; i < 7; ++i) {
    cplx f1 = (*st.f)(c - h * gk15_x[i]), f2 = (*st.f)(c + h * gk15_x[i]);
    k += gk15_wk[i] * (f1 + f2);
    if (i % 2 == 1) g += g7_w[i / 2] * (f1 + f2);
  }
  cplx fc = (*st.f)(c);
  k += gk15_wk[7] * fc;
  g += g7_w[3] * fc;
  st.evals += 15;
  return {k * h, std::abs((k - g) * h)};
}

inline cplx gk_adapt(GKState& st, double a, double b, cplx whole, double err, double tol, int depth) {
  if (err <= tol || depth >= st.cfg->max_depth) {
    if (err > tol && err > 1e3 * tol) throw precision_error("quadrature: maximum subdivision depth reached");
    return whole;
  }
  if (st.evals > st.cfg->max_evals) throw precision_error("quadrature: evaluation budget exhausted");
  double m = 0.5 * (a + b);
  auto [l, el] = gk15(st, a, m);
  auto [r, er] = gk15(st, m, b);
  return gk_adapt(st, a, m, l, el, tol / 1.414, depth + 1) + gk_adapt(st, m, b, r, er, tol / 1.414, depth + 1);
}

}  // namespace detail

// adaptive Gauss-Kronrod (7/15) integral of f over [a,b]
inline cplx integrate(const std::function<cplx(double)>& f, double a, double b, const QuadConfig& cfg = {}) {
  detail::GKState st{&f, &cfg};
  auto [whole, err] = detail::gk15(st, a, b);
  double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(whole));
  return detail::gk_adapt(st, a, b, whole, err, tol, 0);
}

}  // namespace isotau
