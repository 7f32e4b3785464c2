#pragma once

#include "rng.hpp"
#include "tau.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <thread>

namespace isotau {

inline constexpr const char* version = "0.1.0";

struct Scenario {
  std::array<cplx, 3> e{cplx(1, 0), cplx(0, 0), cplx(-1, 0)};
  cplx a{2, 0}, t{0.1, 0};
  double p = 0.3, q = 0.2;
  std::uint64_t seed = 1;
  std::vector<std::string> checks;  // empty means every registered check
  std::map<std::string, double> tolerances;
};

inline Scenario golden_scenario() { return {}; }

inline DeformationParams scenario_params(const Scenario& s) {
  if (!std::isfinite(s.p) || !std::isfinite(s.q)) throw config_error("p and q must be finite");
  for (auto z : {s.a, s.t})
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw config_error("a and t must be finite");
  return make_params(s.e, s.a, s.t, s.p, s.q);
}

enum class Status { pass, fail, inconclusive };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    default: return "inconclusive";
  }
}

struct Outcome {
  double residual = 0;
  std::string notes;
  bool inconclusive = false;
};

struct CheckContext {
  const Scenario& scenario;
  const DeformationParams& P;
  SplitMix64 rng;
};

struct CheckDef {
  std::string name;
  int criterion;  // acceptance criterion, 0 for module-level extras
  double tolerance;
  std::function<Outcome(CheckContext&)> run;
};

struct CheckRecord {
  std::string name;
  int criterion = 0;
  Status status = Status::fail;
  double residual = 0, tolerance = 0, runtime_ms = 0;
  std::string notes;
};

struct Report {
  std::vector<CheckRecord> records;
  Status overall = Status::pass;
};

namespace detail {

inline double rel(cplx a, cplx b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

inline double rel2(cplx a, cplx b) { return rel(a, b, std::max(std::abs(a), std::abs(b))); }

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

inline Lattice random_lattice(SplitMix64& g) {
  cplx w1 = std::polar(g.uniform(0.5, 2.0), g.uniform(-pi, pi));
  cplx Om(g.uniform(-0.5, 0.5), g.uniform(0.6, 1.8));
  return lattice_from_periods(w1, w1 * Om);
}

// point of the cell away from lattice and half-lattice points
inline cplx random_cell_point(const Lattice& L, SplitMix64& g) {
  for (;;) {
    double s = g.uniform(-0.5, 0.5), r = g.uniform(-0.5, 0.5);
    cplx u = s * L.omega1 + r * L.omega2;
    double d = 1e300;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) d = std::min(d, std::abs(u - 0.5 * (double(i) * L.omega1 + double(j) * L.omega2)));
    if (d > 0.08 * std::abs(L.omega1)) return u;
  }
}

inline std::array<cplx, 3> random_separated(SplitMix64& g, std::vector<cplx>* extra = nullptr) {
  for (;;) {
    std::vector<cplx> pts;
    int n = extra ? 4 : 3;
    for (int k = 0; k < n; ++k) pts.emplace_back(g.uniform(-2, 2), g.uniform(-2, 2));
    double mx = 0, mn = 1e300;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        mx = std::max(mx, std::abs(pts[i] - pts[j]));
        mn = std::min(mn, std::abs(pts[i] - pts[j]));
      }
    if (mn < 0.3 * mx) continue;
    if (extra) *extra = {pts[3]};
    return {pts[0], pts[1], pts[2]};
  }
}

inline BranchConfig random_branch(SplitMix64& g) {
  for (;;) {
    auto e = random_separated(g);
    try {
      return make_branch(e);
    } catch (const geometry_error&) {
    }
  }
}

inline double random_char(SplitMix64& g) {
  for (;;) {
    double v = g.uniform(0.05, 0.95);
    if (std::abs(v - 0.5) > 0.05) return v;
  }
}

inline cplx random_t(SplitMix64& g) {
  double r = 0.3 * std::sqrt(g.uniform(0.01, 1.0));
  return std::polar(r, g.uniform(-pi, pi));
}

// ------------------------------------------------------------ criterion 1

inline Outcome legendre(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    Lattice L = random_lattice(c.rng);
    w = std::max(w, std::abs(L.eta1 * L.omega2 - L.eta2 * L.omega1 - 2.0 * pi * I) / (2.0 * pi));
    cplx u = random_cell_point(L, c.rng);
    cplx z0 = zeta(L, u), z1 = zeta(L, u + L.omega1), z2 = zeta(L, u + L.omega2);
    double s = std::max({std::abs(z0), std::abs(z1), std::abs(z2), std::abs(L.eta1), std::abs(L.eta2)});
    w = std::max({w, rel(z1 - z0, L.eta1, s), rel(z2 - z0, L.eta2, s)});
  }
  return {w, "normalisation plus zeta increments over both periods"};
}

inline Outcome heat_equation(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    Lattice L = random_lattice(c.rng);
    ThetaChar ch{c.rng.uniform(0, 1), c.rng.uniform(0, 1)};
    cplx z = random_cell_point(L, c.rng) / L.omega1;
    auto j = theta_jet(ch, z, L.Omega, 2, L.cfg, true);
    w = std::max(w, rel2(j.dz[2], 4.0 * pi * I * j.dOmega));
  }
  return {w, ""};
}

inline Outcome wp_ode(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    Lattice L = random_lattice(c.rng);
    cplx u = random_cell_point(L, c.rng);
    auto j = wp_jet(L, u);
    cplx rhs = 4.0 * j.wp * j.wp * j.wp - L.g2 * j.wp - L.g3;
    double s = std::max({std::abs(j.wp1 * j.wp1), std::abs(4.0 * j.wp * j.wp * j.wp), std::abs(L.g2 * j.wp), std::abs(L.g3)});
    w = std::max(w, rel(j.wp1 * j.wp1, rhs, s));
  }
  return {w, ""};
}

inline Outcome wp_duplication(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    Lattice L = random_lattice(c.rng);
    cplx u = random_cell_point(L, c.rng);
    auto j = wp_jet(L, u);
    cplx r = j.wp2 / j.wp1;
    cplx lhs = wp(L, 2.0 * u), rhs = -2.0 * j.wp + 0.25 * r * r;
    w = std::max(w, rel(lhs, rhs, std::max({std::abs(lhs), std::abs(2.0 * j.wp), std::abs(0.25 * r * r)})));
  }
  return {w, ""};
}

inline Outcome wp_third_derivative(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    Lattice L = random_lattice(c.rng);
    auto j = wp_jet(L, random_cell_point(L, c.rng));
    w = std::max(w, rel2(j.wp3, 12.0 * j.wp1 * j.wp));
  }
  return {w, ""};
}

inline Outcome quasi_periodicity(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    Lattice L = random_lattice(c.rng);
    ThetaChar ch{c.rng.uniform(0, 1), c.rng.uniform(0, 1)};
    cplx u = random_cell_point(L, c.rng);
    cplx s0 = sigma_char(L, ch, u);
    cplx s1 = sigma_char(L, ch, u + L.omega1), s2 = sigma_char(L, ch, u + L.omega2);
    cplx r1 = std::exp(2.0 * pi * I * ch.p) * std::exp(L.eta1 * (u + L.omega1 / 2.0)) * s0;
    cplx r2 = std::exp(-2.0 * pi * I * ch.q) * std::exp(L.eta2 * (u + L.omega2 / 2.0)) * s0;
    w = std::max({w, rel2(s1, r1), rel2(s2, r2)});
  }
  return {w, ""};
}

// ------------------------------------------------------------ criterion 2

inline Outcome lemma_u3_u5(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 10; ++i) {
    auto b = random_branch(c.rng);
    auto r = lemma_u3_u5_check(b, periods(b));
    w = std::max({w, r.residual_u3, r.residual_u5});
  }
  return {w, ""};
}

inline Outcome dOmega_fd(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 10; ++i) {
    auto b = random_branch(c.rng);
    Lattice L = periods(b);
    double h = 1e-5 * b.scale;
    for (int nu = 0; nu < 3; ++nu) {
      auto P = perturbed(b, nu, h), M = perturbed(b, nu, -h);
      cplx fd = (P.L.Omega - M.L.Omega) / (2.0 * h);
      w = std::max(w, rel2(fd, dOmega_de(b, L, nu)));
    }
  }
  return {w, "central difference of periods, step 1e-5 scale"};
}

inline Outcome dlog_omega1_fd(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 10; ++i) {
    auto b = random_branch(c.rng);
    Lattice L = periods(b);
    double h = 1e-5 * b.scale;
    for (int nu = 0; nu < 3; ++nu) {
      auto P = perturbed(b, nu, h), M = perturbed(b, nu, -h);
      cplx fd = (P.L.omega1 - M.L.omega1) / (2.0 * h * L.omega1);
      w = std::max(w, rel2(fd, dlog_omega1_de(b, L, nu)));
    }
  }
  return {w, "central difference of periods, step 1e-5 scale"};
}

inline Outcome lemma_frac(CheckContext& c) {
  double w = 0;
  for (int i = 0; i < 10; ++i) {
    auto b = random_branch(c.rng);
    Lattice L = periods(b);
    cplx t = random_t(c.rng);
    for (int nu = 0; nu < 3; ++nu) w = std::max(w, lemma_frac_check(b, L, nu, t).residual);
  }
  return {w, ""};
}

// ------------------------------------------------------------ criterion 3

inline Outcome phi_transform(CheckContext& c) {
  const auto& P = c.P;
  const Lattice& L = P.lat;
  double w = 0;
  for (int i = 0; i < 20; ++i) {
    cplx u = random_cell_point(L, c.rng);
    Mat2 F = phi_full(phi_eval(P, u));
    Mat2 Fg = phi_full(phi_eval(P, u + L.omega1)), Fd = phi_full(phi_eval(P, u + L.omega2));
    cplx kp = pi * I * (2.0 * P.chr.p + 1.0), kq = pi * I * (2.0 * P.chr.q + 1.0);
    Mat2 Rg = F * diag2(std::exp(kp), std::exp(-kp)) * std::exp(L.eta1 * (2.0 * u + L.omega1));
    Mat2 Rd = F * diag2(std::exp(-kq), std::exp(kq)) * std::exp(L.eta2 * (2.0 * u + L.omega2));
    w = std::max({w, maxabs(Fg - Rg) / maxabs(Fg), maxabs(Fd - Rd) / maxabs(Fd)});
  }
  return {w, "both rows, continuation along gamma and delta"};
}

inline Outcome det_phi_zeros(CheckContext& c) {
  const auto& P = c.P;
  const Lattice& L = P.lat;
  double eps = 1e-5 * std::abs(L.omega1);
  double w = 0;
  std::array<cplx, 4> zs{0.0, P.hp.omega_tilde[0], P.hp.omega_tilde[1], P.hp.omega_tilde[2]};
  for (auto z : zs) {
    cplx d = L.omega1 / std::abs(L.omega1) * std::exp(I * 0.3);
    cplx fp = det_phi(P, z + eps * d), fm = det_phi(P, z - eps * d);
    cplx slope = (fp - fm) / (2.0 * eps), icpt = 0.5 * (fp + fm);
    if (std::abs(slope) == 0) return {1.0, "zero slope at a branch point"};
    w = std::max(w, std::abs(icpt) / (std::abs(slope) * std::abs(L.omega1)));
  }
  // zeros in one period cell by the argument principle
  cplx c0 = -0.5 * (L.omega1 + L.omega2) + 0.0123 * L.omega1 + 0.0171 * L.omega2;
  std::array<cplx, 5> corner{c0, c0 + L.omega1, c0 + L.omega1 + L.omega2, c0 + L.omega2, c0};
  double turn = 0;
  int n = 2000;
  for (int k = 0; k < 4; ++k) {
    cplx prev = det_phi(P, corner[k]);
    for (int j = 1; j <= n; ++j) {
      cplx cur = det_phi(P, corner[k] + (corner[k + 1] - corner[k]) * (double(j) / n));
      double da = std::arg(cur / prev);
      if (std::abs(da) > 1.0) return {1.0, "argument sampling too coarse"};
      turn += da;
      prev = cur;
    }
  }
  double count = turn / (2.0 * pi);
  w = std::max(w, std::abs(count - 4.0) / 4.0);
  return {w, "zeros in a period cell: " + num(count)};
}

inline Outcome normalization(CheckContext& c) {
  auto lc = cauchy_local(c.P);
  return {maxabs(lc.Y0 - Mat2::Identity()), "Cauchy mean of Y exp(-T) on radius " + num(lc.radius)};
}

inline Outcome y1_cauchy(CheckContext& c) {
  auto lc = cauchy_local(c.P);
  Mat2 Yc = Y1_closed(c.P), Yp = Y1_closed(c.P, Y1Reading::uncorrected);
  double s = std::max(1.0, maxabs(Yc));
  return {maxabs(lc.Y1 - Yc) / s, "uncorrected off-diagonal forms: " + num(maxabs(lc.Y1 - Yp) / s)};
}

// ------------------------------------------------------------ criterion 4

// Y' Y^-1 - A(x) on a circle, Y' by a five-point stencil along continued values
inline double ode_circle(const DeformationParams& P, const SystemCoefficients& sc, YState st, cplx centre, double r,
                         int n = 32) {
  double w = 0;
  double h = 2e-3 * r;
  for (int k = 0; k < n; ++k) {
    double th = 2.0 * pi * k / n;
    if (k > 0) {
      std::vector<cplx> pts;
      for (int j = 1; j <= 4; ++j) pts.push_back(centre + r * std::exp(I * (2.0 * pi * (k - 1 + j / 4.0) / n)));
      y_follow(P, st, pts);
    }
    cplx x = st.x, dir = I * std::exp(I * th);
    auto at = [&](double s) {
      YState q = st;
      y_advance(P, q, x + s * h * dir);
      return y_value(P, q);
    };
    Mat2 D = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h * dir);
    Mat2 A = sc(x);
    w = std::max(w, maxabs(D * inv2(y_value(P, st)) - A) / std::max(1.0, maxabs(A)));
  }
  return w;
}

inline Outcome ode_residual(CheckContext& c) {
  const auto& P = c.P;
  auto sc = coefficients(P);
  auto st0 = y_at_base(P).first;
  double r1 = 0.1 * P.branch.scale;
  YState s1 = st0;
  y_advance(P, s1, P.branch.x0 + r1);
  double w1 = ode_circle(P, sc, s1, P.branch.x0, r1);
  double d = 1e300;
  for (auto e : P.branch.e) d = std::min(d, std::abs(e - P.a));
  double r2 = 0.25 * d;
  YState s2 = y_start(P, P.a + 1e-3 * r2);
  y_advance(P, s2, P.a + r2);
  double w2 = ode_circle(P, sc, s2, P.a, r2);
  return {std::max(w1, w2), "base-point circle " + num(w1) + ", circle about a " + num(w2)};
}

inline Outcome monodromy_vs_theory(CheckContext& c) {
  auto nm = numerical_monodromy(c.P);
  auto md = theoretical_monodromy(c.P);
  double w = 0;
  std::string notes;
  const char* nm_[4] = {"inf", "1", "2", "3"};
  for (int l = 0; l < 4; ++l) {
    double d = maxabs(nm.M[l] - md.M[l]);
    w = std::max(w, d);
    notes += std::string(l ? ", " : "") + "M_" + nm_[l] + " " + num(d);
  }
  return {w, notes + "; m_inf = -i"};
}

inline Outcome cyclic_relation(CheckContext& c) {
  auto nm = numerical_monodromy(c.P);
  Mat2 prod = nm.M[3] * nm.M[2] * nm.M[1];
  double w = maxabs(prod - inv2(nm.M[0]));
  return {w, "reading: M3 M2 M1 = M_inf^-1, keyholes counterclockwise, infinity loop clockwise from x0"};
}

inline Outcome stokes(CheckContext& c) {
  auto s = stokes_check(c.P);
  return {s.residual, "sector connection on radius " + num(s.radius) + " about a"};
}

inline Outcome drift(CheckContext& c) { return {monodromy_drift(c.P, 1e-3), "t, e1, e2, e3 each moved by 1e-3"}; }

// ------------------------------------------------------------ criterion 5

inline Outcome residue_closed_form(CheckContext& c) {
  double w = 0;
  for (int nu = 0; nu < 3; ++nu) w = std::max(w, rel2(residue_formula(c.P, nu), residue_contour(c.P, nu)));
  return {w, "sigma'/sigma term read as the log-derivative of sigma[p,q] at t"};
}

inline Outcome residue_sum(CheckContext& c) {
  auto s = residue_sum_rule(c.P);
  return {s.residual, ""};
}

inline Outcome fd_vs(const DeformationParams& P, int which) {
  cplx x = which == 0 ? P.t : P.branch.e[which - 1];
  double h = 1e-6 * (1.0 + std::abs(x));
  auto fd = dlog_tau_fd(P, which, h);
  cplx H = hamiltonian(P, which);
  double w = std::max(rel2(fd.fd, H), rel2(fd.richardson, H));
  return {w, "Richardson gap " + num(fd.richardson_gap)};
}

inline Outcome ham_t_fd(CheckContext& c) { return fd_vs(c.P, 0); }

inline Outcome ham_e_fd(CheckContext& c) {
  Outcome o{0, "", false};
  for (int nu = 1; nu <= 3; ++nu) {
    auto r = fd_vs(c.P, nu);
    o.residual = std::max(o.residual, r.residual);
    o.notes += std::string(nu > 1 ? ", " : "") + "e" + std::to_string(nu) + ": " + r.notes;
  }
  return o;
}

inline Outcome closedness(CheckContext& c) { return {closedness_residual(c.P, 1e-4), "six mixed pairs, step 1e-4"}; }

// ------------------------------------------------------------ criterion 6

inline Outcome appendix_tau0(CheckContext& c) {
  double w = 0;
  for (int l = -1; l <= 2; ++l) {
    auto ap = appendix_params(c.P, l);
    cplx s = sigma(ap.lat, 2.0 * double(l) * ap.alpha);
    w = std::max(w, reldiff(appendix_tau_l(ap, 0.0), s));
    cplx c0 = std::pow(sigma(ap.lat, 2.0 * ap.alpha), double(-l)) * s;
    w = std::max(w, reldiff(appendix_c0(ap, l, 0.0), c0));
  }
  return {w, "l = -1..2, centred curve"};
}

inline Outcome appendix_dlog(CheckContext& c) {
  double w = 0;
  for (int l = -1; l <= 2; ++l) {
    auto ap = appendix_params(c.P, l);
    double h = 1e-6 * (1.0 + std::abs(ap.t));
    auto fd = [&](double s) { return log_ratio(appendix_tau_l(ap, ap.t + s), appendix_tau_l(ap, ap.t - s)) / (2.0 * s); };
    cplx f1 = fd(h), f2 = fd(h / 2), fr = (4.0 * f2 - f1) / 3.0;
    cplx cf = appendix_dlog_tau(ap, ap.t);
    w = std::max({w, rel2(f1, cf), rel2(fr, cf)});
  }
  return {w, "l = -1..2, FD step 1e-6 with Richardson"};
}

// ------------------------------------------------------------ module extras

inline Outcome coefficient_spectrum(CheckContext& c) {
  auto sc = coefficients(c.P);
  double w = 0;
  for (int k = 0; k < 3; ++k) {
    auto [l1, l2] = eig2(sc.A[k]);
    w = std::max({w, std::abs(sc.A[k].trace()), std::abs(det2(sc.A[k]) + 1.0 / 16.0), std::abs(l1 + 0.25),
                  std::abs(l2 - 0.25)});
  }
  Mat2 Bm = T_minus1(c.P);
  w = std::max(w, maxabs(sc.B_minus1 - Bm) / std::max(1.0, maxabs(Bm)));
  Mat2 S = sc.B0 + sc.A[0] + sc.A[1] + sc.A[2];
  auto [m1, m2] = eig2(-S);
  w = std::max({w, std::abs(m1 + 0.25), std::abs(m2 - 0.25)});
  Mat2 T = diag2(-0.25, 0.25);
  double gi = maxabs(S + sc.G_inf * T * inv2(sc.G_inf));
  double gp = maxabs(S + sc.G_inf_alt * T * inv2(sc.G_inf_alt));
  w = std::max(w, gi);
  return {w, "|B0| = " + num(maxabs(sc.B0)) + " (nonzero); G_inf with corrected sign " + num(gi) + ", plus sign " +
                 num(gp)};
}

inline Outcome ham_t_contour(CheckContext& c) { return {rel2(H_t_contour(c.P), H_t(c.P)), "residue at a from the constructed Y"}; }

inline Outcome ham_nu_cross(CheckContext& c) {
  double w = 0;
  for (int nu = 0; nu < 3; ++nu) w = std::max(w, rel2(H_nu(c.P, nu), residue_formula(c.P, nu) + omega_a_e(c.P, nu)));
  return {w, "H_nu against residue plus the e-part of omega_a"};
}

inline Outcome deformation_eq(CheckContext& c) {
  Outcome o;
  double pr = 0;
  bool ok = true;
  for (int which = 0; which < 4; ++which) {
    auto r = deformation_check(c.P, which, 1e-4);
    o.residual = std::max(o.residual, r.extrapolated);
    if (which > 0) pr = std::max(pr, r.direct);
    ok = ok && r.order_ok;
  }
  o.inconclusive = !ok;
  o.notes = "Richardson on h = 1e-4, 5e-5; direct-index reading " + num(pr) + (ok ? "" : "; FD order check failed");
  return o;
}

inline Outcome appendix_trace(CheckContext& c) {
  double w = 0, wpr = 0;
  for (int l = -1; l <= 2; ++l) {
    auto ap = appendix_params(c.P, l);
    auto loc = appendix_local(ap);
    auto ic = local_inverse_coeffs(ap.lat, ap.alpha);
    double d = 1e300;
    for (auto z : c.P.hp.omega_tilde) d = std::min(d, std::abs(wp(ap.lat, z) - loc.wp));
    double r = 0.2 * d;
    int n = 64;
    Mat2 S1 = Mat2::Zero();
    cplx u = ap.alpha;
    for (int k = 0; k <= n; ++k) {
      // walk u along the circle so the local branch is kept
      cplx z = r * std::exp(2.0 * pi * I * double(k) / double(n));
      cplx guess = k == 0 ? ap.alpha + ic.c[0] * z + ic.c[1] * z * z + ic.c[2] * z * z * z : u;
      u = newton_wp(ap.lat, loc.wp + z, guess);
      if (k == n) break;
      S1 += appendix_Y_hat(ap, u) / z / double(n);
    }
    Mat2 Yc = appendix_Y1(ap), Yp = appendix_Y1(ap, Y1Reading::uncorrected);
    cplx dl = appendix_dlog_tau(ap, ap.t);
    w = std::max({w, maxabs(S1 - Yc) / std::max(1.0, maxabs(Yc)), rel2(loc.wp1 * (S1(0, 0) - S1(1, 1)) / 2.0, dl)});
    wpr = std::max(wpr, maxabs(S1 - Yp) / std::max(1.0, maxabs(Yc)));
  }
  return {w, "Cauchy Y1 vs closed form and the trace identity; uncorrected diagonal " + num(wpr)};
}

inline Outcome appendix_main_match(CheckContext& c) {
  const auto& P = c.P;
  double w = 0;
  for (int l = -1; l <= 2; ++l) {
    auto [s, r] = lattice_coords(P.lat, 2.0 * double(l) * P.alpha);
    ThetaChar ch{0.5 + r, 0.5 + s};
    auto Q = make_params_on(P.branch, P.a, P.t, ch, P.opt, nullptr);
    auto ap = appendix_params(Q, l);
    double h = 1e-4 * (1.0 + std::abs(P.t));
    auto main2 = [&](double x) {
      return (H_t(shifted(Q, 0, x)) - H_t(shifted(Q, 0, -x))) / (2.0 * x);
    };
    auto app2 = [&](double x) { return (appendix_dlog_tau(ap, ap.t + x) - appendix_dlog_tau(ap, ap.t - x)) / (2.0 * x); };
    cplx m = (4.0 * main2(h / 2) - main2(h)) / 3.0, a = (4.0 * app2(h / 2) - app2(h)) / 3.0;
    w = std::max(w, rel2(m, a));
  }
  return {w, "second t-derivatives, characteristic (1/2 + r, 1/2 + s) with 2 l alpha = s omega1 + r omega2"};
}

inline Outcome half_period_table(CheckContext& c) { return {c.P.hp.residual, ""}; }

inline Outcome alpha_relations(CheckContext& c) {
  const auto& P = c.P;
  auto r = wp_alpha_relations(P.branch, P.a);
  double w = std::max({rel2(P.wpa, r.wp), rel2(P.wp1a * P.wp1a, r.wp1_sq), rel2(P.wp2a, r.wp2)});
  double sgn = rel2(P.wp1a, P.branch.y1(P.a));
  return {std::max(w, sgn), "wp'(alpha) matches sheet-1 y(a)"};
}

inline Outcome abel_roundtrip(CheckContext& c) {
  const auto& P = c.P;
  const auto& b = P.branch;
  double w = 0;
  int done = 0;
  while (done < 20) {
    cplx x = b.centroid + std::polar(b.scale * c.rng.uniform(0.1, 1.5), c.rng.uniform(-pi, pi));
    if (b.cut_distance(x) < 0.05 * b.gap) continue;
    bool near = false;
    for (auto e : b.e) near = near || std::abs(x - e) < 0.05 * b.gap;
    if (near) continue;
    int sheet = 1 + int(c.rng.next() & 1);
    cplx u = abel(b, P.lat, {x, sheet});
    cplx us = abel(b, P.lat, {x, 3 - sheet});
    w = std::max(w, std::abs(x_from_u(b, P.lat, u) - x) / b.scale);
    w = std::max(w, std::abs(reduce_to_cell(P.lat, u + us)) / std::abs(P.lat.omega1));
    ++done;
  }
  return {w, "20 random points, both sheets"};
}

}  // namespace detail

inline const std::vector<CheckDef>& registry() {
  using namespace detail;
  static const std::vector<CheckDef> r = {
      {"legendre", 1, 1e-9, legendre},
      {"heat_equation", 1, 1e-9, heat_equation},
      {"wp_ode", 1, 1e-9, wp_ode},
      {"wp_duplication", 1, 1e-9, wp_duplication},
      {"wp_third_derivative", 1, 1e-9, wp_third_derivative},
      {"quasi_periodicity", 1, 1e-9, quasi_periodicity},
      {"lemma_u3_u5", 2, 1e-6, lemma_u3_u5},
      {"dOmega_de", 2, 1e-6, dOmega_fd},
      {"dlog_omega1_de", 2, 1e-6, dlog_omega1_fd},
      {"lemma_frac", 2, 1e-6, lemma_frac},
      {"phi_transform", 3, 1e-9, phi_transform},
      {"det_phi_zeros", 3, 1e-8, det_phi_zeros},
      {"normalization", 3, 1e-8, normalization},
      {"y1_cauchy", 3, 1e-7, y1_cauchy},
      {"ode_residual", 4, 1e-7, ode_residual},
      {"monodromy", 4, 1e-6, monodromy_vs_theory},
      {"cyclic_relation", 4, 1e-6, cyclic_relation},
      {"stokes", 4, 1e-6, stokes},
      {"monodromy_drift", 4, 1e-6, drift},
      {"residue_closed_form", 5, 1e-6, residue_closed_form},
      {"residue_sum_rule", 5, 1e-7, residue_sum},
      {"ham_t_fd", 5, 1e-6, ham_t_fd},
      {"ham_e_fd", 5, 1e-6, ham_e_fd},
      {"closedness", 5, 1e-5, closedness},
      {"appendix_tau0", 6, 1e-10, appendix_tau0},
      {"appendix_dlog_tau", 6, 1e-7, appendix_dlog},
      {"coefficient_spectrum", 0, 1e-9, coefficient_spectrum},
      {"ham_t_contour", 0, 1e-6, ham_t_contour},
      {"ham_nu_cross", 0, 1e-7, ham_nu_cross},
      {"deformation_eq", 0, 1e-5, deformation_eq},
      {"appendix_trace", 0, 1e-7, appendix_trace},
      {"appendix_main_match", 0, 1e-6, appendix_main_match},
      {"half_periods", 0, 1e-9, half_period_table},
      {"alpha_relations", 0, 1e-9, alpha_relations},
      {"abel_roundtrip", 0, 1e-9, abel_roundtrip},
  };
  return r;
}

inline const CheckDef* find_check(const std::string& name) {
  for (const auto& c : registry())
    if (c.name == name) return &c;
  return nullptr;
}

// throws config_error on unknown names
inline std::vector<const CheckDef*> select_checks(const std::vector<std::string>& names) {
  std::vector<const CheckDef*> out;
  if (names.empty()) {
    for (const auto& c : registry()) out.push_back(&c);
    return out;
  }
  for (const auto& n : names) {
    const CheckDef* c = find_check(n);
    if (!c) throw config_error("unknown check identifier: " + n);
    out.push_back(c);
  }
  return out;
}

struct RunOptions {
  std::vector<std::string> checks;  // overrides the scenario list when non-empty
  double tol_scale = 1.0;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

inline CheckRecord run_one(const CheckDef& def, const Scenario& s, const DeformationParams& P, std::uint64_t seed,
                           double tol_scale) {
  CheckRecord rec;
  rec.name = def.name;
  rec.criterion = def.criterion;
  auto it = s.tolerances.find(def.name);
  rec.tolerance = (it != s.tolerances.end() ? it->second : def.tolerance) * tol_scale;
  auto t0 = std::chrono::steady_clock::now();
  try {
    CheckContext ctx{s, P, stream_for(seed, def.name)};
    Outcome o = def.run(ctx);
    rec.residual = o.residual;
    rec.notes = o.notes;
    bool ok = std::isfinite(o.residual) && o.residual < rec.tolerance;
    rec.status = ok ? Status::pass : (o.inconclusive ? Status::inconclusive : Status::fail);
  } catch (const std::exception& ex) {
    rec.status = Status::fail;
    rec.residual = std::numeric_limits<double>::infinity();
    rec.notes = std::string("error: ") + ex.what();
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// scenario must already be valid; P is built once and shared read-only
inline Report run_checks(const Scenario& s, const RunOptions& opt = {}) {
  auto defs = select_checks(opt.checks.empty() ? s.checks : opt.checks);
  DeformationParams P = scenario_params(s);
  std::uint64_t seed = opt.seed.value_or(s.seed);
  Report rep;
  rep.records.resize(defs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < defs.size();) rep.records[i] = run_one(*defs[i], s, P, seed, opt.tol_scale);
  };
  int jobs = std::max(1, std::min<int>(opt.jobs, int(defs.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  bool any_fail = false, any_inc = false;
  for (const auto& r : rep.records) {
    any_fail = any_fail || r.status == Status::fail;
    any_inc = any_inc || r.status == Status::inconclusive;
  }
  rep.overall = any_fail ? Status::fail : (any_inc ? Status::inconclusive : Status::pass);
  return rep;
}

// admissible random scenario: separated points, generic characteristics, |t| <= 0.3
inline Scenario random_scenario(SplitMix64& g) {
  for (;;) {
    Scenario s;
    std::vector<cplx> extra;
    s.e = detail::random_separated(g, &extra);
    s.a = extra[0];
    s.p = detail::random_char(g);
    s.q = detail::random_char(g);
    s.t = detail::random_t(g);
    s.seed = g.next();
    try {
      scenario_params(s);
      return s;
    } catch (const std::exception&) {
    }
  }
}

}  // namespace isotau
