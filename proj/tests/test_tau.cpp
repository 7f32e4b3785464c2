#include <isotau/tau.hpp>

#include <gtest/gtest.h>

using namespace isotau;

namespace {

const std::array<cplx, 3> lemn{cplx(1, 0), cplx(0, 0), cplx(-1, 0)};

DeformationParams golden() { return make_params(lemn, cplx(2, 0), cplx(0.1, 0), 0.3, 0.2); }

DeformationParams skew() {
  return make_params({cplx(0.3, 1.1), cplx(-1.2, 0.4), cplx(0.8, -0.9)}, cplx(1.4, 0.8), cplx(0.15, -0.05), 0.37, 0.64);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// (1/2 pi i) closed integral around u0 of g(u) du, by trapezoid on a circle in the u-plane
Mat2 cauchy_u(const std::function<Mat2(cplx)>& g, cplx u0, double r, int n) {
  Mat2 s = Mat2::Zero();
  for (int k = 0; k < n; ++k) {
    cplx z = r * std::exp(2.0 * pi * I * double(k) / double(n));
    s += g(u0 + z) * z / double(n);
  }
  return s;
}

}  // namespace

TEST(Tau, RationalPartGoldenValue) {
  EXPECT_LT(std::abs(f_func(lemn, 2.0) - 25.0 / 12.0), 1e-15);
  // invariant under common translation
  cplx c(0.4, -1.3);
  std::array<cplx, 3> e2{lemn[0] + c, lemn[1] + c, lemn[2] + c};
  EXPECT_LT(std::abs(f_func(e2, 2.0 + c) - 25.0 / 12.0), 1e-13);
}

TEST(Tau, RationalPartDerivative) {
  std::array<cplx, 3> e{cplx(0.3, 1.1), cplx(-1.2, 0.4), cplx(0.8, -0.9)};
  cplx a(1.4, 0.8);
  double h = 1e-5;
  for (int nu = 0; nu < 3; ++nu) {
    auto ep = e, em = e;
    ep[nu] += h;
    em[nu] -= h;
    cplx fd = (f_func(ep, a) - f_func(em, a)) / (2 * h);
    EXPECT_LT(rel(fd, df_de(e, a, nu)), 1e-8) << nu;
  }
}

TEST(Tau, FrozenGoldenResidues) {
  auto P = golden();
  cplx ref[3] = {{-0.1329345742724, 0.10930526288854}, {0.061824977848407, -0.13074788158942},
                 {0.029011062567152, 0.067465908513466}};
  for (int nu = 0; nu < 3; ++nu) EXPECT_LT(std::abs(residue_formula(P, nu) - ref[nu]), 1e-12) << nu;
}

TEST(Tau, FrozenGoldenHamiltonians) {
  auto H = hamiltonians(golden());
  EXPECT_LT(std::abs(H.Ht - cplx(-0.47251430874132, 0.50207225250092)), 1e-12);
  cplx ref[3] = {{-0.10930885883534, 0.084201650263497}, {0.07363783556694, -0.14329968790195},
                 {0.036886301046174, 0.059098037638451}};
  for (int nu = 0; nu < 3; ++nu) EXPECT_LT(std::abs(H.He[nu] - ref[nu]), 1e-12) << nu;
}

TEST(Tau, ResiduesAgainstContour) {
  for (const auto& P : {golden(), skew()})
    for (int nu = 0; nu < 3; ++nu) EXPECT_LT(rel(residue_contour(P, nu), residue_formula(P, nu)), 1e-6) << nu;
}

TEST(Tau, ResidueSumRule) {
  for (const auto& P : {golden(), skew()}) {
    auto s = residue_sum_rule(P);
    EXPECT_LT(s.residual, 1e-7);
    EXPECT_GT(std::abs(s.at_a), 1e-3);
  }
}

TEST(Tau, TimeHamiltonianFromConstructedY) {
  for (const auto& P : {golden(), skew()}) EXPECT_LT(rel(H_t_contour(P), H_t(P)), 1e-7);
}

TEST(Tau, BranchHamiltonianSplitsIntoResidueAndIrregularPart) {
  for (const auto& P : {golden(), skew()})
    for (int nu = 0; nu < 3; ++nu)
      EXPECT_LT(rel(H_nu(P, nu), residue_formula(P, nu) + omega_a_e(P, nu)), 1e-12) << nu;
}

TEST(Tau, LogDerivativesAgainstDifferences) {
  for (const auto& P : {golden(), skew()})
    for (int which = 0; which < 4; ++which) {
      cplx x = which == 0 ? P.t : P.branch.e[which - 1];
      double h = 1e-6 * (1.0 + std::abs(x));
      auto fd = dlog_tau_fd(P, which, h);
      cplx H = hamiltonian(P, which);
      EXPECT_LT(rel(fd.fd, H), 1e-6) << which;
      EXPECT_LT(rel(fd.richardson, H), 1e-6) << which;
    }
}

TEST(Tau, LogDerivativesWithLargerStep) {
  // step 1e-3 with Richardson, away from roundoff
  auto P = skew();
  for (int which = 0; which < 4; ++which) {
    auto fd = dlog_tau_fd(P, which, 1e-3);
    EXPECT_LT(rel(fd.richardson, hamiltonian(P, which)), 1e-9) << which;
  }
}

TEST(Tau, HamiltonianFormIsClosed) {
  EXPECT_LT(closedness_residual(golden()), 1e-5);
  EXPECT_LT(closedness_residual(skew()), 1e-5);
}

TEST(Tau, LogDifferenceIsContinuous) {
  auto P = skew();
  auto Q = shifted(P, 0, 1e-3);
  cplx d = log_tau_diff(Q, P);
  cplx e = log_tau(Q) - log_tau(P);
  EXPECT_LT(std::abs(d - e), 1e-12);
  EXPECT_LT(std::abs(std::exp(log_tau(P)) - tau_closed_form(P)), 1e-15 * std::abs(tau_closed_form(P)));
}

TEST(Tau, ZeroTimeReduction) {
  auto P = make_params(lemn, cplx(2, 0), 0.0, 0.3, 0.2);
  // without the irregular singularity H_t is the log-derivative of sigma[p,q] at 0
  EXPECT_LT(std::abs(H_t(P) - dlog_sigma_char(P.lat, P.chr, 0.0)), 1e-15);
  for (int nu = 0; nu < 3; ++nu) {
    EXPECT_LT(std::abs(H_nu(P, nu) - residue_formula(P, nu)), 1e-14);
    auto fd = dlog_tau_fd(P, nu + 1, 1e-4);
    EXPECT_LT(rel(fd.richardson, H_nu(P, nu)), 1e-9);
  }
}

TEST(Appendix, TauAtZeroTime) {
  auto P = skew();
  for (int l = -1; l <= 2; ++l) {
    auto ap = appendix_params(P, l);
    cplx s = sigma(ap.lat, 2.0 * double(l) * ap.alpha);
    if (l == 0) {
      EXPECT_LT(std::abs(appendix_tau_l(ap, 0.0)), 1e-15);
      continue;
    }
    EXPECT_LT(std::abs(appendix_tau_l(ap, 0.0) - s), 1e-12 * std::abs(s)) << l;
  }
}

TEST(Appendix, LogDerivativeAgainstDifferences) {
  for (const auto& P : {golden(), skew()})
    for (int l = -1; l <= 2; ++l) {
      auto ap = appendix_params(P, l);
      double h = 1e-4;
      auto f = [&](double s) { return std::log(appendix_tau_l(ap, ap.t + s) / appendix_tau_l(ap, ap.t - s)) / (2 * s); };
      cplx fd = (4.0 * f(h / 2) - f(h)) / 3.0;
      EXPECT_LT(rel(fd, appendix_dlog_tau(ap, ap.t)), 1e-9) << l;
    }
}

TEST(Appendix, LocalExpansionAtAlpha) {
  for (const auto& P : {golden(), skew()})
    for (int l = -1; l <= 2; ++l) {
      auto ap = appendix_params(P, l);
      auto w = appendix_local(ap);
      // Yhat = 1 + Y1 xi + ..., xi = wp(z) - wp(alpha); integrate in z around alpha
      double r = 0.1 * std::abs(ap.lat.omega1) * std::min(1.0, std::abs(w.wp1) / (1.0 + std::abs(w.wp2)));
      int n = 128;
      auto g0 = [&](cplx z) { return (appendix_Y_hat(ap, z) * wp_prime(ap.lat, z) / (wp(ap.lat, z) - w.wp)).eval(); };
      auto g1 = [&](cplx z) {
        cplx xi = wp(ap.lat, z) - w.wp;
        return (appendix_Y_hat(ap, z) * wp_prime(ap.lat, z) / (xi * xi)).eval();
      };
      Mat2 Y0 = cauchy_u(g0, ap.alpha, r, n), Y1 = cauchy_u(g1, ap.alpha, r, n);
      EXPECT_LT(maxabs(Y0 - Mat2::Identity()), 1e-10) << l;
      Mat2 Yc = appendix_Y1(ap);
      EXPECT_LT(maxabs(Y1 - Yc), 1e-8 * std::max(1.0, maxabs(Yc))) << l;
      EXPECT_GT(maxabs(appendix_Y1(ap, Y1Reading::uncorrected) - Yc), 1e-3) << l;
      // the trace identity ties Y1 to the log-derivative of tau_l
      EXPECT_LT(rel(w.wp1 * (Yc(0, 0) - Yc(1, 1)) / 2.0, appendix_dlog_tau(ap, ap.t)), 1e-9) << l;
    }
}
