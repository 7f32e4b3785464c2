#include <isotau/weierstrass.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace isotau;

namespace {

using lcplx = std::complex<long double>;

// plain symmetric sum in long double, no adaptive stopping
lcplx theta_ref(ThetaChar c, cplx z, cplx Om, int deriv = 0) {
  const long double PI = 3.141592653589793238462643383279502884L;
  lcplx s = 0, zz(z.real(), z.imag()), O(Om.real(), Om.imag());
  lcplx p(c.p.real(), c.p.imag()), q(c.q.real(), c.q.imag());
  lcplx i(0, 1);
  for (int n = -60; n <= 60; ++n) {
    lcplx np = lcplx(n) + p;
    lcplx w = std::exp(i * PI * O * np * np + 2.0L * PI * i * np * (zz + q));
    for (int k = 0; k < deriv; ++k) w *= 2.0L * PI * i * np;
    s += w;
  }
  return s;
}

cplx to_c(lcplx v) { return {double(v.real()), double(v.imag())}; }

// wp by the cosecant series over the second period
cplx wp_ref(cplx u, cplx w1, cplx w2) {
  cplx k = pi / w1;
  auto csc2 = [](cplx z) {
    cplx s = std::sin(z);
    return 1.0 / (s * s);
  };
  cplx s = -1.0 / 3.0;
  for (int n = -40; n <= 40; ++n) {
    s += csc2(k * (u + double(n) * w2));
    if (n != 0) s -= csc2(k * double(n) * w2);
  }
  return k * k * s;
}

// Eisenstein data for w1 Z + w2 Z
struct Eis {
  cplx E2, E4, E6;
};

Eis eisenstein(cplx Om) {
  cplx q = std::exp(2.0 * pi * I * Om);
  Eis r{1.0, 1.0, 1.0};
  cplx qn = 1;
  for (int n = 1; n < 200; ++n) {
    qn *= q;
    double s1 = 0, s3 = 0, s5 = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) {
        s1 += d;
        s3 += std::pow(d, 3);
        s5 += std::pow(d, 5);
      }
    r.E2 -= 24.0 * s1 * qn;
    r.E4 += 240.0 * s3 * qn;
    r.E6 -= 504.0 * s5 * qn;
    if (std::abs(qn) * std::pow(n, 6) < 1e-20) break;
  }
  return r;
}

struct LatCase {
  cplx w1, w2;
};

const LatCase cases[] = {
    {{1.0, 0.0}, {0.0, 1.0}},
    {{1.3, 0.2}, {0.4, 1.1}},
    {{0.7, -0.5}, {0.9, 0.8}},
    {{2.0, 0.0}, {-0.6, 1.9}},
};

}  // namespace

TEST(Theta, MatchesLongDoubleSum) {
  ThetaChar chars[] = {{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}, {0.3, 0.2}, {0.83, 0.41}};
  cplx zs[] = {{0.1, 0.05}, {-0.37, 0.2}, {0.45, -0.3}};
  cplx Oms[] = {{0, 1}, {0.3, 0.8}, {-0.45, 1.6}, {0.1, 0.6}};
  for (auto c : chars)
    for (auto z : zs)
      for (auto O : Oms) {
        auto j = theta_jet(c, z, O, 3);
        for (int k = 0; k <= 3; ++k) {
          cplx ref = to_c(theta_ref(c, z, O, k));
          EXPECT_LT(std::abs(j.dz[k] - ref), 1e-12 * std::max(1.0, std::abs(ref))) << "order " << k;
        }
      }
}

TEST(Theta, ThetaNullAtSquareLattice) {
  // theta00(0; i) = pi^(1/4) / Gamma(3/4)
  double ref = std::pow(pi, 0.25) / std::tgamma(0.75);
  EXPECT_NEAR(ref, 1.0864348112133082, 1e-15);
  cplx v = theta({0, 0}, 0.0, I);
  EXPECT_NEAR(v.real(), ref, 1e-14);
  EXPECT_NEAR(v.imag(), 0.0, 1e-14);
}

TEST(Theta, OddCharacteristicIsOdd) {
  cplx O(0.2, 1.1);
  EXPECT_LT(std::abs(theta(odd_char, 0.0, O)), 1e-15);
  for (cplx z : {cplx(0.13, 0.07), cplx(-0.3, 0.25)})
    EXPECT_LT(std::abs(theta(odd_char, z, O) + theta(odd_char, -z, O)), 1e-14);
  // even characteristics are even
  for (ThetaChar c : {ThetaChar{0, 0}, ThetaChar{0.5, 0}, ThetaChar{0, 0.5}})
    EXPECT_LT(std::abs(theta(c, 0.21, O) - theta(c, -0.21, O)), 1e-14);
}

TEST(Theta, DerivativesAgainstDifferences) {
  ThetaChar c{0.3, 0.7};
  cplx z(0.2, -0.1), O(0.15, 0.9);
  double h = 1e-4;
  auto j = theta_jet(c, z, O, 1, {}, true);
  cplx fdz = (theta(c, z + h, O) - theta(c, z - h, O)) / (2 * h);
  cplx fdO = (theta(c, z, O + h) - theta(c, z, O - h)) / (2 * h);
  EXPECT_LT(std::abs(fdz - j.dz[1]), 1e-6 * std::abs(j.dz[1]));
  EXPECT_LT(std::abs(fdO - j.dOmega), 1e-6 * std::abs(j.dOmega));
  EXPECT_LT(std::abs(theta_dz(c, z, O, 1) - j.dz[1]), 1e-15 * std::abs(j.dz[1]));
  EXPECT_LT(std::abs(theta_dOmega(c, z, O) - j.dOmega), 1e-15 * std::abs(j.dOmega));
}

TEST(Theta, HeatEquationByDifferences) {
  // d2/dz2 theta = 4 pi i d/dOmega theta, with the Omega derivative taken by differences
  ThetaChar c{0.61, 0.27};
  cplx z(-0.15, 0.12), O(-0.2, 1.3);
  double h = 1e-4;
  cplx d2 = theta_jet(c, z, O, 2).dz[2];
  cplx fdO = (theta(c, z, O + h) - theta(c, z, O - h)) / (2 * h);
  EXPECT_LT(std::abs(d2 - 4.0 * pi * I * fdO), 1e-6 * std::abs(d2));
}

TEST(Theta, RejectsBadInput) {
  EXPECT_THROW(theta({0, 0}, 0.1, cplx(0.2, -0.1)), orientation_error);
  EXPECT_THROW(theta_jet({0, 0}, 0.1, I, 9), config_error);
  EvalConfig cfg;
  cfg.series_tol = 0;
  EXPECT_THROW(cfg.validate(), config_error);
  cfg = {};
  cfg.max_terms = 3;
  EXPECT_THROW(cfg.validate(), config_error);
  cfg.max_terms = 8;
  EXPECT_THROW(theta_jet({0, 0}, 0.0, cplx(0, 0.01), 0, cfg), evaluation_error);
  EXPECT_THROW(theta({0, 0}, cplx(0, 3.0), cplx(0, 0.01)), evaluation_error);
}

TEST(Weierstrass, WpAgainstCosecantSeries) {
  for (auto lc : cases) {
    Lattice L = lattice_from_periods(lc.w1, lc.w2);
    for (cplx f : {cplx(0.21, 0.13), cplx(-0.34, 0.27), cplx(0.4, -0.41)}) {
      cplx u = f.real() * lc.w1 + f.imag() * lc.w2;
      cplx ref = wp_ref(u, lc.w1, lc.w2);
      EXPECT_LT(std::abs(wp(L, u) - ref), 1e-11 * std::max(1.0, std::abs(ref)));
      // derivative by differences of the oracle
      double h = 1e-4 * std::abs(lc.w1);
      cplx dref = (wp_ref(u + h, lc.w1, lc.w2) - wp_ref(u - h, lc.w1, lc.w2)) / (2 * h);
      EXPECT_LT(std::abs(wp_prime(L, u) - dref), 1e-6 * std::max(1.0, std::abs(dref)));
    }
  }
}

TEST(Weierstrass, InvariantsAgainstEisensteinSeries) {
  for (auto lc : cases) {
    Lattice L = lattice_from_periods(lc.w1, lc.w2);
    auto E = eisenstein(L.Omega);
    cplx g2 = 4.0 * std::pow(pi, 4) / 3.0 * E.E4 / std::pow(lc.w1, 4);
    cplx g3 = 8.0 * std::pow(pi, 6) / 27.0 * E.E6 / std::pow(lc.w1, 6);
    cplx eta1 = pi * pi * E.E2 / (3.0 * lc.w1);
    double s2 = std::max(1.0, std::abs(g2)), s3 = std::max(1.0, std::abs(g3));
    EXPECT_LT(std::abs(L.g2 - g2), 1e-10 * s2);
    EXPECT_LT(std::abs(L.g3 - g3), 1e-10 * s3);
    EXPECT_LT(std::abs(L.eta1 - eta1), 1e-11 * std::max(1.0, std::abs(eta1)));
  }
}

TEST(Weierstrass, LegendreRelation) {
  for (auto lc : cases) {
    Lattice L = lattice_from_periods(lc.w1, lc.w2);
    EXPECT_LT(std::abs(L.eta1 * L.omega2 - L.eta2 * L.omega1 - 2.0 * pi * I), 1e-12);
    cplx u = 0.23 * lc.w1 + 0.17 * lc.w2;
    EXPECT_LT(std::abs(zeta(L, u + lc.w1) - zeta(L, u) - L.eta1), 1e-11);
    EXPECT_LT(std::abs(zeta(L, u + lc.w2) - zeta(L, u) - L.eta2), 1e-11);
  }
}

TEST(Weierstrass, SigmaNormalisationAndSymmetry) {
  for (auto lc : cases) {
    Lattice L = lattice_from_periods(lc.w1, lc.w2);
    double h = 1e-4 * std::abs(lc.w1);
    // sigma(u) ~ u near 0
    EXPECT_LT(std::abs((sigma(L, h) - sigma(L, -h)) / (2 * h) - 1.0), 1e-8);
    cplx u = 0.31 * lc.w1 - 0.22 * lc.w2;
    EXPECT_LT(std::abs(sigma(L, u) + sigma(L, -u)), 1e-14 * std::abs(sigma(L, u)));
    // homogeneity: sigma(l u; l w) = l sigma(u; w)
    cplx lam(0.8, 0.6);
    Lattice M = lattice_from_periods(lam * lc.w1, lam * lc.w2);
    EXPECT_LT(std::abs(sigma(M, lam * u) - lam * sigma(L, u)), 1e-12 * std::abs(sigma(L, u)));
    EXPECT_LT(std::abs(wp(M, lam * u) - wp(L, u) / (lam * lam)), 1e-12 * std::abs(wp(L, u)));
  }
}

TEST(Weierstrass, ZetaIsLogDerivativeOfSigma) {
  Lattice L = lattice_from_periods(cases[1].w1, cases[1].w2);
  cplx u(0.37, 0.29);
  double h = 1e-5;
  cplx fd = (std::log(sigma(L, u + h)) - std::log(sigma(L, u - h))) / (2 * h);
  EXPECT_LT(std::abs(fd - zeta(L, u)), 1e-8 * std::abs(zeta(L, u)));
  cplx fdz = (zeta(L, u + h) - zeta(L, u - h)) / (2 * h);
  EXPECT_LT(std::abs(fdz + wp(L, u)), 1e-8 * std::abs(wp(L, u)));
}

TEST(Weierstrass, JetIsConsistent) {
  Lattice L = lattice_from_periods(cases[2].w1, cases[2].w2);
  cplx u = 0.19 * L.omega1 + 0.33 * L.omega2;
  auto j = wp_jet(L, u);
  EXPECT_LT(std::abs(j.wp1 * j.wp1 - (4.0 * j.wp * j.wp * j.wp - L.g2 * j.wp - L.g3)), 1e-10 * std::abs(j.wp1 * j.wp1));
  EXPECT_LT(std::abs(j.wp2 - (6.0 * j.wp * j.wp - L.g2 / 2.0)), 1e-10 * std::abs(j.wp2));
  EXPECT_LT(std::abs(j.wp3 - 12.0 * j.wp * j.wp1), 1e-10 * std::abs(j.wp3));
  EXPECT_EQ(j.wp, wp(L, u));
}

TEST(Weierstrass, HalfPeriodsSolveCubic) {
  Lattice L = lattice_from_periods(cases[1].w1, cases[1].w2);
  for (cplx w : {L.omega1 / 2.0, L.omega2 / 2.0, (L.omega1 + L.omega2) / 2.0}) {
    EXPECT_LT(std::abs(wp_prime(L, w)), 1e-10);
    cplx e = wp(L, w);
    EXPECT_LT(std::abs(4.0 * e * e * e - L.g2 * e - L.g3), 1e-10);
  }
}

TEST(Weierstrass, CharacteristicSigmaShifts) {
  Lattice L = lattice_from_periods(cases[3].w1, cases[3].w2);
  ThetaChar c{0.3, 0.2};
  cplx u(0.25, 0.31);
  cplx s0 = sigma_char(L, c, u), s1 = sigma_char(L, c, u + L.omega1), s2 = sigma_char(L, c, u + L.omega2);
  cplx r1 = std::exp(2.0 * pi * I * c.p + L.eta1 * (u + L.omega1 / 2.0)) * s0;
  cplx r2 = std::exp(-2.0 * pi * I * c.q + L.eta2 * (u + L.omega2 / 2.0)) * s0;
  EXPECT_LT(std::abs(s1 - r1), 1e-12 * std::abs(r1));
  EXPECT_LT(std::abs(s2 - r2), 1e-12 * std::abs(r2));
}

TEST(Weierstrass, LatticeCoordinatesAndReduction) {
  Lattice L = lattice_from_periods(cases[2].w1, cases[2].w2);
  cplx u = 2.3 * L.omega1 - 1.7 * L.omega2;
  auto [s, r] = lattice_coords(L, u);
  EXPECT_NEAR(s, 2.3, 1e-13);
  EXPECT_NEAR(r, -1.7, 1e-13);
  auto [s2, r2] = lattice_coords(L, reduce_to_cell(L, u));
  EXPECT_NEAR(s2, 0.3, 1e-13);
  EXPECT_NEAR(r2, 0.3, 1e-13);
  EXPECT_TRUE(congruent(L, u, reduce_to_cell(L, u), 1e-12));
}

TEST(Weierstrass, ErrorsAtLatticePointsAndOrientation) {
  Lattice L = lattice_from_periods(cases[0].w1, cases[0].w2);
  EXPECT_THROW(wp(L, 0.0), pole_error);
  EXPECT_THROW(zeta(L, L.omega1 + L.omega2), pole_error);
  EXPECT_THROW(wp_jet(L, 2.0 * L.omega2), pole_error);
  EXPECT_THROW(lattice_from_periods(cases[0].w2, cases[0].w1), orientation_error);
  EXPECT_THROW(wp_n(L, 0.3, 7), config_error);
}

TEST(Weierstrass, HalfArgumentConventionDiffers) {
  Lattice L = lattice_from_periods(cases[1].w1, cases[1].w2);
  Lattice H = L;
  H.convention = SigmaConvention::half_argument;
  cplx u(0.3, 0.2);
  EXPECT_GT(std::abs(sigma(L, u) - sigma(H, u)), 1e-3);
}
