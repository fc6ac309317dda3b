#include <gtest/gtest.h>

#include <random>

#include "pdcrys/chart.hpp"
#include "test_util.hpp"

using namespace pdcrys;
using pdcrys::testing::kSeed;
using pdcrys::testing::random_elem;

namespace {

LaurentPoly mono(const CoeffRing& R, int64_t c, Exp e) { return LaurentPoly::monomial(R.from_int(c), e); }

LaurentPoly random_poly(std::mt19937_64& rng, const CoeffRing& R, int d, bool laurent, int terms = 5) {
  LaurentPoly f(R, d);
  std::uniform_int_distribution<int> ex(laurent ? -3 : 0, 4);
  for (int k = 0; k < terms; ++k) {
    Exp e(d);
    for (auto& x : e) x = ex(rng);
    f.add_term(e, random_elem(rng, R));
  }
  return f;
}

}  // namespace

TEST(Laurent, DerivativeExamples) {
  const CoeffRing& Z4 = make_ring(2, 2);
  const CoeffRing& R = make_ring(7, 2);
  EXPECT_EQ(derive(mono(R, 1, {3}), 0), mono(R, 3, {2}));
  EXPECT_EQ(derive(mono(R, 1, {-1}), 0), mono(R, -1, {-2}));
  EXPECT_EQ(apply_diffop({2}, mono(Z4, 1, {2})), LaurentPoly::from_int(Z4, 1, 2));
  EXPECT_TRUE(derive(LaurentPoly::from_int(R, 1, 5), 0).is_zero());
}

TEST(Laurent, PartialDerivativesCommute) {
  std::mt19937_64 rng(kSeed);
  const CoeffRing& R = make_ring(3, 3, 2);
  for (int trial = 0; trial < 100; ++trial) {
    LaurentPoly f = random_poly(rng, R, 2, true);
    EXPECT_EQ(derive(derive(f, 0), 1), derive(derive(f, 1), 0));
  }
}

TEST(Laurent, DerivationRule) {
  std::mt19937_64 rng(kSeed + 1);
  const CoeffRing& R = make_ring(5, 2);
  for (int trial = 0; trial < 50; ++trial) {
    LaurentPoly f = random_poly(rng, R, 2, true), g = random_poly(rng, R, 2, true);
    for (int i = 0; i < 2; ++i) EXPECT_EQ(derive(f * g, i), derive(f, i) * g + f * derive(g, i));
  }
}

TEST(Laurent, DividedDerivativeTimesFactorial) {
  std::mt19937_64 rng(kSeed + 2);
  const CoeffRing& R = make_ring(3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    LaurentPoly f = random_poly(rng, R, 2, true);
    Exp K{2, 1};
    EXPECT_EQ(divided_derivative(K, f) * R.from_int(2), apply_diffop(K, f));
  }
  // t^3 over Z/27: d^[3] t^3 = 1 although d^3 t^3 = 6
  EXPECT_EQ(divided_derivative({3}, mono(R, 1, {3})), LaurentPoly::from_int(R, 1, 1));
}

TEST(Laurent, UnitInverse) {
  std::mt19937_64 rng(kSeed + 3);
  const CoeffRing& R = make_ring(3, 3, 2);
  for (int trial = 0; trial < 30; ++trial) {
    LaurentPoly h = random_poly(rng, R, 2, true);
    LaurentPoly u = mono(R, 2, {1, -2}) + times_p(h);
    if (!is_laurent_unit(u)) continue;
    LaurentPoly v = unit_inverse(u);
    EXPECT_EQ(u * v, LaurentPoly::from_int(R, 2, 1));
  }
  EXPECT_FALSE(is_laurent_unit(mono(R, 1, {1, 0}) + mono(R, 1, {0, 1})));
  EXPECT_THROW(unit_inverse(LaurentPoly(R, 2)), NotDivisible);
}

TEST(Laurent, DeterminantOfTriangular) {
  const CoeffRing& R = make_ring(5, 2);
  PolyMatrix M = poly_identity(R, 1, 3);
  M[0][0] = mono(R, 1, {2});
  M[0][2] = mono(R, 4, {1});
  M[2][2] = mono(R, 3, {-1});
  EXPECT_EQ(poly_det(M), mono(R, 3, {1}));
}

TEST(Chart, DfOverPStandardLift) {
  for (int p : {2, 3, 5}) {
    const CoeffRing& R = make_ring(p, 2);
    FrobLift F = FrobLift::standard(Chart(R, 1));
    PolyMatrix D = dF_over_p(F);
    EXPECT_EQ(D[0][0], mono(R, 1, {p - 1}));
  }
}

TEST(Chart, DfOverPCorrectedLift) {
  const CoeffRing& R = make_ring(5, 2);
  const CoeffRing& U = R.at_level(3);
  FrobLift F = FrobLift::with_corrections(Chart(R, 1), {mono(U, 1, {1})});
  EXPECT_EQ(dF_over_p(F)[0][0], mono(R, 1, {4}) + LaurentPoly::from_int(R, 1, 1));
}

TEST(Chart, DfOverPTwoVariables) {
  const int p = 3;
  const CoeffRing& R = make_ring(p, 2);
  const CoeffRing& U = R.at_level(3);
  FrobLift F = FrobLift::with_corrections(Chart(R, 2), {LaurentPoly(U, 2), mono(U, 1, {1, 1})});
  PolyMatrix D = dF_over_p(F);
  EXPECT_EQ(D[0][1], mono(R, 1, {0, 1}));
  EXPECT_EQ(D[1][1], mono(R, 1, {0, p - 1}) + mono(R, 1, {1, 0}));
  EXPECT_EQ(D[0][0], mono(R, 1, {p - 1, 0}));
  EXPECT_TRUE(D[1][0].is_zero());
}

TEST(Chart, LiftReducesToPthPowerModP) {
  std::mt19937_64 rng(kSeed + 4);
  const CoeffRing& R = make_ring(3, 2, 2);
  const CoeffRing& U = R.at_level(3);
  const CoeffRing& F3 = R.at_level(1);
  Chart c(R, 2, {true, false});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LaurentPoly> a{random_poly(rng, U, 2, false), random_poly(rng, U, 2, false)};
    FrobLift F = FrobLift::with_corrections(c, a);
    auto imgs = F.images();
    for (int i = 0; i < 2; ++i) {
      Exp e(2, 0);
      e[i] = 3;
      EXPECT_EQ(reduce(imgs[i], F3), mono(F3, 1, e));
    }
  }
}

TEST(Chart, PTimesDfOverPIsDifferentialOfPullback) {
  std::mt19937_64 rng(kSeed + 5);
  const CoeffRing& R = make_ring(5, 2);
  const CoeffRing& U = R.at_level(3);
  Chart c(R, 2, {false, true});
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<LaurentPoly> a{random_poly(rng, U, 2, false, 3), random_poly(rng, U, 2, false, 3)};
    a[1] = a[1].shifted({0, -1});
    FrobLift F = FrobLift::with_corrections(c, a);
    PolyMatrix D = dF_over_p(F);
    LaurentPoly f = random_poly(rng, R, 2, false, 4);
    // d(F* f) = sum_j F*(d_j f) (dF)(dt_j'), and dF = p dF/p
    for (int i = 0; i < 2; ++i) {
      LaurentPoly lhs = reduce(derive(F.pullback_upper(lift(f, U)), i), R);
      LaurentPoly rhs(R, 2);
      for (int j = 0; j < 2; ++j) rhs += F.pullback(derive(f, j)) * times_p(D[i][j]);
      EXPECT_EQ(lhs, rhs);
    }
  }
}

TEST(Chart, SigmaTwistOnCoefficients) {
  const CoeffRing& R = make_ring(2, 2, 2);
  FrobLift F = FrobLift::standard(Chart(R, 1));
  LaurentPoly f = LaurentPoly::monomial(R.generator(), {1});
  EXPECT_EQ(F.pullback(f), LaurentPoly::monomial(sigma(R.generator()), {2}));
}

TEST(Chart, MonomialInverse) {
  const CoeffRing& R = make_ring(3, 2);
  Chart src(R, 2, {true, true}), tgt(R, 2, {true, true});
  ChartMap m{src, tgt, {mono(R, 2, {1, 1}), mono(R, 1, {0, -1})}};
  ChartMap inv = monomial_inverse(m);
  ChartMap round = compose(inv, m);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(round.images[i], LaurentPoly::variable(R, 2, i));
  ChartMap bad{src, tgt, {mono(R, 1, {2, 0}), mono(R, 1, {0, 1})}};
  EXPECT_THROW(monomial_inverse(bad), RingError);
}

TEST(Atlas, ProjectiveLineIsValid) {
  Atlas A = projective_line(make_ring(5, 2));
  AtlasReport r = validate_atlas(A);
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(A.side(1, 0).invertible[0]);
}

TEST(Atlas, WrongTransitionIsInvalid) {
  const CoeffRing& R = make_ring(5, 2);
  Atlas A;
  A.charts = {Chart(R, 1, {false}, "U0"), Chart(R, 1, {false}, "U1")};
  A.add_overlap(0, 1, {true}, {LaurentPoly::variable(R, 1, 0)});
  AtlasReport r = validate_atlas(A);
  EXPECT_FALSE(r.valid);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_NE(r.failures[0].find("U0"), std::string::npos);
}

TEST(Atlas, ProductOfProjectiveLines) {
  const CoeffRing& R = make_ring(3, 2);
  Atlas P = product_atlas(projective_line(R), projective_line(R));
  EXPECT_EQ(P.charts.size(), 4u);
  EXPECT_EQ(P.overlaps.size(), 6u);
  EXPECT_EQ(P.lifts.size(), 4u);
  AtlasReport r = validate_atlas(P);
  EXPECT_TRUE(r.valid) << (r.failures.empty() ? "" : r.failures[0]);
  // chart (U1 x U1) seen from (U0 x U0): both coordinates inverted
  ChartMap t = P.transition(0, 3);
  EXPECT_EQ(t.images[0], mono(R, 1, {-1, 0}));
  EXPECT_EQ(t.images[1], mono(R, 1, {0, -1}));
}

TEST(Atlas, BrokenCocycleIsReported) {
  const CoeffRing& R = make_ring(3, 2);
  Atlas A;
  A.charts = {Chart(R, 1, {true}), Chart(R, 1, {true}), Chart(R, 1, {true})};
  A.add_overlap(0, 1, {}, {mono(R, 1, {-1})});
  A.add_overlap(1, 2, {}, {mono(R, 1, {-1})});
  A.add_overlap(0, 2, {}, {mono(R, 1, {-1})});
  AtlasReport r = validate_atlas(A);
  EXPECT_FALSE(r.valid);
  bool found = false;
  for (auto& f : r.failures) found = found || f.find("cocycle") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Chart, TransportedLiftMatchesOnTorus) {
  // t -> t^p on G_m seen through s = t^{-1} is again s -> s^p
  const CoeffRing& R = make_ring(5, 2);
  Chart g(R, 1, {true});
  ChartMap to{g, g, {mono(R, 1, {-1})}};
  ChartMap from = monomial_inverse(to);
  FrobLift F = transport_lift(FrobLift::standard(g), to, from, g);
  EXPECT_TRUE(F.a[0].is_zero());
}

TEST(Forms, WedgeSigns) {
  EXPECT_EQ(wedge_sign(0b01, 0b10), 1);
  EXPECT_EQ(wedge_sign(0b10, 0b01), -1);
  EXPECT_EQ(wedge_sign(0b11, 0b01), 0);
  EXPECT_EQ(wedge_sign(0b100, 0b011), 1);
  EXPECT_EQ(wedge_sign(0b010, 0b101), -1);
  EXPECT_EQ(masks_of_degree(3, 2), (std::vector<FormMask>{0b011, 0b101, 0b110}));
}
