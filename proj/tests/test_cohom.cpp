#include <gtest/gtest.h>

#include <random>

#include "p1_oracle.hpp"
#include "pdcrys/cohom.hpp"
#include "test_util.hpp"

using namespace pdcrys;
using namespace pdcrys::testing;

namespace {

using Invariants = std::vector<std::vector<int>>;

Invariants all_invariants(const Engine& E) {
  Invariants out;
  for (int m = 0; m <= E.max_degree(); ++m) out.push_back(E.group(m, Variant::full()).invariants());
  return out;
}

// t -> t^p + p t on the first chart, s -> s^p on the second
Atlas perturbed_line(const CoeffRing& R) {
  Atlas A = projective_line(R);
  const CoeffRing& U = R.at_level(R.n + 1);
  A.lifts[0] = FrobLift::with_corrections(A.charts[0], {LaurentPoly::monomial(U.one(), {1})});
  return A;
}

int length_of(const std::vector<int>& v) {
  int s = 0;
  for (int e : v) s += e;
  return s;
}

void expect_d_squared_zero(const Bicomplex& B, const std::vector<Exp>& weights) {
  for (auto& w : weights)
    for (int m = 0; m < B.max_degree(); ++m)
      for (auto& c : B.cells(w, m)) {
        Cochain dd = B.d(B.d(c));
        EXPECT_TRUE(dd.empty()) << B.describe(c);
      }
}

}  // namespace

TEST(Cohomology, ProjectiveLineMatchesHandComplex) {
  const Invariants expected{{2}, {}, {2}};
  EXPECT_EQ(p1_oracle::projective_line(5, 2, 6), expected);
  EXPECT_EQ(p1_oracle::projective_line(5, 2, 9), expected);
  Engine E(structure_sheaf(projective_line(make_ring(5, 2))));
  EXPECT_EQ(all_invariants(E), expected);
}

TEST(Cohomology, ProjectiveLineOtherPrimes) {
  for (auto [p, n] : {std::pair{2, 1}, {2, 3}, {3, 2}, {7, 1}}) {
    Engine E(structure_sheaf(projective_line(make_ring(p, n))));
    EXPECT_EQ(all_invariants(E), p1_oracle::projective_line(p, n, E.cap())) << p << " " << n;
  }
}

TEST(Cohomology, EmptyAtlasIsZero) {
  GluedModule G;
  Engine E(G);
  EXPECT_EQ(E.max_degree(), -1);
  EXPECT_TRUE(E.group(0, Variant::full()).invariants().empty());
}

TEST(Cohomology, AffineLineConstantsBelowP) {
  // t^p is closed, so H^0 is the constants only for caps below p
  const CoeffRing& R = make_ring(5, 1);
  Caps caps;
  caps.poly = 3;
  caps.certify = false;
  Engine E(structure_sheaf(affine_atlas(R, 1)), caps);
  EXPECT_EQ(E.group(0, Variant::full()).invariants(), std::vector<int>{1});
  EXPECT_TRUE(E.group(1, Variant::full()).invariants().empty());

  Caps strict;
  strict.poly = 4;
  Engine F(structure_sheaf(affine_atlas(R, 1)), strict);
  EXPECT_THROW(F.group(0, Variant::full()), StabilizationFailure);
}

TEST(Cohomology, DifferentialSquaresToZero) {
  const CoeffRing& R = make_ring(5, 2);
  Engine line(structure_sheaf(projective_line(R)));
  expect_d_squared_zero(line.plain(), line.weights(4));

  Engine pert(structure_sheaf(perturbed_line(R)));
  ASSERT_GT(pert.pd_cap(), 1);
  expect_d_squared_zero(pert.pd(), pert.weights(3));

  Engine square(structure_sheaf(product_atlas(projective_line(make_ring(3, 1)), projective_line(make_ring(3, 1)))));
  expect_d_squared_zero(square.plain(), square.weights(2));
}

TEST(Cohomology, PlainAndDividedPowerComplexesAgree) {
  const CoeffRing& R = make_ring(5, 2);
  Engine E(structure_sheaf(perturbed_line(R)));
  const Bicomplex& P = E.pd();
  for (int m = 0; m <= E.max_degree(); ++m) {
    std::vector<int> pd;
    for (auto& w : E.weights(E.cap())) {
      PieceHomology H = piece_homology(P, w, m, Variant::full());
      pd.insert(pd.end(), H.exps.begin(), H.exps.end());
    }
    std::sort(pd.begin(), pd.end());
    EXPECT_EQ(pd, E.group(m, Variant::full()).invariants()) << m;
  }
}

TEST(Cohomology, RepresentativesClassifyToBasis) {
  Engine E(structure_sheaf(product_atlas(projective_line(make_ring(3, 2)), projective_line(make_ring(3, 2)))));
  const CoeffRing& R = make_ring(3, 2);
  for (int m = 0; m <= E.max_degree(); ++m) {
    const Group& g = E.group(m, Variant::full());
    for (int k = 0; k < g.size(); ++k) {
      auto y = E.classify(g, E.representative(g, k));
      for (int j = 0; j < g.size(); ++j) EXPECT_EQ(y[j].residue(g.exps[j]), j == k ? R.one() : R.zero());
    }
  }
}

TEST(Cohomology, CoboundariesClassifyToZero) {
  std::mt19937_64 rng(kSeed + 11);
  const CoeffRing& R = make_ring(5, 2);
  Engine E(structure_sheaf(projective_line(R)));
  const Bicomplex& B = E.plain();
  for (int m = 1; m <= E.max_degree(); ++m) {
    const Group& g = E.group(m, Variant::full());
    for (int trial = 0; trial < 10; ++trial) {
      Exp w{static_cast<int>(rng() % 7) - 3};
      Cochain y;
      for (auto& c : B.cells(w, m - 1)) add_to(y, c, random_elem(rng, R));
      Cochain x = B.d(y);
      if (g.size() == 0) {
        EXPECT_TRUE(E.classify(g, x).empty());
        continue;
      }
      add_to(x, E.representative(g, 0), R.from_int(3));
      auto coords = E.classify(g, x);
      EXPECT_EQ(coords[0].residue(g.exps[0]), R.from_int(3).residue(g.exps[0]));
    }
  }
}

TEST(Cohomology, FiltrationImages) {
  Engine E(structure_sheaf(projective_line(make_ring(5, 2))));
  for (int m = 0; m <= 2; ++m) {
    MapAnalysis full = filtration_map(E, m, 0);
    EXPECT_TRUE(full.isomorphism());
    EXPECT_TRUE(filtration_map(E, m, 2).zero());
  }
  MapAnalysis top = filtration_map(E, 2, 1);
  EXPECT_TRUE(top.isomorphism());
  EXPECT_EQ(top.image_invariants, std::vector<int>{2});
  EXPECT_TRUE(filtration_map(E, 0, 1).zero());
}

TEST(Cohomology, FrobeniusOnTopClass) {
  const CoeffRing& R = make_ring(5, 2);
  for (const Atlas& A : {projective_line(R), perturbed_line(R)}) {
    Engine E(structure_sheaf(A));
    bool same = false;
    RingMatrix phi1 = phi_on_cohomology(E, 2, 1, &same);
    EXPECT_TRUE(same);
    RingMatrix phi0 = phi_on_cohomology(E, 2, 0, &same);
    EXPECT_TRUE(same);
    ASSERT_EQ(phi1.rows, 1);
    ASSERT_EQ(phi1.cols, 1);
    EXPECT_EQ(phi1.at(0, 0), R.one());
    EXPECT_EQ(phi0.at(0, 0), R.from_int(5));
    RingMatrix phi00 = phi_on_cohomology(E, 0, 0);
    EXPECT_EQ(phi00.at(0, 0), R.one());
  }
}

TEST(Cohomology, TheoremVerdictsOnProjectiveLine) {
  Engine E(structure_sheaf(projective_line(make_ring(5, 2))));
  CohomologyReport rep = verify_theorem(E);
  EXPECT_TRUE(rep.all_in_range_pass());
  ASSERT_EQ(rep.degrees.size(), 3u);
  for (auto& D : rep.degrees) {
    ASSERT_TRUE(D.mf.has_value());
    EXPECT_TRUE(D.mf->ok()) << D.m;
    for (auto& v : D.injective) EXPECT_TRUE(v.in_range && v.holds);
  }
  for (auto& e : rep.e1) EXPECT_TRUE(e.d1_zero);
}

TEST(Cohomology, ProductOfLinesKunnethAndHodge) {
  Engine E(structure_sheaf(product_atlas(projective_line(make_ring(5, 1)), projective_line(make_ring(5, 1)))));
  TheoremOptions opt;
  opt.lambda = false;
  opt.frobenius = false;
  CohomologyReport rep = verify_theorem(E, opt);
  // Kunneth from the line: lengths 1, 0, 2, 0, 1
  const std::vector<int> lengths{1, 0, 2, 0, 1, 0};
  for (int m = 0; m <= E.max_degree(); ++m) EXPECT_EQ(length_of(rep.degrees[m].invariants), lengths[m]) << m;
  std::map<std::pair<int, int>, int> hodge;
  for (auto& e : rep.e1) {
    EXPECT_TRUE(e.in_range);
    EXPECT_TRUE(e.d1_zero);
    EXPECT_EQ(e.length, e.e_infinity);
    if (e.length) hodge[{e.r, e.s}] = e.length;
  }
  std::map<std::pair<int, int>, int> expected{{{0, 0}, 1}, {{1, 1}, 2}, {{2, 2}, 1}};
  EXPECT_EQ(hodge, expected);
}

TEST(Cohomology, LambdaSequenceAndPsi) {
  for (int p : {2, 5}) {
    Engine E(structure_sheaf(projective_line(make_ring(p, 1))));
    for (int m = 0; m <= 2; ++m) {
      LambdaReport L = lambda_report(E, m);
      EXPECT_TRUE(L.psi_in_range);
      EXPECT_TRUE(L.psi_iso) << p << " " << m << " " << L.witness;
      EXPECT_TRUE(L.in_range);
      EXPECT_TRUE(L.sequence_exact) << L.witness;
      EXPECT_EQ(L.right, L.middle - L.left);
      EXPECT_EQ(L.right, L.target);
    }
  }
}

TEST(Cohomology, LambdaWithIncompatibleLifts) {
  Engine E(structure_sheaf(perturbed_line(make_ring(5, 2))));
  for (int m = 0; m <= 2; ++m) {
    LambdaReport L = lambda_report(E, m);
    EXPECT_TRUE(L.psi_iso) << L.witness;
    EXPECT_TRUE(L.sequence_exact) << L.witness;
  }
}

TEST(Cohomology, DividedPowerCaps) {
  const CoeffRing& R = make_ring(5, 2);
  Engine E(structure_sheaf(perturbed_line(R)));
  const int need = E.pd_cap();
  EXPECT_GT(need, 1);
  Caps low;
  low.pd = need - 1;
  Engine F(structure_sheaf(perturbed_line(R)), low);
  EXPECT_THROW(F.pd_cap(), TruncationOverflow);
  // at p = 2 divided powers of incompatible lifts never die
  Engine two(structure_sheaf(perturbed_line(make_ring(2, 1))));
  EXPECT_THROW(two.pd_cap(), TruncationOverflow);
  // compatible lifts need no divided powers
  EXPECT_EQ(Engine(structure_sheaf(projective_line(R))).pd_cap(), 1);
}

TEST(Cohomology, SumOfGradedPiecesBoundsTotal) {
  Engine E(structure_sheaf(projective_line(make_ring(3, 2))));
  for (int m = 0; m <= E.max_degree(); ++m) {
    int e1 = 0;
    for (int r = 0; r <= 2; ++r) e1 += E.length(m, Variant::graded(r));
    EXPECT_GE(e1, E.length(m, Variant::full()));
    EXPECT_EQ(E.length(m, Variant::filtered(0)), E.length(m, Variant::full()));
  }
}

TEST(Cohomology, DolbeaultTorus) {
  const CoeffRing& R = make_ring(5, 1);
  Chart c(R, 1, {true});
  for (int ell = 0; ell <= 2; ++ell) {
    ConnModule H = ConnModule::trivial(c, ell + 1, 0);
    for (int k = 0; k < ell; ++k) H.A[0][k][k + 1] = LaurentPoly::monomial(R.one(), {-1});
    DolbeaultMorphism L = dolbeault_to_derham(FrobLift::standard(c), H);
    DolbeaultComparison cmp = compare_dolbeault(L, 6, R.p - ell);
    EXPECT_TRUE(cmp.ok()) << ell;
    EXPECT_GT(cmp.pieces, 0);
  }
  // replacing the target by the trivial connection breaks the comparison
  ConnModule H = ConnModule::trivial(c, 2, 0);
  H.A[0][0][1] = LaurentPoly::monomial(R.one(), {-1});
  DolbeaultMorphism L = dolbeault_to_derham(FrobLift::standard(c), H);
  L.target = ConnModule::trivial(c, 2, 1);
  EXPECT_FALSE(compare_dolbeault(L, 3, 3).ok());
}

TEST(Cohomology, GluedValidation) {
  const CoeffRing& R = make_ring(5, 2);
  GluedModule G = structure_sheaf(projective_line(R));
  EXPECT_TRUE(validate_glued(G).valid);
  G.G.begin()->second[0][0] = LaurentPoly::monomial(R.one(), {1});
  EXPECT_FALSE(validate_glued(G).valid);
}
