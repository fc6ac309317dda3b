#include <gtest/gtest.h>

#include <set>

#include "pdcrys/ring.hpp"
#include "test_util.hpp"

using namespace pdcrys;
using pdcrys::testing::all_elements;
using pdcrys::testing::kSeed;
using pdcrys::testing::random_elem;
using pdcrys::testing::random_matrix;
using pdcrys::testing::random_vec;

TEST(Ring, MakeRingBasics) {
  const CoeffRing& R = make_ring(5, 2, 1);
  EXPECT_EQ(R.modulus, 25);
  EXPECT_EQ(R.element_count(), 25);
  EXPECT_EQ(all_elements(R).size(), 25u);
  const CoeffRing& F2 = make_ring(2, 1, 1);
  EXPECT_EQ(F2.element_count(), 2);
  EXPECT_EQ(&make_ring(5, 2, 1), &R);
  EXPECT_THROW(make_ring(4, 1, 1), RingError);
  EXPECT_THROW(make_ring(5, 0, 1), RingError);
  EXPECT_THROW(make_ring(5, 1, 0), RingError);
}

TEST(Ring, PowersOfPVanishExactlyAtN) {
  for (int p : {2, 3, 5})
    for (int n = 1; n <= 3; ++n)
      for (int s = 1; s <= 3; ++s) {
        const CoeffRing& R = make_ring(p, n, s);
        EXPECT_FALSE(R.from_int(R.pow_p[n - 1]).is_zero());
        EXPECT_TRUE(R.from_int(R.pow_p[n]).is_zero());
      }
}

TEST(Ring, ValuationOfZeroIsN) {
  const CoeffRing& R = make_ring(3, 3, 2);
  EXPECT_EQ(R.zero().val(), 3);
  EXPECT_EQ(R.from_int(9).val(), 2);
  EXPECT_EQ(R.generator().val(), 0);
}

TEST(Ring, InverseOfEveryUnitInSmallGaloisRings) {
  for (auto [p, n, s] : {std::tuple{2, 2, 2}, {3, 2, 2}, {2, 3, 3}, {5, 1, 2}}) {
    const CoeffRing& R = make_ring(p, n, s);
    for (const RingElem& x : all_elements(R)) {
      if (!x.is_unit()) {
        EXPECT_THROW(x.inv(), NotDivisible);
        continue;
      }
      EXPECT_TRUE((x * x.inv()).is_one()) << x.str();
    }
  }
}

TEST(Ring, SigmaIsIdentityForPrimeField) {
  std::mt19937_64 rng(kSeed);
  const CoeffRing& R = make_ring(5, 3, 1);
  for (int i = 0; i < 50; ++i) {
    RingElem x = random_elem(rng, R);
    EXPECT_EQ(sigma(x), x);
  }
}

TEST(Ring, SigmaOnGR42IsInvolution) {
  const CoeffRing& R = make_ring(2, 2, 2);
  auto elems = all_elements(R);
  ASSERT_EQ(elems.size(), 16u);
  for (const RingElem& x : elems) EXPECT_EQ(sigma(sigma(x)), x);
}

// the automorphism is pinned down by exhaustive search: the unique root of the
// modulus polynomial congruent to w^2 mod 2
TEST(Ring, SigmaOfGeneratorMatchesExhaustiveSearch) {
  const CoeffRing& R = make_ring(2, 2, 2);
  const RingElem w = R.generator();
  std::vector<RingElem> roots;
  for (const RingElem& x : all_elements(R)) {
    RingElem f = x * x + x + R.one();
    // modulus polynomial is w^2 + w + 1
    if (f.is_zero() && (x - w * w).val() >= 1) roots.push_back(x);
  }
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(sigma(w), roots[0]);
}

TEST(Ring, SigmaPowerSIsIdentityByEnumeration) {
  for (auto [p, n, s] : {std::tuple{2, 2, 2}, {3, 2, 2}, {2, 2, 3}, {2, 1, 4}}) {
    const CoeffRing& R = make_ring(p, n, s);
    for (const RingElem& x : all_elements(R)) {
      RingElem y = x;
      for (int k = 0; k < s; ++k) y = sigma(y);
      EXPECT_EQ(y, x);
    }
  }
}

TEST(Ring, SigmaReducesToResidueFrobenius) {
  std::mt19937_64 rng(kSeed + 1);
  for (auto [p, n, s] : {std::tuple{2, 3, 2}, {3, 2, 3}, {5, 2, 2}, {7, 2, 4}}) {
    const CoeffRing& R = make_ring(p, n, s);
    for (int i = 0; i < 30; ++i) {
      RingElem x = random_elem(rng, R);
      EXPECT_GE((sigma(x) - x.pow(static_cast<uint64_t>(p))).val(), 1);
    }
  }
}

TEST(Ring, SigmaIsRingHomomorphism) {
  std::mt19937_64 rng(kSeed + 2);
  for (auto [p, n, s] : {std::tuple{2, 3, 2}, {3, 2, 3}, {5, 3, 2}, {2, 2, 4}}) {
    const CoeffRing& R = make_ring(p, n, s);
    for (int i = 0; i < 100; ++i) {
      RingElem x = random_elem(rng, R), y = random_elem(rng, R);
      EXPECT_EQ(sigma(x + y), sigma(x) + sigma(y));
      EXPECT_EQ(sigma(x * y), sigma(x) * sigma(y));
    }
  }
}

TEST(Ring, PDivideExamples) {
  const CoeffRing& R25 = make_ring(5, 2);
  RingElem y = p_divide(R25.from_int(10));
  EXPECT_EQ(y.R->n, 1);
  EXPECT_EQ(y.to_int(), 2);
  EXPECT_THROW(p_divide(R25.from_int(7)), NotDivisible);
  const CoeffRing& R8 = make_ring(2, 3);
  RingElem z = p_divide(R8.from_int(4));
  EXPECT_EQ(z.R->modulus, 4);
  EXPECT_EQ(z.to_int(), 2);
}

TEST(Ring, PDivideInvertsMultiplicationByPExhaustively) {
  for (int p : {2, 3})
    for (int n = 1; n <= 2; ++n)
      for (int s = 1; s <= 2; ++s) {
        const CoeffRing& Rn = make_ring(p, n, s);
        const CoeffRing& Rn1 = make_ring(p, n + 1, s);
        for (const RingElem& x : all_elements(Rn1)) {
          RingElem px = x * Rn1.from_int(p);
          EXPECT_EQ(p_divide(px), reduce(x, Rn));
        }
      }
}

TEST(Ring, ExactFractionsAgainstIntegerArithmetic) {
  const CoeffRing& R = make_ring(3, 4);
  // p^a / k! for small values computed with plain integers
  for (int k = 0; k <= 9; ++k) {
    int64_t fact = 1;
    for (int j = 2; j <= k; ++j) fact *= j;
    for (int a = vp_factorial(3, k); a <= 6; ++a) {
      int64_t pa = 1;
      for (int j = 0; j < a; ++j) pa *= 3;
      RingElem q = exact_fraction(R, a, k);
      EXPECT_EQ((q * R.from_int(fact)).to_int(), R.from_int(pa).to_int()) << a << " " << k;
    }
  }
  EXPECT_THROW(exact_fraction(R, 0, 3), NotDivisible);
}

TEST(Ring, BinomialsAgainstPascal) {
  const CoeffRing& R = make_ring(5, 3);
  std::vector<std::vector<int64_t>> pascal(30, std::vector<int64_t>(30, 0));
  for (int i = 0; i < 30; ++i) {
    pascal[i][0] = 1;
    for (int j = 1; j <= i; ++j) pascal[i][j] = (pascal[i - 1][j - 1] + pascal[i - 1][j]) % 125;
  }
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j <= i; ++j) EXPECT_EQ(binom_elem(R, i, j).to_int(), pascal[i][j]);
  // binom(-1, k) = (-1)^k
  for (int k = 0; k < 6; ++k) EXPECT_EQ(binom_elem(R, -1, k), R.from_int(k % 2 ? -1 : 1));
  EXPECT_EQ(binom_elem(R, -3, 2), R.from_int(6));
}

TEST(Howell, KernelOfTwoOverZ4) {
  const CoeffRing& R = make_ring(2, 2);
  RingMatrix M = RingMatrix::from_ints(R, {{2}});
  RingMatrix K = kernel(M);
  ASSERT_EQ(K.rows, 1);
  std::set<int64_t> span;
  for (int j = 0; j < K.cols; ++j)
    for (int c = 0; c < 4; ++c) span.insert((K.at(0, j) * R.from_int(c)).to_int());
  span.insert(0);
  EXPECT_EQ(span, (std::set<int64_t>{0, 2}));
}

TEST(Howell, CokernelOfSmallMatrixOverZ4) {
  const CoeffRing& R = make_ring(2, 2);
  RingMatrix M = RingMatrix::from_ints(R, {{1, 2}, {0, 2}});
  EXPECT_EQ(cokernel_invariants(M), std::vector<int>{1});
  // brute force: the image has 8 of the 16 target vectors
  std::set<std::pair<int64_t, int64_t>> image;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) image.insert({(a + 2 * b) % 4, (2 * b) % 4});
  EXPECT_EQ(image.size(), 8u);
}

TEST(Howell, SolveMultipleOfP) {
  const CoeffRing& R = make_ring(7, 2);
  RingMatrix M = RingMatrix::from_ints(R, {{7}});
  auto x = solve(M, {R.from_int(7)});
  ASSERT_TRUE(x.has_value());
  EXPECT_EQ((M * *x)[0], R.from_int(7));
  EXPECT_FALSE(solve(M, {R.from_int(1)}).has_value());
  EXPECT_THROW(solve(M, {R.one(), R.one()}), DimensionMismatch);
}

TEST(Howell, CertificateAndCanonicalShape) {
  std::mt19937_64 rng(kSeed + 3);
  for (int trial = 0; trial < 60; ++trial) {
    const CoeffRing& R = make_ring(trial % 2 ? 2 : 3, 1 + trial % 3, 1 + trial % 2);
    int m = 1 + trial % 5, k = 1 + (trial / 5) % 5;
    RingMatrix A = random_matrix(rng, R, m, k);
    for (auto& x : A.a)
      if (rng() % 3 == 0) x = x * R.from_int(R.p);
    HowellForm hf = howell(A);
    EXPECT_EQ(hf.U * A, hf.H);
    EXPECT_TRUE((hf.left_kernel * A).is_zero());
    for (int i = 0; i < hf.H.rows; ++i) {
      int c = hf.pivot_cols[i];
      EXPECT_EQ(hf.H.at(i, c), R.p_power(hf.pivot_vals[i]));
      for (int j = 0; j < c; ++j) EXPECT_TRUE(hf.H.at(i, j).is_zero());
      for (int h = 0; h < i; ++h) EXPECT_EQ(hf.H.at(h, c), hf.H.at(h, c).residue(hf.pivot_vals[i]));
    }
    // same row span gives the same Howell form
    RingMatrix G = random_matrix(rng, R, m, m);
    for (int i = 0; i < m; ++i) G.at(i, i) = R.one();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < i; ++j) G.at(i, j) = R.zero();
    EXPECT_EQ(howell(G * A).H, hf.H);
  }
}

TEST(Howell, RandomSolveAndKernelProperty) {
  std::mt19937_64 rng(kSeed + 4);
  const int primes[] = {2, 3, 5};
  for (int trial = 0; trial < 200; ++trial) {
    const CoeffRing& R = make_ring(primes[trial % 3], 1 + (trial / 3) % 3);
    int m = 1 + static_cast<int>(rng() % 5), k = 1 + static_cast<int>(rng() % 5);
    RingMatrix M = random_matrix(rng, R, m, k);
    for (auto& x : M.a)
      if (rng() % 4 == 0) x = x * R.from_int(R.p);
    RingMatrix K = kernel(M);
    EXPECT_TRUE((M * K).is_zero());
    auto x = random_vec(rng, R, k);
    auto b = M * x;
    auto sol = solve(M, b);
    ASSERT_TRUE(sol.has_value());
    EXPECT_EQ(M * *sol, b);
  }
}

TEST(Howell, SmithTransformsAreInverse) {
  std::mt19937_64 rng(kSeed + 5);
  for (int trial = 0; trial < 40; ++trial) {
    const CoeffRing& R = make_ring(trial % 2 ? 2 : 5, 2, 1 + trial % 2);
    int m = 1 + trial % 4, k = 1 + (trial / 4) % 4;
    RingMatrix A = random_matrix(rng, R, m, k);
    for (auto& x : A.a)
      if (rng() % 2) x = x * R.from_int(R.p);
    SmithForm sf = smith(A);
    EXPECT_EQ(sf.P * sf.Pinv, RingMatrix::identity(R, m));
    RingMatrix D = sf.P * A * sf.Q;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j) EXPECT_TRUE(D.at(i, j).is_zero());
    for (size_t t = 0; t < sf.diag.size(); ++t) {
      EXPECT_EQ(D.at(t, t), R.p_power(sf.diag[t]));
      if (t > 0) EXPECT_LE(sf.diag[t - 1], sf.diag[t]);
    }
  }
}
