#ifndef PDCRYS_RING_HPP
#define PDCRYS_RING_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdcrys {

constexpr int kMaxResidueDegree = 4;

struct NotDivisible : std::domain_error {
  using std::domain_error::domain_error;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

using Coords = std::array<int64_t, kMaxResidueDegree>;

class RingElem;

/* Galois ring GR(p^n, s) = (Z/p^n)[w]/(f), f a monic lift of an irreducible
   polynomial over F_p.  Instances are interned: one object per (p, n, s),
   never destroyed, so raw pointers to them stay valid. */
class CoeffRing {
 public:
  int p = 0;
  int n = 0;
  int s = 1;
  int64_t modulus = 0;
  std::vector<int64_t> pow_p;      // p^0 .. p^n
  std::vector<int64_t> fpoly;      // f = x^s + sum fpoly[i] x^i
  std::vector<Coords> frob_basis;  // sigma(w^i), i < s
  int64_t unit_order = 0;          // exponent of the unit group

  const CoeffRing& at_level(int m) const;
  int64_t element_count() const;

  RingElem zero() const;
  RingElem one() const;
  RingElem from_int(int64_t v) const;
  RingElem from_coords(const Coords& c) const;
  RingElem generator() const;  // w
  RingElem p_power(int k) const;

  bool operator==(const CoeffRing& o) const {
    return p == o.p && n == o.n && s == o.s;
  }
};

const CoeffRing& make_ring(int p, int n, int s = 1);
bool is_prime(int64_t v);

class RingElem {
 public:
  const CoeffRing* R = nullptr;
  Coords c{};

  RingElem() = default;
  RingElem(const CoeffRing* r, const Coords& cc) : R(r), c(cc) {}

  const CoeffRing& ring() const { return *R; }
  bool is_zero() const {
    for (int i = 0; i < kMaxResidueDegree; ++i)
      if (c[i] != 0) return false;
    return true;
  }
  bool is_one() const;
  int val() const;
  bool is_unit() const { return val() == 0; }

  RingElem operator+(const RingElem& o) const;
  RingElem operator-(const RingElem& o) const;
  RingElem operator-() const;
  RingElem operator*(const RingElem& o) const;
  RingElem& operator+=(const RingElem& o) { return *this = *this + o; }
  RingElem& operator-=(const RingElem& o) { return *this = *this - o; }
  RingElem& operator*=(const RingElem& o) { return *this = *this * o; }
  RingElem scale(int64_t k) const;
  RingElem pow(uint64_t e) const;
  RingElem inv() const;

  // Coordinates divided by p^k; requires val() >= k.  The result is only
  // meaningful modulo p^{n-k}.
  RingElem shift_down(int k) const;
  // u with *this == p^val * u, u a unit; requires nonzero.
  RingElem unit_part() const;
  // canonical representative modulo p^k
  RingElem residue(int k) const;

  bool operator==(const RingElem& o) const { return c == o.c; }
  bool operator!=(const RingElem& o) const { return !(*this == o); }
  bool operator<(const RingElem& o) const { return c < o.c; }

  int64_t to_int() const { return c[0]; }
  std::string str() const;
};

RingElem sigma(const RingElem& x);
RingElem sigma_pow(const RingElem& x, int k);
RingElem reduce(const RingElem& x, const CoeffRing& target);
RingElem lift(const RingElem& x, const CoeffRing& target);
RingElem p_divide(const RingElem& x);

// p-adic valuation and unit part of k!; unit part returned mod p^n of R.
std::pair<int, RingElem> factorial_split(const CoeffRing& R, int64_t k);
int vp_factorial(int p, int64_t k);
int vp_int(int p, int64_t k);
// p^a / (prod I!) computed exactly; throws NotDivisible when not integral.
RingElem exact_fraction(const CoeffRing& R, int a, const std::vector<int>& I);
RingElem exact_fraction(const CoeffRing& R, int a, int64_t k);
// binomial coefficient, any integer top, k >= 0
RingElem binom_elem(const CoeffRing& R, int64_t top, int64_t k);
// (sum I)! / prod(I_j!) style: prod binom(I_j + J_j, I_j)
RingElem multi_binom(const CoeffRing& R, const std::vector<int>& I, const std::vector<int>& J);

class RingMatrix {
 public:
  const CoeffRing* R = nullptr;
  int rows = 0;
  int cols = 0;
  std::vector<RingElem> a;

  RingMatrix() = default;
  RingMatrix(const CoeffRing& r, int m, int k);
  static RingMatrix identity(const CoeffRing& r, int m);
  static RingMatrix from_ints(const CoeffRing& r, const std::vector<std::vector<int64_t>>& v);

  RingElem& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const RingElem& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  RingMatrix operator*(const RingMatrix& o) const;
  RingMatrix operator+(const RingMatrix& o) const;
  RingMatrix operator-(const RingMatrix& o) const;
  std::vector<RingElem> operator*(const std::vector<RingElem>& v) const;
  RingMatrix transpose() const;
  RingMatrix scaled(const RingElem& k) const;
  RingMatrix col(int j) const;
  bool is_zero() const;
  bool operator==(const RingMatrix& o) const;
  bool operator!=(const RingMatrix& o) const { return !(*this == o); }
  std::string str() const;
};

RingMatrix sigma(const RingMatrix& M);
RingMatrix hcat(const RingMatrix& A, const RingMatrix& B);

struct HowellForm {
  RingMatrix H;  // nonzero rows of the Howell form of A
  RingMatrix U;  // U * A == H
  RingMatrix left_kernel;  // rows y with y * A == 0, generating the left kernel
  std::vector<int> pivot_cols;
  std::vector<int> pivot_vals;
  std::vector<int> elementary_divisors;  // p-exponents of the row module
};

HowellForm howell(const RingMatrix& A);
std::optional<std::vector<RingElem>> solve(const RingMatrix& M, const std::vector<RingElem>& b);
// columns generate {x : M x = 0}
RingMatrix kernel(const RingMatrix& M);

struct SmithForm {
  RingMatrix P, Pinv, Q;  // P * A * Q = diagonal
  std::vector<int> diag;  // p-exponent of each diagonal entry, n for zero
};

SmithForm smith(const RingMatrix& A);
// exponents e of summands R/p^e of coker(A : R^cols -> R^rows); free summands have e = n
std::vector<int> cokernel_invariants(const RingMatrix& A);
bool is_invertible(const RingMatrix& A);

}  // namespace pdcrys

#endif
