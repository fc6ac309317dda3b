#ifndef PDCRYS_LAURENT_HPP
#define PDCRYS_LAURENT_HPP

#include <map>
#include <string>
#include <vector>

#include "pdcrys/ring.hpp"

namespace pdcrys {

using Exp = std::vector<int>;

// Sparse Laurent polynomial in d variables; zero coefficients are never stored.
class LaurentPoly {
 public:
  const CoeffRing* R = nullptr;
  int d = 0;
  std::map<Exp, RingElem> terms;

  LaurentPoly() = default;
  LaurentPoly(const CoeffRing& r, int dim) : R(&r), d(dim) {}

  static LaurentPoly constant(const RingElem& c, int dim);
  static LaurentPoly monomial(const RingElem& c, const Exp& e);
  static LaurentPoly variable(const CoeffRing& r, int dim, int i);
  static LaurentPoly from_int(const CoeffRing& r, int dim, int64_t v) {
    return constant(r.from_int(v), dim);
  }

  bool is_zero() const { return terms.empty(); }
  bool is_constant() const;
  RingElem coeff(const Exp& e) const;
  RingElem constant_term() const { return coeff(Exp(d, 0)); }
  void add_term(const Exp& e, const RingElem& c);
  int valuation() const;  // min coefficient valuation, n for zero

  LaurentPoly operator+(const LaurentPoly& o) const;
  LaurentPoly operator-(const LaurentPoly& o) const;
  LaurentPoly operator-() const;
  LaurentPoly operator*(const LaurentPoly& o) const;
  LaurentPoly& operator+=(const LaurentPoly& o);
  LaurentPoly& operator-=(const LaurentPoly& o);
  LaurentPoly operator*(const RingElem& c) const;
  LaurentPoly pow(int e) const;
  LaurentPoly shifted(const Exp& e) const;  // multiply by t^e

  bool operator==(const LaurentPoly& o) const { return terms == o.terms; }
  bool operator!=(const LaurentPoly& o) const { return !(*this == o); }

  std::string str() const;
};

LaurentPoly sigma(const LaurentPoly& f);
LaurentPoly reduce(const LaurentPoly& f, const CoeffRing& target);
LaurentPoly lift(const LaurentPoly& f, const CoeffRing& target);
LaurentPoly p_divide(const LaurentPoly& f);
LaurentPoly times_p(const LaurentPoly& f, int k = 1);

LaurentPoly derive(const LaurentPoly& f, int i);
LaurentPoly apply_diffop(const Exp& I, const LaurentPoly& f);
// divided derivative d^[K] f = d^K f / K!, computed with exact binomials
LaurentPoly divided_derivative(const Exp& K, const LaurentPoly& f);

// inverse of a unit c * t^m * (1 + p h); throws NotDivisible otherwise
LaurentPoly unit_inverse(const LaurentPoly& f);
bool is_laurent_unit(const LaurentPoly& f);

using PolyMatrix = std::vector<std::vector<LaurentPoly>>;

PolyMatrix poly_zero_matrix(const CoeffRing& R, int d, int rows, int cols);
PolyMatrix poly_identity(const CoeffRing& R, int d, int r);
PolyMatrix poly_from_ring(const RingMatrix& M, int d);
PolyMatrix operator*(const PolyMatrix& A, const PolyMatrix& B);
PolyMatrix operator+(const PolyMatrix& A, const PolyMatrix& B);
PolyMatrix operator-(const PolyMatrix& A, const PolyMatrix& B);
PolyMatrix poly_scale(const PolyMatrix& A, const LaurentPoly& f);
PolyMatrix poly_map(const PolyMatrix& A, LaurentPoly (*f)(const LaurentPoly&));
bool poly_is_zero(const PolyMatrix& A);
std::vector<LaurentPoly> operator*(const PolyMatrix& A, const std::vector<LaurentPoly>& v);
LaurentPoly poly_det(const PolyMatrix& A);
std::string poly_matrix_str(const PolyMatrix& A);

}  // namespace pdcrys

#endif
