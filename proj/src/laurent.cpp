#include "pdcrys/laurent.hpp"

#include <algorithm>
#include <sstream>

namespace pdcrys {

LaurentPoly LaurentPoly::constant(const RingElem& c, int dim) {
  LaurentPoly f(*c.R, dim);
  f.add_term(Exp(dim, 0), c);
  return f;
}

LaurentPoly LaurentPoly::monomial(const RingElem& c, const Exp& e) {
  LaurentPoly f(*c.R, static_cast<int>(e.size()));
  f.add_term(e, c);
  return f;
}

LaurentPoly LaurentPoly::variable(const CoeffRing& r, int dim, int i) {
  Exp e(dim, 0);
  e[i] = 1;
  return monomial(r.one(), e);
}

bool LaurentPoly::is_constant() const {
  if (terms.empty()) return true;
  if (terms.size() > 1) return false;
  const Exp& e = terms.begin()->first;
  return std::all_of(e.begin(), e.end(), [](int x) { return x == 0; });
}

RingElem LaurentPoly::coeff(const Exp& e) const {
  auto it = terms.find(e);
  return it == terms.end() ? R->zero() : it->second;
}

void LaurentPoly::add_term(const Exp& e, const RingElem& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms.erase(it);
  }
}

int LaurentPoly::valuation() const {
  int v = R->n;
  for (auto& [e, c] : terms) v = std::min(v, c.val());
  return v;
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
  LaurentPoly out = *this;
  out += o;
  return out;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
  if (!R) {
    *this = o;
    return *this;
  }
  for (auto& [e, c] : o.terms) add_term(e, c);
  return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
  if (!R) {
    *this = -o;
    return *this;
  }
  for (auto& [e, c] : o.terms) add_term(e, -c);
  return *this;
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const {
  LaurentPoly out = *this;
  out -= o;
  return out;
}

LaurentPoly LaurentPoly::operator-() const {
  LaurentPoly out(*R, d);
  for (auto& [e, c] : terms) out.terms.emplace(e, -c);
  return out;
}

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
  LaurentPoly out(*R, d);
  Exp e(d);
  for (auto& [e1, c1] : terms)
    for (auto& [e2, c2] : o.terms) {
      for (int i = 0; i < d; ++i) e[i] = e1[i] + e2[i];
      out.add_term(e, c1 * c2);
    }
  return out;
}

LaurentPoly LaurentPoly::operator*(const RingElem& c) const {
  LaurentPoly out(*R, d);
  if (c.is_zero()) return out;
  for (auto& [e, x] : terms) out.add_term(e, x * c);
  return out;
}

LaurentPoly LaurentPoly::pow(int k) const {
  if (k < 0) return unit_inverse(*this).pow(-k);
  LaurentPoly acc = constant(R->one(), d);
  LaurentPoly b = *this;
  while (k) {
    if (k & 1) acc = acc * b;
    k >>= 1;
    if (k) b = b * b;
  }
  return acc;
}

LaurentPoly LaurentPoly::shifted(const Exp& s) const {
  LaurentPoly out(*R, d);
  for (auto& [e, c] : terms) {
    Exp f = e;
    for (int i = 0; i < d; ++i) f[i] += s[i];
    out.terms.emplace(std::move(f), c);
  }
  return out;
}

std::string LaurentPoly::str() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [e, c] : terms) {
    if (!first) os << " + ";
    first = false;
    os << c.str();
    for (int i = 0; i < d; ++i) {
      if (e[i] == 0) continue;
      os << "*t" << (i + 1);
      if (e[i] != 1) os << "^" << e[i];
    }
  }
  return os.str();
}

LaurentPoly sigma(const LaurentPoly& f) {
  if (f.R->s == 1) return f;
  LaurentPoly out(*f.R, f.d);
  for (auto& [e, c] : f.terms) out.add_term(e, sigma(c));
  return out;
}

LaurentPoly reduce(const LaurentPoly& f, const CoeffRing& target) {
  LaurentPoly out(target, f.d);
  for (auto& [e, c] : f.terms) out.add_term(e, reduce(c, target));
  return out;
}

LaurentPoly lift(const LaurentPoly& f, const CoeffRing& target) {
  LaurentPoly out(target, f.d);
  for (auto& [e, c] : f.terms) out.add_term(e, lift(c, target));
  return out;
}

LaurentPoly p_divide(const LaurentPoly& f) {
  const CoeffRing& T = f.R->at_level(f.R->n - 1);
  LaurentPoly out(T, f.d);
  for (auto& [e, c] : f.terms) out.add_term(e, p_divide(c));
  return out;
}

LaurentPoly times_p(const LaurentPoly& f, int k) { return f * f.R->p_power(k); }

LaurentPoly derive(const LaurentPoly& f, int i) {
  LaurentPoly out(*f.R, f.d);
  for (auto& [e, c] : f.terms) {
    if (e[i] == 0) continue;
    Exp g = e;
    g[i] -= 1;
    out.add_term(g, c.scale(e[i]));
  }
  return out;
}

LaurentPoly apply_diffop(const Exp& I, const LaurentPoly& f) {
  LaurentPoly g = f;
  for (size_t i = 0; i < I.size(); ++i)
    for (int k = 0; k < I[i]; ++k) g = derive(g, static_cast<int>(i));
  return g;
}

LaurentPoly divided_derivative(const Exp& K, const LaurentPoly& f) {
  LaurentPoly out(*f.R, f.d);
  for (auto& [e, c] : f.terms) {
    RingElem coef = c;
    Exp g = e;
    for (int i = 0; i < f.d; ++i) {
      if (K[i] == 0) continue;
      coef = coef * binom_elem(*f.R, e[i], K[i]);
      g[i] -= K[i];
    }
    out.add_term(g, coef);
  }
  return out;
}

bool is_laurent_unit(const LaurentPoly& f) {
  if (f.is_zero()) return false;
  int unit_terms = 0;
  for (auto& [e, c] : f.terms)
    if (c.val() == 0) ++unit_terms;
  return unit_terms == 1;
}

LaurentPoly unit_inverse(const LaurentPoly& f) {
  if (!is_laurent_unit(f)) throw NotDivisible("not a unit: " + f.str());
  Exp m;
  RingElem c;
  for (auto& [e, x] : f.terms)
    if (x.val() == 0) {
      m = e;
      c = x;
    }
  Exp neg = m;
  for (auto& x : neg) x = -x;
  RingElem ci = c.inv();
  // g = f / (c t^m) = 1 + p h, so f^{-1} = c^{-1} t^{-m} sum_k (1 - g)^k
  LaurentPoly g = f.shifted(neg) * ci;
  LaurentPoly one = LaurentPoly::constant(f.R->one(), f.d);
  LaurentPoly u = one - g;
  LaurentPoly acc = one, term = one;
  for (int k = 1; k < f.R->n; ++k) {
    term = term * u;
    if (term.is_zero()) break;
    acc += term;
  }
  return acc.shifted(neg) * ci;
}

PolyMatrix poly_zero_matrix(const CoeffRing& R, int d, int rows, int cols) {
  return PolyMatrix(rows, std::vector<LaurentPoly>(cols, LaurentPoly(R, d)));
}

PolyMatrix poly_identity(const CoeffRing& R, int d, int r) {
  PolyMatrix M = poly_zero_matrix(R, d, r, r);
  for (int i = 0; i < r; ++i) M[i][i] = LaurentPoly::constant(R.one(), d);
  return M;
}

PolyMatrix poly_from_ring(const RingMatrix& M, int d) {
  PolyMatrix out = poly_zero_matrix(*M.R, d, M.rows, M.cols);
  for (int i = 0; i < M.rows; ++i)
    for (int j = 0; j < M.cols; ++j) out[i][j] = LaurentPoly::constant(M.at(i, j), d);
  return out;
}

PolyMatrix operator*(const PolyMatrix& A, const PolyMatrix& B) {
  const size_t m = A.size(), k = B.size(), c = k ? B[0].size() : 0;
  if (m && A[0].size() != k) throw DimensionMismatch("poly matrix product");
  PolyMatrix out(m, std::vector<LaurentPoly>(c));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < c; ++j) {
      LaurentPoly acc(*A[i][0].R, A[i][0].d);
      for (size_t l = 0; l < k; ++l)
        if (!A[i][l].is_zero() && !B[l][j].is_zero()) acc += A[i][l] * B[l][j];
      out[i][j] = std::move(acc);
    }
  return out;
}

PolyMatrix operator+(const PolyMatrix& A, const PolyMatrix& B) {
  PolyMatrix out = A;
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A[i].size(); ++j) out[i][j] += B[i][j];
  return out;
}

PolyMatrix operator-(const PolyMatrix& A, const PolyMatrix& B) {
  PolyMatrix out = A;
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A[i].size(); ++j) out[i][j] -= B[i][j];
  return out;
}

PolyMatrix poly_scale(const PolyMatrix& A, const LaurentPoly& f) {
  PolyMatrix out = A;
  for (auto& row : out)
    for (auto& x : row) x = x * f;
  return out;
}

PolyMatrix poly_map(const PolyMatrix& A, LaurentPoly (*f)(const LaurentPoly&)) {
  PolyMatrix out = A;
  for (auto& row : out)
    for (auto& x : row) x = f(x);
  return out;
}

bool poly_is_zero(const PolyMatrix& A) {
  for (auto& row : A)
    for (auto& x : row)
      if (!x.is_zero()) return false;
  return true;
}

std::vector<LaurentPoly> operator*(const PolyMatrix& A, const std::vector<LaurentPoly>& v) {
  std::vector<LaurentPoly> out;
  for (auto& row : A) {
    LaurentPoly acc(*v.at(0).R, v.at(0).d);
    for (size_t j = 0; j < row.size(); ++j)
      if (!row[j].is_zero() && !v[j].is_zero()) acc += row[j] * v[j];
    out.push_back(acc);
  }
  return out;
}

LaurentPoly poly_det(const PolyMatrix& A) {
  const size_t n = A.size();
  if (n == 0) throw DimensionMismatch("determinant of empty matrix");
  if (n == 1) return A[0][0];
  LaurentPoly acc(*A[0][0].R, A[0][0].d);
  for (size_t j = 0; j < n; ++j) {
    if (A[0][j].is_zero()) continue;
    PolyMatrix minor;
    for (size_t i = 1; i < n; ++i) {
      std::vector<LaurentPoly> row;
      for (size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(A[i][k]);
      minor.push_back(row);
    }
    LaurentPoly t = A[0][j] * poly_det(minor);
    if (j % 2) acc -= t;
    else acc += t;
  }
  return acc;
}

std::string poly_matrix_str(const PolyMatrix& A) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < A.size(); ++i) {
    os << (i ? "; " : "");
    for (size_t j = 0; j < A[i].size(); ++j) os << (j ? ", " : "") << A[i][j].str();
  }
  os << "]";
  return os.str();
}

}  // namespace pdcrys
