#include "pdcrys/ring.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

namespace pdcrys {

namespace {

using i128 = __int128;

int64_t mod_norm(i128 v, int64_t m) {
  i128 r = v % m;
  if (r < 0) r += m;
  return static_cast<int64_t>(r);
}

// conway-style table, coefficients of x^0..x^{s-1}
const std::map<std::pair<int, int>, std::vector<int64_t>>& conway_table() {
  static const std::map<std::pair<int, int>, std::vector<int64_t>> t = {
      {{2, 2}, {1, 1}},       {{2, 3}, {1, 1, 0}},    {{2, 4}, {1, 1, 0, 0}},
      {{3, 2}, {2, 2}},       {{3, 3}, {1, 2, 0}},    {{3, 4}, {2, 0, 0, 2}},
      {{5, 2}, {2, 4}},       {{5, 3}, {3, 3, 0}},    {{5, 4}, {2, 4, 4, 0}},
      {{7, 2}, {3, 6}},       {{7, 3}, {4, 0, 6}},    {{7, 4}, {3, 4, 5, 0}},
  };
  return t;
}

// polynomials over F_p as coefficient vectors, low degree first
using FpPoly = std::vector<int64_t>;

void fp_trim(FpPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

FpPoly fp_mod(FpPoly a, const FpPoly& b, int64_t p) {
  fp_trim(a);
  FpPoly bb = b;
  fp_trim(bb);
  int64_t lead_inv = 1;
  {
    int64_t l = bb.back() % p;
    for (int64_t e = p - 2, base = l; e > 0; e >>= 1, base = base * base % p)
      if (e & 1) lead_inv = lead_inv * base % p;
  }
  while (a.size() >= bb.size() && !a.empty()) {
    int64_t f = a.back() * lead_inv % p;
    size_t shift = a.size() - bb.size();
    for (size_t i = 0; i < bb.size(); ++i) a[shift + i] = ((a[shift + i] - f * bb[i]) % p + p) % p;
    fp_trim(a);
  }
  return a;
}

bool fp_irreducible(const FpPoly& f, int64_t p) {
  int deg = static_cast<int>(f.size()) - 1;
  // trial division by monic polynomials of degree 1 .. deg/2
  for (int k = 1; k <= deg / 2; ++k) {
    int64_t count = 1;
    for (int i = 0; i < k; ++i) count *= p;
    for (int64_t code = 0; code < count; ++code) {
      FpPoly g(k + 1, 0);
      int64_t c = code;
      for (int i = 0; i < k; ++i) {
        g[i] = c % p;
        c /= p;
      }
      g[k] = 1;
      if (fp_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

std::vector<int64_t> choose_modulus_poly(int p, int s) {
  auto it = conway_table().find({p, s});
  if (it != conway_table().end()) {
    FpPoly f(it->second);
    f.push_back(1);
    if (fp_irreducible(f, p)) return it->second;
  }
  int64_t count = 1;
  for (int i = 0; i < s; ++i) count *= p;
  for (int64_t code = 0; code < count; ++code) {
    FpPoly f(s + 1, 0);
    int64_t c = code;
    for (int i = 0; i < s; ++i) {
      f[i] = c % p;
      c /= p;
    }
    f[s] = 1;
    if (fp_irreducible(f, p)) return FpPoly(f.begin(), f.begin() + s);
  }
  throw RingError("no irreducible polynomial found");
}

struct Registry {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, std::unique_ptr<CoeffRing>> rings;
};

Registry& registry() {
  static Registry* r = new Registry();
  return *r;
}

RingElem eval_modpoly(const CoeffRing& R, const RingElem& x) {
  // f(x) = x^s + sum fpoly[i] x^i, Horner
  RingElem acc = R.one();
  for (int i = R.s - 1; i >= 0; --i) acc = acc * x + R.from_int(R.fpoly[i]);
  return acc;
}

RingElem eval_modpoly_deriv(const CoeffRing& R, const RingElem& x) {
  RingElem acc = R.from_int(R.s);
  for (int i = R.s - 1; i >= 1; --i) acc = acc * x + R.from_int(R.fpoly[i] * i);
  return acc;
}

}  // namespace

bool is_prime(int64_t v) {
  if (v < 2) return false;
  for (int64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

const CoeffRing& make_ring(int p, int n, int s) {
  if (!is_prime(p)) throw RingError("p must be prime, got " + std::to_string(p));
  if (n < 1) throw RingError("truncation level must be >= 1");
  if (s < 1 || s > kMaxResidueDegree) throw RingError("residue degree must be in 1..4");
  Registry& reg = registry();
  {
    std::lock_guard<std::mutex> lock(reg.mu);
    auto it = reg.rings.find({p, n, s});
    if (it != reg.rings.end()) return *it->second;
  }
  auto R = std::make_unique<CoeffRing>();
  R->p = p;
  R->n = n;
  R->s = s;
  R->pow_p.push_back(1);
  for (int i = 1; i <= n; ++i) {
    if (R->pow_p.back() > (int64_t(1) << 61) / p) throw RingError("modulus p^n too large");
    R->pow_p.push_back(R->pow_p.back() * p);
  }
  R->modulus = R->pow_p[n];
  if (s > 1) {
    int64_t q = 1;
    for (int i = 0; i < s; ++i) {
      if (q > (int64_t(1) << 40) / p) throw RingError("p^s too large");
      q *= p;
    }
    R->unit_order = q - 1;
    R->fpoly = choose_modulus_poly(p, s);
    for (auto& c : R->fpoly) c %= R->modulus;
  } else {
    R->unit_order = p - 1;
  }
  // sigma on the basis: root of f near w^p, refined by Newton iteration
  R->frob_basis.assign(s, Coords{});
  R->frob_basis[0][0] = 1 % R->modulus;
  if (s > 1) {
    const CoeffRing& Rc = *R;
    RingElem x = Rc.generator().pow(static_cast<uint64_t>(p));
    for (int it = 0; it < n + 1; ++it) {
      RingElem fx = eval_modpoly(Rc, x);
      if (fx.is_zero()) break;
      x = x - fx * eval_modpoly_deriv(Rc, x).inv();
    }
    RingElem acc = Rc.one();
    for (int i = 0; i < s; ++i) {
      R->frob_basis[i] = acc.c;
      acc = acc * x;
    }
  }
  std::lock_guard<std::mutex> lock(reg.mu);
  auto [it, inserted] = reg.rings.emplace(std::make_tuple(p, n, s), std::move(R));
  return *it->second;
}

const CoeffRing& CoeffRing::at_level(int m) const { return make_ring(p, m, s); }

int64_t CoeffRing::element_count() const {
  int64_t c = 1;
  for (int i = 0; i < s; ++i) c *= modulus;
  return c;
}

RingElem CoeffRing::zero() const { return RingElem(this, Coords{}); }
RingElem CoeffRing::one() const {
  Coords c{};
  c[0] = 1 % modulus;
  return RingElem(this, c);
}
RingElem CoeffRing::from_int(int64_t v) const {
  Coords c{};
  c[0] = mod_norm(v, modulus);
  return RingElem(this, c);
}
RingElem CoeffRing::from_coords(const Coords& cc) const {
  Coords c{};
  for (int i = 0; i < s; ++i) c[i] = mod_norm(cc[i], modulus);
  return RingElem(this, c);
}
RingElem CoeffRing::generator() const {
  Coords c{};
  if (s == 1) throw RingError("generator requires s > 1");
  c[1] = 1;
  return RingElem(this, c);
}
RingElem CoeffRing::p_power(int k) const {
  if (k >= n) return zero();
  return from_int(pow_p[k]);
}

bool RingElem::is_one() const {
  if (c[0] != 1 % R->modulus) return false;
  for (int i = 1; i < kMaxResidueDegree; ++i)
    if (c[i] != 0) return false;
  return true;
}

int RingElem::val() const {
  int best = R->n;
  for (int i = 0; i < R->s; ++i) {
    if (c[i] == 0) continue;
    int v = 0;
    int64_t x = c[i];
    while (x % R->p == 0) {
      x /= R->p;
      ++v;
    }
    best = std::min(best, v);
  }
  return best;
}

RingElem RingElem::operator+(const RingElem& o) const {
  const CoeffRing* r = R ? R : o.R;
  RingElem out(r, Coords{});
  for (int i = 0; i < r->s; ++i) {
    int64_t v = c[i] + o.c[i];
    if (v >= r->modulus) v -= r->modulus;
    out.c[i] = v;
  }
  return out;
}

RingElem RingElem::operator-(const RingElem& o) const {
  const CoeffRing* r = R ? R : o.R;
  RingElem out(r, Coords{});
  for (int i = 0; i < r->s; ++i) {
    int64_t v = c[i] - o.c[i];
    if (v < 0) v += r->modulus;
    out.c[i] = v;
  }
  return out;
}

RingElem RingElem::operator-() const {
  RingElem out(R, Coords{});
  for (int i = 0; i < R->s; ++i) out.c[i] = c[i] == 0 ? 0 : R->modulus - c[i];
  return out;
}

RingElem RingElem::operator*(const RingElem& o) const {
  const CoeffRing* r = R ? R : o.R;
  const int64_t m = r->modulus;
  RingElem out(r, Coords{});
  if (r->s == 1) {
    out.c[0] = static_cast<int64_t>(static_cast<i128>(c[0]) * o.c[0] % m);
    return out;
  }
  const int s = r->s;
  std::array<i128, 2 * kMaxResidueDegree> prod{};
  for (int i = 0; i < s; ++i) {
    if (c[i] == 0) continue;
    for (int j = 0; j < s; ++j) prod[i + j] = (prod[i + j] + static_cast<i128>(c[i]) * o.c[j]) % m;
  }
  for (int k = 2 * s - 2; k >= s; --k) {
    i128 top = prod[k];
    if (top == 0) continue;
    prod[k] = 0;
    for (int i = 0; i < s; ++i) prod[k - s + i] = (prod[k - s + i] - top * r->fpoly[i]) % m;
  }
  for (int i = 0; i < s; ++i) out.c[i] = mod_norm(prod[i], m);
  return out;
}

RingElem RingElem::scale(int64_t k) const { return *this * R->from_int(k); }

RingElem RingElem::pow(uint64_t e) const {
  RingElem acc = R->one();
  RingElem b = *this;
  while (e) {
    if (e & 1) acc = acc * b;
    b = b * b;
    e >>= 1;
  }
  return acc;
}

RingElem RingElem::inv() const {
  if (!is_unit()) throw NotDivisible("element " + str() + " is not a unit");
  if (R->s == 1) {
    int64_t a = c[0], m = R->modulus;
    int64_t g = m, x = 0, x1 = 1, aa = a;
    while (aa != 0) {
      int64_t q = g / aa;
      std::tie(g, aa) = std::make_pair(aa, g - q * aa);
      std::tie(x, x1) = std::make_pair(x1, x - q * x1);
    }
    return R->from_int(x);
  }
  RingElem y = pow(static_cast<uint64_t>(R->unit_order - 1));
  RingElem two = R->from_int(2);
  for (int k = 1; k < 2 * R->n; k *= 2) y = y * (two - *this * y);
  return y;
}

RingElem RingElem::shift_down(int k) const {
  RingElem out(R, Coords{});
  int64_t d = R->pow_p[k];
  for (int i = 0; i < R->s; ++i) {
    if (c[i] % d != 0) throw NotDivisible("shift_down: not divisible");
    out.c[i] = c[i] / d;
  }
  return out;
}

RingElem RingElem::unit_part() const {
  if (is_zero()) throw NotDivisible("unit_part of zero");
  return shift_down(val());
}

RingElem RingElem::residue(int k) const {
  RingElem out(R, Coords{});
  int64_t d = R->pow_p[std::min(k, R->n)];
  for (int i = 0; i < R->s; ++i) out.c[i] = c[i] % d;
  return out;
}

std::string RingElem::str() const {
  if (!R || R->s == 1) return std::to_string(c[0]);
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < R->s; ++i) os << (i ? "," : "") << c[i];
  os << "]";
  return os.str();
}

RingElem sigma(const RingElem& x) {
  const CoeffRing& R = *x.R;
  if (R.s == 1) return x;
  RingElem out = R.zero();
  for (int i = 0; i < R.s; ++i) {
    if (x.c[i] == 0) continue;
    out += RingElem(&R, R.frob_basis[i]) * R.from_int(x.c[i]);
  }
  return out;
}

RingElem sigma_pow(const RingElem& x, int k) {
  const int s = x.R->s;
  k %= s;
  if (k < 0) k += s;
  RingElem y = x;
  for (int i = 0; i < k; ++i) y = sigma(y);
  return y;
}

RingElem reduce(const RingElem& x, const CoeffRing& target) {
  if (target.p != x.R->p || target.s != x.R->s || target.n > x.R->n)
    throw RingError("reduce: incompatible rings");
  return target.from_coords(x.c);
}

RingElem lift(const RingElem& x, const CoeffRing& target) {
  if (target.p != x.R->p || target.s != x.R->s || target.n < x.R->n)
    throw RingError("lift: incompatible rings");
  return target.from_coords(x.c);
}

RingElem p_divide(const RingElem& x) {
  const CoeffRing& R = *x.R;
  if (R.n < 2) throw RingError("p_divide needs input at level >= 2");
  if (x.val() < 1) throw NotDivisible("p_divide: " + x.str() + " is not divisible by p");
  const CoeffRing& T = R.at_level(R.n - 1);
  Coords c{};
  for (int i = 0; i < R.s; ++i) c[i] = x.c[i] / R.p;
  return T.from_coords(c);
}

int vp_int(int p, int64_t k) {
  if (k == 0) return 1 << 20;
  int v = 0;
  if (k < 0) k = -k;
  while (k % p == 0) {
    k /= p;
    ++v;
  }
  return v;
}

int vp_factorial(int p, int64_t k) {
  int v = 0;
  for (int64_t q = p; q <= k; q *= p) {
    v += static_cast<int>(k / q);
    if (q > k / p) break;
  }
  return v;
}

namespace {

// product lo*(lo+1)*...*hi split as p^v * unit, unit mod p^n
std::pair<int, int64_t> range_split(const CoeffRing& R, int64_t lo, int64_t hi) {
  int v = 0;
  i128 u = 1 % R.modulus;
  for (int64_t j = std::max<int64_t>(lo, 1); j <= hi; ++j) {
    int64_t x = j;
    while (x % R.p == 0) {
      x /= R.p;
      ++v;
    }
    u = u * (x % R.modulus) % R.modulus;
  }
  return {v, static_cast<int64_t>(u)};
}

}  // namespace

std::pair<int, RingElem> factorial_split(const CoeffRing& R, int64_t k) {
  auto [v, u] = range_split(R, 1, k);
  return {v, R.from_int(u)};
}

RingElem exact_fraction(const CoeffRing& R, int a, const std::vector<int>& I) {
  int v = 0;
  RingElem u = R.one();
  for (int k : I) {
    auto [vk, uk] = factorial_split(R, k);
    v += vk;
    u = u * uk;
  }
  if (a < v) throw NotDivisible("p^a / I! is not integral");
  return R.p_power(a - v) * u.inv();
}

RingElem exact_fraction(const CoeffRing& R, int a, int64_t k) {
  return exact_fraction(R, a, std::vector<int>{static_cast<int>(k)});
}

RingElem binom_elem(const CoeffRing& R, int64_t top, int64_t k) {
  if (k < 0) return R.zero();
  if (k == 0) return R.one();
  if (top < 0) {
    RingElem b = binom_elem(R, k - top - 1, k);
    return (k % 2) ? -b : b;
  }
  if (k > top) return R.zero();
  if (k > top - k) k = top - k;
  auto [vn, un] = range_split(R, top - k + 1, top);
  auto [vd, ud] = range_split(R, 1, k);
  return R.p_power(vn - vd) * R.from_int(un) * R.from_int(ud).inv();
}

RingElem multi_binom(const CoeffRing& R, const std::vector<int>& I, const std::vector<int>& J) {
  RingElem out = R.one();
  for (size_t i = 0; i < I.size(); ++i) out = out * binom_elem(R, I[i] + J[i], I[i]);
  return out;
}

// ---------------------------------------------------------------- matrices

RingMatrix::RingMatrix(const CoeffRing& r, int m, int k)
    : R(&r), rows(m), cols(k), a(static_cast<size_t>(m) * k, r.zero()) {}

RingMatrix RingMatrix::identity(const CoeffRing& r, int m) {
  RingMatrix I(r, m, m);
  for (int i = 0; i < m; ++i) I.at(i, i) = r.one();
  return I;
}

RingMatrix RingMatrix::from_ints(const CoeffRing& r, const std::vector<std::vector<int64_t>>& v) {
  int m = static_cast<int>(v.size());
  int k = m ? static_cast<int>(v[0].size()) : 0;
  RingMatrix M(r, m, k);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(v[i].size()) != k) throw DimensionMismatch("ragged matrix");
    for (int j = 0; j < k; ++j) M.at(i, j) = r.from_int(v[i][j]);
  }
  return M;
}

RingMatrix RingMatrix::operator*(const RingMatrix& o) const {
  if (cols != o.rows) throw DimensionMismatch("matrix product");
  RingMatrix out(*R, rows, o.cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      const RingElem& x = at(i, k);
      if (x.is_zero()) continue;
      for (int j = 0; j < o.cols; ++j) out.at(i, j) += x * o.at(k, j);
    }
  return out;
}

RingMatrix RingMatrix::operator+(const RingMatrix& o) const {
  if (rows != o.rows || cols != o.cols) throw DimensionMismatch("matrix sum");
  RingMatrix out = *this;
  for (size_t i = 0; i < a.size(); ++i) out.a[i] += o.a[i];
  return out;
}

RingMatrix RingMatrix::operator-(const RingMatrix& o) const {
  if (rows != o.rows || cols != o.cols) throw DimensionMismatch("matrix difference");
  RingMatrix out = *this;
  for (size_t i = 0; i < a.size(); ++i) out.a[i] -= o.a[i];
  return out;
}

std::vector<RingElem> RingMatrix::operator*(const std::vector<RingElem>& v) const {
  if (static_cast<int>(v.size()) != cols) throw DimensionMismatch("matrix-vector product");
  std::vector<RingElem> out(rows, R->zero());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[i] += at(i, j) * v[j];
  return out;
}

RingMatrix RingMatrix::transpose() const {
  RingMatrix T(*R, cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) T.at(j, i) = at(i, j);
  return T;
}

RingMatrix RingMatrix::scaled(const RingElem& k) const {
  RingMatrix out = *this;
  for (auto& x : out.a) x = x * k;
  return out;
}

RingMatrix RingMatrix::col(int j) const {
  RingMatrix out(*R, rows, 1);
  for (int i = 0; i < rows; ++i) out.at(i, 0) = at(i, j);
  return out;
}

bool RingMatrix::is_zero() const {
  return std::all_of(a.begin(), a.end(), [](const RingElem& x) { return x.is_zero(); });
}

bool RingMatrix::operator==(const RingMatrix& o) const {
  return rows == o.rows && cols == o.cols && a == o.a;
}

std::string RingMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows; ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < cols; ++j) os << (j ? " " : "") << at(i, j).str();
  }
  os << "]";
  return os.str();
}

RingMatrix sigma(const RingMatrix& M) {
  RingMatrix out = M;
  for (auto& x : out.a) x = sigma(x);
  return out;
}

RingMatrix hcat(const RingMatrix& A, const RingMatrix& B) {
  if (A.rows != B.rows) throw DimensionMismatch("hcat");
  RingMatrix out(*A.R, A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) out.at(i, A.cols + j) = B.at(i, j);
  }
  return out;
}

// ---------------------------------------------------------------- Howell

namespace {

using Row = std::vector<RingElem>;

void row_axpy(Row& dst, const RingElem& f, const Row& src) {
  for (size_t i = 0; i < dst.size(); ++i)
    if (!src[i].is_zero()) dst[i] -= f * src[i];
}

bool row_zero(const Row& r, size_t upto) {
  for (size_t i = 0; i < upto; ++i)
    if (!r[i].is_zero()) return false;
  return true;
}

}  // namespace

HowellForm howell(const RingMatrix& A) {
  const CoeffRing& R = *A.R;
  const int m = A.rows, k = A.cols;
  std::vector<Row> pool;
  pool.reserve(m);
  for (int i = 0; i < m; ++i) {
    Row r(k + m, R.zero());
    for (int j = 0; j < k; ++j) r[j] = A.at(i, j);
    r[k + i] = R.one();
    pool.push_back(std::move(r));
  }
  std::vector<Row> piv_rows;
  std::vector<int> piv_cols, piv_vals;
  for (int j = 0; j < k; ++j) {
    int best = -1, bv = R.n;
    for (size_t t = 0; t < pool.size(); ++t) {
      int v = pool[t][j].val();
      if (v < bv) {
        bv = v;
        best = static_cast<int>(t);
        if (v == 0) break;
      }
    }
    if (best < 0) continue;
    Row piv = std::move(pool[best]);
    pool.erase(pool.begin() + best);
    RingElem uinv = piv[j].unit_part().inv();
    for (auto& x : piv) x = x * uinv;
    for (auto& r : pool) {
      if (r[j].is_zero()) continue;
      row_axpy(r, r[j].shift_down(bv), piv);
    }
    if (bv > 0) {
      Row ann = piv;
      RingElem f = R.p_power(R.n - bv);
      for (auto& x : ann) x = x * f;
      if (!row_zero(ann, ann.size())) pool.push_back(std::move(ann));
    }
    piv_rows.push_back(std::move(piv));
    piv_cols.push_back(j);
    piv_vals.push_back(bv);
  }
  // reduce entries above pivots to canonical residues
  for (size_t i = 0; i < piv_rows.size(); ++i) {
    int cj = piv_cols[i], v = piv_vals[i];
    for (size_t h = 0; h < i; ++h) {
      const RingElem& x = piv_rows[h][cj];
      if (x.is_zero()) continue;
      RingElem r = x.residue(v);
      RingElem q = (x - r).shift_down(v);
      if (!q.is_zero()) row_axpy(piv_rows[h], q, piv_rows[i]);
    }
  }
  HowellForm out;
  const int h = static_cast<int>(piv_rows.size());
  out.H = RingMatrix(R, h, k);
  out.U = RingMatrix(R, h, m);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < k; ++j) out.H.at(i, j) = piv_rows[i][j];
    for (int j = 0; j < m; ++j) out.U.at(i, j) = piv_rows[i][k + j];
  }
  std::vector<Row> ker;
  for (auto& r : pool)
    if (!row_zero(r, r.size())) ker.push_back(r);
  out.left_kernel = RingMatrix(R, static_cast<int>(ker.size()), m);
  for (size_t i = 0; i < ker.size(); ++i)
    for (int j = 0; j < m; ++j) out.left_kernel.at(static_cast<int>(i), j) = ker[i][k + j];
  out.pivot_cols = piv_cols;
  out.pivot_vals = piv_vals;
  SmithForm sf = smith(out.H);
  for (int e : sf.diag)
    if (e < R.n) out.elementary_divisors.push_back(e);
  std::sort(out.elementary_divisors.begin(), out.elementary_divisors.end());
  return out;
}

std::optional<std::vector<RingElem>> solve(const RingMatrix& M, const std::vector<RingElem>& b) {
  if (static_cast<int>(b.size()) != M.rows) throw DimensionMismatch("solve: rhs length");
  const CoeffRing& R = *M.R;
  HowellForm hf = howell(M.transpose());
  Row rem = b;
  std::vector<RingElem> y(hf.H.rows, R.zero());
  for (int i = 0; i < hf.H.rows; ++i) {
    int cj = hf.pivot_cols[i], v = hf.pivot_vals[i];
    const RingElem& x = rem[cj];
    if (x.is_zero()) continue;
    if (x.val() < v) return std::nullopt;
    RingElem q = x.shift_down(v);
    y[i] = q;
    for (int j = 0; j < M.rows; ++j) rem[j] -= q * hf.H.at(i, j);
  }
  if (!row_zero(rem, rem.size())) return std::nullopt;
  std::vector<RingElem> x(M.cols, R.zero());
  for (int i = 0; i < hf.H.rows; ++i) {
    if (y[i].is_zero()) continue;
    for (int j = 0; j < M.cols; ++j) x[j] += y[i] * hf.U.at(i, j);
  }
  return x;
}

RingMatrix kernel(const RingMatrix& M) {
  HowellForm hf = howell(M.transpose());
  return hf.left_kernel.transpose();
}

SmithForm smith(const RingMatrix& Ain) {
  const CoeffRing& R = *Ain.R;
  RingMatrix A = Ain;
  const int m = A.rows, k = A.cols;
  SmithForm sf;
  sf.P = RingMatrix::identity(R, m);
  sf.Pinv = RingMatrix::identity(R, m);
  sf.Q = RingMatrix::identity(R, k);
  const int lim = std::min(m, k);
  for (int t = 0; t < lim; ++t) {
    int bi = -1, bj = -1, bv = R.n;
    for (int i = t; i < m && bv > 0; ++i)
      for (int j = t; j < k; ++j) {
        int v = A.at(i, j).val();
        if (v < bv) {
          bv = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (bi < 0) break;
    if (bi != t) {
      for (int j = 0; j < k; ++j) std::swap(A.at(t, j), A.at(bi, j));
      for (int j = 0; j < m; ++j) std::swap(sf.P.at(t, j), sf.P.at(bi, j));
      for (int i = 0; i < m; ++i) std::swap(sf.Pinv.at(i, t), sf.Pinv.at(i, bi));
    }
    if (bj != t) {
      for (int i = 0; i < m; ++i) std::swap(A.at(i, t), A.at(i, bj));
      for (int i = 0; i < k; ++i) std::swap(sf.Q.at(i, t), sf.Q.at(i, bj));
    }
    RingElem u = A.at(t, t).unit_part();
    RingElem ui = u.inv();
    for (int j = 0; j < k; ++j) A.at(t, j) = A.at(t, j) * ui;
    for (int j = 0; j < m; ++j) sf.P.at(t, j) = sf.P.at(t, j) * ui;
    for (int i = 0; i < m; ++i) sf.Pinv.at(i, t) = sf.Pinv.at(i, t) * u;
    for (int i = t + 1; i < m; ++i) {
      if (A.at(i, t).is_zero()) continue;
      RingElem f = A.at(i, t).shift_down(bv);
      for (int j = t; j < k; ++j) A.at(i, j) -= f * A.at(t, j);
      for (int j = 0; j < m; ++j) sf.P.at(i, j) -= f * sf.P.at(t, j);
      for (int r = 0; r < m; ++r) sf.Pinv.at(r, t) += f * sf.Pinv.at(r, i);
    }
    for (int j = t + 1; j < k; ++j) {
      if (A.at(t, j).is_zero()) continue;
      RingElem f = A.at(t, j).shift_down(bv);
      for (int i = t; i < m; ++i) A.at(i, j) -= f * A.at(i, t);
      for (int i = 0; i < k; ++i) sf.Q.at(i, j) -= f * sf.Q.at(i, t);
    }
  }
  for (int t = 0; t < lim; ++t) sf.diag.push_back(A.at(t, t).val());
  return sf;
}

std::vector<int> cokernel_invariants(const RingMatrix& A) {
  SmithForm sf = smith(A);
  std::vector<int> out;
  for (int t = 0; t < A.rows; ++t) {
    int d = t < static_cast<int>(sf.diag.size()) ? sf.diag[t] : A.R->n;
    if (d > 0) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_invertible(const RingMatrix& A) {
  if (A.rows != A.cols) return false;
  SmithForm sf = smith(A);
  return std::all_of(sf.diag.begin(), sf.diag.end(), [](int e) { return e == 0; });
}

}  // namespace pdcrys
