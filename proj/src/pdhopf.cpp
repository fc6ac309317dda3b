#include "pdcrys/pdhopf.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace pdcrys {

const char* flavor_name(Flavor f) {
  switch (f) {
    case Flavor::P: return "P";
    case Flavor::R: return "R";
    case Flavor::T: return "T";
    case Flavor::Q: return "Q";
  }
  return "?";
}

namespace {

int total(const Exp& e) { return std::accumulate(e.begin(), e.end(), 0); }

// all J <= K componentwise
void for_each_below(const Exp& K, const std::function<void(const Exp&)>& fn) {
  Exp J(K.size(), 0);
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == K.size()) {
      fn(J);
      return;
    }
    for (int v = 0; v <= K[i]; ++v) {
      J[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

// all K with |K| <= N
void for_each_index(int d, int N, const std::function<void(const Exp&)>& fn) {
  Exp K(d, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == d) {
      fn(K);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      K[i] = v;
      rec(i + 1, left - v);
    }
    K[i] = 0;
  };
  rec(0, N);
}

Exp concat(const Exp& a, const Exp& b) {
  Exp out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Exp slice(const Exp& k, int pos, int len) { return Exp(k.begin() + pos * len, k.begin() + (pos + 1) * len); }

void require_same(const PDPoly& x, const PDPoly& y) {
  if (x.flavor != y.flavor || x.m != y.m) throw FlavorMismatch("PD algebra operands differ in flavor or variable count");
  if (x.chart.R != y.chart.R || x.chart.d != y.chart.d) throw FlavorMismatch("PD algebra operands live on different charts");
}

int64_t binom_int(int64_t n, int64_t k) {
  int64_t r = 1;
  for (int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

int key_degree(Flavor f, int p, int m, const Exp& key) {
  if (f != Flavor::Q) return total(key);
  int deg = 0;
  for (int i = 0; i < m; ++i) deg += key[i] + p * key[m + i];
  return deg;
}

PDPoly PDPoly::constant(const Chart& c, int vars, Flavor f, const LaurentPoly& g) {
  PDPoly x(c, vars, f);
  x.add_term(x.zero_key(), g);
  return x;
}

PDPoly PDPoly::one(const Chart& c, int vars, Flavor f) {
  return constant(c, vars, f, LaurentPoly::constant(c.R->one(), c.d));
}

PDPoly PDPoly::basis(const Chart& c, int vars, Flavor f, const Exp& key) {
  PDPoly x(c, vars, f);
  if (static_cast<int>(key.size()) != x.key_len()) throw DimensionMismatch("PD monomial key has the wrong length");
  x.add_term(key, LaurentPoly::constant(c.R->one(), c.d));
  return x;
}

PDPoly PDPoly::generator(const Chart& c, int vars, Flavor f, int i) {
  PDPoly x(c, vars, f);
  Exp k = x.zero_key();
  k[i] = 1;
  return basis(c, vars, f, k);
}

PDPoly PDPoly::eta(const Chart& c, int vars, int i) {
  Exp k(2 * vars, 0);
  k[vars + i] = 1;
  return basis(c, vars, Flavor::Q, k);
}

PDPoly PDPoly::q_monomial(const Chart& c, int vars, const Exp& xi, const Exp& eta_exp) {
  const int p = c.R->p;
  Exp k(2 * vars, 0);
  int shift = 0;
  for (int i = 0; i < vars; ++i) {
    k[i] = xi[i] % p;
    k[vars + i] = eta_exp[i] + xi[i] / p;
    shift += xi[i] / p;
  }
  PDPoly x(c, vars, Flavor::Q);
  if (shift >= c.R->n) return x;
  x.add_term(k, LaurentPoly::constant(c.R->p_power(shift), c.d));
  return x;
}

void PDPoly::add_term(const Exp& key, const LaurentPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms.emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms.erase(it);
  }
}

LaurentPoly PDPoly::coeff(const Exp& key) const {
  auto it = terms.find(key);
  return it == terms.end() ? LaurentPoly(*chart.R, chart.d) : it->second;
}

int PDPoly::degree() const {
  int deg = 0;
  for (auto& [k, c] : terms) deg = std::max(deg, key_degree(flavor, chart.R->p, m, k));
  return deg;
}

PDPoly PDPoly::truncated(int max_degree) const {
  PDPoly out(chart, m, flavor);
  for (auto& [k, c] : terms)
    if (key_degree(flavor, chart.R->p, m, k) <= max_degree) out.terms.emplace(k, c);
  return out;
}

PDPoly PDPoly::scaled(const LaurentPoly& f) const {
  PDPoly out(chart, m, flavor);
  for (auto& [k, c] : terms) out.add_term(k, c * f);
  return out;
}

PDPoly PDPoly::scaled(const RingElem& c) const {
  PDPoly out(chart, m, flavor);
  for (auto& [k, x] : terms) out.add_term(k, x * c);
  return out;
}

PDPoly PDPoly::operator+(const PDPoly& o) const {
  PDPoly out = *this;
  out += o;
  return out;
}

PDPoly& PDPoly::operator+=(const PDPoly& o) {
  require_same(*this, o);
  for (auto& [k, c] : o.terms) add_term(k, c);
  return *this;
}

PDPoly PDPoly::operator-() const {
  PDPoly out(chart, m, flavor);
  for (auto& [k, c] : terms) out.terms.emplace(k, -c);
  return out;
}

PDPoly PDPoly::operator-(const PDPoly& o) const { return *this + (-o); }

PDPoly PDPoly::operator*(const PDPoly& o) const { return pd_mul(*this, o); }

std::string PDPoly::str() const {
  if (terms.empty()) return "0";
  const char* var = flavor == Flavor::P ? "xi" : flavor == Flavor::R ? "zeta" : flavor == Flavor::T ? "tau" : "xi";
  bool divided = flavor == Flavor::P || flavor == Flavor::T;
  std::ostringstream os;
  bool first = true;
  for (auto& [k, c] : terms) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.str() << ")";
    bool any = false;
    for (int i = 0; i < m; ++i) any = any || k[i] != 0;
    if (any) {
      os << "*" << var << (divided ? "^[" : "^(");
      for (int i = 0; i < m; ++i) os << (i ? "," : "") << k[i];
      os << (divided ? "]" : ")");
    }
    if (flavor == Flavor::Q) {
      bool e = false;
      for (int i = 0; i < m; ++i) e = e || k[m + i] != 0;
      if (e) {
        os << "*eta^(";
        for (int i = 0; i < m; ++i) os << (i ? "," : "") << k[m + i];
        os << ")";
      }
    }
  }
  return os.str();
}

std::pair<RingElem, Exp> mono_product(const CoeffRing& R, Flavor f, int m, const Exp& a, const Exp& b) {
  Exp k(a.size());
  for (size_t i = 0; i < a.size(); ++i) k[i] = a[i] + b[i];
  switch (f) {
    case Flavor::P:
    case Flavor::T:
      return {multi_binom(R, a, b), k};
    case Flavor::R:
      return {R.one(), k};
    case Flavor::Q: {
      int shift = 0;
      for (int i = 0; i < m; ++i)
        if (k[i] >= R.p) {
          k[i] -= R.p;
          k[m + i] += 1;
          ++shift;
        }
      return {R.p_power(shift), k};
    }
  }
  return {R.zero(), k};
}

PDPoly pd_mul(const PDPoly& x, const PDPoly& y) {
  require_same(x, y);
  PDPoly out(x.chart, x.m, x.flavor);
  for (auto& [a, f] : x.terms)
    for (auto& [b, g] : y.terms) {
      auto [c, k] = mono_product(*x.chart.R, x.flavor, x.m, a, b);
      if (c.is_zero()) continue;
      out.add_term(k, f * g * c);
    }
  return out;
}

PDPoly eta_right(const Chart& c, Flavor f, const LaurentPoly& g) {
  const int d = c.d;
  const CoeffRing& R = *c.R;
  PDPoly out(c, d, f);
  if (g.is_constant()) {
    out.add_term(out.zero_key(), g);
    return out;
  }
  switch (f) {
    case Flavor::P: {
      // layers of ordinary derivatives; each K is reached from K - e_i with i its last index
      std::vector<std::pair<Exp, LaurentPoly>> layer{{Exp(d, 0), g}};
      while (!layer.empty()) {
        std::vector<std::pair<Exp, LaurentPoly>> next;
        for (auto& [K, h] : layer) {
          out.add_term(K, h);
          int last = 0;
          for (int i = 0; i < d; ++i)
            if (K[i] > 0) last = i;
          for (int i = last; i < d; ++i) {
            LaurentPoly dh = derive(h, i);
            if (dh.is_zero()) continue;
            Exp K2 = K;
            ++K2[i];
            next.emplace_back(K2, dh);
          }
        }
        layer = std::move(next);
      }
      break;
    }
    case Flavor::R:
      for_each_index(d, R.n - 1, [&](const Exp& K) {
        out.add_term(K, times_p(divided_derivative(K, g), total(K)));
      });
      break;
    case Flavor::T:
      for_each_index(d, R.n - 1, [&](const Exp& K) { out.add_term(K, times_p(apply_diffop(K, g), total(K))); });
      break;
    case Flavor::Q: {
      Exp caps(d, R.p * R.n - 1);
      for (int i = 0; i < d; ++i) {
        bool negative = false;
        int top = 0;
        for (auto& [e, x] : g.terms) {
          negative = negative || e[i] < 0;
          top = std::max(top, e[i]);
        }
        if (!negative) caps[i] = std::min(caps[i], top);
      }
      for_each_below(caps, [&](const Exp& K) {
        LaurentPoly h = divided_derivative(K, g);
        if (h.is_zero()) return;
        out += PDPoly::q_monomial(c, d, K, Exp(d, 0)).scaled(h);
      });
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- tensors

void PDTensor::add_term(const Exp& key, const LaurentPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms.emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms.erase(it);
  }
}

PDTensor PDTensor::operator+(const PDTensor& o) const {
  PDTensor out = *this;
  for (auto& [k, c] : o.terms) out.add_term(k, c);
  return out;
}

PDTensor PDTensor::operator-(const PDTensor& o) const {
  PDTensor out = *this;
  for (auto& [k, c] : o.terms) out.add_term(k, -c);
  return out;
}

PDTensor PDTensor::operator*(const PDTensor& o) const {
  if (factors != o.factors || flavor != o.flavor || m != o.m) throw FlavorMismatch("tensor shapes differ");
  const int len = key_len();
  PDTensor out(chart, m, flavor, factors);
  for (auto& [a, f] : terms)
    for (auto& [b, g] : o.terms) {
      RingElem c = chart.R->one();
      Exp k;
      for (int pos = 0; pos < factors && !c.is_zero(); ++pos) {
        auto [cp, kp] = mono_product(*chart.R, flavor, m, slice(a, pos, len), slice(b, pos, len));
        c = c * cp;
        k.insert(k.end(), kp.begin(), kp.end());
      }
      if (!c.is_zero()) out.add_term(k, f * g * c);
    }
  return out;
}

std::string PDTensor::str() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  const int len = key_len();
  for (auto& [k, c] : terms) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.str() << ")";
    for (int pos = 0; pos < factors; ++pos) {
      os << (pos ? " (x) " : " ") << "[";
      for (int i = 0; i < len; ++i) os << (i ? "," : "") << k[pos * len + i];
      os << "]";
    }
  }
  return os.str();
}

PDTensor tensor(const PDPoly& x, const PDPoly& y) {
  require_same(x, y);
  PDTensor out(x.chart, x.m, x.flavor, 2);
  for (auto& [b, g] : y.terms) {
    PDPoly left = g.is_constant() ? x.scaled(g) : pd_mul(x, eta_right(x.chart, x.flavor, g));
    for (auto& [a, f] : left.terms) out.add_term(concat(a, b), f);
  }
  return out;
}

namespace {

// delta of a single basis monomial, with coefficient one
PDTensor comult_basis(const Chart& c, int m, Flavor f, const Exp& key) {
  const CoeffRing& R = *c.R;
  LaurentPoly one = LaurentPoly::constant(R.one(), c.d);
  PDTensor out(c, m, f, 2);
  switch (f) {
    case Flavor::P:
    case Flavor::T:
      for_each_below(key, [&](const Exp& b) {
        Exp rest(key.size());
        for (size_t i = 0; i < key.size(); ++i) rest[i] = key[i] - b[i];
        out.add_term(concat(b, rest), one);
      });
      return out;
    case Flavor::R:
      for_each_below(key, [&](const Exp& b) {
        Exp rest(key.size());
        RingElem coef = R.one();
        for (size_t i = 0; i < key.size(); ++i) {
          rest[i] = key[i] - b[i];
          coef = coef * binom_elem(R, key[i], b[i]);
        }
        out.add_term(concat(b, rest), one * coef);
      });
      return out;
    case Flavor::Q: {
      const int p = R.p;
      Exp zero(2 * m, 0);
      out.add_term(concat(zero, zero), one);
      for (int i = 0; i < m; ++i) {
        Exp xi = zero, eta = zero;
        xi[i] = 1;
        eta[m + i] = 1;
        PDTensor dxi(c, m, f, 2), deta(c, m, f, 2);
        dxi.add_term(concat(xi, zero), one);
        dxi.add_term(concat(zero, xi), one);
        deta.add_term(concat(eta, zero), one);
        deta.add_term(concat(zero, eta), one);
        for (int j = 1; j < p; ++j) {
          Exp a = zero, b = zero;
          a[i] = j;
          b[i] = p - j;
          deta.add_term(concat(a, b), one * R.from_int(binom_int(p, j) / p));
        }
        for (int k = 0; k < key[i]; ++k) out = out * dxi;
        for (int k = 0; k < key[m + i]; ++k) out = out * deta;
      }
      return out;
    }
  }
  return out;
}

}  // namespace

PDTensor comult(const PDPoly& x) {
  PDTensor out(x.chart, x.m, x.flavor, 2);
  for (auto& [k, f] : x.terms)
    for (auto& [kk, c] : comult_basis(x.chart, x.m, x.flavor, k).terms) out.add_term(kk, c * f);
  return out;
}

PDTensor comult_at(const PDTensor& t, int pos) {
  const int len = t.key_len();
  PDTensor out(t.chart, t.m, t.flavor, t.factors + 1);
  std::map<Exp, PDTensor> cache;
  for (auto& [k, f] : t.terms) {
    Exp piece = slice(k, pos, len);
    auto it = cache.find(piece);
    if (it == cache.end()) it = cache.emplace(piece, comult_basis(t.chart, t.m, t.flavor, piece)).first;
    for (auto& [kk, c] : it->second.terms) {
      Exp nk(k.begin(), k.begin() + pos * len);
      nk.insert(nk.end(), kk.begin(), kk.end());
      nk.insert(nk.end(), k.begin() + (pos + 1) * len, k.end());
      out.add_term(nk, c * f);
    }
  }
  return out;
}

PDPoly counit_at(const PDTensor& t, int pos) {
  if (t.factors != 2) throw DimensionMismatch("counit_at expects a two-fold tensor");
  const int len = t.key_len();
  PDPoly out(t.chart, t.m, t.flavor);
  for (auto& [k, f] : t.terms) {
    Exp gone = slice(k, pos, len), kept = slice(k, 1 - pos, len);
    if (std::all_of(gone.begin(), gone.end(), [](int v) { return v == 0; })) out.add_term(kept, f);
  }
  return out;
}

PDPoly antipode(const PDPoly& x) {
  const int p = x.chart.R->p;
  PDPoly out(x.chart, x.m, x.flavor);
  for (auto& [k, f] : x.terms) {
    int odd = 0;
    if (x.flavor == Flavor::Q) {
      for (int i = 0; i < x.m; ++i) odd += k[i] + p * k[x.m + i];
    } else {
      odd = total(k);
    }
    PDPoly b = PDPoly::basis(x.chart, x.m, x.flavor, k);
    if (odd % 2) b = -b;
    if (f.is_constant()) {
      out += b.scaled(f);
    } else {
      if (x.m != x.chart.d) throw DimensionMismatch("antipode with non-constant coefficients needs m == d");
      out += pd_mul(b, eta_right(x.chart, x.flavor, f));
    }
  }
  return out;
}

LaurentPoly counit(const PDPoly& x) { return x.coeff(x.zero_key()); }

PDPoly map_s(const PDPoly& x, int i) {
  if (x.flavor != Flavor::P) throw FlavorMismatch("s is defined on the P flavor");
  const CoeffRing& R = *x.chart.R;
  if (i < 0 || i > R.p - 1) throw std::invalid_argument("divided level of s must lie in [0, p-1]");
  PDPoly out(x.chart, x.m, Flavor::R);
  for (auto& [I, f] : x.terms) {
    if (total(I) < i) throw RingError("element is outside the divided-power ideal J^[" + std::to_string(i) + "]");
    out.add_term(I, f * exact_fraction(R, total(I) - i, I));
  }
  return out;
}

PDPoly map_u(const PDPoly& x) {
  if (x.flavor != Flavor::Q) throw FlavorMismatch("u is defined on the Q flavor");
  if (x.chart.R->n != 1) throw RingError("u is defined at level 1");
  const int m = x.m, p = x.chart.R->p;
  PDPoly out(x.chart, m, Flavor::P);
  for (auto& [k, f] : x.terms) {
    PDPoly img = PDPoly::one(x.chart, m, Flavor::P);
    for (int i = 0; i < m; ++i) {
      PDPoly xi = PDPoly::generator(x.chart, m, Flavor::P, i);
      Exp kp(m, 0);
      kp[i] = p;
      PDPoly eta_img = -PDPoly::basis(x.chart, m, Flavor::P, kp);
      for (int a = 0; a < k[i]; ++a) img = img * xi;
      for (int b = 0; b < k[m + i]; ++b) img = img * eta_img;
    }
    out += img.scaled(f);
  }
  return out;
}

PDPoly map_v(const PDPoly& x, const FrobLift& F) {
  if (x.flavor != Flavor::Q) throw FlavorMismatch("v is defined on the Q flavor");
  if (x.chart.R->n != 1) throw RingError("v is defined at level 1");
  if (F.chart.d != x.chart.d || F.chart.R != x.chart.R) throw DimensionMismatch("lift lives on another chart");
  const int m = x.m;
  PDPoly out(F.chart, m, Flavor::R);
  for (auto& [k, f] : x.terms) {
    bool has_xi = false;
    for (int i = 0; i < m; ++i) has_xi = has_xi || k[i] != 0;
    if (has_xi) continue;
    out.add_term(Exp(k.begin() + m, k.end()), f);
  }
  return out;
}

// ---------------------------------------------------------------- dual operators

DualOperator DualOperator::partial(const Chart& c, const Exp& I, const LaurentPoly& coef, bool divided) {
  DualOperator op(c, static_cast<int>(I.size()), divided);
  op.add_term(I, coef);
  return op;
}

void DualOperator::add_term(const Exp& I, const LaurentPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms.emplace(I, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms.erase(it);
  }
}

DualOperator DualOperator::operator+(const DualOperator& o) const {
  if (divided != o.divided || m != o.m) throw FlavorMismatch("operator sum of different kinds");
  DualOperator out = *this;
  for (auto& [I, c] : o.terms) out.add_term(I, c);
  return out;
}

LaurentPoly pair(const DualOperator& op, const PDPoly& x) {
  Flavor want = op.divided ? Flavor::R : Flavor::P;
  if (x.flavor != want) throw FlavorMismatch(std::string("operator pairs with the ") + flavor_name(want) + " flavor");
  if (x.m != op.m) throw FlavorMismatch("variable counts differ");
  LaurentPoly out(*x.chart.R, x.chart.d);
  for (auto& [I, c] : op.terms) {
    auto it = x.terms.find(I);
    if (it != x.terms.end()) out += c * it->second;
  }
  return out;
}

LaurentPoly apply(const DualOperator& op, const LaurentPoly& f) {
  LaurentPoly out(*f.R, f.d);
  for (auto& [I, c] : op.terms)
    out += c * (op.divided ? times_p(divided_derivative(I, f), total(I)) : apply_diffop(I, f));
  return out;
}

DualOperator op_compose(const DualOperator& a, const DualOperator& b) {
  if (a.divided || b.divided) throw FlavorMismatch("composition is implemented for ordinary operators");
  DualOperator out(a.chart, a.m, false);
  for (auto& [I, c] : a.terms)
    for (auto& [J, g] : b.terms)
      for_each_below(I, [&](const Exp& K) {
        RingElem coef = c.R->one();
        Exp e(I.size());
        for (size_t i = 0; i < I.size(); ++i) {
          coef = coef * binom_elem(*c.R, I[i], K[i]);
          e[i] = I[i] - K[i] + J[i];
        }
        out.add_term(e, c * apply_diffop(K, g) * coef);
      });
  return out;
}

}  // namespace pdcrys
