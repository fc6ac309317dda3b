#include "pdcrys/conn.hpp"

#include <functional>
#include <numeric>
#include <sstream>

namespace pdcrys {

namespace {

int total(const Exp& e) { return std::accumulate(e.begin(), e.end(), 0); }

int last_index(const Exp& K) {
  int last = 0;
  for (size_t i = 0; i < K.size(); ++i)
    if (K[i] > 0) last = static_cast<int>(i);
  return last;
}

PolyMatrix from_columns(const std::vector<ModElem>& cols, const Chart& c) {
  const int r = static_cast<int>(cols.size());
  PolyMatrix M = poly_zero_matrix(*c.R, c.d, r, r);
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < r; ++k) M[k][j] = cols[j][k];
  return M;
}

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

void for_each_box(const Exp& caps, const std::function<void(const Exp&)>& fn) { for_each_below(caps, fn); }

Exp concat_key(const Exp& a, const Exp& b) {
  Exp out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

PolyMatrix kron(const PolyMatrix& A, const PolyMatrix& B) {
  const size_t ar = A.size(), ac = ar ? A[0].size() : 0, br = B.size(), bc = br ? B[0].size() : 0;
  PolyMatrix out(ar * br, std::vector<LaurentPoly>(ac * bc));
  for (size_t i = 0; i < ar; ++i)
    for (size_t j = 0; j < ac; ++j)
      for (size_t k = 0; k < br; ++k)
        for (size_t l = 0; l < bc; ++l) out[i * br + k][j * bc + l] = A[i][j] * B[k][l];
  return out;
}

PolyMatrix derive(const PolyMatrix& A, int i) {
  PolyMatrix out = A;
  for (auto& row : out)
    for (auto& x : row) x = derive(x, i);
  return out;
}

ModElem column(const PolyMatrix& A, int j) {
  ModElem out;
  for (auto& row : A) out.push_back(row[j]);
  return out;
}

bool is_zero(const ModElem& x) {
  for (auto& f : x)
    if (!f.is_zero()) return false;
  return true;
}

ConnModule ConnModule::trivial(const Chart& c, int rank, int lambda) {
  ConnModule M;
  M.chart = c;
  M.r = rank;
  M.lambda = lambda;
  M.A.assign(c.d, poly_zero_matrix(*c.R, c.d, rank, rank));
  return M;
}

ModElem ConnModule::zero() const { return ModElem(r, LaurentPoly(*chart.R, chart.d)); }

ModElem ConnModule::basis(int j) const {
  ModElem e = zero();
  e[j] = LaurentPoly::constant(chart.R->one(), chart.d);
  return e;
}

ModElem ConnModule::nabla(int i, const ModElem& x) const {
  ModElem out = A[i] * x;
  if (lambda != 0) {
    RingElem l = chart.R->from_int(lambda);
    for (int k = 0; k < r; ++k)
      if (!x[k].is_zero()) out[k] += derive(x[k], i) * l;
  }
  return out;
}

PolyMatrix curvature(const ConnModule& M, int i, int j) {
  RingElem l = M.ring().from_int(M.lambda);
  PolyMatrix out = M.A[i] * M.A[j] - M.A[j] * M.A[i];
  if (M.lambda != 0) {
    PolyMatrix dA = derive(M.A[j], i) - derive(M.A[i], j);
    for (int a = 0; a < M.r; ++a)
      for (int b = 0; b < M.r; ++b) out[a][b] += dA[a][b] * l;
  }
  return out;
}

bool check_integrable(const ConnModule& M) {
  for (int i = 0; i < M.dim(); ++i)
    for (int j = i + 1; j < M.dim(); ++j)
      if (!poly_is_zero(curvature(M, i, j))) return false;
  return true;
}

ModElem iterate_nabla(const ConnModule& M, const Exp& I, const ModElem& x) {
  ModElem y = x;
  for (int i = 0; i < M.dim(); ++i)
    for (int k = 0; k < I[i]; ++k) y = M.nabla(i, y);
  return y;
}

namespace {

// layers of basis iterates; returns the order or -1 when the layer at `bound` survives
int iterate_layers(const ConnModule& M, int bound, std::map<Exp, PolyMatrix>* out,
                   std::vector<std::pair<Exp, int>>* witnesses) {
  const int d = M.dim();
  std::vector<std::pair<Exp, std::vector<ModElem>>> layer;
  std::vector<ModElem> id;
  for (int j = 0; j < M.r; ++j) id.push_back(M.basis(j));
  layer.emplace_back(Exp(d, 0), id);
  for (int N = 0;; ++N) {
    // drop vanishing entries; descendants of a zero iterate vanish too
    std::vector<std::pair<Exp, std::vector<ModElem>>> alive;
    for (auto& [K, cols] : layer) {
      bool nz = false;
      for (auto& c : cols) nz = nz || !is_zero(c);
      if (nz) alive.emplace_back(K, cols);
    }
    if (alive.empty() || M.r == 0) return N;
    if (N == bound) {
      if (witnesses)
        for (auto& [K, cols] : alive)
          for (int j = 0; j < M.r; ++j)
            if (!is_zero(cols[j])) witnesses->emplace_back(K, j);
      return -1;
    }
    if (out)
      for (auto& [K, cols] : alive) (*out)[K] = from_columns(cols, M.chart);
    std::vector<std::pair<Exp, std::vector<ModElem>>> next;
    for (auto& [K, cols] : alive) {
      for (int i = last_index(K); i < d; ++i) {
        Exp K2 = K;
        ++K2[i];
        std::vector<ModElem> c2;
        for (auto& c : cols) c2.push_back(M.nabla(i, c));
        next.emplace_back(K2, std::move(c2));
      }
    }
    layer = std::move(next);
  }
}

}  // namespace

NilpotenceResult quasi_nilpotence_order(const ConnModule& M, int bound) {
  if (bound < 1) throw std::invalid_argument("nilpotence bound must be at least 1");
  NilpotenceResult res;
  int N = iterate_layers(M, bound, nullptr, &res.witnesses);
  res.ok = N >= 0;
  res.order = res.ok ? std::max(N, 1) : bound;
  return res;
}

std::map<Exp, PolyMatrix> basis_iterates(const ConnModule& M, int bound) {
  std::map<Exp, PolyMatrix> out;
  std::vector<std::pair<Exp, int>> w;
  if (iterate_layers(M, bound, &out, &w) < 0) {
    std::ostringstream os;
    os << "nilpotence bound " << bound << " exceeded (" << w.size() << " surviving iterates)";
    throw NilpotenceBoundExceeded(os.str());
  }
  return out;
}

std::vector<PolyMatrix> p_curvature(const ConnModule& M) {
  if (M.lambda != 1) throw std::invalid_argument("p-curvature needs a connection (lambda = 1)");
  const int p = M.ring().p;
  std::vector<PolyMatrix> out;
  for (int i = 0; i < M.dim(); ++i) {
    std::vector<ModElem> cols;
    for (int j = 0; j < M.r; ++j) {
      ModElem x = M.basis(j);
      for (int k = 0; k < p; ++k) x = M.nabla(i, x);
      cols.push_back(x);
    }
    out.push_back(from_columns(cols, M.chart));
  }
  return out;
}

FormElem de_rham_d(const ConnModule& M, const FormElem& x) {
  FormElem out;
  for (auto& [J, v] : x)
    for (int i = 0; i < M.dim(); ++i) {
      FormMask bit = FormMask(1) << i;
      int sg = wedge_sign(bit, J);
      if (sg == 0) continue;
      ModElem w = M.nabla(i, v);
      if (is_zero(w)) continue;
      auto it = out.find(J | bit);
      if (it == out.end()) it = out.emplace(J | bit, M.zero()).first;
      for (int k = 0; k < M.r; ++k) it->second[k] += sg > 0 ? w[k] : -w[k];
    }
  for (auto it = out.begin(); it != out.end();) it = is_zero(it->second) ? out.erase(it) : std::next(it);
  return out;
}

bool is_zero(const FormElem& x) {
  for (auto& [J, v] : x)
    if (!is_zero(v)) return false;
  return true;
}

ConnModule tensor(const ConnModule& M1, const ConnModule& M2) {
  if (M1.chart.R != M2.chart.R || M1.dim() != M2.dim()) throw DimensionMismatch("tensor of modules on different charts");
  if (M1.lambda != M2.lambda) throw std::invalid_argument("tensor of modules with different lambda");
  ConnModule T;
  T.chart = M1.chart;
  T.r = M1.r * M2.r;
  T.lambda = M1.lambda;
  PolyMatrix I1 = poly_identity(M1.ring(), M1.dim(), M1.r), I2 = poly_identity(M1.ring(), M1.dim(), M2.r);
  for (int i = 0; i < M1.dim(); ++i) T.A.push_back(kron(M1.A[i], I2) + kron(I1, M2.A[i]));
  return T;
}

bool check_horizontal(const PolyMatrix& f, const ConnModule& M1, const ConnModule& M2) {
  if (M1.lambda != M2.lambda) return false;
  RingElem l = M1.ring().from_int(M1.lambda);
  for (int i = 0; i < M1.dim(); ++i) {
    PolyMatrix lhs = M2.A[i] * f;
    if (M1.lambda != 0) {
      PolyMatrix df = derive(f, i);
      for (size_t a = 0; a < lhs.size(); ++a)
        for (size_t b = 0; b < lhs[a].size(); ++b) lhs[a][b] += df[a][b] * l;
    }
    if (!poly_is_zero(lhs - f * M1.A[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------- divided operators

ModElem GammaModule::act(const Exp& I, const ModElem& x) const {
  const CoeffRing& R = *chart.R;
  ModElem out(r, LaurentPoly(R, chart.d));
  for (int k = 0; k < r; ++k) {
    if (x[k].is_zero()) continue;
    for_each_below(I, [&](const Exp& K) {
      LaurentPoly g = times_p(divided_derivative(K, x[k]), total(K));
      if (g.is_zero()) return;
      Exp rest(I.size());
      for (size_t i = 0; i < I.size(); ++i) rest[i] = I[i] - K[i];
      if (total(rest) == 0) {
        out[k] += g;
        return;
      }
      auto it = psi.find(rest);
      if (it == psi.end()) return;
      for (int l = 0; l < r; ++l) out[l] += it->second[l][k] * g;
    });
  }
  return out;
}

GammaModule GammaModule::from_connection(const ConnModule& M, int bound) {
  if (M.lambda != 1) throw std::invalid_argument("expected a connection");
  GammaModule G;
  G.chart = M.chart;
  G.r = M.r;
  for (auto& [I, N] : basis_iterates(M, bound)) {
    if (total(I) == 0) continue;
    RingElem c = exact_fraction(M.ring(), total(I), I);
    if (c.is_zero()) continue;
    PolyMatrix P = N;
    for (auto& row : P)
      for (auto& x : row) x = x * c;
    if (!poly_is_zero(P)) G.psi[I] = P;
  }
  return G;
}

ConnModule GammaModule::p_connection() const {
  ConnModule M = ConnModule::trivial(chart, r, chart.R->p);
  for (int i = 0; i < chart.d; ++i) {
    Exp e(chart.d, 0);
    e[i] = 1;
    auto it = psi.find(e);
    if (it != psi.end()) M.A[i] = it->second;
  }
  return M;
}

ValidationReport validate_gamma(const GammaModule& G) {
  ValidationReport rep;
  const CoeffRing& R = *G.chart.R;
  for (auto& [I, PI] : G.psi) {
    if (total(I) == 0) rep.fail("psi_[0] must be the identity and is implicit");
    for (auto& [J, PJ] : G.psi) {
      Exp K(I.size());
      RingElem b = R.one();
      for (size_t i = 0; i < I.size(); ++i) {
        K[i] = I[i] + J[i];
        b = b * binom_elem(R, K[i], I[i]);
      }
      auto it = G.psi.find(K);
      for (int j = 0; j < G.r; ++j) {
        ModElem lhs = G.act(I, column(PJ, j));
        ModElem rhs = it == G.psi.end() ? ModElem(G.r, LaurentPoly(R, G.chart.d)) : column(it->second, j);
        for (auto& f : rhs) f = f * b;
        bool eq = true;
        for (int k = 0; k < G.r; ++k) eq = eq && lhs[k] == rhs[k];
        if (!eq) {
          std::ostringstream os;
          os << "divided-power relation fails for I = (";
          for (size_t i = 0; i < I.size(); ++i) os << (i ? "," : "") << I[i];
          os << "), J = (";
          for (size_t i = 0; i < J.size(); ++i) os << (i ? "," : "") << J[i];
          os << ")";
          rep.fail(os.str());
          break;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- stratifications

PDPoly StratTable::entry(int l, int j) const {
  PDPoly x(chart, chart.d, flavor);
  for (auto& [K, N] : entries) x.add_term(K, N[l][j]);
  return x;
}

StratTable stratify(const ConnModule& M, Flavor f, int bound) {
  if (f == Flavor::P && M.lambda != 1) throw std::invalid_argument("P stratification needs lambda = 1");
  if (f == Flavor::T && M.lambda != M.ring().p) throw std::invalid_argument("T stratification needs lambda = p");
  if (f != Flavor::P && f != Flavor::T) throw FlavorMismatch("use the Gamma-module or Q constructors for R and Q");
  StratTable S;
  S.flavor = f;
  S.chart = M.chart;
  S.r = M.r;
  S.entries = basis_iterates(M, bound);
  S.entries[Exp(M.dim(), 0)] = poly_identity(M.ring(), M.dim(), M.r);
  return S;
}

StratTable stratify(const GammaModule& G) {
  StratTable S;
  S.flavor = Flavor::R;
  S.chart = G.chart;
  S.r = G.r;
  S.entries = G.psi;
  S.entries[Exp(G.chart.d, 0)] = poly_identity(*G.chart.R, G.chart.d, G.r);
  return S;
}

ValidationReport validate_q_input(const ConnModule& M, const std::map<Exp, PolyMatrix>& psi_dual) {
  ValidationReport rep;
  if (M.ring().n != 1) rep.fail("Q stratifications are built at level 1");
  if (M.lambda != 1) rep.fail("Q stratifications need a connection");
  if (!rep.valid) return rep;
  const CoeffRing& R = M.ring();
  const int d = M.dim();
  auto curv = p_curvature(M);
  PolyMatrix zero = poly_zero_matrix(R, d, M.r, M.r);
  auto get = [&](const Exp& K) {
    auto it = psi_dual.find(K);
    return it == psi_dual.end() ? zero : it->second;
  };
  for (int i = 0; i < d; ++i) {
    Exp e(d, 0);
    e[i] = 1;
    if (!poly_is_zero(get(e) - curv[i])) rep.fail("psi for coordinate " + std::to_string(i + 1) + " differs from the p-curvature");
  }
  for (auto& [I, PI] : psi_dual) {
    if (!check_horizontal(PI, M, M)) rep.fail("a dual divided operator is not horizontal");
    for (auto& [J, PJ] : psi_dual) {
      Exp K(d);
      RingElem b = R.one();
      for (int i = 0; i < d; ++i) {
        K[i] = I[i] + J[i];
        b = b * binom_elem(R, K[i], I[i]);
      }
      PolyMatrix rhs = get(K);
      for (auto& row : rhs)
        for (auto& x : row) x = x * b;
      if (!poly_is_zero(PI * PJ - rhs)) {
        rep.fail("dual divided-power relation fails");
        return rep;
      }
    }
  }
  return rep;
}

StratTable stratify_q(const ConnModule& M, const std::map<Exp, PolyMatrix>& psi_dual, int bound) {
  ValidationReport rep = validate_q_input(M, psi_dual);
  if (!rep.valid) throw std::invalid_argument("invalid Q-stratification input: " + rep.failures[0]);
  const CoeffRing& R = M.ring();
  const int d = M.dim(), p = R.p;
  StratTable S;
  S.flavor = Flavor::Q;
  S.chart = M.chart;
  S.r = M.r;
  std::map<Exp, PolyMatrix> psi = psi_dual;
  psi[Exp(d, 0)] = poly_identity(R, d, M.r);
  for (auto& [J, PJ] : psi) {
    if (total(J) > bound) throw NilpotenceBoundExceeded("dual operator table exceeds the bound");
    RingElem sign = total(J) % 2 ? -R.one() : R.one();
    for_each_box(Exp(d, p - 1), [&](const Exp& I) {
      RingElem c = sign * exact_fraction(R, 0, I);
      std::vector<ModElem> cols;
      for (int j = 0; j < M.r; ++j) cols.push_back(iterate_nabla(M, I, column(PJ, j)));
      PolyMatrix N = poly_zero_matrix(R, d, M.r, M.r);
      for (int j = 0; j < M.r; ++j)
        for (int k = 0; k < M.r; ++k) N[k][j] = cols[j][k] * c;
      if (poly_is_zero(N)) return;
      S.entries[concat_key(I, J)] = N;
    });
  }
  return S;
}

CocycleReport verify_cocycle(const StratTable& S) {
  CocycleReport rep;
  const Chart& c = S.chart;
  auto it0 = S.entries.find(Exp(S.flavor == Flavor::Q ? 2 * c.d : c.d, 0));
  if (it0 == S.entries.end() || !poly_is_zero(it0->second - poly_identity(*c.R, c.d, S.r))) {
    rep.counit_ok = false;
    rep.detail = "entry at index 0 is not the identity";
  }
  std::vector<std::vector<PDPoly>> theta(S.r);
  for (int l = 0; l < S.r; ++l)
    for (int j = 0; j < S.r; ++j) theta[l].push_back(S.entry(l, j));
  for (int l = 0; l < S.r && rep.cocycle_ok; ++l)
    for (int j = 0; j < S.r; ++j) {
      PDTensor lhs(c, c.d, S.flavor, 2);
      for (int k = 0; k < S.r; ++k)
        if (!theta[l][k].is_zero() && !theta[k][j].is_zero()) lhs = lhs + tensor(theta[l][k], theta[k][j]);
      if (!(lhs == comult(theta[l][j]))) {
        rep.cocycle_ok = false;
        rep.detail = "cocycle fails at entry (" + std::to_string(l + 1) + ", " + std::to_string(j + 1) + ")";
        break;
      }
    }
  return rep;
}

}  // namespace pdcrys
