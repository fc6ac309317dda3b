#include "pdcrys/cohom.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

namespace pdcrys {

namespace {

std::string chart_label(const Atlas& A, int c) {
  const std::string& nm = A.charts.at(c).name;
  return nm.empty() ? "chart " + std::to_string(c) : nm;
}

// the connection of M pulled back along tau, on the chart `side`
ConnModule pull_connection(const ConnModule& M, const ChartMap& tau, const Chart& side) {
  ConnModule out = ConnModule::trivial(side, M.r, M.lambda);
  const int d = side.d;
  for (int u = 0; u < d; ++u) {
    PolyMatrix B = poly_zero_matrix(*side.R, d, M.r, M.r);
    for (int v = 0; v < d; ++v) {
      LaurentPoly dv = derive(tau.images[v], u);
      if (dv.is_zero()) continue;
      for (int i = 0; i < M.r; ++i)
        for (int j = 0; j < M.r; ++j)
          if (!M.A[v][i][j].is_zero()) B[i][j] += tau.apply(M.A[v][i][j]) * dv;
    }
    out.A[u] = B;
  }
  return out;
}

PolyMatrix pull_matrix(const PolyMatrix& G, const ChartMap& tau) {
  PolyMatrix out = G;
  for (auto& row : out)
    for (auto& x : row) x = tau.apply(x);
  return out;
}

int max_abs_exponent(const LaurentPoly& f) {
  int m = 0;
  for (auto& [e, c] : f.terms)
    for (int x : e) m = std::max(m, std::abs(x));
  return m;
}

int64_t int_det(std::vector<std::vector<int64_t>> M) {
  const int d = static_cast<int>(M.size());
  if (d == 0) return 1;
  // fraction-free elimination
  int64_t sign = 1, prev = 1;
  for (int k = 0; k < d - 1; ++k) {
    if (M[k][k] == 0) {
      int s = k + 1;
      while (s < d && M[s][k] == 0) ++s;
      if (s == d) return 0;
      std::swap(M[s], M[k]);
      sign = -sign;
    }
    for (int i = k + 1; i < d; ++i)
      for (int j = k + 1; j < d; ++j) M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev;
    prev = M[k][k];
  }
  return sign * M[d - 1][d - 1];
}

// inverse of an integer matrix with determinant +-1
std::vector<std::vector<int64_t>> int_inverse(const std::vector<std::vector<int64_t>>& M) {
  const int d = static_cast<int>(M.size());
  int64_t D = int_det(M);
  if (D != 1 && D != -1) throw NotGraded("coordinate weights are not unimodular");
  std::vector<std::vector<int64_t>> inv(d, std::vector<int64_t>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      std::vector<std::vector<int64_t>> minor;
      for (int r = 0; r < d; ++r) {
        if (r == j) continue;
        std::vector<int64_t> row;
        for (int c = 0; c < d; ++c)
          if (c != i) row.push_back(M[r][c]);
        minor.push_back(row);
      }
      inv[i][j] = ((i + j) % 2 ? -1 : 1) * int_det(minor) * D;
    }
  return inv;
}

Exp add(Exp a, const Exp& b, int k = 1) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += k * b[i];
  return a;
}

int total(const Exp& e) {
  int s = 0;
  for (int x : e) s += x;
  return s;
}

std::vector<Exp> indices_below(int vars, int cap) {
  std::vector<Exp> out;
  if (cap <= 0) return out;
  Exp K(vars, 0);
  std::function<void(int, int)> rec = [&](int v, int left) {
    if (v == vars) {
      out.push_back(K);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      K[v] = e;
      rec(v + 1, left - e);
    }
    K[v] = 0;
  };
  rec(0, cap - 1);
  return out;
}

using OneForm = std::map<int, PDPoly>;

OneForm pd_differential(const PDPoly& P, int d) {
  OneForm out;
  auto put = [&](int bit, const Exp& key, const LaurentPoly& c) {
    auto it = out.find(bit);
    if (it == out.end()) it = out.emplace(bit, PDPoly(P.chart, P.m, Flavor::P)).first;
    it->second.add_term(key, c);
  };
  for (auto& [K, c] : P.terms) {
    for (int u = 0; u < d; ++u) {
      LaurentPoly g = derive(c, u);
      if (!g.is_zero()) put(u, K, g);
    }
    for (int q = 0; q < P.m; ++q) {
      if (K[q] == 0) continue;
      Exp L = K;
      --L[q];
      put(d + q, L, c);
    }
  }
  return out;
}

}  // namespace

void add_to(Cochain& x, const Cell& c, const RingElem& v) {
  if (v.is_zero()) return;
  auto it = x.find(c);
  if (it == x.end()) {
    x.emplace(c, v);
    return;
  }
  it->second += v;
  if (it->second.is_zero()) x.erase(it);
}

void add_to(Cochain& x, const Cochain& y, const RingElem& scale) {
  for (auto& [c, v] : y) add_to(x, c, v * scale);
}

// ---------------------------------------------------------------- glued modules

FormElem chart_form(const Cochain& x, const ConnModule& M) {
  FormElem out;
  for (auto& [c, v] : x) {
    if (c.J != 0 || !c.I.empty()) throw std::invalid_argument("cochain is not on a single chart");
    auto it = out.find(c.mask);
    if (it == out.end()) it = out.emplace(c.mask, M.zero()).first;
    it->second.at(c.b) += LaurentPoly::monomial(v, c.a);
  }
  return out;
}

Cochain chart_cochain(const FormElem& x) {
  Cochain out;
  for (auto& [mask, m] : x)
    for (size_t b = 0; b < m.size(); ++b)
      for (auto& [e, v] : m[b].terms) add_to(out, Cell{0, mask, static_cast<int>(b), e, {}}, v);
  return out;
}

int GluedModule::length() const {
  int l = 0;
  for (auto& M : local) l = std::max(l, M.length());
  return l;
}

GluedModule structure_sheaf(const Atlas& A, int lambda) {
  GluedModule G;
  G.atlas = A;
  const CoeffRing& R = A.ring();
  const int d = A.dim();
  for (auto& c : A.charts) G.local.push_back(FilteredConnModule::trivial(ConnModule::trivial(c, 1, lambda)));
  for (auto& [key, ov] : A.overlaps) G.G[key] = poly_identity(R, d, 1);
  if (lambda == 1 && A.lifts.size() == A.charts.size())
    for (size_t c = 0; c < A.charts.size(); ++c)
      G.frobenius.push_back(divided_frobenii(A.lifts[c], G.local[c], poly_identity(R, d, 1)));
  return G;
}

GluedModule single_chart(const ConnModule& M) {
  GluedModule G;
  G.atlas.charts.push_back(M.chart);
  G.local.push_back(FilteredConnModule::trivial(M));
  return G;
}

ValidationReport validate_glued(const GluedModule& G) {
  ValidationReport rep;
  const Atlas& A = G.atlas;
  AtlasReport ar = validate_atlas(A);
  for (auto& f : ar.failures) rep.fail("atlas: " + f);
  if (G.local.size() != A.charts.size()) {
    rep.fail("one module per chart is required");
    return rep;
  }
  for (size_t c = 0; c < G.local.size(); ++c) {
    const FilteredConnModule& M = G.local[c];
    std::string where = chart_label(A, static_cast<int>(c));
    if (M.M.r != G.rank()) rep.fail(where + ": rank differs from the other charts");
    if (M.M.lambda != G.lambda()) rep.fail(where + ": lambda differs from the other charts");
    if (M.M.chart.d != A.dim()) rep.fail(where + ": module lives on a chart of the wrong dimension");
    for (auto& Av : M.M.A)
      for (auto& row : Av)
        for (auto& x : row)
          if (!A.charts[c].admits(x)) rep.fail(where + ": connection matrix leaves the chart ring");
    if (!check_integrable(M.M)) rep.fail(where + ": connection is not integrable");
    ValidationReport fr = validate_filtration(M);
    for (auto& f : fr.failures) rep.fail(where + ": " + f);
    std::vector<std::string> w;
    if (!check_griffiths(M, &w))
      for (auto& s : w) rep.fail(where + ": " + s);
    if (M.length() != G.local[0].length() || (M.length() > 0 && [&] {
          for (int i = 1; i <= M.length(); ++i)
            if (M.rank(i) != G.local[0].rank(i)) return true;
          return false;
        }()))
      rep.fail(where + ": filtration ranks differ from the other charts");
  }
  if (!rep.valid) return rep;
  for (auto& [key, ov] : A.overlaps) {
    auto [i, j] = key;
    std::string where = "overlap (" + chart_label(A, i) + ", " + chart_label(A, j) + ")";
    auto it = G.G.find(key);
    if (it == G.G.end()) {
      rep.fail(where + ": gluing matrix missing");
      continue;
    }
    const PolyMatrix& g = it->second;
    if (static_cast<int>(g.size()) != G.rank()) {
      rep.fail(where + ": gluing matrix has the wrong size");
      continue;
    }
    if (!ov.chart.is_unit(poly_det(g))) rep.fail(where + ": gluing matrix is not invertible");
    ConnModule Mj = pull_connection(G.local[j].M, ov.to_j, ov.chart);
    ConnModule Mi = G.local[i].M;
    Mi.chart = ov.chart;
    if (!check_horizontal(g, Mj, Mi)) rep.fail(where + ": gluing matrix is not horizontal");
    for (int k = 1; k <= G.length(); ++k) {
      RingMatrix Bj = G.local[j].basis_in_M(k), Bi = G.local[i].basis_in_M(k);
      PolyMatrix img = g * poly_from_ring(Bj, A.dim());
      for (int c = 0; c < Bj.cols; ++c)
        if (!coords_in(Bi, column(img, c), A.dim())) {
          rep.fail(where + ": gluing does not respect M^" + std::to_string(k));
          break;
        }
    }
  }
  const int N = static_cast<int>(A.charts.size());
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      for (int k = j + 1; k < N; ++k) {
        if (!G.G.count({i, j}) || !G.G.count({j, k}) || !G.G.count({i, k})) continue;
        PolyMatrix via = G.G.at({i, j}) * pull_matrix(G.G.at({j, k}), A.transition(i, j));
        if (!poly_is_zero(via - G.G.at({i, k})))
          rep.fail("gluing cocycle fails on (" + chart_label(A, i) + ", " + chart_label(A, j) + ", " +
                   chart_label(A, k) + ")");
      }
  if (!G.frobenius.empty()) {
    if (G.frobenius.size() != A.charts.size()) rep.fail("Frobenius data must be given on every chart");
    for (size_t c = 0; c < G.frobenius.size() && c < A.charts.size(); ++c) {
      MFReport mr = validate_MF(G.frobenius[c]);
      if (!mr.valid())
        rep.fail(chart_label(A, static_cast<int>(c)) + ": Frobenius data fails " +
                 (mr.witnesses.empty() ? std::string("the axioms") : mr.witnesses[0]));
      if (G.frobenius[c].M.M.r != G.rank()) rep.fail(chart_label(A, static_cast<int>(c)) + ": Frobenius data has the wrong rank");
    }
  }
  return rep;
}

// ---------------------------------------------------------------- bicomplex

Bicomplex::Bicomplex(const GluedModule& G, int pd_cap)
    : G_(std::make_shared<const GluedModule>(G)), cap_(pd_cap), d_(G.atlas.dim()) {
  if (cap_ < 1) throw std::invalid_argument("PD cap must be at least 1");
  if (cap_ > 1 && G.lambda() != 1) throw std::invalid_argument("PD envelopes need a connection (lambda = 1)");
  const Atlas& A = G.atlas;
  const int N = static_cast<int>(A.charts.size());
  auto overlap = [&](int i, int j) { return A.overlaps.count({std::min(i, j), std::max(i, j)}) > 0; };
  std::function<void(std::vector<int>&)> grow = [&](std::vector<int>& J) {
    nerve_index_[J] = static_cast<int>(nerve_.size());
    nerve_.push_back(J);
    for (int u = J.back() + 1; u < N; ++u) {
      bool ok = true;
      for (int j : J) ok = ok && overlap(j, u);
      if (!ok) continue;
      J.push_back(u);
      grow(J);
      J.pop_back();
    }
  };
  for (int c = 0; c < N; ++c) {
    std::vector<int> J{c};
    grow(J);
  }
  // order by size so that lower Cech degrees come first
  std::vector<std::vector<int>> sorted = nerve_;
  std::stable_sort(sorted.begin(), sorted.end(), [](auto& x, auto& y) { return x.size() < y.size(); });
  nerve_ = sorted;
  nerve_index_.clear();
  for (size_t k = 0; k < nerve_.size(); ++k) nerve_index_[nerve_[k]] = static_cast<int>(k);
  cofaces_.assign(nerve_.size(), {});
  for (size_t k = 0; k < nerve_.size(); ++k) {
    chart_of_.push_back(A.intersection_chart(nerve_[k]));
    const auto& J = nerve_[k];
    for (int u = 0; u < N; ++u) {
      if (std::find(J.begin(), J.end(), u) != J.end()) continue;
      std::vector<int> Jp = J;
      Jp.insert(std::upper_bound(Jp.begin(), Jp.end(), u), u);
      auto it = nerve_index_.find(Jp);
      if (it == nerve_index_.end()) continue;
      int pos = static_cast<int>(std::find(Jp.begin(), Jp.end(), u) - Jp.begin());
      cofaces_[k].push_back({it->second, pos});
    }
  }
  for (auto& [key, ov] : A.overlaps)
    if (!G.G.count(key)) throw std::invalid_argument("gluing matrix missing on an overlap");
  grade();
}

void Bicomplex::grade() {
  const GluedModule& G = *G_;
  const Atlas& A = G.atlas;
  const int N = static_cast<int>(A.charts.size());
  const int d = d_;
  W_.assign(N, {});
  for (auto& [key, ov] : A.overlaps) {
    for (auto& f : ov.to_j.images) trans_deg_ = std::max(trans_deg_, max_abs_exponent(f));
    for (auto& f : ov.to_i.images) trans_deg_ = std::max(trans_deg_, max_abs_exponent(f));
  }
  for (auto& [key, g] : G.G)
    for (auto& row : g)
      for (auto& f : row) trans_deg_ = std::max(trans_deg_, max_abs_exponent(f));

  auto monomial_exp = [&](const LaurentPoly& f, const std::string& what) {
    if (f.terms.size() != 1 || !f.terms.begin()->second.is_unit())
      throw NotGraded(what + " is not a unit monomial; the complex has no torus grading");
    return f.terms.begin()->first;
  };
  auto weight_from = [&](int c, const Exp& e) {
    Exp w(d, 0);
    for (int v = 0; v < d; ++v) w = add(w, W_[c][v], e[v]);
    return w;
  };
  for (int root = 0; root < N; ++root) {
    if (!W_[root].empty()) continue;
    W_[root].assign(d, Exp(d, 0));
    for (int v = 0; v < d; ++v) W_[root][v][v] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      int i = q.front();
      q.pop();
      for (int j = 0; j < N; ++j) {
        if (j == i || !A.overlaps.count({std::min(i, j), std::max(i, j)})) continue;
        ChartMap tau = A.transition(i, j);
        std::vector<Exp> Wj;
        for (int v = 0; v < d; ++v)
          Wj.push_back(weight_from(i, monomial_exp(tau.images[v], "transition " + chart_label(A, i) + " -> " + chart_label(A, j))));
        if (W_[j].empty()) {
          W_[j] = Wj;
          q.push(j);
        } else if (W_[j] != Wj) {
          throw NotGraded("transitions around a loop of charts disagree on torus weights");
        }
      }
    }
  }
  W_inv_.clear();
  for (int c = 0; c < N; ++c) {
    std::vector<std::vector<int64_t>> M(d, std::vector<int64_t>(d));
    for (int i = 0; i < d; ++i)
      for (int v = 0; v < d; ++v) M[i][v] = W_[c][v][i];
    W_inv_.push_back(int_inverse(M));
  }

  const int r = G.rank();
  basis_w_.assign(N, std::vector<Exp>(r));
  std::vector<std::vector<bool>> known(N, std::vector<bool>(r, false));
  auto poly_weight = [&](int c, const LaurentPoly& f) {
    std::optional<Exp> w;
    for (auto& [e, coef] : f.terms) {
      Exp x = weight_from(c, e);
      if (w && *w != x) throw NotGraded("gluing matrix entry on " + chart_label(A, c) + " is not homogeneous");
      w = x;
    }
    return *w;
  };
  for (int root = 0; root < N; ++root) {
    bool any = false;
    for (int b = 0; b < r; ++b) any = any || known[root][b];
    if (any) continue;
    for (int b = 0; b < r; ++b) {
      basis_w_[root][b] = Exp(d, 0);
      known[root][b] = true;
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& [key, g] : G.G) {
        auto [i, j] = key;
        for (int k = 0; k < r; ++k)
          for (int b = 0; b < r; ++b) {
            if (g[k][b].is_zero()) continue;
            Exp gw = poly_weight(i, g[k][b]);
            if (known[i][k]) {
              Exp want = add(basis_w_[i][k], gw);
              if (!known[j][b]) {
                basis_w_[j][b] = want;
                known[j][b] = changed = true;
              } else if (basis_w_[j][b] != want) {
                throw NotGraded("gluing matrices admit no torus weights on the basis");
              }
            } else if (known[j][b]) {
              basis_w_[i][k] = add(basis_w_[j][b], gw, -1);
              known[i][k] = changed = true;
            }
          }
      }
    }
  }
  for (int c = 0; c < N; ++c)
    for (int b = 0; b < r; ++b)
      if (!known[c][b]) basis_w_[c][b] = Exp(d, 0);
  filt_w_.clear();
  for (auto& M : G.local) filt_w_.push_back(basis_weights(M));
}

int Bicomplex::max_degree() const {
  int m = -1;
  for (auto& J : nerve_) {
    int r = static_cast<int>(J.size()) - 1;
    m = std::max(m, r + d_ + std::min(d_ * r, cap_ - 1));
  }
  return m;
}

int Bicomplex::level(const Cell& c) const {
  return total(c.I) + filt_w_[nerve_[c.J][0]][c.b] + form_degree(c.mask);
}

Exp Bicomplex::weight(const Cell& c) const {
  const auto& J = nerve_[c.J];
  const int j0 = J[0];
  Exp w = basis_w_[j0][c.b];
  for (int v = 0; v < d_; ++v) {
    int k = c.a[v] + ((c.mask >> v) & 1);
    if (k) w = add(w, W_[j0][v], k);
  }
  for (size_t q = 0; q < c.I.size(); ++q) {
    int k = c.I[q] + ((c.mask >> (d_ + q)) & 1);
    if (k) w = add(w, W_[J[1 + q / d_]][q % d_], k);
  }
  return w;
}

bool Bicomplex::is_plain(const Cell& c) const {
  return (c.mask >> d_) == 0 && std::all_of(c.I.begin(), c.I.end(), [](int x) { return x == 0; });
}

std::string Bicomplex::describe(const Cell& c) const {
  std::ostringstream os;
  os << "U(";
  const auto& J = nerve_[c.J];
  for (size_t k = 0; k < J.size(); ++k) os << (k ? "," : "") << chart_label(G_->atlas, J[k]);
  os << ") t^(";
  for (size_t v = 0; v < c.a.size(); ++v) os << (v ? "," : "") << c.a[v];
  os << ")";
  if (!std::all_of(c.I.begin(), c.I.end(), [](int x) { return x == 0; })) {
    os << " xi^[";
    for (size_t v = 0; v < c.I.size(); ++v) os << (v ? "," : "") << c.I[v];
    os << "]";
  }
  os << " e" << c.b + 1;
  for (int v = 0; v < d_; ++v)
    if ((c.mask >> v) & 1) os << " dt" << v + 1;
  for (size_t q = 0; q < c.I.size(); ++q)
    if ((c.mask >> (d_ + q)) & 1) os << " dxi" << q / d_ + 1 << "." << q % d_ + 1;
  return os.str();
}

std::vector<Cell> Bicomplex::cells(const Exp& w, int m) const {
  std::vector<Cell> out;
  if (m < 0) return out;
  const int r_rank = G_->rank();
  for (size_t Jk = 0; Jk < nerve_.size(); ++Jk) {
    const auto& J = nerve_[Jk];
    const int r = static_cast<int>(J.size()) - 1;
    const int s = m - r;
    if (s < 0) continue;
    const int vars = d_ * r;
    const int nbits = d_ + vars;
    if (s > nbits) continue;
    const int j0 = J[0];
    for (FormMask mask : masks_of_degree(nbits, s)) {
      const int t = std::popcount(mask >> d_);
      if (t >= cap_) continue;
      for (const Exp& I : indices_below(vars, cap_ - t)) {
        for (int b = 0; b < r_rank; ++b) {
          Cell c{static_cast<int>(Jk), mask, b, Exp(d_, 0), I};
          Exp rest = w;
          Exp base = weight(c);  // weight with a = 0
          rest = add(rest, base, -1);
          Exp a(d_, 0);
          for (int i = 0; i < d_; ++i) {
            int64_t x = 0;
            for (int k = 0; k < d_; ++k) x += W_inv_[j0][i][k] * rest[k];
            a[i] = static_cast<int>(x);
          }
          if (!chart_of_[Jk].admits(a)) continue;
          c.a = a;
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

Cochain Bicomplex::nabla_part(const Cell& c) const {
  Cochain out;
  const int j0 = nerve_[c.J][0];
  const ConnModule& M = G_->local[j0].M;
  const CoeffRing& R = M.ring();
  for (int v = 0; v < d_; ++v) {
    FormMask bit = FormMask(1) << v;
    if (c.mask & bit) continue;
    const int sg = wedge_sign(bit, c.mask);
    RingElem sign = R.from_int(sg);
    if (M.lambda != 0 && c.a[v] != 0) {
      Cell y = c;
      y.mask |= bit;
      --y.a[v];
      add_to(out, y, R.from_int(static_cast<int64_t>(M.lambda) * c.a[v]) * sign);
    }
    for (int k = 0; k < M.r; ++k) {
      const LaurentPoly& f = M.A[v][k][c.b];
      for (auto& [e, coef] : f.terms) {
        Cell y = c;
        y.mask |= bit;
        y.b = k;
        y.a = add(c.a, e);
        add_to(out, y, coef * sign);
      }
    }
  }
  for (size_t q = 0; q < c.I.size(); ++q) {
    if (c.I[q] == 0) continue;
    FormMask bit = FormMask(1) << (d_ + q);
    if (c.mask & bit) continue;
    Cell y = c;
    y.mask |= bit;
    --y.I[q];
    add_to(out, y, R.from_int(static_cast<int64_t>(M.lambda) * wedge_sign(bit, c.mask)));
  }
  return out;
}

Cochain Bicomplex::face(const Cell& c, int Jplus, int k) const {
  if (k == 0) return face_zero(c, Jplus);
  const int r = cech_degree(c);
  Cell y;
  y.J = Jplus;
  y.b = c.b;
  y.a = c.a;
  y.I.assign(d_ * (r + 1), 0);
  y.mask = c.mask & ((FormMask(1) << d_) - 1);
  for (int m = 1; m <= r; ++m) {
    int mp = m < k ? m : m + 1;
    for (int v = 0; v < d_; ++v) {
      int q = (m - 1) * d_ + v, qp = (mp - 1) * d_ + v;
      y.I[qp] = c.I[q];
      if ((c.mask >> (d_ + q)) & 1) y.mask |= FormMask(1) << (d_ + qp);
    }
  }
  Cochain out;
  out.emplace(y, G_->atlas.ring().one());
  return out;
}

Cochain Bicomplex::face_zero(const Cell& c, int Jplus) const {
  const GluedModule& G = *G_;
  const Atlas& A = G.atlas;
  const CoeffRing& R = A.ring();
  const auto& Jp = nerve_[Jplus];
  const int r = cech_degree(c);  // source has r extra factors, target r + 1
  const int vars = d_ * (r + 1);
  const int N = cap_;
  const Chart& C = chart_of_[Jplus];
  const int u0 = Jp[0], u1 = Jp[1];
  std::vector<LaurentPoly> tau01 = A.transition(u0, u1).images;

  auto constant = [&](const LaurentPoly& f) { return PDPoly::constant(C, vars, Flavor::P, f); };
  auto generator = [&](int q) { return PDPoly::generator(C, vars, Flavor::P, q); };

  std::vector<PDPoly> phi_t;
  for (int v = 0; v < d_; ++v) phi_t.push_back(constant(tau01[v]) + generator(v));
  std::vector<PDPoly> phi_xi;
  for (int m = 1; m <= r; ++m) {
    const int um = Jp[m + 1];
    std::vector<LaurentPoly> t0m = A.transition(u0, um).images;
    std::vector<LaurentPoly> t1m = A.transition(u1, um).images;
    for (int v = 0; v < d_; ++v) {
      PDPoly x = generator(m * d_ + v) + constant(t0m[v]) - taylor_expand(t1m[v], tau01, C, vars, 0, N);
      if (!x.coeff(x.zero_key()).is_zero()) throw std::logic_error("transitions do not compose on a triple overlap");
      phi_xi.push_back(std::move(x));
    }
  }
  PDPoly coef = taylor_expand(LaurentPoly::monomial(R.one(), c.a), tau01, C, vars, 0, N);
  for (size_t q = 0; q < c.I.size(); ++q)
    if (c.I[q] > 0) coef = (coef * divided_power(phi_xi[q], c.I[q], N)).truncated(N - 1);

  // image of e'_b: the stratification applied to the gluing column
  const PolyMatrix& g = G.G.at({u0, u1});
  ModElem col = column(g, c.b);
  std::vector<PDPoly> e_img(G.rank(), PDPoly(C, vars, Flavor::P));
  if (N == 1) {
    for (int k = 0; k < G.rank(); ++k) e_img[k] = constant(col[k]);
  } else {
    std::vector<LaurentPoly> tau10 = A.transition(u1, u0).images;
    std::vector<PDPoly> zeta;
    for (int v = 0; v < d_; ++v)
      zeta.push_back(taylor_expand(tau10[v], tau01, C, vars, 0, N) - constant(LaurentPoly::variable(R, d_, v)));
    for (const Exp& L : indices_below(d_, N)) {
      ModElem nab = iterate_nabla(G.local[u0].M, L, col);
      if (is_zero(nab)) continue;
      PDPoly z = PDPoly::one(C, vars, Flavor::P);
      for (int v = 0; v < d_; ++v)
        if (L[v] > 0) z = (z * divided_power(zeta[v], L[v], N)).truncated(N - 1);
      for (int k = 0; k < G.rank(); ++k)
        if (!nab[k].is_zero()) e_img[k] += z.scaled(nab[k]);
    }
  }

  std::map<FormMask, PDPoly> form{{0, coef}};
  const int nbits_src = d_ + d_ * r;
  for (int bit = 0; bit < nbits_src; ++bit) {
    if (!((c.mask >> bit) & 1)) continue;
    OneForm w = pd_differential(bit < d_ ? phi_t[bit] : phi_xi[bit - d_], d_);
    std::map<FormMask, PDPoly> next;
    for (auto& [m, P] : form)
      for (auto& [b2, Q] : w) {
        FormMask fb = FormMask(1) << b2;
        if (m & fb) continue;
        PDPoly prod = (P * Q).truncated(N - 1);
        if (prod.is_zero()) continue;
        if (wedge_sign(m, fb) < 0) prod = -prod;
        auto it = next.find(m | fb);
        if (it == next.end())
          next.emplace(m | fb, prod);
        else
          it->second += prod;
      }
    form = std::move(next);
  }

  Cochain out;
  for (auto& [m, P] : form) {
    const int t = std::popcount(m >> d_);
    if (t >= N) continue;
    for (int k = 0; k < G.rank(); ++k) {
      if (e_img[k].is_zero()) continue;
      PDPoly Q = (P * e_img[k]).truncated(N - 1 - t);
      for (auto& [K, f] : Q.terms)
        for (auto& [e, x] : f.terms) add_to(out, Cell{Jplus, m, k, e, K}, x);
    }
  }
  return out;
}

const Cochain& Bicomplex::d(const Cell& c) const {
  auto it = cache_.find(c);
  if (it != cache_.end()) return it->second;
  const CoeffRing& R = G_->atlas.ring();
  Cochain out;
  for (auto [Jp, k] : cofaces_[c.J]) add_to(out, face(c, Jp, k), R.from_int(k % 2 ? -1 : 1));
  add_to(out, nabla_part(c), R.from_int(cech_degree(c) % 2 ? -1 : 1));
  Exp w = weight(c);
  for (auto& [y, v] : out) {
    if (!chart_of_[y.J].admits(y.a)) throw std::invalid_argument("differential of " + describe(c) + " leaves the chart ring");
    if (weight(y) != w) throw NotGraded("differential of " + describe(c) + " is not homogeneous");
  }
  return cache_.emplace(c, std::move(out)).first->second;
}

Cochain Bicomplex::d(const Cochain& x) const {
  Cochain out;
  for (auto& [c, v] : x) add_to(out, d(c), v);
  return out;
}

}  // namespace pdcrys
