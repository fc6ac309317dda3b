#include <algorithm>
#include <numeric>
#include <sstream>

#include "pdcrys/cohom.hpp"

namespace pdcrys {

namespace {

std::string weight_str(const Exp& w) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << ")";
  return os.str();
}

int sup_norm(const Exp& w) {
  int m = 0;
  for (int x : w) m = std::max(m, std::abs(x));
  return m;
}

std::vector<Cell> select(const Bicomplex& B, const Variant& v, const std::vector<Cell>& cells) {
  std::vector<Cell> out;
  for (auto& c : cells)
    if (v.contains(B.level(c))) out.push_back(c);
  return out;
}

std::map<Cell, int> index_of(const std::vector<Cell>& cells) {
  std::map<Cell, int> idx;
  for (size_t k = 0; k < cells.size(); ++k) idx.emplace(cells[k], static_cast<int>(k));
  return idx;
}

RingMatrix diag_powers(const CoeffRing& R, const std::vector<int>& e) {
  const int k = static_cast<int>(e.size());
  RingMatrix D(R, k, k);
  for (int i = 0; i < k; ++i) D.at(i, i) = R.p_power(std::min(e[i], R.n));
  return D;
}

RingMatrix safe_kernel(const RingMatrix& M) {
  if (M.cols == 0) return RingMatrix(*M.R, 0, 0);
  if (M.rows == 0) return RingMatrix::identity(*M.R, M.cols);
  return kernel(M);
}

}  // namespace

bool Variant::contains(int level) const {
  switch (part) {
    case Part::Full:
    case Part::Lambda:
      return true;
    case Part::Filtered:
      return level >= i;
    case Part::Graded:
      return level == i;
  }
  return false;
}

std::string Variant::str() const {
  switch (part) {
    case Part::Full:
      return "full";
    case Part::Filtered:
      return "F^" + std::to_string(i);
    case Part::Graded:
      return "gr^" + std::to_string(i);
    case Part::Lambda:
      return "Lambda";
  }
  return "?";
}

RingMatrix piece_differential(const Bicomplex& B, const Variant& v, const std::vector<Cell>& src,
                              const std::vector<Cell>& dst) {
  const CoeffRing& R = B.module().atlas.ring();
  RingMatrix M(R, static_cast<int>(dst.size()), static_cast<int>(src.size()));
  std::map<Cell, int> idx = index_of(dst);
  for (size_t j = 0; j < src.size(); ++j) {
    const int fx = B.level(src[j]);
    for (auto& [y, c] : B.d(src[j])) {
      auto it = idx.find(y);
      const int fy = B.level(y);
      if (it == idx.end()) {
        if (v.part == Part::Graded && fy != v.i) continue;
        throw std::logic_error("differential of " + B.describe(src[j]) + " leaves the " + v.str() + " complex at " +
                               B.describe(y));
      }
      RingElem x = c;
      if (v.part == Part::Lambda) {
        const int top = v.i - 1;
        int gap = std::min(fy, top) - std::min(fx, top);
        if (gap < 0) throw std::logic_error("differential lowers the filtration");
        x = x * R.p_power(std::min(gap, R.n));
      }
      M.at(it->second, static_cast<int>(j)) += x;
    }
  }
  return M;
}

PieceHomology piece_homology(const Bicomplex& B, const Exp& w, int m, const Variant& v) {
  const CoeffRing& R = B.module().atlas.ring();
  PieceHomology H;
  H.w = w;
  H.m = m;
  H.v = v;
  H.cells = select(B, v, B.cells(w, m));
  H.index = index_of(H.cells);
  const int cm = static_cast<int>(H.cells.size());
  if (cm == 0) return H;
  std::vector<Cell> up = select(B, v, B.cells(w, m + 1));
  std::vector<Cell> down = select(B, v, B.cells(w, m - 1));
  H.K = safe_kernel(piece_differential(B, v, H.cells, up));
  const int k = H.K.cols;
  if (k == 0) return H;
  RingMatrix Dd = piece_differential(B, v, down, H.cells);
  RingMatrix L(R, k, 0);
  {
    RingMatrix aug = hcat(H.K, Dd.scaled(-R.one()));
    RingMatrix rel = safe_kernel(aug);
    L = RingMatrix(R, k, std::max(rel.cols, 1));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < rel.cols; ++j) L.at(i, j) = rel.at(i, j);
  }
  SmithForm S = smith(L);
  H.P = S.P;
  for (int j = 0; j < k; ++j) {
    int e = j < static_cast<int>(S.diag.size()) ? S.diag[j] : R.n;
    if (e == 0) continue;
    H.rows.push_back(j);
    H.exps.push_back(e);
    Cochain rep;
    for (int i = 0; i < cm; ++i) {
      RingElem x = R.zero();
      for (int t = 0; t < k; ++t) x += H.K.at(i, t) * S.Pinv.at(t, j);
      add_to(rep, H.cells[i], x);
    }
    H.reps.push_back(std::move(rep));
  }
  return H;
}

std::optional<std::vector<RingElem>> PieceHomology::classify(const Cochain& x) const {
  if (x.empty()) {
    if (exps.empty()) return std::vector<RingElem>{};
    return std::vector<RingElem>(exps.size(), K.R->zero());
  }
  const CoeffRing* R = x.begin()->second.R;
  std::vector<RingElem> vec(cells.size(), R->zero());
  for (auto& [c, v] : x) {
    auto it = index.find(c);
    if (it == index.end()) return std::nullopt;
    vec[it->second] = v;
  }
  if (K.cols == 0) return std::nullopt;
  auto y = solve(K, vec);
  if (!y) return std::nullopt;
  std::vector<RingElem> out;
  for (size_t j = 0; j < exps.size(); ++j) {
    RingElem s = R->zero();
    for (int t = 0; t < K.cols; ++t) s += P.at(rows[j], t) * (*y)[t];
    out.push_back(s.residue(exps[j]));
  }
  return out;
}

int Group::length() const { return std::accumulate(exps.begin(), exps.end(), 0); }

std::vector<int> Group::invariants() const {
  std::vector<int> out = exps;
  std::sort(out.begin(), out.end());
  return out;
}

MapAnalysis analyze_map(const RingMatrix& M, const std::vector<int>& src, const std::vector<int>& dst) {
  MapAnalysis a;
  a.source_length = std::accumulate(src.begin(), src.end(), 0);
  a.target_length = std::accumulate(dst.begin(), dst.end(), 0);
  if (src.empty()) return a;
  const CoeffRing& R = *M.R;
  const int ns = static_cast<int>(src.size());
  RingMatrix Ksol = RingMatrix::identity(R, ns);
  if (!dst.empty()) {
    RingMatrix rel = safe_kernel(hcat(M, diag_powers(R, dst)));
    Ksol = RingMatrix(R, ns, rel.cols);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < rel.cols; ++j) Ksol.at(i, j) = rel.at(i, j);
  }
  a.image_invariants = cokernel_invariants(hcat(Ksol, diag_powers(R, src)));
  a.image_length = std::accumulate(a.image_invariants.begin(), a.image_invariants.end(), 0);
  a.kernel_length = a.source_length - a.image_length;
  return a;
}

// ---------------------------------------------------------------- engine

Engine::Engine(const GluedModule& G, Caps caps) : plain_(G, 1), caps_(caps) {
  D_ = caps.poly >= 0 ? caps.poly : 4 * plain_.transition_degree() * (plain_.dim() + 2);
}

std::vector<Exp> Engine::weights(int bound) const {
  const int d = dim();
  std::vector<Exp> out;
  Exp w(d, -bound);
  if (d == 0) return {Exp{}};
  while (true) {
    out.push_back(w);
    int k = 0;
    while (k < d && w[k] == bound) w[k++] = -bound;
    if (k == d) break;
    ++w[k];
  }
  return out;
}

std::vector<Exp> Engine::shell() const {
  std::vector<Exp> out;
  for (auto& w : weights(D_ + 1))
    if (sup_norm(w) == D_ + 1) out.push_back(w);
  return out;
}

const PieceHomology& Engine::piece(const Bicomplex& B, const Exp& w, int m, const Variant& v) const {
  auto key = std::make_tuple(&B == &plain_ ? 0 : 1, w, m, v);
  auto it = pieces_.find(key);
  if (it != pieces_.end()) return it->second;
  return pieces_.emplace(key, piece_homology(B, w, m, v)).first->second;
}

void Engine::certify(int m, const Variant& v) const {
  if (!caps_.certify) return;
  for (auto& w : shell()) {
    const PieceHomology& H = piece(plain_, w, m, v);
    if (H.size() > 0)
      throw StabilizationFailure("H^" + std::to_string(m) + " (" + v.str() + ") has classes of weight " + weight_str(w) +
                                 " just outside the cap " + std::to_string(D_));
  }
}

const Group& Engine::group(int m, const Variant& v) const {
  auto key = std::make_pair(m, v);
  auto it = groups_.find(key);
  if (it != groups_.end()) return it->second;
  Group g;
  g.m = m;
  g.v = v;
  if (plain_.nerve().empty()) return groups_.emplace(key, std::move(g)).first->second;
  certify(m, v);
  for (auto& w : weights(D_)) {
    const PieceHomology& H = piece(plain_, w, m, v);
    if (H.size() == 0) continue;
    g.first[w] = g.size();
    for (int k = 0; k < H.size(); ++k) {
      g.classes.push_back({w, k});
      g.exps.push_back(H.exps[k]);
    }
  }
  return groups_.emplace(key, std::move(g)).first->second;
}

std::vector<RingElem> Engine::classify(const Group& g, const Cochain& x) const {
  const CoeffRing& R = module().atlas.ring();
  std::vector<RingElem> out(g.size(), R.zero());
  std::map<Exp, Cochain> parts;
  for (auto& [c, v] : x) parts[plain_.weight(c)].emplace(c, v);
  for (auto& [w, part] : parts) {
    const PieceHomology& H = piece(plain_, w, g.m, g.v);
    auto coords = H.classify(part);
    if (!coords)
      throw std::logic_error("cochain of weight " + weight_str(w) + " is not a cycle of " + g.v.str() + " in degree " +
                             std::to_string(g.m));
    auto it = g.first.find(w);
    if (it == g.first.end()) {
      for (auto& c : *coords)
        if (!c.is_zero())
          throw StabilizationFailure("a class of weight " + weight_str(w) + " lies outside the cap " + std::to_string(D_));
      continue;
    }
    for (size_t k = 0; k < coords->size(); ++k) out[it->second + k] = (*coords)[k];
  }
  return out;
}

Cochain Engine::representative(const Group& g, int k) const {
  const ClassRef& c = g.classes.at(k);
  return piece(plain_, c.w, g.m, g.v).reps.at(c.index);
}

RingMatrix Engine::map_matrix(const Group& src, const Group& dst,
                              const std::function<Cochain(const Cochain&)>& f) const {
  const CoeffRing& R = module().atlas.ring();
  RingMatrix M(R, dst.size(), src.size());
  for (int k = 0; k < src.size(); ++k) {
    std::vector<RingElem> col = classify(dst, f(representative(src, k)));
    for (int i = 0; i < dst.size(); ++i) M.at(i, k) = col[i];
  }
  return M;
}

// ---------------------------------------------------------------- Frobenius

int Engine::required_pd_cap() const {
  const GluedModule& G = module();
  bool agree = true;
  int max_vars = 0;
  const auto& nerve = plain_.nerve();
  for (size_t J = 0; J < nerve.size(); ++J) {
    if (nerve[J].size() < 2) continue;
    max_vars = std::max(max_vars, dim() * static_cast<int>(nerve[J].size() - 1));
    std::vector<FrobLift> lifts;
    std::vector<ChartMap> to;
    Chart base = G.atlas.intersection_chart(nerve[J]);
    for (size_t k = 1; k < nerve[J].size(); ++k) {
      lifts.push_back(G.frobenius[nerve[J][k]].F);
      to.push_back(ChartMap{base, G.atlas.charts[nerve[J][k]], G.atlas.transition(nerve[J][0], nerve[J][k]).images});
    }
    if (!diagonal_pullback(G.frobenius[nerve[J][0]], lifts, to, 1).lifts_agree()) agree = false;
  }
  if (agree) return 1;
  const int p = this->p(), n = this->n(), top = p - 1;
  if (p == 2) throw TruncationOverflow("at p = 2 divided powers of incompatible lifts never vanish; use compatible lifts");
  // phi^i_C of xi^[I] dxi_T carries p^{|I| + |T| - i} / I!; it dies once that is divisible by p^n
  auto ok = [&](int N) {
    const int hi = N + (n + top) * (p - 1) + 2 * p;
    for (int k = std::max(0, N - max_vars); k <= hi; ++k) {
      int t = std::max(0, N - k);
      if (k + t - vp_factorial(p, k) - top < n) return false;
    }
    return true;
  };
  for (int N = 1; N < 512; ++N)
    if (ok(N)) return N;
  throw TruncationOverflow("no PD cap makes the Frobenius terms vanish");
}

int Engine::pd_cap() const {
  if (pd_cap_ >= 0) return pd_cap_;
  if (!module().has_frobenius()) {
    pd_cap_ = std::max(1, caps_.pd);
    return pd_cap_;
  }
  int req = required_pd_cap();
  if (caps_.pd >= 0) {
    if (caps_.pd < req)
      throw TruncationOverflow("PD cap " + std::to_string(caps_.pd) + " is below the " + std::to_string(req) +
                               " needed for the Frobenius terms to vanish");
    pd_cap_ = caps_.pd;
  } else {
    pd_cap_ = req;
  }
  return pd_cap_;
}

const Bicomplex& Engine::pd() const {
  if (pd_cap() == 1) return plain_;
  if (!pd_) pd_ = std::make_unique<Bicomplex>(module(), pd_cap());
  return *pd_;
}

const PDFontaineData& Engine::pd_data(int J) const {
  auto it = pd_data_.find(J);
  if (it != pd_data_.end()) return it->second;
  const GluedModule& G = module();
  if (!G.has_frobenius()) throw std::invalid_argument("the module carries no Frobenius data");
  const auto& S = plain_.nerve().at(J);
  std::vector<FrobLift> lifts;
  std::vector<ChartMap> to;
  Chart base = G.atlas.intersection_chart(S);
  for (size_t k = 1; k < S.size(); ++k) {
    lifts.push_back(G.frobenius[S[k]].F);
    to.push_back(ChartMap{base, G.atlas.charts[S[k]], G.atlas.transition(S[0], S[k]).images});
  }
  return pd_data_.emplace(J, diagonal_pullback(G.frobenius[S[0]], lifts, to, pd_cap())).first->second;
}

Cochain Engine::phi_image(const Cell& c, const RingElem& coef, int i) const {
  const GluedModule& G = module();
  const CoeffRing& R = G.atlas.ring();
  const int d = dim();
  const int j0 = plain_.nerve()[c.J][0];
  const PDFontaineData& data = pd_data(c.J);
  const FontaineModule& FM = G.frobenius[j0];
  auto dit = dF_.find(j0);
  if (dit == dF_.end()) dit = dF_.emplace(j0, dF_over_p(FM.F)).first;
  const PolyMatrix& dF = dit->second;

  const int s = form_degree(c.mask);
  ModElem mod = data.phi_diagonal(i - s, c.I, c.b);
  LaurentPoly scal = FM.F.pullback(LaurentPoly::monomial(sigma(coef), c.a));

  std::map<FormMask, LaurentPoly> form{{0, LaurentPoly::constant(R.one(), d)}};
  const int nbits = d + static_cast<int>(c.I.size());
  for (int bit = 0; bit < nbits; ++bit) {
    if (!((c.mask >> bit) & 1)) continue;
    std::vector<LaurentPoly> w(d);
    for (int u = 0; u < d; ++u) w[u] = bit < d ? dF[u][bit] : derive(data.z0[bit - d], u);
    std::map<FormMask, LaurentPoly> next;
    for (auto& [m, f] : form)
      for (int u = 0; u < d; ++u) {
        FormMask ub = FormMask(1) << u;
        if ((m & ub) || w[u].is_zero()) continue;
        LaurentPoly g = f * w[u];
        if (wedge_sign(m, ub) < 0) g = -g;
        next[m | ub] += g;
      }
    form = std::move(next);
  }
  Cochain out;
  Exp zero(c.I.size(), 0);
  for (auto& [m, f] : form) {
    if (f.is_zero()) continue;
    LaurentPoly base = scal * f;
    for (int k = 0; k < G.rank(); ++k) {
      if (mod[k].is_zero()) continue;
      LaurentPoly g = base * mod[k];
      for (auto& [e, x] : g.terms) add_to(out, Cell{c.J, m, k, e, zero}, x);
    }
  }
  return out;
}

Cochain Engine::phi_image(const Cochain& z, int i) const {
  Cochain out;
  const CoeffRing& R = module().atlas.ring();
  for (auto& [c, v] : z) add_to(out, phi_image(c, v, i), R.one());
  return out;
}

Cochain Engine::psi_image(const Cochain& z) const {
  Cochain out;
  const CoeffRing& R = module().atlas.ring();
  const Bicomplex& B = pd();
  for (auto& [c, v] : z) add_to(out, phi_image(c, v, std::min(B.level(c), p() - 1)), R.one());
  return out;
}

std::pair<Cochain, Cochain> Engine::lift(const Cochain& rep, const Exp& w, int m, const Variant& v) const {
  const Bicomplex& B = pd();
  const CoeffRing& R = module().atlas.ring();
  std::vector<Cell> zc = select(B, v, B.cells(w, m));
  std::vector<Cell> zr = select(B, v, B.cells(w, m + 1));
  std::vector<Cell> yc = select(plain_, v, plain_.cells(w, m - 1));
  std::vector<Cell> xr = select(plain_, v, plain_.cells(w, m));
  const int nz = static_cast<int>(zc.size()), ny = static_cast<int>(yc.size());
  const int nr = static_cast<int>(zr.size()), nx = static_cast<int>(xr.size());
  RingMatrix M(R, nr + nx, nz + ny);
  RingMatrix D1 = piece_differential(B, v, zc, zr);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nz; ++j) M.at(i, j) = D1.at(i, j);
  std::map<Cell, int> xi = index_of(xr);
  for (int j = 0; j < nz; ++j) {
    if (!B.is_plain(zc[j])) continue;
    auto it = xi.find(zc[j]);
    if (it != xi.end()) M.at(nr + it->second, j) = R.one();
  }
  RingMatrix D0 = piece_differential(plain_, v, yc, xr);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) M.at(nr + i, nz + j) = -D0.at(i, j);
  std::vector<RingElem> rhs(nr + nx, R.zero());
  for (auto& [c, x] : rep) {
    auto it = xi.find(c);
    if (it == xi.end()) throw std::logic_error("representative leaves the " + v.str() + " complex");
    rhs[nr + it->second] = x;
  }
  auto sol = solve(M, rhs);
  if (!sol) throw StabilizationFailure("a class of weight " + weight_str(w) + " does not lift to the PD complex");
  Cochain z1, z2;
  for (int j = 0; j < nz; ++j) add_to(z1, zc[j], (*sol)[j]);
  z2 = z1;
  RingMatrix K = safe_kernel(M);
  for (int t = 0; t < K.cols; ++t)
    for (int j = 0; j < nz; ++j) add_to(z2, zc[j], K.at(j, t));
  return {z1, z2};
}

}  // namespace pdcrys
