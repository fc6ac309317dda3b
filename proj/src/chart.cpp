#include "pdcrys/chart.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace pdcrys {

bool Chart::admits(const Exp& e) const {
  for (int i = 0; i < d; ++i)
    if (e[i] < 0 && !invertible[i]) return false;
  return true;
}

bool Chart::admits(const LaurentPoly& f) const {
  for (auto& [e, c] : f.terms)
    if (!admits(e)) return false;
  return true;
}

Chart Chart::at_level(const CoeffRing& r) const {
  Chart c = *this;
  c.R = &r;
  for (auto& u : c.extra_units) u = r.n <= u.R->n ? reduce(u, r) : lift(u, r);
  return c;
}

Chart Chart::localized(const std::vector<bool>& more) const {
  Chart c = *this;
  for (int i = 0; i < d; ++i) c.invertible[i] = invertible[i] || (i < static_cast<int>(more.size()) && more[i]);
  return c;
}

bool Chart::is_unit(const LaurentPoly& f) const {
  if (!is_laurent_unit(f)) return false;
  return admits(f) && admits(unit_inverse(f));
}

namespace {

RingElem convert(const RingElem& c, const CoeffRing& T) {
  if (c.R == &T) return c;
  return c.R->n >= T.n ? reduce(c, T) : lift(c, T);
}

}  // namespace

LaurentPoly ChartMap::apply(const LaurentPoly& f, bool sigma_twist) const {
  const CoeffRing& T = *source.R;
  LaurentPoly out(T, source.d);
  std::map<std::pair<int, int>, LaurentPoly> cache;
  auto power = [&](int j, int e) -> const LaurentPoly& {
    auto key = std::make_pair(j, e);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    LaurentPoly base = images[j].R == &T ? images[j] : (images[j].R->n >= T.n ? reduce(images[j], T) : lift(images[j], T));
    return cache.emplace(key, base.pow(e)).first->second;
  };
  for (auto& [e, c] : f.terms) {
    RingElem cc = convert(sigma_twist ? sigma(c) : c, T);
    LaurentPoly term = LaurentPoly::constant(cc, source.d);
    for (int j = 0; j < target.d; ++j)
      if (e[j] != 0) term = term * power(j, e[j]);
    out += term;
  }
  return out;
}

ChartMap ChartMap::at_level(const CoeffRing& r) const {
  ChartMap m = *this;
  m.source = source.at_level(r);
  m.target = target.at_level(r);
  for (auto& f : m.images) f = f.R->n >= r.n ? reduce(f, r) : lift(f, r);
  return m;
}

bool ChartMap::is_monomial() const {
  return std::all_of(images.begin(), images.end(),
                     [](const LaurentPoly& f) { return f.terms.size() == 1 && f.terms.begin()->second.is_unit(); });
}

ChartMap identity_map(const Chart& c) {
  ChartMap m{c, c, {}};
  for (int i = 0; i < c.d; ++i) m.images.push_back(LaurentPoly::variable(*c.R, c.d, i));
  return m;
}

ChartMap compose(const ChartMap& b, const ChartMap& a) {
  ChartMap m{a.source, b.target, {}};
  for (auto& img : b.images) m.images.push_back(a.apply(img));
  return m;
}

namespace {

// inverse of an integer matrix with determinant +-1 (d <= 4), by cofactors
std::vector<std::vector<int64_t>> unimodular_inverse(const std::vector<std::vector<int64_t>>& M) {
  const int d = static_cast<int>(M.size());
  std::function<int64_t(const std::vector<std::vector<int64_t>>&)> det =
      [&](const std::vector<std::vector<int64_t>>& A) -> int64_t {
    const size_t k = A.size();
    if (k == 0) return 1;
    if (k == 1) return A[0][0];
    int64_t acc = 0;
    for (size_t j = 0; j < k; ++j) {
      std::vector<std::vector<int64_t>> minor;
      for (size_t i = 1; i < k; ++i) {
        std::vector<int64_t> row;
        for (size_t c = 0; c < k; ++c)
          if (c != j) row.push_back(A[i][c]);
        minor.push_back(row);
      }
      acc += (j % 2 ? -1 : 1) * A[0][j] * det(minor);
    }
    return acc;
  };
  int64_t D = det(M);
  if (D != 1 && D != -1) throw RingError("monomial transition is not invertible");
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
      inv[i][j] = ((i + j) % 2 ? -1 : 1) * det(minor) * D;
    }
  return inv;
}

}  // namespace

ChartMap monomial_inverse(const ChartMap& m) {
  if (!m.is_monomial()) throw RingError("transition is not monomial; supply its inverse");
  const int d = m.target.d;
  if (m.source.d != d) throw DimensionMismatch("monomial inverse needs equal dimensions");
  std::vector<std::vector<int64_t>> M(d, std::vector<int64_t>(d));
  std::vector<RingElem> c;
  for (int j = 0; j < d; ++j) {
    auto& [e, coef] = *m.images[j].terms.begin();
    for (int i = 0; i < d; ++i) M[j][i] = e[i];
    c.push_back(coef);
  }
  auto N = unimodular_inverse(M);
  ChartMap out{m.target, m.source, {}};
  const CoeffRing& R = *m.source.R;
  for (int i = 0; i < d; ++i) {
    RingElem coef = R.one();
    Exp e(d);
    for (int j = 0; j < d; ++j) {
      e[j] = static_cast<int>(N[i][j]);
      int64_t k = -N[i][j];
      RingElem base = k >= 0 ? c[j] : c[j].inv();
      coef = coef * base.pow(static_cast<uint64_t>(k >= 0 ? k : -k));
    }
    out.images.push_back(LaurentPoly::monomial(coef, e));
  }
  return out;
}

// ---------------------------------------------------------------- Frobenius lifts

FrobLift FrobLift::standard(const Chart& c, const std::string& name) {
  const CoeffRing& U = c.R->at_level(c.R->n + 1);
  return with_corrections(c, std::vector<LaurentPoly>(c.d, LaurentPoly(U, c.d)), name);
}

FrobLift FrobLift::with_corrections(const Chart& c, const std::vector<LaurentPoly>& a, const std::string& name) {
  FrobLift F;
  F.chart = c;
  F.name = name;
  const CoeffRing& U = c.R->at_level(c.R->n + 1);
  for (auto& f : a) F.a.push_back(f.R->n >= U.n ? reduce(f, U) : lift(f, U));
  if (static_cast<int>(F.a.size()) != c.d) throw DimensionMismatch("lift needs one correction per coordinate");
  for (auto& f : F.a)
    if (!c.admits(f)) throw RingError("lift correction uses a non-invertible coordinate");
  return F;
}

std::vector<LaurentPoly> FrobLift::images() const {
  const CoeffRing& U = upper();
  std::vector<LaurentPoly> out;
  for (int i = 0; i < chart.d; ++i) {
    Exp e(chart.d, 0);
    e[i] = U.p;
    out.push_back(LaurentPoly::monomial(U.one(), e) + times_p(a[i]));
  }
  return out;
}

ChartMap FrobLift::as_map() const {
  const CoeffRing& U = upper();
  Chart c = chart.at_level(U);
  return ChartMap{c, c, images()};
}

LaurentPoly FrobLift::pullback_upper(const LaurentPoly& f) const { return as_map().apply(f, true); }

LaurentPoly FrobLift::pullback(const LaurentPoly& f) const {
  ChartMap m = as_map().at_level(*chart.R);
  return m.apply(f, true);
}

PolyMatrix FrobLift::pullback(const PolyMatrix& M) const {
  ChartMap m = as_map().at_level(*chart.R);
  PolyMatrix out = M;
  for (auto& row : out)
    for (auto& x : row) x = m.apply(x, true);
  return out;
}

PolyMatrix dF_over_p(const FrobLift& F) {
  const int d = F.chart.d;
  auto imgs = F.images();
  PolyMatrix out = poly_zero_matrix(*F.chart.R, d, d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      LaurentPoly g = derive(imgs[j], i);
      try {
        out[i][j] = p_divide(g);
      } catch (const NotDivisible&) {
        throw std::logic_error("dF/p: derivative of a Frobenius lift is not divisible by p");
      }
    }
  return out;
}

FrobLift transport_lift(const FrobLift& F, const ChartMap& to, const ChartMap& from, const Chart& target) {
  const CoeffRing& U = F.upper();
  ChartMap Fu = F.as_map();
  ChartMap to_u = to.at_level(U);
  ChartMap from_u = from.at_level(U);
  std::vector<LaurentPoly> a;
  for (int i = 0; i < target.d; ++i) {
    // F'*(t_i') = from_i(F*(x')) with x = to(t)
    LaurentPoly img = to_u.apply(Fu.apply(from_u.images[i], true));
    Exp e(target.d, 0);
    e[i] = U.p;
    LaurentPoly diff = img - LaurentPoly::monomial(U.one(), e);
    a.push_back(lift(p_divide(diff), U));
  }
  return FrobLift::with_corrections(target, a, F.name);
}

// ---------------------------------------------------------------- atlases

Chart Atlas::intersection_chart(const std::vector<int>& J) const {
  Chart c = charts.at(J.at(0));
  for (size_t k = 1; k < J.size(); ++k) c = c.localized(side(J[0], J[k]).invertible);
  return c;
}

ChartMap Atlas::transition(int i, int j) const {
  if (i == j) return identity_map(charts.at(i));
  if (i < j) return overlaps.at({i, j}).to_j;
  return overlaps.at({j, i}).to_i;
}

Chart Atlas::side(int a, int b) const {
  if (a == b) return charts.at(a);
  if (a < b) return overlaps.at({a, b}).chart;
  return overlaps.at({b, a}).chart_j;
}

void Atlas::add_overlap(int i, int j, const std::vector<bool>& inv_on_i, const std::vector<LaurentPoly>& images,
                        const std::vector<LaurentPoly>& inverse_images) {
  if (i >= j) throw std::invalid_argument("overlap indices must satisfy i < j");
  Overlap ov;
  ov.i = i;
  ov.j = j;
  ov.chart = charts.at(i).localized(inv_on_i);
  ov.to_j = ChartMap{ov.chart, charts.at(j), images};
  std::vector<bool> inv_j = charts.at(j).invertible;
  for (int l = 0; l < charts.at(j).d; ++l)
    if (ov.chart.is_unit(images.at(l))) inv_j[l] = true;
  ov.chart_j = charts.at(j).localized(inv_j);
  if (inverse_images.empty()) {
    ov.to_i = monomial_inverse(ov.to_j);
    ov.to_i.source = ov.chart_j;
    ov.to_i.target = charts.at(i);
  } else {
    ov.to_i = ChartMap{ov.chart_j, charts.at(i), inverse_images};
  }
  overlaps[{i, j}] = ov;
}

namespace {

std::string chart_label(const Atlas& A, int i) {
  const std::string& nm = A.charts[i].name;
  return nm.empty() ? "chart " + std::to_string(i) : nm;
}

// Is 1/t_l in the ring generated by O(U_i) and the pulled-back O(U_j)?  Bounded search.
bool inverse_generated(const Atlas& A, const Overlap& ov, int l) {
  const Chart& ci = A.charts[ov.i];
  const Chart& cj = A.charts[ov.j];
  const int d = ci.d;
  const int B = d == 1 ? 4 : 2;
  const CoeffRing& R = *ci.R;
  std::vector<LaurentPoly> gens;
  std::vector<Exp> boxes_i, boxes_j;
  std::function<void(Exp&, int, const Chart&, std::vector<Exp>&)> enumerate = [&](Exp& e, int k, const Chart& c,
                                                                                  std::vector<Exp>& out) {
    if (k == c.d) {
      out.push_back(e);
      return;
    }
    for (int v = c.invertible[k] ? -B : 0; v <= B; ++v) {
      e[k] = v;
      enumerate(e, k + 1, c, out);
    }
  };
  Exp ei(ci.d), ej(cj.d);
  enumerate(ei, 0, ci, boxes_i);
  enumerate(ej, 0, cj, boxes_j);
  for (auto& mj : boxes_j) {
    LaurentPoly img = LaurentPoly::constant(R.one(), d);
    for (int k = 0; k < cj.d; ++k)
      if (mj[k] != 0) img = img * ov.to_j.images[k].pow(mj[k]);
    for (auto& mi : boxes_i) gens.push_back(img.shifted(mi));
  }
  Exp target(d, 0);
  target[l] = -1;
  std::map<Exp, int> rows;
  for (auto& g : gens)
    for (auto& [e, c] : g.terms) rows.emplace(e, 0);
  if (!rows.count(target)) return false;
  int r = 0;
  for (auto& [e, idx] : rows) idx = r++;
  RingMatrix M(R, r, static_cast<int>(gens.size()));
  for (size_t k = 0; k < gens.size(); ++k)
    for (auto& [e, c] : gens[k].terms) M.at(rows[e], static_cast<int>(k)) = c;
  std::vector<RingElem> b(r, R.zero());
  b[rows[target]] = R.one();
  return solve(M, b).has_value();
}

}  // namespace

AtlasReport validate_atlas(const Atlas& A) {
  AtlasReport rep;
  auto fail = [&](const std::string& msg) {
    rep.valid = false;
    rep.failures.push_back(msg);
  };
  const int N = static_cast<int>(A.charts.size());
  for (int i = 0; i < N; ++i) {
    const Chart& c = A.charts[i];
    if (c.d != A.dim()) fail(chart_label(A, i) + ": dimension differs from the atlas");
    for (auto& u : c.extra_units)
      if (!c.is_unit(u)) fail(chart_label(A, i) + ": declared unit " + u.str() + " is not invertible");
  }
  for (auto& [key, ov] : A.overlaps) {
    std::string where = "overlap (" + chart_label(A, ov.i) + ", " + chart_label(A, ov.j) + ")";
    for (int l = 0; l < ov.chart.d; ++l) {
      if (!ov.chart.admits(ov.to_j.images[l])) fail(where + ": transition image uses a non-invertible coordinate");
      if (ov.chart_j.invertible[l] && !ov.chart.is_unit(ov.to_j.images[l]))
        fail(where + ": image of an invertible coordinate is not a unit");
      if (!ov.chart_j.admits(ov.to_i.images[l])) fail(where + ": inverse transition uses a non-invertible coordinate");
    }
    try {
      ChartMap round_i = compose(ov.to_i, ov.to_j);
      ChartMap round_j = compose(ov.to_j, ov.to_i);
      for (int l = 0; l < ov.chart.d; ++l) {
        if (round_i.images[l] != LaurentPoly::variable(*ov.chart.R, ov.chart.d, l))
          fail(where + ": transitions are not mutually inverse");
        if (round_j.images[l] != LaurentPoly::variable(*ov.chart.R, ov.chart.d, l))
          fail(where + ": transitions are not mutually inverse");
      }
    } catch (const NotDivisible& e) {
      fail(where + ": " + e.what());
    }
    for (int l = 0; l < ov.chart.d; ++l) {
      if (ov.chart.invertible[l] && !A.charts[ov.i].invertible[l] && !inverse_generated(A, ov, l))
        fail(where + ": overlap ring is not generated by the two charts (coordinate " + std::to_string(l + 1) +
             " is inverted without a witness)");
    }
  }
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      for (int k = j + 1; k < N; ++k) {
        if (!A.overlaps.count({i, j}) || !A.overlaps.count({j, k}) || !A.overlaps.count({i, k})) continue;
        ChartMap direct = A.transition(i, k);
        ChartMap via = compose(A.transition(j, k), A.transition(i, j));
        for (int l = 0; l < A.dim(); ++l)
          if (direct.images[l] != via.images[l])
            fail("cocycle fails on (" + chart_label(A, i) + ", " + chart_label(A, j) + ", " + chart_label(A, k) + ")");
      }
  if (!A.lifts.empty()) {
    if (static_cast<int>(A.lifts.size()) != N) fail("need one Frobenius lift per chart");
    for (int i = 0; i < static_cast<int>(A.lifts.size()); ++i)
      for (auto& f : A.lifts[i].a)
        if (!A.charts[i].admits(f)) fail(chart_label(A, i) + ": lift correction not regular on the chart");
  }
  return rep;
}

Atlas affine_atlas(const CoeffRing& R, int d) {
  Atlas A;
  A.charts.push_back(Chart(R, d, {}, "A"));
  A.lifts.push_back(FrobLift::standard(A.charts[0], "F"));
  return A;
}

Atlas torus_atlas(const CoeffRing& R, int d) {
  Atlas A;
  A.charts.push_back(Chart(R, d, std::vector<bool>(d, true), "G"));
  A.lifts.push_back(FrobLift::standard(A.charts[0], "F"));
  return A;
}

Atlas projective_line(const CoeffRing& R) {
  Atlas A;
  A.charts.push_back(Chart(R, 1, {false}, "U0"));
  A.charts.push_back(Chart(R, 1, {false}, "U1"));
  A.add_overlap(0, 1, {true}, {LaurentPoly::monomial(R.one(), {-1})});
  A.lifts.push_back(FrobLift::standard(A.charts[0], "F0"));
  A.lifts.push_back(FrobLift::standard(A.charts[1], "F1"));
  return A;
}

namespace {

LaurentPoly embed(const LaurentPoly& f, int total, int offset) {
  LaurentPoly out(*f.R, total);
  for (auto& [e, c] : f.terms) {
    Exp g(total, 0);
    for (size_t i = 0; i < e.size(); ++i) g[offset + i] = e[i];
    out.add_term(g, c);
  }
  return out;
}

}  // namespace

Atlas product_atlas(const Atlas& A, const Atlas& B) {
  Atlas P;
  const int da = A.dim(), db = B.dim(), d = da + db;
  const int na = static_cast<int>(A.charts.size()), nb = static_cast<int>(B.charts.size());
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) {
      std::vector<bool> inv = A.charts[a].invertible;
      inv.insert(inv.end(), B.charts[b].invertible.begin(), B.charts[b].invertible.end());
      P.charts.push_back(Chart(*A.charts[a].R, d, inv, A.charts[a].name + "x" + B.charts[b].name));
    }
  for (int i = 0; i < na * nb; ++i)
    for (int j = i + 1; j < na * nb; ++j) {
      int a1 = i / nb, b1 = i % nb, a2 = j / nb, b2 = j % nb;
      std::vector<bool> inv = A.side(a1, a2).invertible;
      auto vb = B.side(b1, b2).invertible;
      inv.insert(inv.end(), vb.begin(), vb.end());
      ChartMap ta = A.transition(a1, a2), tb = B.transition(b1, b2);
      ChartMap ia = A.transition(a2, a1), ib = B.transition(b2, b1);
      std::vector<LaurentPoly> imgs, inv_imgs;
      for (auto& f : ta.images) imgs.push_back(embed(f, d, 0));
      for (auto& f : tb.images) imgs.push_back(embed(f, d, da));
      for (auto& f : ia.images) inv_imgs.push_back(embed(f, d, 0));
      for (auto& f : ib.images) inv_imgs.push_back(embed(f, d, da));
      P.add_overlap(i, j, inv, imgs, inv_imgs);
    }
  if (!A.lifts.empty() && !B.lifts.empty()) {
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < nb; ++b) {
        std::vector<LaurentPoly> corr;
        for (auto& f : A.lifts[a].a) corr.push_back(embed(f, d, 0));
        for (auto& f : B.lifts[b].a) corr.push_back(embed(f, d, da));
        P.lifts.push_back(FrobLift::with_corrections(P.charts[a * nb + b], corr, A.lifts[a].name + B.lifts[b].name));
      }
  }
  return P;
}

// ---------------------------------------------------------------- forms

int wedge_sign(FormMask a, FormMask b) {
  if (a & b) return 0;
  int inv = 0;
  for (FormMask m = a; m; m &= m - 1) {
    int i = std::countr_zero(m);
    inv += std::popcount(b & ((FormMask(1) << i) - 1));
  }
  return inv % 2 ? -1 : 1;
}

std::vector<FormMask> masks_of_degree(int d, int s) {
  std::vector<FormMask> out;
  for (FormMask m = 0; m < (FormMask(1) << d); ++m)
    if (std::popcount(m) == s) out.push_back(m);
  return out;
}

}  // namespace pdcrys
