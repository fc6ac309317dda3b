#include "pdcrys/fontaine.hpp"

#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace pdcrys {

namespace {

int total(const Exp& I) { return std::accumulate(I.begin(), I.end(), 0); }

std::vector<RingElem> column_of(const RingMatrix& B, int j) {
  std::vector<RingElem> v;
  for (int i = 0; i < B.rows; ++i) v.push_back(B.at(i, j));
  return v;
}

ModElem const_vector(const std::vector<RingElem>& v, int d) {
  ModElem out;
  for (auto& x : v) out.push_back(LaurentPoly::constant(x, d));
  return out;
}

PolyMatrix from_cols(const std::vector<ModElem>& cols, const CoeffRing& R, int d, int rows) {
  PolyMatrix out = poly_zero_matrix(R, d, rows, static_cast<int>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j)
    for (int i = 0; i < rows; ++i) out[i][j] = cols[j][i];
  return out;
}

void add_into(ModElem& acc, int at, const ModElem& v) {
  for (size_t k = 0; k < v.size(); ++k) acc[at + k] += v[k];
}

// nabla^I on the basis for every I that can still contribute: stops once a layer vanishes or
// once p^{|I|-l}/I! is divisible by p^n for all larger |I|
std::map<Exp, PolyMatrix> stratification_iterates(const ConnModule& M, int l, int bound) {
  const CoeffRing& R = M.ring();
  const int d = M.dim(), p = R.p;
  std::map<Exp, PolyMatrix> out;
  std::map<Exp, PolyMatrix> layer{{Exp(d, 0), poly_identity(R, d, M.r)}};
  out.insert(layer.begin(), layer.end());
  for (int k = 1;; ++k) {
    if (k > l && p > 2 && (p - 2) * k + 1 >= (R.n + l) * (p - 1)) return out;
    if (k > bound) throw NilpotenceBoundExceeded("stratification of M~ does not terminate within the bound");
    std::map<Exp, PolyMatrix> next;
    for (auto& [J, N] : layer)
      for (int j = 0; j < d; ++j) {
        // canonical predecessor: the last index is applied last
        bool canonical = true;
        for (int q = j + 1; q < d; ++q)
          if (J[q] > 0) canonical = false;
        if (!canonical) continue;
        Exp I = J;
        ++I[j];
        std::vector<ModElem> cols;
        for (int c = 0; c < M.r; ++c) cols.push_back(M.nabla(j, column(N, c)));
        next[I] = from_cols(cols, R, d, M.r);
      }
    bool all_zero = true;
    for (auto& [I, N] : next)
      if (!poly_is_zero(N)) all_zero = false;
    if (all_zero) return out;
    for (auto& [I, N] : next)
      if (!poly_is_zero(N)) out[I] = N;
    layer = std::move(next);
  }
}

}  // namespace

std::optional<ModElem> coords_in(const RingMatrix& B, const ModElem& v, int d) {
  const CoeffRing& R = *B.R;
  std::set<Exp> monos;
  for (auto& f : v)
    for (auto& [e, c] : f.terms) monos.insert(e);
  ModElem out(B.cols, LaurentPoly(R, d));
  for (auto& e : monos) {
    std::vector<RingElem> b;
    for (auto& f : v) b.push_back(f.coeff(e));
    auto x = solve(B, b);
    if (!x) return std::nullopt;
    for (int j = 0; j < B.cols; ++j)
      if (!(*x)[j].is_zero()) out[j].add_term(e, (*x)[j]);
  }
  return out;
}

ModElem apply_const(const RingMatrix& B, const ModElem& v, int d) {
  ModElem out(B.rows, LaurentPoly(*B.R, d));
  for (int i = 0; i < B.rows; ++i)
    for (int j = 0; j < B.cols; ++j)
      if (!B.at(i, j).is_zero() && !v[j].is_zero()) out[i] += v[j] * B.at(i, j);
  return out;
}

// ---------------------------------------------------------------- filtrations

FilteredConnModule FilteredConnModule::trivial(const ConnModule& M) {
  FilteredConnModule F;
  F.M = M;
  return F;
}

int FilteredConnModule::rank(int i) const {
  if (i <= 0) return M.r;
  if (i > length()) return 0;
  return incl[i - 1].cols;
}

RingMatrix FilteredConnModule::basis_in_M(int i) const {
  RingMatrix B = RingMatrix::identity(M.ring(), M.r);
  for (int k = 0; k < i && k < length(); ++k) B = B * incl[k];
  if (i > length()) return RingMatrix(M.ring(), M.r, 0);
  return B;
}

ValidationReport validate_filtration(const FilteredConnModule& M) {
  ValidationReport rep;
  for (int i = 0; i < M.length(); ++i) {
    const RingMatrix& C = M.incl[i];
    if (C.rows != M.rank(i)) {
      rep.fail("inclusion " + std::to_string(i + 1) + " has the wrong number of rows");
      continue;
    }
    if (C.cols == 0) rep.fail("filtration step " + std::to_string(i + 1) + " is zero; shorten the filtration");
    if (!kernel(C).is_zero()) rep.fail("inclusion " + std::to_string(i + 1) + " is not injective");
  }
  return rep;
}

bool check_griffiths(const FilteredConnModule& M, std::vector<std::string>* witnesses) {
  const int d = M.M.dim();
  bool ok = true;
  for (int i = 1; i <= M.length(); ++i) {
    RingMatrix B = M.basis_in_M(i), Bprev = M.basis_in_M(i - 1);
    for (int a = 0; a < B.cols; ++a) {
      ModElem b = const_vector(column_of(B, a), d);
      for (int j = 0; j < d; ++j) {
        if (coords_in(Bprev, M.M.nabla(j, b), d)) continue;
        ok = false;
        if (witnesses) {
          std::ostringstream os;
          os << "nabla_" << j + 1 << " of basis vector " << a + 1 << " of M^" << i << " leaves M^" << i - 1;
          witnesses->push_back(os.str());
        }
      }
    }
  }
  return ok;
}

// ---------------------------------------------------------------- M~

RingMatrix PresentedModule::level_coords(int i) const {
  const int begin = offset.at(i);
  const int end = i + 1 < levels() ? offset[i + 1] : generators;
  RingMatrix out(*to_basis.R, rank(), end - begin);
  for (int r = 0; r < rank(); ++r)
    for (int g = begin; g < end; ++g) out.at(r, g - begin) = to_basis.at(r, g);
  return out;
}

PresentedModule present_Mtilde(const FilteredConnModule& M) {
  const CoeffRing& R = M.M.ring();
  const int l = M.length();
  PresentedModule P;
  for (int i = 0; i <= l; ++i) {
    P.offset.push_back(P.generators);
    P.generators += M.rank(i);
  }
  int nrel = 0;
  for (int i = 1; i <= l; ++i) nrel += M.rank(i);
  P.relations = RingMatrix(R, P.generators, nrel);
  int col = 0;
  for (int i = 1; i <= l; ++i)
    for (int a = 0; a < M.rank(i); ++a, ++col) {
      for (int k = 0; k < M.rank(i - 1); ++k) P.relations.at(P.offset[i - 1] + k, col) = M.incl[i - 1].at(k, a);
      P.relations.at(P.offset[i] + a, col) = -R.p_power(1);
    }
  if (nrel == 0) {
    P.free = true;
    P.to_basis = RingMatrix::identity(R, P.generators);
    P.from_basis = P.to_basis;
    return P;
  }
  SmithForm S = smith(P.relations);
  std::vector<int> keep;
  for (int i = 0; i < P.generators; ++i) {
    int e = i < static_cast<int>(S.diag.size()) ? S.diag[i] : R.n;
    if (e == R.n) keep.push_back(i);
    else if (e > 0) return P;  // torsion summand: no free basis
  }
  P.free = true;
  P.to_basis = RingMatrix(R, static_cast<int>(keep.size()), P.generators);
  P.from_basis = RingMatrix(R, P.generators, static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k)
    for (int g = 0; g < P.generators; ++g) {
      P.to_basis.at(k, g) = S.P.at(keep[k], g);
      P.from_basis.at(g, k) = S.Pinv.at(g, keep[k]);
    }
  return P;
}

Mtilde build_Mtilde(const FilteredConnModule& M) {
  auto fil = validate_filtration(M);
  if (!fil.valid) throw std::invalid_argument(fil.failures.front());
  std::vector<std::string> w;
  if (!check_griffiths(M, &w)) throw GriffithsViolation(w.front());
  const CoeffRing& R = M.M.ring();
  const int d = M.M.dim();
  Mtilde T;
  T.module = present_Mtilde(M);
  const PresentedModule& P = T.module;
  if (!P.free) throw NotFree("the quotient of the filtration steps is not free");
  const int G = P.generators, rk = P.rank();
  T.conn = ConnModule::trivial(M.M.chart, rk, R.p);
  for (int j = 0; j < d; ++j) {
    // nabla~ of every generator, in generator coordinates
    std::vector<ModElem> gen_images;
    for (int i = 0; i <= M.length(); ++i) {
      RingMatrix B = M.basis_in_M(i);
      for (int a = 0; a < B.cols; ++a) {
        ModElem img(G, LaurentPoly(R, d));
        ModElem nb = M.M.nabla(j, const_vector(column_of(B, a), d));
        if (i == 0) {
          for (auto& f : nb) f = times_p(f);
          add_into(img, P.offset[0], nb);
        } else {
          auto c = coords_in(M.basis_in_M(i - 1), nb, d);
          add_into(img, P.offset[i - 1], *c);
        }
        gen_images.push_back(img);
      }
    }
    std::vector<ModElem> cols;
    for (int k = 0; k < rk; ++k) {
      ModElem acc(G, LaurentPoly(R, d));
      for (int g = 0; g < G; ++g) {
        const RingElem& c = P.from_basis.at(g, k);
        if (c.is_zero()) continue;
        for (int h = 0; h < G; ++h)
          if (!gen_images[g][h].is_zero()) acc[h] += gen_images[g][h] * c;
      }
      cols.push_back(apply_const(P.to_basis, acc, d));
    }
    T.conn.A[j] = from_cols(cols, R, d, rk);
  }
  for (int j = 0; j <= M.length(); ++j) {
    int end = j + 1 < P.levels() ? P.offset[j + 1] : G;
    RingMatrix S(R, rk, end);
    for (int r = 0; r < rk; ++r)
      for (int g = 0; g < end; ++g) S.at(r, g) = P.to_basis.at(r, g);
    T.filtration.push_back(S);
  }
  return T;
}

StratTable r_stratify_Mtilde(const FilteredConnModule& M, const Mtilde& T, int bound) {
  const CoeffRing& R = M.M.ring();
  const int d = M.M.dim(), l = M.length();
  if (l >= R.p) throw std::invalid_argument("filtration length must be at most p - 1");
  const PresentedModule& P = T.module;
  const int G = P.generators, rk = P.rank();
  auto iter = stratification_iterates(M.M, l, bound);
  // theta_I of every generator, in generator coordinates
  std::map<Exp, std::vector<ModElem>> theta;
  int g = 0;
  for (int i = 0; i <= l; ++i) {
    RingMatrix B = M.basis_in_M(i);
    for (int a = 0; a < B.cols; ++a, ++g) {
      ModElem b = const_vector(column_of(B, a), d);
      for (auto& [I, N] : iter) {
        const int k = total(I);
        if (k == 0) continue;
        ModElem x = N * b;
        if (is_zero(x)) continue;
        ModElem img(G, LaurentPoly(R, d));
        if (k <= i) {
          auto c = coords_in(M.basis_in_M(i - k), x, d);
          if (!c) throw GriffithsViolation("iterated derivative leaves the expected filtration step");
          RingElem u = exact_fraction(R, 0, I);
          for (auto& f : *c) f = f * u;
          add_into(img, P.offset[i - k], *c);
        } else {
          RingElem u = exact_fraction(R, k - i, I);
          if (u.is_zero()) continue;
          for (auto& f : x) f = f * u;
          add_into(img, P.offset[0], x);
        }
        auto& slot = theta[I];
        if (slot.empty()) slot.assign(G, ModElem(G, LaurentPoly(R, d)));
        slot[g] = img;
      }
    }
  }
  StratTable S;
  S.flavor = Flavor::R;
  S.chart = M.M.chart;
  S.r = rk;
  S.entries[Exp(d, 0)] = poly_identity(R, d, rk);
  for (auto& [I, imgs] : theta) {
    std::vector<ModElem> cols;
    for (int k = 0; k < rk; ++k) {
      ModElem acc(G, LaurentPoly(R, d));
      for (int h = 0; h < G; ++h) {
        const RingElem& c = P.from_basis.at(h, k);
        if (c.is_zero()) continue;
        for (int q = 0; q < G; ++q)
          if (!imgs[h][q].is_zero()) acc[q] += imgs[h][q] * c;
      }
      cols.push_back(apply_const(P.to_basis, acc, d));
    }
    PolyMatrix N = from_cols(cols, R, d, rk);
    if (!poly_is_zero(N)) S.entries[I] = N;
  }
  return S;
}

StratTable r_stratify_Mtilde(const FilteredConnModule& M, int bound) {
  return r_stratify_Mtilde(M, build_Mtilde(M), bound);
}

// ---------------------------------------------------------------- Frobenii

PolyMatrix FontaineModule::phi_at(int i) const {
  if (i >= 0) return phi.at(i);
  const CoeffRing& R = M.M.ring();
  PolyMatrix out = phi.at(0);
  for (auto& row : out)
    for (auto& x : row) x = x * R.p_power(-i);
  return out;
}

FontaineModule divided_frobenii(const FrobLift& F, const FilteredConnModule& M, const PolyMatrix& phi_F) {
  FontaineModule FM;
  FM.M = M;
  FM.F = F;
  FM.tilde = build_Mtilde(M);
  const int d = M.M.dim();
  if (static_cast<int>(phi_F.size()) != M.M.r ||
      (M.M.r > 0 && static_cast<int>(phi_F[0].size()) != FM.tilde.module.rank()))
    throw DimensionMismatch("phi_F must map F*(M~) to M");
  FM.phi_F = phi_F;
  ConnModule src = shiho_phi(F, FM.tilde.conn);
  if (!check_horizontal(phi_F, src, M.M)) throw NotHorizontal("phi_F is not horizontal");
  for (int i = 0; i <= M.length(); ++i)
    FM.phi.push_back(phi_F * F.pullback(poly_from_ring(FM.tilde.module.level_coords(i), d)));
  return FM;
}

FontaineModule fontaine_from_phis(const FrobLift& F, const FilteredConnModule& M, const std::vector<PolyMatrix>& phis) {
  if (static_cast<int>(phis.size()) != M.length() + 1) throw DimensionMismatch("need phi^0..phi^l");
  const CoeffRing& R = M.M.ring();
  const int d = M.M.dim();
  PresentedModule P = present_Mtilde(M);
  if (!P.free) throw NotFree("the quotient of the filtration steps is not free");
  PolyMatrix all = poly_zero_matrix(R, d, M.M.r, P.generators);
  for (int i = 0; i <= M.length(); ++i)
    for (int r = 0; r < M.M.r; ++r)
      for (int a = 0; a < M.rank(i); ++a) all[r][P.offset[i] + a] = phis[i].at(r).at(a);
  PolyMatrix phi_F = all * F.pullback(poly_from_ring(P.from_basis, d));
  FontaineModule FM = divided_frobenii(F, M, phi_F);
  for (int i = 0; i <= M.length(); ++i)
    if (!poly_is_zero(FM.phi[i] - phis[i]))
      throw std::invalid_argument("phi^" + std::to_string(i) + " is incompatible with the relations (b)_i = p (b)_{i+1}");
  return FM;
}

MFReport validate_MF(const FontaineModule& FM) {
  MFReport rep;
  const FilteredConnModule& M = FM.M;
  const CoeffRing& R = M.M.ring();
  const int d = M.M.dim(), l = M.length();
  if (l > R.p - 1) {
    rep.length_ok = false;
    rep.witnesses.push_back("filtration length " + std::to_string(l) + " exceeds p - 1");
  }
  if (!check_griffiths(M, &rep.witnesses)) rep.griffiths_ok = false;
  try {
    ConnModule src = shiho_phi(FM.F, build_Mtilde(M).conn);
    if (!check_horizontal(FM.phi_F, src, M.M)) {
      rep.horizontal_ok = false;
      rep.witnesses.push_back("phi_F is not horizontal");
    }
  } catch (const std::exception& e) {
    rep.horizontal_ok = false;
    rep.witnesses.push_back(std::string("phi_F: ") + e.what());
  }
  // (d-i): phi^i restricted to M^{i+1} is p phi^{i+1}
  for (int i = 0; i < l; ++i) {
    PolyMatrix lhs = FM.phi_at(i) * FM.F.pullback(poly_from_ring(M.incl[i], d));
    PolyMatrix rhs = FM.phi_at(i + 1);
    for (auto& row : rhs)
      for (auto& x : row) x = times_p(x);
    if (!poly_is_zero(lhs - rhs)) {
      rep.d_i_ok = false;
      rep.witnesses.push_back("phi^" + std::to_string(i) + " on M^" + std::to_string(i + 1) + " differs from p phi^" +
                              std::to_string(i + 1));
    }
  }
  // (d-iii): nabla o phi^r = (phi^{r-1} (x) dF/p) o nabla on the basis of M^r
  PolyMatrix D = dF_over_p(FM.F);
  for (int r = 0; r <= l; ++r) {
    RingMatrix B = M.basis_in_M(r), Bprev = M.basis_in_M(r - 1);
    PolyMatrix prev = FM.phi_at(r - 1);
    for (int a = 0; a < B.cols; ++a) {
      ModElem b = const_vector(column_of(B, a), d);
      ModElem img(M.M.r, LaurentPoly(R, d));
      for (int k = 0; k < M.M.r; ++k) img[k] = FM.phi_at(r)[k][a];
      std::vector<ModElem> rhs_parts;
      bool in_step = true;
      for (int j = 0; j < d; ++j) {
        auto c = coords_in(Bprev, M.M.nabla(j, b), d);
        if (!c) {
          in_step = false;
          break;
        }
        for (auto& f : *c) f = FM.F.pullback(f);
        rhs_parts.push_back(prev * *c);
      }
      if (!in_step) {
        rep.d_iii_ok = false;
        rep.witnesses.push_back("(d-iii) undefined: nabla leaves M^" + std::to_string(r - 1));
        continue;
      }
      for (int i = 0; i < d; ++i) {
        ModElem rhs(M.M.r, LaurentPoly(R, d));
        for (int j = 0; j < d; ++j)
          if (!D[i][j].is_zero())
            for (int k = 0; k < M.M.r; ++k) rhs[k] += rhs_parts[j][k] * D[i][j];
        ModElem lhs = M.M.nabla(i, img);
        for (int k = 0; k < M.M.r; ++k)
          if (lhs[k] != rhs[k]) {
            rep.d_iii_ok = false;
            rep.witnesses.push_back("(d-iii) fails on basis vector " + std::to_string(a + 1) + " of M^" +
                                    std::to_string(r) + " in direction " + std::to_string(i + 1));
            break;
          }
      }
    }
  }
  rep.strongly_divisible = check_strong_divisibility(FM);
  if (!rep.strongly_divisible) rep.witnesses.push_back("phi_F is not invertible");
  return rep;
}

bool check_strong_divisibility(const FontaineModule& FM) {
  const int r = static_cast<int>(FM.phi_F.size());
  if (r == 0) return true;
  if (static_cast<int>(FM.phi_F[0].size()) != r) return false;
  return FM.F.chart.is_unit(poly_det(FM.phi_F));
}

FontaineModule change_of_lift(const FontaineModule& FM, const FrobLift& F2, int bound) {
  const Chart& a = FM.F.chart;
  const Chart& b = F2.chart;
  if (a.R != b.R || a.d != b.d || a.invertible != b.invertible) throw DimensionMismatch("lifts live on different charts");
  StratTable S = r_stratify_Mtilde(FM.M, FM.tilde, bound);
  GlueIso iso = glue_alpha(FM.F, F2, S);
  return divided_frobenii(F2, FM.M, FM.phi_F * iso.alpha);
}

// ---------------------------------------------------------------- PD envelopes of diagonals

namespace {

// every K with |K| < cap, in graded order
std::vector<Exp> multi_indices_below(int vars, int cap) {
  std::vector<Exp> out;
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
  if (cap > 0) rec(0, cap - 1);
  return out;
}

// gamma_i(xi^[K]) = c xi^[iK]
RingElem gamma_coefficient(const CoeffRing& R, const Exp& K, int i) {
  RingElem c = R.one();
  bool first = true;
  for (int k : K) {
    if (k == 0) continue;
    for (int j = 1; j <= i; ++j) c = c * (first ? binom_elem(R, j * k - 1, k - 1) : binom_elem(R, j * k, k));
    first = false;
  }
  return c;
}

PDPoly pd_truncated_mul(const PDPoly& x, const PDPoly& y, int cap) { return (x * y).truncated(cap - 1); }

}  // namespace

PDPoly taylor_expand(const LaurentPoly& f, const std::vector<LaurentPoly>& at, const Chart& base, int vars, int offset,
                     int cap) {
  const int dd = static_cast<int>(at.size());
  if (f.d != dd) throw DimensionMismatch("taylor_expand: point and function disagree in dimension");
  ChartMap ev{base, Chart(*base.R, dd), at};
  PDPoly out(base, vars, Flavor::P);
  std::map<Exp, LaurentPoly> derivs{{Exp(dd, 0), f}};
  for (const Exp& K : multi_indices_below(dd, cap)) {
    LaurentPoly g;
    auto it = derivs.find(K);
    if (it != derivs.end()) {
      g = it->second;
    } else {
      int v = 0;
      while (K[v] == 0) ++v;
      Exp J = K;
      --J[v];
      auto jt = derivs.find(J);
      if (jt == derivs.end() || jt->second.is_zero()) continue;
      g = derive(jt->second, v);
      derivs.emplace(K, g);
    }
    if (g.is_zero()) continue;
    Exp key(vars, 0);
    for (int v = 0; v < dd; ++v) key[offset + v] = K[v];
    out.add_term(key, ev.apply(g));
  }
  return out;
}

PDPoly divided_power(const PDPoly& y, int q, int cap) {
  if (!y.coeff(y.zero_key()).is_zero()) throw std::invalid_argument("divided_power needs an element of the PD ideal");
  const CoeffRing& R = y.ring();
  // acc[j] = gamma_j of the terms seen so far
  std::vector<PDPoly> acc(q + 1, PDPoly(y.chart, y.m, Flavor::P));
  acc[0] = PDPoly::one(y.chart, y.m, Flavor::P);
  for (auto& [K, c] : y.terms) {
    int deg = 0;
    for (int k : K) deg += k;
    std::vector<PDPoly> pw(q + 1, PDPoly(y.chart, y.m, Flavor::P));
    pw[0] = PDPoly::one(y.chart, y.m, Flavor::P);
    LaurentPoly cpow = LaurentPoly::constant(R.one(), y.chart.d);
    for (int i = 1; i <= q && i * deg < cap; ++i) {
      cpow = cpow * c;
      Exp key = K;
      for (auto& k : key) k *= i;
      pw[i].add_term(key, cpow * gamma_coefficient(R, K, i));
    }
    std::vector<PDPoly> next(q + 1, PDPoly(y.chart, y.m, Flavor::P));
    for (int a = 0; a <= q; ++a)
      for (int i = 0; i + a <= q; ++i)
        if (!pw[i].is_zero() && !acc[a].is_zero()) next[a + i] += pd_truncated_mul(acc[a], pw[i], cap);
    acc = std::move(next);
  }
  return acc[q];
}

std::vector<int> basis_weights(const FilteredConnModule& M) {
  const int r = M.M.r;
  std::vector<int> w(r, 0);
  for (int i = 1; i <= M.length(); ++i) {
    RingMatrix B = M.basis_in_M(i);
    for (int c = 0; c < B.cols; ++c) {
      int hit = -1;
      for (int k = 0; k < r; ++k) {
        const RingElem& x = B.at(k, c);
        if (x.is_zero()) continue;
        if (!x.is_one() || hit >= 0) hit = -2;
        if (hit == -1) hit = k;
        if (hit == -2) break;
      }
      if (hit < 0) throw std::invalid_argument("filtration step M^" + std::to_string(i) + " is not spanned by basis vectors of M");
      w[hit] = std::max(w[hit], i);
    }
  }
  return w;
}

int PDFontaineData::level(const Exp& I, int b) const { return total(I) + basis_weights(base.M)[b]; }

namespace {

// position of e_b among the basis of M^w
int position_in_step(const FilteredConnModule& M, int w, int b) {
  RingMatrix B = M.basis_in_M(w);
  for (int c = 0; c < B.cols; ++c)
    if (B.at(b, c).is_one()) return c;
  throw std::logic_error("basis vector is missing from its filtration step");
}

}  // namespace

std::vector<PDPoly> PDFontaineData::phi(int i, const Exp& I, int b) const {
  const CoeffRing& R = base.M.M.ring();
  const int w = basis_weights(base.M)[b];
  const int f = total(I) + w;
  if (f < i) throw std::invalid_argument("phi^i is only defined on the i-th filtration step");
  RingElem coef = exact_fraction(R, f - i, std::vector<int>(I.begin(), I.end()));
  Chart c = z.empty() ? base.F.chart : z[0].chart;
  PDPoly zI = PDPoly::constant(c, vars(), Flavor::P, LaurentPoly::constant(coef, c.d));
  for (size_t v = 0; v < I.size(); ++v)
    for (int e = 0; e < I[v]; ++e) zI = pd_truncated_mul(zI, z[v], cap);
  const int col = position_in_step(base.M, w, b);
  std::vector<PDPoly> out;
  for (int k = 0; k < base.M.M.r; ++k) out.push_back(zI.scaled(base.phi.at(w)[k][col]));
  return out;
}

ModElem PDFontaineData::phi_diagonal(int i, const Exp& I, int b) const {
  const CoeffRing& R = base.M.M.ring();
  const int d = base.M.M.dim();
  const int w = basis_weights(base.M)[b];
  const int f = total(I) + w;
  if (f < i) throw std::invalid_argument("phi^i is only defined on the i-th filtration step");
  LaurentPoly acc = LaurentPoly::constant(exact_fraction(R, f - i, std::vector<int>(I.begin(), I.end())), d);
  for (size_t v = 0; v < I.size(); ++v)
    if (I[v] > 0) acc = acc * z0[v].pow(I[v]);
  const int col = position_in_step(base.M, w, b);
  ModElem out;
  for (int k = 0; k < base.M.M.r; ++k) out.push_back(acc * base.phi.at(w)[k][col]);
  return out;
}

bool PDFontaineData::lifts_agree() const {
  for (auto& f : z0)
    if (!f.is_zero()) return false;
  return true;
}

PDFontaineData diagonal_pullback(const FontaineModule& FM, const std::vector<FrobLift>& lifts,
                                 const std::vector<ChartMap>& to_factor, int cap) {
  if (lifts.size() != to_factor.size()) throw OverlapMismatch("one coordinate map per extra factor is needed");
  const Chart& home = FM.F.chart;
  const CoeffRing& R = *home.R;
  const int d = home.d;
  if (cap < 1) throw std::invalid_argument("PD cap must be at least 1");
  Chart base = to_factor.empty() ? home : to_factor[0].source;
  for (size_t k = 0; k < lifts.size(); ++k) {
    const ChartMap& m = to_factor[k];
    if (m.source.R != &R || m.source.d != d || m.source.invertible != base.invertible)
      throw OverlapMismatch("coordinate maps do not start on a common overlap chart");
    if (lifts[k].chart.R != &R || lifts[k].chart.d != m.target.d || m.target.d != d)
      throw OverlapMismatch("lift " + lifts[k].name + " does not live on the chart of its factor");
  }
  PDFontaineData P;
  P.base = FM;
  P.lifts = lifts;
  P.to_factor = to_factor;
  P.cap = cap;
  const int vars = P.vars();
  const CoeffRing& U = R.at_level(R.n + 1);
  Chart baseU = base.at_level(U);
  std::vector<LaurentPoly> F0 = FM.F.images();
  ChartMap F0map{baseU, baseU, F0};
  for (size_t k = 0; k < lifts.size(); ++k) {
    std::vector<LaurentPoly> at;
    for (auto& f : to_factor[k].images) at.push_back(lift(f, U));
    std::vector<LaurentPoly> Fk = lifts[k].images();
    for (int v = 0; v < d; ++v) {
      PDPoly up = taylor_expand(Fk[v], at, baseU, vars, static_cast<int>(k) * d, cap);
      up.add_term(up.zero_key(), -F0map.apply(at[v], true));
      PDPoly zk(base, vars, Flavor::P);
      for (auto& [key, c] : up.terms) {
        try {
          zk.add_term(key, p_divide(c));
        } catch (const NotDivisible&) {
          throw std::logic_error("Frobenius lifts disagree modulo p on an overlap");
        }
      }
      P.z0.push_back(zk.coeff(zk.zero_key()));
      P.z.push_back(std::move(zk));
    }
  }
  return P;
}

}  // namespace pdcrys
