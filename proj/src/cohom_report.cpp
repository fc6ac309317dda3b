#include <algorithm>
#include <numeric>
#include <sstream>

#include "pdcrys/cohom.hpp"

namespace pdcrys {

namespace {

Cochain same_cochain(const Cochain& x) { return x; }

std::string list_str(const std::vector<int>& v) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

std::string map_witness(const MapAnalysis& a) {
  std::ostringstream os;
  os << "source length " << a.source_length << ", kernel length " << a.kernel_length << ", image "
     << list_str(a.image_invariants) << " of target length " << a.target_length;
  return os.str();
}

bool congruent(const RingMatrix& A, const RingMatrix& B, const std::vector<int>& row_exps) {
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      if (!(A.at(i, j) - B.at(i, j)).residue(row_exps[i]).is_zero()) return false;
  return true;
}

bool zero_mod(const std::vector<RingElem>& x, const std::vector<int>& exps) {
  for (size_t i = 0; i < x.size(); ++i)
    if (!x[i].residue(exps[i]).is_zero()) return false;
  return true;
}

bool equal_mod(const std::vector<RingElem>& x, const std::vector<RingElem>& y, const std::vector<int>& exps) {
  for (size_t i = 0; i < x.size(); ++i)
    if (!(x[i] - y[i]).residue(exps[i]).is_zero()) return false;
  return true;
}

int top_level(const Engine& E) { return E.module().length() + E.dim(); }

// block matrix over the direct sum of groups
struct Blocks {
  std::vector<int> offset;
  std::vector<int> exps;
  void add(const Group& g) {
    offset.push_back(static_cast<int>(exps.size()));
    exps.insert(exps.end(), g.exps.begin(), g.exps.end());
  }
  int size() const { return static_cast<int>(exps.size()); }
};

}  // namespace

MapAnalysis filtration_map(const Engine& E, int m, int i) {
  const Group& src = E.group(m, Variant::filtered(i));
  const Group& dst = E.group(m, Variant::full());
  return analyze_map(E.map_matrix(src, dst, same_cochain), src.exps, dst.exps);
}

DegreeReport degree_report(const Engine& E, int m) {
  DegreeReport rep;
  rep.m = m;
  rep.invariants = E.group(m, Variant::full()).invariants();
  const int p = E.p(), ell = E.module().length(), d = E.dim();
  for (int i = 0; i < p; ++i) {
    MapAnalysis a = filtration_map(E, m, i);
    rep.filtration.push_back(a.image_invariants);
    Verdict v;
    v.m = m;
    v.i = i;
    v.in_range = std::min(m, d) + ell <= p - 1;
    v.holds = a.injective();
    v.witness = map_witness(a);
    rep.injective.push_back(v);
  }
  rep.mf_in_range = std::min(m, d - 1) + ell <= p - 2;
  return rep;
}

RingMatrix phi_on_cohomology(const Engine& E, int m, int i, bool* lift_independent) {
  const Group& src = E.group(m, Variant::filtered(i));
  const Group& dst = E.group(m, Variant::full());
  RingMatrix M(E.module().atlas.ring(), dst.size(), src.size());
  bool same = true;
  for (int k = 0; k < src.size(); ++k) {
    auto [z1, z2] = E.lift(E.representative(src, k), src.classes[k].w, m, Variant::filtered(i));
    std::vector<RingElem> y1 = E.classify(dst, E.phi_image(z1, i));
    std::vector<RingElem> y2 = E.classify(dst, E.phi_image(z2, i));
    same = same && equal_mod(y1, y2, dst.exps);
    for (int r = 0; r < dst.size(); ++r) M.at(r, k) = y1[r].residue(dst.exps[r]);
  }
  if (lift_independent) *lift_independent = same;
  return M;
}

MFCheck check_mf(const Engine& E, int m, const std::vector<RingMatrix>& phi) {
  MFCheck c;
  const int p = E.p();
  const Group& H = E.group(m, Variant::full());
  c.length_ok = filtration_map(E, m, 0).surjective() && filtration_map(E, m, p).zero();
  c.divisibility_ok = true;
  for (int i = 0; i + 1 < static_cast<int>(phi.size()); ++i) {
    const Group& hi = E.group(m, Variant::filtered(i + 1));
    const Group& lo = E.group(m, Variant::filtered(i));
    RingMatrix incl = E.map_matrix(hi, lo, same_cochain);
    RingMatrix lhs = phi[i] * incl;
    RingMatrix rhs = phi[i + 1].scaled(E.module().atlas.ring().p_power(1));
    if (!congruent(lhs, rhs, H.exps)) c.divisibility_ok = false;
  }
  RingMatrix all(E.module().atlas.ring(), H.size(), 0);
  for (auto& f : phi) all = hcat(all, f);
  std::vector<int> src;
  for (int i = 0; i < static_cast<int>(phi.size()); ++i) {
    const Group& g = E.group(m, Variant::filtered(i));
    src.insert(src.end(), g.exps.begin(), g.exps.end());
  }
  c.spans = H.size() == 0 || analyze_map(all, src, H.exps).surjective();
  return c;
}

E1Entry e1_entry(const Engine& E, int r, int s) {
  E1Entry e;
  e.r = r;
  e.s = s;
  const int m = r + s;
  const int p = E.p(), ell = E.module().length(), d = E.dim();
  e.in_range = std::min(m, d - 1) + ell <= p - 2;
  const Group& g = E.group(m, Variant::graded(r));
  e.invariants = g.invariants();
  e.length = g.length();
  e.e_infinity = filtration_map(E, m, r).image_length - filtration_map(E, m, r + 1).image_length;
  e.d1_zero = true;
  if (m + 1 > E.max_degree() || g.size() == 0) {
    e.witness = "d1 has zero source or target";
    return e;
  }
  const Group& next = E.group(m + 1, Variant::graded(r + 1));
  const Bicomplex& B = E.plain();
  int rank = 0;
  for (int k = 0; k < g.size(); ++k) {
    Cochain dx;
    for (auto& [c, v] : B.d(E.representative(g, k)))
      if (B.level(c) == r + 1) dx.emplace(c, v);
    if (!zero_mod(E.classify(next, dx), next.exps)) {
      e.d1_zero = false;
      ++rank;
    }
  }
  e.witness = std::to_string(rank) + " of " + std::to_string(g.size()) + " classes have nonzero d1";
  return e;
}

LambdaReport lambda_report(const Engine& E, int m) {
  LambdaReport rep;
  rep.m = m;
  const CoeffRing& R = E.module().atlas.ring();
  const int p = E.p(), ell = E.module().length(), d = E.dim();
  const Group& L = E.group(m, Variant::lambda(p));
  const Group& H = E.group(m, Variant::full());
  rep.invariants = L.invariants();
  rep.right = L.length();
  rep.target = H.length();
  rep.in_range = std::min(m, d - 1) <= p - 2 - ell;
  rep.psi_in_range = d <= p - 1 - ell || m + ell <= p - 2;

  Blocks left, mid;
  for (int i = 1; i < p; ++i) left.add(E.group(m, Variant::filtered(i)));
  for (int i = 0; i < p; ++i) mid.add(E.group(m, Variant::filtered(i)));
  rep.left = std::accumulate(left.exps.begin(), left.exps.end(), 0);
  rep.middle = std::accumulate(mid.exps.begin(), mid.exps.end(), 0);

  // g((x)_i) = (x)_{i-1} - p (x)_i
  RingMatrix g(R, mid.size(), left.size());
  for (int i = 1; i < p; ++i) {
    const Group& src = E.group(m, Variant::filtered(i));
    const Group& lo = E.group(m, Variant::filtered(i - 1));
    for (int k = 0; k < src.size(); ++k) {
      const int col = left.offset[i - 1] + k;
      std::vector<RingElem> y = E.classify(lo, E.representative(src, k));
      for (int r = 0; r < lo.size(); ++r) g.at(mid.offset[i - 1] + r, col) += y[r];
      g.at(mid.offset[i] + k, col) -= R.p_power(1);
    }
  }
  // pi((x)_i) = sum_y c_y p^{min(f(y), p-1) - i} y
  RingMatrix pi(R, L.size(), mid.size());
  const Bicomplex& B = E.plain();
  for (int i = 0; i < p; ++i) {
    const Group& src = E.group(m, Variant::filtered(i));
    for (int k = 0; k < src.size(); ++k) {
      Cochain x;
      for (auto& [c, v] : E.representative(src, k))
        add_to(x, c, v * R.p_power(std::min(B.level(c), p - 1) - i));
      std::vector<RingElem> y = E.classify(L, x);
      for (int r = 0; r < L.size(); ++r) pi.at(r, mid.offset[i] + k) = y[r];
    }
  }
  MapAnalysis ga = analyze_map(g, left.exps, mid.exps);
  MapAnalysis pa = analyze_map(pi, mid.exps, L.exps);
  RingMatrix zero(R, L.size(), left.size());
  bool composite = congruent(pi * g, zero, L.exps);
  rep.sequence_exact = composite && ga.injective() && pa.surjective() && pa.image_length == rep.middle - rep.left;

  RingMatrix psi(R, H.size(), L.size());
  bool same = true;
  for (int k = 0; k < L.size(); ++k) {
    auto [z1, z2] = E.lift(E.representative(L, k), L.classes[k].w, m, Variant::lambda(p));
    std::vector<RingElem> y1 = E.classify(H, E.psi_image(z1));
    std::vector<RingElem> y2 = E.classify(H, E.psi_image(z2));
    same = same && equal_mod(y1, y2, H.exps);
    for (int r = 0; r < H.size(); ++r) psi.at(r, k) = y1[r];
  }
  MapAnalysis sa = analyze_map(psi, L.exps, H.exps);
  rep.psi_iso = same && sa.isomorphism();
  rep.psi_mono = same && sa.injective();
  std::ostringstream os;
  os << "g: " << map_witness(ga) << "; pi: " << map_witness(pa) << "; psi: " << map_witness(sa);
  if (!composite) os << "; pi o g is nonzero";
  if (!same) os << "; psi depends on the lift";
  rep.witness = os.str();
  return rep;
}

bool CohomologyReport::all_in_range_pass() const {
  for (auto& D : degrees) {
    for (auto& v : D.injective)
      if (v.in_range && !v.holds) return false;
    for (bool b : D.phi_lift_independent)
      if (!b) return false;
    if (D.mf && D.mf_in_range && !D.mf->ok()) return false;
  }
  for (auto& e : e1)
    if (e.in_range && !e.d1_zero) return false;
  for (auto& L : lambda) {
    if (L.in_range && !L.sequence_exact) return false;
    if (L.psi_in_range && !L.psi_iso) return false;
  }
  return true;
}

CohomologyReport verify_theorem(const Engine& E, const TheoremOptions& opt) {
  CohomologyReport rep;
  rep.p = E.p();
  rep.n = E.n();
  rep.d = E.dim();
  rep.ell = E.module().length();
  rep.cap = E.cap();
  const bool frob = opt.frobenius && E.module().has_frobenius();
  rep.pd_cap = frob ? E.pd_cap() : 1;
  if (rep.ell > rep.p - 1) rep.notes.push_back("filtration length exceeds p - 1; no range applies");
  for (int m = 0; m <= E.max_degree(); ++m) {
    DegreeReport D = degree_report(E, m);
    if (frob) {
      for (int i = 0; i < rep.p; ++i) {
        bool same = true;
        D.phi.push_back(phi_on_cohomology(E, m, i, &same));
        D.phi_lift_independent.push_back(same);
      }
      D.mf = check_mf(E, m, D.phi);
    }
    rep.degrees.push_back(std::move(D));
  }
  if (!frob) rep.notes.push_back("no Frobenius data; divided Frobenius and Lambda checks skipped");
  if (opt.e1) {
    bool any = false;
    for (int m = 0; m <= E.max_degree(); ++m)
      for (int r = 0; r <= std::min(m, top_level(E)); ++r) {
        rep.e1.push_back(e1_entry(E, r, m - r));
        any = any || rep.e1.back().in_range;
      }
    if (!any) rep.notes.push_back("E1 degeneration: vacuous, no (r, s) in range");
  }
  if (opt.lambda && frob)
    for (int m = 0; m <= E.max_degree(); ++m) rep.lambda.push_back(lambda_report(E, m));
  return rep;
}

DolbeaultComparison compare_dolbeault(const DolbeaultMorphism& L, int cap, int below) {
  DolbeaultComparison out;
  const CoeffRing& R = L.source.ring();
  const int p = R.p;
  Caps caps;
  caps.poly = cap;
  caps.certify = false;
  Engine Eh(single_chart(L.source), caps), Ed(single_chart(L.target), caps);
  const int top = std::min(below - 1, Eh.max_degree());
  for (auto& w : Eh.weights(cap)) {
    Exp v(w.size());
    for (size_t k = 0; k < w.size(); ++k) v[k] = p * w[k];
    for (int m = 0; m <= top; ++m) {
      const PieceHomology& Ph = Eh.piece(Eh.plain(), w, m, Variant::full());
      const PieceHomology& Pd = Ed.piece(Ed.plain(), v, m, Variant::full());
      RingMatrix M(R, Pd.size(), Ph.size());
      bool cycles = true;
      for (int k = 0; k < Ph.size(); ++k) {
        auto y = Pd.classify(chart_cochain(L.apply(chart_form(Ph.reps[k], L.source))));
        if (!y) {
          cycles = false;
          break;
        }
        for (int r = 0; r < Pd.size(); ++r) M.at(r, k) = (*y)[r];
      }
      ++out.pieces;
      MapAnalysis a = analyze_map(M, Ph.exps, Pd.exps);
      if (!cycles || !a.isomorphism()) {
        out.isomorphic = false;
        out.witnesses.push_back("H^" + std::to_string(m) + " at Higgs weight " + list_str(w) + ": " +
                                (cycles ? map_witness(a) : std::string("image is not a cycle")));
      }
    }
  }
  for (auto& v : Ed.weights(cap)) {
    bool on_lattice = std::all_of(v.begin(), v.end(), [p](int x) { return x % p == 0; });
    if (on_lattice) continue;
    for (int m = 0; m <= top; ++m)
      if (Ed.piece(Ed.plain(), v, m, Variant::full()).size() > 0) {
        out.off_lattice_acyclic = false;
        out.witnesses.push_back("de Rham H^" + std::to_string(m) + " at weight " + list_str(v) + " is nonzero");
      }
  }
  return out;
}

}  // namespace pdcrys
