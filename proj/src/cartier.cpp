#include "pdcrys/cartier.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace pdcrys {

namespace {

void same_chart(const Chart& a, const Chart& b, const char* what) {
  if (a.R != b.R || a.d != b.d || a.invertible != b.invertible) throw DimensionMismatch(what);
}

}  // namespace

std::vector<PolyMatrix> shiho_matrices(const FrobLift& F, const std::vector<PolyMatrix>& Ap) {
  const int d = F.chart.d;
  if (static_cast<int>(Ap.size()) != d) throw DimensionMismatch("one matrix per coordinate");
  const int r = static_cast<int>(Ap[0].size());
  PolyMatrix D = dF_over_p(F);
  std::vector<PolyMatrix> B(d, poly_zero_matrix(*F.chart.R, d, r, r));
  std::vector<PolyMatrix> pulled;
  for (int j = 0; j < d; ++j) pulled.push_back(F.pullback(Ap[j]));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (!D[i][j].is_zero()) B[i] = B[i] + poly_scale(pulled[j], D[i][j]);
  return B;
}

ConnModule shiho_phi(const FrobLift& F, const ConnModule& Mp, int nilpotence_bound) {
  same_chart(F.chart, Mp.chart, "lift and module live on different charts");
  if (Mp.lambda != Mp.ring().p && !(Mp.lambda == 0 && Mp.ring().n == 1))
    throw std::invalid_argument("Shiho's functor takes a p-connection");
  if (!check_integrable(Mp)) throw std::invalid_argument("input p-connection is not integrable");
  if (!quasi_nilpotence_order(Mp, nilpotence_bound).ok)
    throw NilpotenceBoundExceeded("input p-connection is not quasi-nilpotent within the bound");
  ConnModule M = ConnModule::trivial(F.chart, Mp.r, 1);
  if (Mp.r > 0) M.A = shiho_matrices(F, Mp.A);
  return M;
}

std::map<FormMask, LaurentPoly> wedge_dF_over_p(const PolyMatrix& D, FormMask J) {
  const int d = static_cast<int>(D.size());
  const CoeffRing& R = *D[0][0].R;
  std::map<FormMask, LaurentPoly> out;
  const int q = form_degree(J);
  std::vector<int> cols;
  for (int j = 0; j < d; ++j)
    if (J & (FormMask(1) << j)) cols.push_back(j);
  for (FormMask I : masks_of_degree(d, q)) {
    std::vector<int> rows;
    for (int i = 0; i < d; ++i)
      if (I & (FormMask(1) << i)) rows.push_back(i);
    LaurentPoly det = LaurentPoly::constant(R.one(), d);
    if (q > 0) {
      PolyMatrix sub(q, std::vector<LaurentPoly>(q));
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) sub[a][b] = D[rows[a]][cols[b]];
      det = poly_det(sub);
    }
    if (!det.is_zero()) out[I] = det;
  }
  return out;
}

FormElem DolbeaultMorphism::apply(const FormElem& x) const {
  FormElem out;
  for (auto& [J, v] : x) {
    ModElem pulled;
    for (auto& f : v) pulled.push_back(F.pullback(f));
    for (auto& [I, w] : wedge_dF_over_p(D, J)) {
      auto it = out.find(I);
      if (it == out.end()) it = out.emplace(I, target.zero()).first;
      for (int k = 0; k < target.r; ++k) it->second[k] += pulled[k] * w;
    }
  }
  for (auto it = out.begin(); it != out.end();) it = is_zero(it->second) ? out.erase(it) : std::next(it);
  return out;
}

DolbeaultMorphism dolbeault_to_derham(const FrobLift& F, const ConnModule& higgs, int nilpotence_bound) {
  if (higgs.ring().n != 1) throw RingError("the Dolbeault morphism is defined at level 1");
  if (higgs.lambda != 0 && higgs.lambda != higgs.ring().p) throw std::invalid_argument("expected a Higgs field");
  if (!quasi_nilpotence_order(higgs, nilpotence_bound).ok) throw NilpotenceBoundExceeded("Higgs field is not nilpotent");
  DolbeaultMorphism L;
  L.F = F;
  L.source = higgs;
  L.source.lambda = 0;
  L.target = shiho_phi(F, L.source, nilpotence_bound);
  L.D = dF_over_p(F);
  return L;
}

bool check_chain_map(const DolbeaultMorphism& L) {
  const int d = L.source.dim();
  for (int q = 0; q <= d; ++q)
    for (FormMask J : masks_of_degree(d, q))
      for (int j = 0; j < L.source.r; ++j) {
        FormElem x{{J, L.source.basis(j)}};
        FormElem a = de_rham_d(L.target, L.apply(x));
        FormElem b = L.apply(de_rham_d(L.source, x));
        if (a != b) return false;
      }
  return true;
}

// ---------------------------------------------------------------- gluing

std::vector<LaurentPoly> lift_difference(const FrobLift& F1, const FrobLift& F2) {
  same_chart(F1.chart, F2.chart, "lifts live on different charts");
  auto a = F1.images(), b = F2.images();
  std::vector<LaurentPoly> h;
  for (size_t i = 0; i < a.size(); ++i) h.push_back(p_divide(b[i] - a[i]));
  return h;
}

GammaModule gamma_from_table(const StratTable& S) {
  if (S.flavor != Flavor::R) throw FlavorMismatch("gluing consumes an R-flavor table");
  GammaModule G;
  G.chart = S.chart;
  G.r = S.r;
  for (auto& [I, N] : S.entries)
    if (std::accumulate(I.begin(), I.end(), 0) > 0) G.psi[I] = N;
  return G;
}

GlueIso glue_alpha(const FrobLift& F1, const FrobLift& F2, const GammaModule& G) {
  same_chart(F1.chart, G.chart, "lift and module live on different charts");
  const CoeffRing& R = *G.chart.R;
  const int d = G.chart.d;
  auto h = lift_difference(F1, F2);
  GlueIso out;
  out.from_lift = F2.name;
  out.to_lift = F1.name;
  ConnModule Mp = G.p_connection();
  out.source = shiho_phi(F2, Mp);
  out.target = shiho_phi(F1, Mp);
  out.alpha = poly_identity(R, d, G.r);
  for (auto& [I, N] : G.psi) {
    LaurentPoly hI = LaurentPoly::constant(R.one(), d);
    for (int i = 0; i < d; ++i)
      if (I[i] > 0) hI = hI * h[i].pow(I[i]);
    if (hI.is_zero()) continue;
    out.alpha = out.alpha + poly_scale(F1.pullback(N), hI);
  }
  return out;
}

GlueIso glue_alpha(const FrobLift& F1, const FrobLift& F2, const StratTable& S) {
  return glue_alpha(F1, F2, gamma_from_table(S));
}

bool verify_glue_cocycle(const FrobLift& F1, const FrobLift& F2, const FrobLift& F3, const GammaModule& G) {
  return verify_glue_cocycle(glue_alpha(F1, F2, G), glue_alpha(F2, F3, G), glue_alpha(F1, F3, G));
}

bool verify_glue_cocycle(const GlueIso& a12, const GlueIso& a23, const GlueIso& a13) {
  if (a12.from_lift != a23.to_lift || a12.to_lift != a13.to_lift || a23.from_lift != a13.from_lift) return false;
  return poly_is_zero(a12.alpha * a23.alpha - a13.alpha);
}

}  // namespace pdcrys
