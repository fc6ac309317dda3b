#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>

#include "gen_modules.hpp"
#include "p1_oracle.hpp"
#include "pdcrys/cohom.hpp"

namespace pdcrys::acceptance {

using namespace pdcrys::testing;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
};

int prime_of(int k) { return k % 3 == 0 ? 2 : k % 3 == 1 ? 3 : 5; }

int length_of(const std::vector<int>& v) {
  int s = 0;
  for (int e : v) s += e;
  return s;
}

// ---- 1. stratification ----
void stratification(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  int ok = 0;
  for (int k = 0; k < 50; ++k) {
    const int p = prime_of(k), n = 1 + (k / 3) % 3, d = 1 + k % 2, r = 1 + (k / 2) % 3;
    Chart c(make_ring(p, n), d);
    ConnModule M = random_gauge_module(rng, c, r, 1).M;
    if (!check_integrable(M) || !quasi_nilpotence_order(M, 64).ok) {
      out.fail("instance " + std::to_string(k) + " is not an integrable quasi-nilpotent connection");
      continue;
    }
    CocycleReport rep = verify_cocycle(stratify(M, Flavor::P, 64));
    if (rep.ok())
      ++ok;
    else
      out.fail("instance " + std::to_string(k) + ": " + rep.detail);
  }
  if (out.pass) out.detail << ok << "/50 tables pass counit and cocycle";
}

// ---- 2. descent of the zero p-connection ----
void cartier_descent(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 20; ++k) {
    const int p = prime_of(k);
    Chart c(make_ring(p, 1), 1 + k % 2);
    ConnModule B = shiho_phi(random_frobenius_lift(rng, c, "F"), ConnModule::trivial(c, 1 + k % 3, 0));
    for (auto& P : p_curvature(B))
      if (!poly_is_zero(P)) out.fail("nonzero p-curvature at instance " + std::to_string(k));
  }
  if (out.pass) out.detail << "20/20 descended connections have zero p-curvature";
}

// ---- 3. quasi-nilpotence bound ----
void nilpotence(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  int worst = 0;
  for (int k = 0; k < 20; ++k) {
    const int p = prime_of(k);
    Chart c(make_ring(p, 1), 1 + k % 2);
    ConnModule H = random_gauge_module(rng, c, 1 + k % 3, 0, 1).M;
    NilpotenceResult in = quasi_nilpotence_order(H, 64);
    if (!in.ok) {
      out.fail("input " + std::to_string(k) + " is not nilpotent");
      continue;
    }
    ConnModule B = shiho_phi(random_frobenius_lift(rng, c, "F"), H);
    NilpotenceResult o = quasi_nilpotence_order(B, p * in.order);
    if (!o.ok || o.order > p * in.order) {
      out.fail("instance " + std::to_string(k) + ": output order exceeds p times " + std::to_string(in.order));
      continue;
    }
    worst = std::max(worst, o.order);
  }
  if (out.pass) out.detail << "20/20 within p * input order, largest output order " << worst;
}

// ---- 4. p-curvature ----
ModElem p_fold(const ConnModule& M, int i, ModElem x) {
  for (int k = 0; k < M.ring().p; ++k) x = M.nabla(i, x);
  return x;
}

void p_curvature_laws(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 30; ++k) {
    const int p = prime_of(k);
    const CoeffRing& F = make_ring(p, 1);
    Chart c(F, 1 + k % 2);
    ConnModule A = random_gauge_module(rng, c, 2 + k % 2, 1).M, B = random_gauge_module(rng, c, 2, 1).M;
    auto pa = p_curvature(A), pb = p_curvature(B), pt = p_curvature(tensor(A, B));
    LaurentPoly f = random_poly(rng, F, c.d, 3, 3);
    ModElem x;
    for (int j = 0; j < A.r; ++j) x.push_back(random_poly(rng, F, c.d, 2, 2));
    for (int i = 0; i < c.d; ++i) {
      ModElem fx = x;
      for (auto& y : fx) y = y * f;
      ModElem lhs = p_fold(A, i, fx), rhs = pa[i] * x;
      for (auto& y : rhs) y = y * f;
      if (lhs != rhs) out.fail("p-curvature is not O-linear at instance " + std::to_string(k));
      PolyMatrix want = kron(pa[i], poly_identity(F, c.d, B.r)) + kron(poly_identity(F, c.d, A.r), pb[i]);
      if (!poly_is_zero(pt[i] - want)) out.fail("tensor additivity fails at instance " + std::to_string(k));
    }
  }
  if (out.pass) out.detail << "30/30 instances linear and additive";
}

// ---- 5. gluing ----
void gluing(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 10; ++k) {
    const int p = k % 2 ? 3 : 2, d = 1 + (k / 5);
    Chart c(make_ring(p, 2 + k % 2), d);
    GaugeModule g = random_gauge_module(rng, c, 2, 1, 1);
    GammaModule G = GammaModule::from_connection(g.M, 64);
    FrobLift F1 = random_frobenius_lift(rng, c, "F1"), F2 = random_frobenius_lift(rng, c, "F2"),
             F3 = random_frobenius_lift(rng, c, "F3");
    if (!verify_glue_cocycle(F1, F2, F3, G)) out.fail("cocycle fails at instance " + std::to_string(k));
    for (auto [X, Y] : {std::pair{&F1, &F2}, {&F2, &F3}, {&F1, &F3}}) {
      GlueIso iso = glue_alpha(*X, *Y, G);
      if (!check_horizontal(iso.alpha, iso.source, iso.target))
        out.fail("alpha(" + X->name + ", " + Y->name + ") is not horizontal at instance " + std::to_string(k));
    }
  }
  if (out.pass) out.detail << "10/10 triples (5 on A^1, 5 on A^2)";
}

// ---- 6. structure sheaf as a Fontaine module ----
void fontaine_structure_sheaf(uint64_t, Result& out) {
  for (int p : {2, 5})
    for (int n : {1, 2}) {
      const CoeffRing& R = make_ring(p, n);
      Chart c(R, 1);
      FilteredConnModule O = FilteredConnModule::trivial(ConnModule::trivial(c, 1, 1));
      FrobLift F = FrobLift::standard(c);
      const std::string at = " at p=" + std::to_string(p) + " n=" + std::to_string(n);
      MFReport rep = validate_MF(divided_frobenii(F, O, poly_identity(R, 1, 1)));
      if (!rep.valid() || !rep.strongly_divisible) out.fail("(O, d, F*) rejected" + at);
      PolyMatrix scaled{{LaurentPoly::monomial(R.from_int(p), {0})}};
      MFReport bad = validate_MF(divided_frobenii(F, O, scaled));
      if (bad.strongly_divisible) out.fail("p * F* accepted as strongly divisible" + at);
    }
  if (out.pass) out.detail << "4/4 accepted, 4/4 perturbations rejected";
}

// ---- 7. change of lift ----
void change_of_lift_round_trip(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 10; ++k) {
    const int p = k % 2 ? 5 : 3;
    const CoeffRing& R = make_ring(p, 1 + k % 2);
    LogFontaine L = random_log_fontaine(rng, R, 1 + k % 2, 2 + k % 2, std::min(p - 1, 1 + k % 2));
    FontaineModule FM = fontaine_from_phis(L.F, L.M, L.phis);
    FontaineModule G = change_of_lift(FM, random_frobenius_lift(rng, L.F.chart, "F2"));
    FontaineModule back = change_of_lift(G, L.F);
    bool same = poly_is_zero(back.phi_F - FM.phi_F) && back.phi.size() == FM.phi.size();
    for (size_t i = 0; same && i < FM.phi.size(); ++i) same = poly_is_zero(back.phi[i] - FM.phi[i]);
    if (!same) out.fail("round trip changes the module at instance " + std::to_string(k));
    if (!validate_MF(G).valid()) out.fail("intermediate module invalid at instance " + std::to_string(k));
  }
  if (out.pass) out.detail << "10/10 round trips are the identity";
}

// ---- 8. projective line ----
// the cochain t^{-1} dt on the overlap
Cochain dlog_class(const Engine& E) {
  const Bicomplex& B = E.plain();
  for (auto& w : E.weights(E.cap()))
    for (auto& c : B.cells(w, 2))
      if (B.nerve()[c.J].size() == 2 && c.mask == 1 && c.b == 0 && c.a == Exp{-1}) return {{c, E.module().atlas.ring().one()}};
  return {};
}

void projective_line_cohomology(uint64_t, Result& out) {
  const CoeffRing& R = make_ring(5, 2);
  Engine E(structure_sheaf(projective_line(R)));
  const std::vector<std::vector<int>> expected{{2}, {}, {2}};
  std::vector<std::vector<int>> got;
  for (int m = 0; m <= E.max_degree(); ++m) got.push_back(E.group(m, Variant::full()).invariants());
  if (got != expected) out.fail("invariants differ from Z/25, 0, Z/25");
  if (p1_oracle::projective_line(5, 2, E.cap()) != got) out.fail("invariants differ from the hand complex");
  if (!filtration_map(E, 2, 1).injective()) out.fail("H^2(F^1) -> H^2 is not injective");

  bool same1 = false, same0 = false;
  RingMatrix phi1 = phi_on_cohomology(E, 2, 1, &same1);
  RingMatrix phi0 = phi_on_cohomology(E, 2, 0, &same0);
  const Group& H2 = E.group(2, Variant::full());
  const Group& F1 = E.group(2, Variant::filtered(1));
  if (!same1 || !same0) out.fail("phi on H^2 depends on the lift");
  if (!analyze_map(phi1, F1.exps, H2.exps).isomorphism()) out.fail("phi^{2,1} is not bijective");
  Cochain dlog = dlog_class(E);
  if (dlog.empty()) {
    out.fail("no t^-1 dt cell");
  } else {
    auto y = E.classify(F1, dlog);
    auto x = E.classify(H2, dlog);
    std::vector<RingElem> image(H2.size(), R.zero());
    for (int r = 0; r < phi1.rows; ++r)
      for (int k = 0; k < phi1.cols; ++k) image[r] += phi1.at(r, k) * y[k];
    for (int r = 0; r < H2.size(); ++r)
      if (!(image[r] - x[r]).residue(H2.exps[r]).is_zero()) out.fail("phi^{2,1}[dt/t] != [dt/t]");
    if (x.empty() || !x[0].is_unit()) out.fail("[dt/t] does not generate H^2");
  }
  if (phi0 != phi1.scaled(R.p_power(1))) out.fail("phi^{2,0} != p phi^{2,1}");

  TheoremOptions opt;
  opt.e1 = false;
  opt.lambda = false;
  CohomologyReport rep = verify_theorem(E, opt);
  for (auto& D : rep.degrees)
    if (!D.mf || !D.mf->ok()) out.fail("H^" + std::to_string(D.m) + " fails the MF validator");
  if (out.pass) out.detail << "H = Z/25, 0, Z/25 certified at cap " << E.cap() << "; phi^{2,1} = " << phi1.at(0, 0).to_int();
}

// ---- 9. E1 degeneration ----
void e1_degeneration(uint64_t, Result& out) {
  TheoremOptions opt;
  opt.lambda = false;
  opt.frobenius = false;
  auto check = [&](const Engine& E, const std::string& name) {
    CohomologyReport rep = verify_theorem(E, opt);
    int in_range = 0;
    for (auto& e : rep.e1) {
      if (!e.in_range) continue;
      ++in_range;
      if (!e.d1_zero) out.fail(name + ": d1 nonzero at (" + std::to_string(e.r) + "," + std::to_string(e.s) + ")");
      if (e.length != e.e_infinity) out.fail(name + ": E1 and E_inf differ at (" + std::to_string(e.r) + "," + std::to_string(e.s) + ")");
    }
    if (in_range == 0) out.fail(name + ": no entry in range");
    return rep;
  };
  for (int n : {1, 2}) check(Engine(structure_sheaf(projective_line(make_ring(5, n)))), "P^1 n=" + std::to_string(n));

  const CoeffRing& F = make_ring(5, 1);
  Engine E(structure_sheaf(product_atlas(projective_line(F), projective_line(F))));
  CohomologyReport rep = check(E, "P^1 x P^1");
  auto line = p1_oracle::projective_line(5, 1, 8);
  for (int m = 0; m <= E.max_degree(); ++m) {
    int want = 0;
    for (int a = 0; a <= m; ++a)
      if (a < 3 && m - a < 3) want += length_of(line[a]) * length_of(line[m - a]);
    if (length_of(rep.degrees[m].invariants) != want) out.fail("Kunneth length differs in degree " + std::to_string(m));
    int e1 = 0;
    for (auto& e : rep.e1)
      if (e.r + e.s == m) e1 += e.length;
    if (e1 != want) out.fail("sum of E1 lengths differs from Kunneth in degree " + std::to_string(m));
  }
  if (out.pass) out.detail << "all in-range d1 vanish; E1 = E_inf; product lengths 1,0,2,0,1";
}

// ---- 10. Lambda and psi ----
void lambda_psi(uint64_t, Result& out) {
  Engine E(structure_sheaf(projective_line(make_ring(5, 1))));
  for (int m = 0; m <= 2; ++m) {
    LambdaReport L = lambda_report(E, m);
    if (!L.psi_in_range || !L.psi_iso) out.fail("psi^" + std::to_string(m) + " is not an isomorphism: " + L.witness);
    if (!L.in_range || !L.sequence_exact) out.fail("sequence not exact in degree " + std::to_string(m) + ": " + L.witness);
  }
  if (out.pass) out.detail << "psi^0, psi^1, psi^2 isomorphisms; sequences exact";
}

// ---- 11. Dolbeault to de Rham ----
void dolbeault(uint64_t seed, Result& out) {
  std::mt19937_64 rng(seed);
  const CoeffRing& R = make_ring(5, 1);
  Chart c(R, 1, {true});
  int pieces = 0;
  for (int ell = 0; ell <= 2; ++ell)
    for (bool jordan : {true, false}) {
      ConnModule H = ConnModule::trivial(c, ell + 1, 0);
      for (int k = 0; k <= ell; ++k)
        for (int j = k + 1; j <= ell; ++j)
          if (j == k + 1 || !jordan)
            H.A[0][k][j] = LaurentPoly::monomial(j == k + 1 ? R.one() : random_elem(rng, R), {-1});
      DolbeaultMorphism L = dolbeault_to_derham(FrobLift::standard(c), H);
      Engine probe(single_chart(L.source));
      DolbeaultComparison cmp = compare_dolbeault(L, probe.cap(), R.p - ell);
      pieces += cmp.pieces;
      if (!cmp.ok())
        out.fail("level " + std::to_string(ell) + ": " + (cmp.witnesses.empty() ? std::string("failed") : cmp.witnesses[0]));
    }
  if (out.pass) out.detail << pieces << " weight pieces isomorphic below p - l; off-lattice pieces acyclic";
}

// ---- 12. linear algebra against enumeration ----
struct Brute {
  int q, n, p;
  int64_t size(int k) const {
    int64_t s = 1;
    for (int i = 0; i < k; ++i) s *= q;
    return s;
  }
  std::vector<int> decode(int64_t code, int k) const {
    std::vector<int> v(k);
    for (int i = 0; i < k; ++i) v[i] = code % q, code /= q;
    return v;
  }
  int64_t encode(const std::vector<int>& v) const {
    int64_t c = 0;
    for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) c = c * q + v[i];
    return c;
  }
  // closure of {0} under adding generators
  std::vector<char> span(const std::vector<std::vector<int>>& gens, int k) const {
    std::vector<char> in(size(k), 0);
    std::vector<int64_t> queue{0};
    in[0] = 1;
    for (size_t h = 0; h < queue.size(); ++h) {
      std::vector<int> x = decode(queue[h], k);
      for (auto& g : gens) {
        std::vector<int> y(k);
        for (int i = 0; i < k; ++i) y[i] = (x[i] + g[i]) % q;
        int64_t c = encode(y);
        if (!in[c]) in[c] = 1, queue.push_back(c);
      }
    }
    return in;
  }
};

std::vector<int> to_ints(const std::vector<RingElem>& v) {
  std::vector<int> out;
  for (auto& x : v) out.push_back(static_cast<int>(x.to_int()));
  return out;
}

std::vector<int> column_of(const RingMatrix& M, int j) {
  std::vector<int> v;
  for (int i = 0; i < M.rows; ++i) v.push_back(static_cast<int>(M.at(i, j).to_int()));
  return v;
}

std::vector<int> row_of(const RingMatrix& M, int i) {
  std::vector<int> v;
  for (int j = 0; j < M.cols; ++j) v.push_back(static_cast<int>(M.at(i, j).to_int()));
  return v;
}

void check_matrix(const Brute& Z, const CoeffRing& R, const std::vector<std::vector<int>>& A, int rows, int cols,
                  const std::vector<int>& rhs_set, Result& out, int64_t& solves) {
  RingMatrix M(R, rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M.at(i, j) = R.from_int(A[i][j]);
  auto tag = [&] { return " for " + M.str() + " over Z/" + std::to_string(Z.q); };
  auto apply = [&](const std::vector<int>& x) {
    std::vector<int> y(rows, 0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) y[i] = (y[i] + A[i][j] * x[j]) % Z.q;
    return y;
  };
  std::vector<std::vector<int>> col_gens, row_gens;
  for (int j = 0; j < cols; ++j) {
    std::vector<int> c(rows);
    for (int i = 0; i < rows; ++i) c[i] = A[i][j];
    col_gens.push_back(c);
  }
  for (int i = 0; i < rows; ++i) row_gens.push_back(A[i]);

  // kernel
  std::vector<char> ker(Z.size(cols), 0);
  for (int64_t code = 0; code < Z.size(cols); ++code) {
    auto y = apply(Z.decode(code, cols));
    ker[code] = std::all_of(y.begin(), y.end(), [](int v) { return v == 0; });
  }
  RingMatrix K = kernel(M);
  std::vector<std::vector<int>> kg;
  for (int j = 0; j < K.cols; ++j) kg.push_back(column_of(K, j));
  if (Z.span(kg, cols) != ker) out.fail("kernel span differs" + tag());

  // solve
  std::vector<char> image = Z.span(col_gens, rows);
  std::vector<int> b(rows);
  const int64_t nb = static_cast<int64_t>(std::pow(rhs_set.size(), rows));
  for (int64_t code = 0; code < nb; ++code) {
    int64_t c = code;
    for (int i = 0; i < rows; ++i) b[i] = rhs_set[c % rhs_set.size()], c /= static_cast<int64_t>(rhs_set.size());
    std::vector<RingElem> bb;
    for (int v : b) bb.push_back(R.from_int(v));
    auto x = solve(M, bb);
    ++solves;
    if (x.has_value() != static_cast<bool>(image[Z.encode(b)])) out.fail("solvability differs" + tag());
    if (x && apply(to_ints(*x)) != b) out.fail("solve returned a non-solution" + tag());
  }

  // Howell form: same row span, U A = H, pivot-suffix spans, left kernel
  HowellForm H = howell(M);
  std::vector<std::vector<int>> hg;
  for (int i = 0; i < H.H.rows; ++i) hg.push_back(row_of(H.H, i));
  std::vector<char> rowspan = Z.span(row_gens, cols);
  if (Z.span(hg, cols) != rowspan) out.fail("Howell rows span a different module" + tag());
  if (H.U * M != H.H) out.fail("U A != H" + tag());
  for (int k = 1; k <= cols; ++k) {
    std::vector<std::vector<int>> tail;
    for (auto& h : hg)
      if (std::all_of(h.begin(), h.begin() + k, [](int v) { return v == 0; })) tail.push_back(h);
    std::vector<char> want(Z.size(cols), 0);
    for (int64_t code = 0; code < Z.size(cols); ++code)
      if (rowspan[code]) {
        auto v = Z.decode(code, cols);
        want[code] = std::all_of(v.begin(), v.begin() + k, [](int x) { return x == 0; });
      }
    if (Z.span(tail, cols) != want) out.fail("Howell property fails at column " + std::to_string(k) + tag());
  }
  std::vector<char> lker(Z.size(rows), 0);
  for (int64_t code = 0; code < Z.size(rows); ++code) {
    auto y = Z.decode(code, rows);
    bool zero = true;
    for (int j = 0; j < cols && zero; ++j) {
      int s = 0;
      for (int i = 0; i < rows; ++i) s = (s + y[i] * A[i][j]) % Z.q;
      zero = s == 0;
    }
    lker[code] = zero;
  }
  std::vector<std::vector<int>> lg;
  for (int i = 0; i < H.left_kernel.rows; ++i) lg.push_back(row_of(H.left_kernel, i));
  if (Z.span(lg, rows) != lker) out.fail("left kernel differs" + tag());

  // invariants: |p^k coker| for every k
  std::vector<int> inv = cokernel_invariants(M);
  int64_t im_size = std::count(image.begin(), image.end(), 1);
  int pk = 1;
  for (int k = 0; k <= Z.n; ++k, pk *= Z.p) {
    std::vector<std::vector<int>> gens = col_gens;
    for (int i = 0; i < rows; ++i) {
      std::vector<int> e(rows, 0);
      e[i] = pk % Z.q;
      gens.push_back(e);
    }
    std::vector<char> sum = Z.span(gens, rows);
    const int64_t brute = std::count(sum.begin(), sum.end(), 1) / im_size;
    int64_t predicted = 1;
    for (int e : inv)
      for (int t = k; t < e; ++t) predicted *= Z.p;
    if (brute != predicted) out.fail("invariants disagree with |p^" + std::to_string(k) + " coker|" + tag());
  }
}

void linear_algebra(uint64_t, Result& out) {
  int64_t matrices = 0, solves = 0;
  for (auto [p, n] : {std::pair{2, 2}, {3, 2}}) {
    const CoeffRing& R = make_ring(p, n);
    Brute Z{p * p, n, p};
    const std::vector<int> wide{0, 1, p, Z.q - 1}, narrow{0, 1, p};
    for (int rows = 1; rows <= 3; ++rows)
      for (int cols = 1; cols <= 3; ++cols) {
        const std::vector<int>& S = rows * cols <= 6 ? wide : narrow;
        const int64_t total = static_cast<int64_t>(std::pow(S.size(), rows * cols));
        for (int64_t code = 0; code < total && out.pass; ++code) {
          std::vector<std::vector<int>> A(rows, std::vector<int>(cols));
          int64_t c = code;
          for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) A[i][j] = S[c % S.size()], c /= static_cast<int64_t>(S.size());
          check_matrix(Z, R, A, rows, cols, S, out, solves);
          ++matrices;
        }
      }
  }
  if (out.pass) out.detail << matrices << " matrices, " << solves << " right-hand sides";
}

struct Criterion {
  const char* name;
  double limit;
  void (*run)(uint64_t, Result&);
};

const Criterion kCriteria[] = {
    {"stratification cocycle and counit", 30, stratification},
    {"Cartier descent has zero p-curvature", 5, cartier_descent},
    {"quasi-nilpotence preserved with order bound", 10, nilpotence},
    {"p-curvature linearity and tensor additivity", 10, p_curvature_laws},
    {"gluing cocycle and horizontality", 30, gluing},
    {"structure sheaf Fontaine module", 5, fontaine_structure_sheaf},
    {"change-of-lift round trip", 30, change_of_lift_round_trip},
    {"projective line crystalline cohomology", 120, projective_line_cohomology},
    {"E1 degeneration", 300, e1_degeneration},
    {"psi isomorphism and Lambda sequence", 120, lambda_psi},
    {"Dolbeault to de Rham quasi-isomorphism", 60, dolbeault},
    {"Howell solve/kernel/invariants vs enumeration", 60, linear_algebra},
};

}  // namespace

std::vector<Outcome> run_all(uint64_t seed, const std::function<void(const Outcome&)>& report) {
  std::vector<Outcome> out;
  int id = 0;
  for (const Criterion& c : kCriteria) {
    ++id;
    Result r;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(seed + static_cast<uint64_t>(id), r);
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    Outcome o;
    o.id = id;
    o.name = c.name;
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.limit = c.limit;
    o.pass = r.pass && o.seconds < c.limit;
    o.detail = r.detail.str();
    if (r.pass && !o.pass) o.detail += "; over the time limit";
    if (report) report(o);
    out.push_back(std::move(o));
  }
  return out;
}

std::string format_line(const Outcome& o) {
  char head[160];
  std::snprintf(head, sizeof head, "[%s] %2d %-48s %8.2fs / %4.0fs  ", o.pass ? "PASS" : "FAIL", o.id, o.name.c_str(),
                o.seconds, o.limit);
  return head + o.detail;
}

}  // namespace pdcrys::acceptance
