#ifndef PDCRYS_COHOM_HPP
#define PDCRYS_COHOM_HPP

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdcrys/cartier.hpp"
#include "pdcrys/fontaine.hpp"

namespace pdcrys {

struct StabilizationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TruncationOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotGraded : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Per-chart modules glued along the overlaps.  For i < j, G[{i, j}] holds the basis of
// M_j written in the basis of M_i, as functions on chart i's side of U_ij.
struct GluedModule {
  Atlas atlas;
  std::vector<FilteredConnModule> local;
  std::map<std::pair<int, int>, PolyMatrix> G;
  std::vector<FontaineModule> frobenius;  // empty, or one per chart on the atlas lift

  int rank() const { return local.empty() ? 0 : local[0].M.r; }
  int lambda() const { return local.empty() ? 1 : local[0].M.lambda; }
  int length() const;
  bool has_frobenius() const { return !frobenius.empty(); }
};

// (O, lambda d) with the trivial filtration; Frobenius data from the atlas lifts when
// lambda = 1 and lifts are present
GluedModule structure_sheaf(const Atlas& A, int lambda = 1);
// a single chart carrying M
GluedModule single_chart(const ConnModule& M);
ValidationReport validate_glued(const GluedModule& G);

// ---------------------------------------------------------------- bicomplex

// t^a xi^[I] e_b dt_S dxi_T on U^J, in the coordinates of chart J[0].  The mask holds the
// dt bits first, then d bits for each further factor of J.
struct Cell {
  int J = 0;
  FormMask mask = 0;
  int b = 0;
  Exp a;
  Exp I;
  auto operator<=>(const Cell&) const = default;
};

using Cochain = std::map<Cell, RingElem>;

void add_to(Cochain& x, const Cell& c, const RingElem& v);
void add_to(Cochain& x, const Cochain& y, const RingElem& scale);

// cochains of a single chart module and forms with coefficients in it
FormElem chart_form(const Cochain& x, const ConnModule& M);
Cochain chart_cochain(const FormElem& x);

// Total complex of the Cech-de Rham bicomplex over the PD envelopes of the diagonals,
// modulo the subcomplex where (PD degree + number of dxi) >= pd_cap.  pd_cap = 1 is the
// plain complex.  D = delta + (-1)^r nabla on C^{r,s}.
class Bicomplex {
 public:
  explicit Bicomplex(const GluedModule& G, int pd_cap = 1);

  const GluedModule& module() const { return *G_; }
  int pd_cap() const { return cap_; }
  int dim() const { return d_; }
  const std::vector<std::vector<int>>& nerve() const { return nerve_; }
  int max_degree() const;

  int cech_degree(const Cell& c) const { return static_cast<int>(nerve_[c.J].size()) - 1; }
  int degree(const Cell& c) const { return cech_degree(c) + form_degree(c.mask); }
  int level(const Cell& c) const;
  Exp weight(const Cell& c) const;
  bool is_plain(const Cell& c) const;
  std::string describe(const Cell& c) const;

  // every cell of total degree m and weight w
  std::vector<Cell> cells(const Exp& w, int m) const;
  const Cochain& d(const Cell& c) const;
  Cochain d(const Cochain& x) const;

  // weight of chart-c coordinate v, and of basis vector b of chart c
  const std::vector<Exp>& coordinate_weights(int c) const { return W_[c]; }
  const Exp& basis_weight(int c, int b) const { return basis_w_[c][b]; }
  int filtration_weight(int c, int b) const { return filt_w_[c][b]; }
  // largest absolute exponent among transitions and gluing matrices
  int transition_degree() const { return trans_deg_; }

 private:
  std::shared_ptr<const GluedModule> G_;
  int cap_ = 1;
  int d_ = 0;
  std::vector<std::vector<int>> nerve_;
  std::map<std::vector<int>, int> nerve_index_;
  std::vector<Chart> chart_of_;  // per nerve entry
  std::vector<std::vector<std::pair<int, int>>> cofaces_;  // (J+, position removed)
  std::vector<std::vector<Exp>> W_;
  std::vector<std::vector<std::vector<int64_t>>> W_inv_;
  std::vector<std::vector<Exp>> basis_w_;
  std::vector<std::vector<int>> filt_w_;
  int trans_deg_ = 1;
  mutable std::map<Cell, Cochain> cache_;

  void grade();
  Cochain nabla_part(const Cell& c) const;
  Cochain face(const Cell& c, int Jplus, int k) const;
  Cochain face_zero(const Cell& c, int Jplus) const;
};

// ---------------------------------------------------------------- pieces

enum class Part { Full, Filtered, Graded, Lambda };

struct Variant {
  Part part = Part::Full;
  int i = 0;

  static Variant full() { return {}; }
  static Variant filtered(int i) { return {Part::Filtered, i}; }
  static Variant graded(int r) { return {Part::Graded, r}; }
  static Variant lambda(int p) { return {Part::Lambda, p}; }
  bool contains(int level) const;
  auto operator<=>(const Variant&) const = default;
  std::string str() const;
};

// H^m of one weight piece of a variant, as a sum of R / p^e.
struct PieceHomology {
  Exp w;
  int m = 0;
  Variant v;
  std::vector<Cell> cells;
  std::map<Cell, int> index;
  RingMatrix K;             // cycles, one per column
  RingMatrix P;             // Smith transform of the relation module
  std::vector<int> rows;    // Smith row of each class
  std::vector<int> exps;
  std::vector<Cochain> reps;

  int size() const { return static_cast<int>(exps.size()); }
  // coordinates of a cycle of this piece; nullopt if x is not a cycle here
  std::optional<std::vector<RingElem>> classify(const Cochain& x) const;
};

// matrix of the differential of degree m of a variant on one weight piece
RingMatrix piece_differential(const Bicomplex& B, const Variant& v, const std::vector<Cell>& src,
                              const std::vector<Cell>& dst);
PieceHomology piece_homology(const Bicomplex& B, const Exp& w, int m, const Variant& v);

struct ClassRef {
  Exp w;
  int index = 0;
};

// H^m of a variant over all weights within the cap
struct Group {
  int m = 0;
  Variant v;
  std::vector<ClassRef> classes;
  std::vector<int> exps;
  std::map<Exp, int> first;  // position of the first class of each weight

  int size() const { return static_cast<int>(exps.size()); }
  int length() const;
  std::vector<int> invariants() const;  // sorted, zero summands dropped
};

struct MapAnalysis {
  int source_length = 0;
  int target_length = 0;
  int kernel_length = 0;
  int image_length = 0;
  std::vector<int> image_invariants;
  bool injective() const { return kernel_length == 0; }
  bool surjective() const { return image_length == target_length; }
  bool isomorphism() const { return injective() && surjective(); }
  bool zero() const { return image_length == 0; }
};

// f : sum R/p^src -> sum R/p^dst given by M (dst x src)
MapAnalysis analyze_map(const RingMatrix& M, const std::vector<int>& src, const std::vector<int>& dst);

struct Caps {
  int poly = -1;  // weight cap D, default 4 * (transition degree) * (d + 2)
  int pd = -1;    // PD cap, default the smallest certified one
  bool certify = true;
};

// Cohomology over the weight pieces with |w| <= D, certified by the shell |w| = D + 1.
class Engine {
 public:
  Engine(const GluedModule& G, Caps caps = {});

  const GluedModule& module() const { return plain_.module(); }
  const Bicomplex& plain() const { return plain_; }
  const Bicomplex& pd() const;
  int cap() const { return D_; }
  int pd_cap() const;
  int p() const { return module().atlas.ring().p; }
  int n() const { return module().atlas.ring().n; }
  int dim() const { return plain_.dim(); }
  int max_degree() const { return plain_.max_degree(); }

  std::vector<Exp> weights(int bound) const;
  std::vector<Exp> shell() const;
  const PieceHomology& piece(const Bicomplex& B, const Exp& w, int m, const Variant& v) const;
  // throws StabilizationFailure unless the shell is acyclic in degree m
  void certify(int m, const Variant& v) const;
  const Group& group(int m, const Variant& v) const;
  // coordinates of a cycle in a group; pieces outside the cap must classify to zero
  std::vector<RingElem> classify(const Group& g, const Cochain& x) const;
  Cochain representative(const Group& g, int k) const;
  int length(int m, const Variant& v) const { return group(m, v).length(); }

  // columns: images of the classes of `src` classified in `dst`
  RingMatrix map_matrix(const Group& src, const Group& dst, const std::function<Cochain(const Cochain&)>& f) const;

  // Frobenius
  const PDFontaineData& pd_data(int J) const;
  // eval o phi^i_C on one PD cell (i may vary per cell through `level_of`)
  Cochain phi_image(const Cell& c, const RingElem& coef, int i) const;
  Cochain phi_image(const Cochain& z, int i) const;
  Cochain psi_image(const Cochain& z) const;
  // solve D z = 0, eval(z) - D y = rep inside the variant; second lift offsets by the kernel
  std::pair<Cochain, Cochain> lift(const Cochain& rep, const Exp& w, int m, const Variant& v) const;

 private:
  Bicomplex plain_;
  int D_ = 0;
  Caps caps_;
  mutable std::unique_ptr<Bicomplex> pd_;
  mutable int pd_cap_ = -1;
  mutable std::map<std::tuple<int, Exp, int, Variant>, PieceHomology> pieces_;
  mutable std::map<std::pair<int, Variant>, Group> groups_;
  mutable std::map<int, PDFontaineData> pd_data_;
  mutable std::map<int, PolyMatrix> dF_;

  int required_pd_cap() const;
};

// ---------------------------------------------------------------- reports

struct Verdict {
  int m = 0;
  int i = 0;
  bool in_range = false;
  bool holds = false;
  std::string witness;
};

struct MFCheck {
  bool length_ok = false;
  bool divisibility_ok = false;  // phi^i on F^{i+1} equals p phi^{i+1}
  bool spans = false;            // images of the phi^i generate H
  bool ok() const { return length_ok && divisibility_ok && spans; }
};

struct DegreeReport {
  int m = 0;
  std::vector<int> invariants;
  std::vector<std::vector<int>> filtration;        // invariants of the image of H^m(F^i), i = 0..p-1
  std::vector<Verdict> injective;                  // H^m(F^i) -> H^m
  std::vector<RingMatrix> phi;                     // phi_H^{m,i}: H^m(F^i) -> H^m
  std::vector<bool> phi_lift_independent;
  std::optional<MFCheck> mf;
  bool mf_in_range = false;
};

struct E1Entry {
  int r = 0, s = 0;
  std::vector<int> invariants;
  int length = 0;
  int e_infinity = 0;  // length of F^r H^{r+s} / F^{r+1} H^{r+s}
  bool in_range = false;
  bool d1_zero = false;
  std::string witness;
};

struct LambdaReport {
  int m = 0;
  std::vector<int> invariants;
  bool psi_iso = false;
  bool psi_mono = false;
  bool sequence_exact = false;
  int left = 0, middle = 0, right = 0;
  int target = 0;         // length of H^m
  bool in_range = false;  // exact sequence expected
  bool psi_in_range = false;  // psi expected to be an isomorphism
  std::string witness;
};

struct CohomologyReport {
  int p = 0, n = 0, d = 0, ell = 0;
  int cap = 0, pd_cap = 0;
  std::vector<DegreeReport> degrees;
  std::vector<E1Entry> e1;
  std::vector<LambdaReport> lambda;
  std::vector<std::string> notes;
  bool all_in_range_pass() const;
};

// H^m(F^i) -> H^m
MapAnalysis filtration_map(const Engine& E, int m, int i);
// H^m, images of H^m(F^i) and injectivity, on the plain complex
DegreeReport degree_report(const Engine& E, int m);
// phi_H^{m,i} on H^m(F^i)
RingMatrix phi_on_cohomology(const Engine& E, int m, int i, bool* lift_independent = nullptr);
// E1^{r,s} = H^{r+s}(gr^r) and the vanishing of d1
E1Entry e1_entry(const Engine& E, int r, int s);
LambdaReport lambda_report(const Engine& E, int m);
MFCheck check_mf(const Engine& E, int m, const std::vector<RingMatrix>& phi);

struct TheoremOptions {
  bool frobenius = true;
  bool lambda = true;
  bool e1 = true;
};

CohomologyReport verify_theorem(const Engine& E, const TheoremOptions& opt = {});

// Higgs cohomology of weight w against de Rham cohomology of weight p w on a single chart,
// for |w| <= cap and degrees below `below`; other de Rham weights must be acyclic there
struct DolbeaultComparison {
  int pieces = 0;
  bool isomorphic = true;
  bool off_lattice_acyclic = true;
  std::vector<std::string> witnesses;
  bool ok() const { return isomorphic && off_lattice_acyclic; }
};

DolbeaultComparison compare_dolbeault(const DolbeaultMorphism& L, int cap, int below);

}  // namespace pdcrys

#endif
