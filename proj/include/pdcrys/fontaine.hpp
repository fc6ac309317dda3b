#ifndef PDCRYS_FONTAINE_HPP
#define PDCRYS_FONTAINE_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdcrys/cartier.hpp"

namespace pdcrys {

struct GriffithsViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotFree : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotHorizontal : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OverlapMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// coordinates of v in the column span of the constant matrix B, monomial by monomial
std::optional<ModElem> coords_in(const RingMatrix& B, const ModElem& v, int d);
ModElem apply_const(const RingMatrix& B, const ModElem& v, int d);

// M = M^0 ⊇ M^1 ⊇ ... ⊇ M^l ⊇ M^{l+1} = 0, each step free on a chosen basis.
// incl[i] holds the basis of M^{i+1} in coordinates of the basis of M^i.
struct FilteredConnModule {
  ConnModule M;
  std::vector<RingMatrix> incl;

  static FilteredConnModule trivial(const ConnModule& M);
  int length() const { return static_cast<int>(incl.size()); }
  int rank(int i) const;
  // basis of M^i in coordinates of M (identity for i <= 0)
  RingMatrix basis_in_M(int i) const;
};

ValidationReport validate_filtration(const FilteredConnModule& M);
// nabla(M^i) ⊆ M^{i-1} (x) Omega^1 for i = 1..l
bool check_griffiths(const FilteredConnModule& M, std::vector<std::string>* witnesses = nullptr);

// generators (b)_i for b in the basis of M^i, level by level; one relation per
// basis vector of M^i, i >= 1: (b)_{i-1} - p (b)_i
struct PresentedModule {
  std::vector<int> offset;  // first generator of each level
  int generators = 0;
  RingMatrix relations;     // generators x relations
  bool free = false;        // certificate below is valid
  RingMatrix to_basis;      // rank x generators
  RingMatrix from_basis;    // generators x rank

  int rank() const { return to_basis.rows; }
  int levels() const { return static_cast<int>(offset.size()); }
  // coordinates of (b)_i in the free basis, one column per basis vector of M^i
  RingMatrix level_coords(int i) const;
};

struct Mtilde {
  PresentedModule module;
  ConnModule conn;                      // lambda = p, on the free basis
  std::vector<RingMatrix> filtration;   // filtration[j] spans the image of levels <= j
};

PresentedModule present_Mtilde(const FilteredConnModule& M);
Mtilde build_Mtilde(const FilteredConnModule& M);
// R-flavor table on the free basis of M~
StratTable r_stratify_Mtilde(const FilteredConnModule& M, const Mtilde& T, int bound = 64);
StratTable r_stratify_Mtilde(const FilteredConnModule& M, int bound = 64);

struct FontaineModule {
  FilteredConnModule M;
  FrobLift F;
  Mtilde tilde;
  PolyMatrix phi_F;               // F*(M~) -> M
  std::vector<PolyMatrix> phi;    // phi[i] : M^i -> M on the chosen bases, i = 0..l

  PolyMatrix phi_at(int i) const;  // phi^{-i} = p^i phi^0
};

FontaineModule divided_frobenii(const FrobLift& F, const FilteredConnModule& M, const PolyMatrix& phi_F);
// the same from the divided Frobenii phi^0..phi^l on the chosen bases of M^i
FontaineModule fontaine_from_phis(const FrobLift& F, const FilteredConnModule& M, const std::vector<PolyMatrix>& phis);

struct MFReport {
  bool length_ok = true;
  bool griffiths_ok = true;
  bool horizontal_ok = true;
  bool d_i_ok = true;
  bool d_iii_ok = true;
  bool strongly_divisible = false;
  std::vector<std::string> witnesses;

  bool valid() const { return length_ok && griffiths_ok && horizontal_ok && d_i_ok && d_iii_ok; }
};

MFReport validate_MF(const FontaineModule& FM);
bool check_strong_divisibility(const FontaineModule& FM);

// phi_{F2} = phi_{F1} o alpha(F1, F2)
FontaineModule change_of_lift(const FontaineModule& FM, const FrobLift& F2, int bound = 64);

// ---------------------------------------------------------------- PD envelopes of diagonals

// sum over |K| < cap of (d^K f)(at) xi^[K], the variables of f placed at `offset`
PDPoly taylor_expand(const LaurentPoly& f, const std::vector<LaurentPoly>& at, const Chart& base, int vars,
                     int offset, int cap);
// gamma_q(y) for y without constant term, truncated below cap
PDPoly divided_power(const PDPoly& y, int q, int cap);

// Coefficient data over P_J for J = (j0, j1, ..., jr).  The module is the pullback of
// the base module along the first projection; xi_{k,v} = x^{(jk)}_v - to_factor[k](t)_v.
struct PDFontaineData {
  FontaineModule base;              // chart j0 with lift F_{j0}, on the chart of U^J
  std::vector<FrobLift> lifts;      // F_{j1}, ..., F_{jr}
  std::vector<ChartMap> to_factor;  // coordinates of chart jk as functions on U^J
  int cap = 1;                      // PD degree truncation
  std::vector<PDPoly> z;            // z_{k,v}, (k-1)*d + v
  std::vector<LaurentPoly> z0;      // z at the diagonal

  int factors() const { return static_cast<int>(lifts.size()); }
  int vars() const { return factors() * base.M.M.dim(); }
  // filtration level of xi^[I] (x) e_b
  int level(const Exp& I, int b) const;
  // phi^i(xi^[I] (x) e_b) = p^{level - i} / I! z^I phi^{w_b}(e_b), one PD coefficient per basis vector
  std::vector<PDPoly> phi(int i, const Exp& I, int b) const;
  ModElem phi_diagonal(int i, const Exp& I, int b) const;
  bool lifts_agree() const;  // all z0 vanish
};

// filtration weight of each basis vector; throws unless every M^i is spanned by basis vectors
std::vector<int> basis_weights(const FilteredConnModule& M);

PDFontaineData diagonal_pullback(const FontaineModule& FM, const std::vector<FrobLift>& lifts,
                                 const std::vector<ChartMap>& to_factor, int cap);

}  // namespace pdcrys

#endif
