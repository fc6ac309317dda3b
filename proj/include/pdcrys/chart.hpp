#ifndef PDCRYS_CHART_HPP
#define PDCRYS_CHART_HPP

#include <bit>
#include <map>
#include <string>
#include <vector>

#include "pdcrys/laurent.hpp"

namespace pdcrys {

struct Chart {
  const CoeffRing* R = nullptr;
  int d = 0;
  std::vector<bool> invertible;
  std::vector<LaurentPoly> extra_units;
  std::string name;

  Chart() = default;
  Chart(const CoeffRing& r, int dim, std::vector<bool> inv = {}, std::string nm = "")
      : R(&r), d(dim), invertible(inv.empty() ? std::vector<bool>(dim, false) : std::move(inv)),
        name(std::move(nm)) {}

  // exponents allowed by the invertibility flags
  bool admits(const Exp& e) const;
  bool admits(const LaurentPoly& f) const;
  Chart at_level(const CoeffRing& r) const;
  Chart localized(const std::vector<bool>& more) const;
  bool is_unit(const LaurentPoly& f) const;
};

// Substitution: target coordinate j  |->  images[j], a Laurent polynomial on the source.
struct ChartMap {
  Chart source;
  Chart target;
  std::vector<LaurentPoly> images;

  // pull back a function on the target; sigma_twist applies sigma to coefficients
  LaurentPoly apply(const LaurentPoly& f, bool sigma_twist = false) const;
  ChartMap at_level(const CoeffRing& r) const;
  bool is_monomial() const;
};

ChartMap identity_map(const Chart& c);
// (b after a): source of a to target of b
ChartMap compose(const ChartMap& b, const ChartMap& a);
// inverse of a monomial substitution with unimodular exponent matrix; throws otherwise
ChartMap monomial_inverse(const ChartMap& m);

// F*(t_i') = t_i^p + p a_i at level n+1
struct FrobLift {
  Chart chart;  // at level n
  std::vector<LaurentPoly> a;  // at level n+1
  std::string name;

  static FrobLift standard(const Chart& c, const std::string& name = "F");
  static FrobLift with_corrections(const Chart& c, const std::vector<LaurentPoly>& a,
                                   const std::string& name = "F");
  const CoeffRing& upper() const { return chart.R->at_level(chart.R->n + 1); }
  // images of the coordinates at level n+1
  std::vector<LaurentPoly> images() const;
  ChartMap as_map() const;  // level n+1
  // F*(f) at level n+1 and at level n
  LaurentPoly pullback_upper(const LaurentPoly& f) const;
  LaurentPoly pullback(const LaurentPoly& f) const;
  PolyMatrix pullback(const PolyMatrix& M) const;
};

// entry (i, j) = p_divide(d_i F*(t_j')) at level n
PolyMatrix dF_over_p(const FrobLift& F);
// the lift F transported to another chart through an isomorphism of charts:
// `to` expresses the coordinates of F's chart on the new chart and `from` is its inverse
FrobLift transport_lift(const FrobLift& F, const ChartMap& to, const ChartMap& from, const Chart& target);

struct Overlap {
  int i = 0, j = 0;  // i < j
  Chart chart;    // chart i localized
  Chart chart_j;  // chart j localized
  ChartMap to_j;   // coordinates of chart j on the overlap (chart-i coordinates)
  ChartMap to_i;   // coordinates of chart i as functions of chart-j coordinates (on chart j localized)
};

struct Atlas {
  std::vector<Chart> charts;
  std::map<std::pair<int, int>, Overlap> overlaps;
  std::vector<FrobLift> lifts;  // one per chart, may be empty

  int dim() const { return charts.empty() ? 0 : charts[0].d; }
  const CoeffRing& ring() const { return *charts.at(0).R; }
  // chart j0 localized to the intersection of the given charts (sorted indices)
  Chart intersection_chart(const std::vector<int>& J) const;
  // coordinates of chart j as functions on chart i's side of U_ij (any order)
  ChartMap transition(int i, int j) const;
  // chart a localized to U_ab
  Chart side(int a, int b) const;
  // images: coordinates of chart j in chart-i coordinates; the inverse is derived for
  // monomial transitions when not supplied
  void add_overlap(int i, int j, const std::vector<bool>& inv_on_i, const std::vector<LaurentPoly>& images,
                   const std::vector<LaurentPoly>& inverse_images = {});
};

struct AtlasReport {
  bool valid = true;
  std::vector<std::string> failures;
};

AtlasReport validate_atlas(const Atlas& A);

Atlas affine_atlas(const CoeffRing& R, int d);
Atlas torus_atlas(const CoeffRing& R, int d);
Atlas projective_line(const CoeffRing& R);
Atlas product_atlas(const Atlas& A, const Atlas& B);

// ---------------------------------------------------------------- forms

using FormMask = uint32_t;

inline int form_degree(FormMask m) { return std::popcount(m); }
// sign of dt_a ^ dt_b relative to the increasing ordering of a|b; 0 when they overlap
int wedge_sign(FormMask a, FormMask b);
std::vector<FormMask> masks_of_degree(int d, int s);

// Coefficients indexed by increasing index tuples, stored as bitmasks.
template <class T>
struct FormValued {
  std::map<FormMask, T> parts;
};

}  // namespace pdcrys

#endif
