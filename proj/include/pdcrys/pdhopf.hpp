#ifndef PDCRYS_PDHOPF_HPP
#define PDCRYS_PDHOPF_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdcrys/chart.hpp"

namespace pdcrys {

// P: xi with divided powers.  R: zeta = xi/p, ordinary powers.
// T: xi/p with divided powers.  Q: xi (xi^p = p eta) and eta.
enum class Flavor { P, R, T, Q };

const char* flavor_name(Flavor f);

struct FlavorMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Monomial keys have m entries, except Q where the xi exponents (each < p) are
// followed by the m eta exponents.
class PDPoly {
 public:
  Chart chart;
  int m = 0;
  Flavor flavor = Flavor::P;
  std::map<Exp, LaurentPoly> terms;

  PDPoly() = default;
  PDPoly(const Chart& c, int vars, Flavor f) : chart(c), m(vars), flavor(f) {}

  static PDPoly constant(const Chart& c, int vars, Flavor f, const LaurentPoly& g);
  static PDPoly one(const Chart& c, int vars, Flavor f);
  // xi_i, zeta_i or (xi/p)_i
  static PDPoly generator(const Chart& c, int vars, Flavor f, int i);
  static PDPoly eta(const Chart& c, int vars, int i);
  static PDPoly basis(const Chart& c, int vars, Flavor f, const Exp& key);
  // xi^a eta^b with arbitrary a, rewritten to normal form
  static PDPoly q_monomial(const Chart& c, int vars, const Exp& xi, const Exp& eta_exp);

  const CoeffRing& ring() const { return *chart.R; }
  int key_len() const { return flavor == Flavor::Q ? 2 * m : m; }
  Exp zero_key() const { return Exp(key_len(), 0); }
  bool is_zero() const { return terms.empty(); }
  void add_term(const Exp& key, const LaurentPoly& c);
  LaurentPoly coeff(const Exp& key) const;
  // total degree in the PD variables (eta counts p)
  int degree() const;
  PDPoly truncated(int max_degree) const;
  PDPoly scaled(const LaurentPoly& f) const;
  PDPoly scaled(const RingElem& c) const;

  PDPoly operator+(const PDPoly& o) const;
  PDPoly operator-(const PDPoly& o) const;
  PDPoly operator-() const;
  PDPoly operator*(const PDPoly& o) const;
  PDPoly& operator+=(const PDPoly& o);
  bool operator==(const PDPoly& o) const { return terms == o.terms; }
  bool operator!=(const PDPoly& o) const { return !(*this == o); }

  std::string str() const;
};

int key_degree(Flavor f, int p, int m, const Exp& key);

// product of two basis monomials: a single monomial with a coefficient
std::pair<RingElem, Exp> mono_product(const CoeffRing& R, Flavor f, int m, const Exp& a, const Exp& b);
PDPoly pd_mul(const PDPoly& x, const PDPoly& y);

// right unit: f(t) |-> f(t + xi) written in the flavor's basis (needs m == chart.d)
PDPoly eta_right(const Chart& c, Flavor f, const LaurentPoly& g);

// Tensor powers over the chart ring.  Coefficients are kept on the far left;
// keys are the concatenated factor keys.
struct PDTensor {
  Chart chart;
  int m = 0;
  Flavor flavor = Flavor::P;
  int factors = 2;
  std::map<Exp, LaurentPoly> terms;

  PDTensor() = default;
  PDTensor(const Chart& c, int vars, Flavor f, int k) : chart(c), m(vars), flavor(f), factors(k) {}

  int key_len() const { return flavor == Flavor::Q ? 2 * m : m; }
  void add_term(const Exp& key, const LaurentPoly& c);
  PDTensor operator+(const PDTensor& o) const;
  PDTensor operator-(const PDTensor& o) const;
  PDTensor operator*(const PDTensor& o) const;
  bool operator==(const PDTensor& o) const { return terms == o.terms; }
  bool is_zero() const { return terms.empty(); }
  std::string str() const;
};

// x (x) y; the coefficients of y move left through the right unit
PDTensor tensor(const PDPoly& x, const PDPoly& y);
PDTensor comult(const PDPoly& x);
// delta applied to factor pos of a tensor
PDTensor comult_at(const PDTensor& t, int pos);
// counit applied to factor pos (0 or 1) of a two-fold tensor
PDPoly counit_at(const PDTensor& t, int pos);

PDPoly antipode(const PDPoly& x);
LaurentPoly counit(const PDPoly& x);

// s^i : P -> R, xi^[I] |-> (p^{|I|-i} / I!) zeta^I, defined on J^[i]
PDPoly map_s(const PDPoly& x, int i = 0);
// u : Q -> P at level 1, xi |-> xi, eta |-> -xi^[p]
PDPoly map_u(const PDPoly& x);
// v : Q -> F*R' at level 1, xi |-> 0, eta |-> F*(zeta'); the result is written in
// the basis F*(zeta')^I over the chart of F
PDPoly map_v(const PDPoly& x, const FrobLift& F);

// Finite sum of c_I d^I (ordinary, pairs with P) or c_I d^[I] (divided, pairs with R).
struct DualOperator {
  Chart chart;
  int m = 0;
  bool divided = false;
  std::map<Exp, LaurentPoly> terms;

  DualOperator() = default;
  DualOperator(const Chart& c, int vars, bool div) : chart(c), m(vars), divided(div) {}
  static DualOperator partial(const Chart& c, const Exp& I, const LaurentPoly& coef, bool divided = false);

  void add_term(const Exp& I, const LaurentPoly& c);
  DualOperator operator+(const DualOperator& o) const;
  bool operator==(const DualOperator& o) const { return terms == o.terms; }
};

LaurentPoly pair(const DualOperator& op, const PDPoly& x);
// action on functions; for ordinary operators this is pair(op, eta_right(f))
LaurentPoly apply(const DualOperator& op, const LaurentPoly& f);
// composition of ordinary differential operators
DualOperator op_compose(const DualOperator& a, const DualOperator& b);

}  // namespace pdcrys

#endif
