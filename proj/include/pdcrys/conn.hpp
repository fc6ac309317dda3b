#ifndef PDCRYS_CONN_HPP
#define PDCRYS_CONN_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdcrys/pdhopf.hpp"

namespace pdcrys {

struct NilpotenceBoundExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// coordinates on the basis e_1..e_r
using ModElem = std::vector<LaurentPoly>;

PolyMatrix kron(const PolyMatrix& A, const PolyMatrix& B);
PolyMatrix derive(const PolyMatrix& A, int i);
ModElem column(const PolyMatrix& A, int j);

// nabla(e_j) = sum_i sum_k (A_i)_{kj} e_k (x) dt_i, so
// nabla_i(f e) = lambda d_i(f) e + f A_i e.
struct ConnModule {
  Chart chart;
  int r = 0;
  int lambda = 1;  // 0, 1 or p
  std::vector<PolyMatrix> A;

  static ConnModule trivial(const Chart& c, int rank, int lambda);
  const CoeffRing& ring() const { return *chart.R; }
  int dim() const { return chart.d; }
  ModElem zero() const;
  ModElem basis(int j) const;
  ModElem nabla(int i, const ModElem& x) const;
};

bool is_zero(const ModElem& x);
// curvature lambda (d_i A_j - d_j A_i) + [A_i, A_j]
PolyMatrix curvature(const ConnModule& M, int i, int j);
bool check_integrable(const ConnModule& M);
// nabla_1^{I_1} first, then nabla_2^{I_2}, ...
ModElem iterate_nabla(const ConnModule& M, const Exp& I, const ModElem& x);

struct NilpotenceResult {
  bool ok = false;
  int order = 0;
  std::vector<std::pair<Exp, int>> witnesses;  // surviving (I, j) at the bound
};

NilpotenceResult quasi_nilpotence_order(const ConnModule& M, int bound);
// matrices of nabla^I on the basis, every I with a nonzero matrix; throws past the bound
std::map<Exp, PolyMatrix> basis_iterates(const ConnModule& M, int bound);
// columns nabla_i^p(e_j); needs lambda = 1
std::vector<PolyMatrix> p_curvature(const ConnModule& M);

// M (x) Omega^q: coefficients indexed by increasing index sets
using FormElem = std::map<FormMask, ModElem>;

// d(m (x) dt_J) = sum_i nabla_i(m) (x) dt_i ^ dt_J
FormElem de_rham_d(const ConnModule& M, const FormElem& x);
bool is_zero(const FormElem& x);

ConnModule tensor(const ConnModule& M1, const ConnModule& M2);
// lambda d_i(f) + A2_i f = f A1_i for f : M1 -> M2
bool check_horizontal(const PolyMatrix& f, const ConnModule& M1, const ConnModule& M2);

// Divided-power operators psi_[I] (I != 0) given on the basis.  On sections they act by
// psi_[I](f m) = sum_K p^{|K|} d^[K](f) psi_[I-K](m).
struct GammaModule {
  Chart chart;
  int r = 0;
  std::map<Exp, PolyMatrix> psi;

  ModElem act(const Exp& I, const ModElem& x) const;
  // psi_[I] = (p^{|I|} / I!) nabla^I for a quasi-nilpotent connection
  static GammaModule from_connection(const ConnModule& M, int bound);
  // the p-connection with A_i = psi_[e_i]
  ConnModule p_connection() const;
};

struct ValidationReport {
  bool valid = true;
  std::vector<std::string> failures;
  void fail(const std::string& s) {
    valid = false;
    failures.push_back(s);
  }
};

// psi_[I] psi_[J] = binom(I+J, I) psi_[I+J] on the basis
ValidationReport validate_gamma(const GammaModule& G);

// Taylor coefficients of eps(1 (x) e_j) in the flavor's basis; keys as in PDPoly
struct StratTable {
  Flavor flavor = Flavor::P;
  Chart chart;
  int r = 0;
  std::map<Exp, PolyMatrix> entries;

  int m() const { return chart.d; }
  // entry (l, j) of the matrix of PD polynomials
  PDPoly entry(int l, int j) const;
};

// P for lambda = 1, T for lambda = p
StratTable stratify(const ConnModule& M, Flavor f, int bound);
StratTable stratify(const GammaModule& G);
// Q flavor at level 1 from a connection and the dual divided operators psi_[J] (O-linear)
StratTable stratify_q(const ConnModule& M, const std::map<Exp, PolyMatrix>& psi_dual, int bound);
ValidationReport validate_q_input(const ConnModule& M, const std::map<Exp, PolyMatrix>& psi_dual);

struct CocycleReport {
  bool counit_ok = true;
  bool cocycle_ok = true;
  std::string detail;
  bool ok() const { return counit_ok && cocycle_ok; }
};

CocycleReport verify_cocycle(const StratTable& S);

}  // namespace pdcrys

#endif
