#ifndef PDCRYS_CARTIER_HPP
#define PDCRYS_CARTIER_HPP

#include <string>
#include <vector>

#include "pdcrys/conn.hpp"

namespace pdcrys {

// B_i = sum_j (dF/p)_{ij} F*(A'_j), no checks on M'
std::vector<PolyMatrix> shiho_matrices(const FrobLift& F, const std::vector<PolyMatrix>& Ap);
// F*(M') with the matrices above; M' is an integrable quasi-nilpotent p-connection on the twist
ConnModule shiho_phi(const FrobLift& F, const ConnModule& Mp, int nilpotence_bound = 64);

// wedge power of dF/p: image of dt'_J is sum_I det(D[I, J]) dt_I
std::map<FormMask, LaurentPoly> wedge_dF_over_p(const PolyMatrix& D, FormMask J);

// m (x) w |-> F*(m) (x) wedge(dF/p)(w), from the Higgs complex of M' to the de Rham
// complex of shiho_phi(F, M') at level 1
struct DolbeaultMorphism {
  FrobLift F;
  ConnModule source;  // lambda = 0
  ConnModule target;  // lambda = 1
  PolyMatrix D;       // dF/p

  FormElem apply(const FormElem& x) const;
};

DolbeaultMorphism dolbeault_to_derham(const FrobLift& F, const ConnModule& higgs, int nilpotence_bound = 64);
// d o lambda == lambda o theta on every basis element e_j (x) dt'_J
bool check_chain_map(const DolbeaultMorphism& L);

// alpha : Phi(F2) -> Phi(F1), alpha = sum_I F1*(psi_[I]) h^I, h = (F2*(t') - F1*(t'))/p
struct GlueIso {
  std::string from_lift, to_lift;
  ConnModule source;  // Phi(F2)
  ConnModule target;  // Phi(F1)
  PolyMatrix alpha;
};

std::vector<LaurentPoly> lift_difference(const FrobLift& F1, const FrobLift& F2);
GlueIso glue_alpha(const FrobLift& F1, const FrobLift& F2, const GammaModule& G);
GlueIso glue_alpha(const FrobLift& F1, const FrobLift& F2, const StratTable& S);
GammaModule gamma_from_table(const StratTable& S);
bool verify_glue_cocycle(const FrobLift& F1, const FrobLift& F2, const FrobLift& F3, const GammaModule& G);
// a12 * a23 == a13 for precomputed isomorphisms
bool verify_glue_cocycle(const GlueIso& a12, const GlueIso& a23, const GlueIso& a13);

}  // namespace pdcrys

#endif
