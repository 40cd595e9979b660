#pragma once

#include "curvlab/chain.hpp"
#include "curvlab/weights.hpp"

namespace curvlab {

inline constexpr double kDensityFloor = 1e-12;

// Strictly positive function on the state set; normalized means E_m[rho] = 1.
struct Density {
    Vec values;
    bool normalized = false;
    bool floored = false; // some entries were clamped up to kDensityFloor

    double operator()(int eta) const { return values(eta); }
};

// Floors at kDensityFloor (flagged) instead of rejecting boundary samples.
Density make_density(const MappingChain &chain, Vec values, bool normalize = true);
Density uniform_density(const MappingChain &chain);
// Dirac-like density 1_eta / m(eta), floored.
Density dirac_density(const MappingChain &chain, int eta);

// H^phi(rho) = E_m[phi o rho] - phi(E_m[rho]).
double phi_entropy(const Density &rho, const EntropyGenerator &gen, const MappingChain &chain);

// E(f,g) = -E_m[f (Lg)].
double dirichlet_form(const Vec &f, const Vec &g, const MappingChain &chain);

// I^phi(rho) = E(rho, phi' o rho).
double phi_fisher(const Density &rho, const EntropyGenerator &gen, const MappingChain &chain);

// A(rho,psi) = 1/2 sum m(eta) c(eta,sigma) theta(rho(eta),rho(sigma eta))
//              [psi(eta)-psi(sigma eta)]^2
double quad_A(const Density &rho, const Vec &psi, const WeightFunction &theta,
              const MappingChain &chain);

struct QuadBResult {
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;
    bool grad_warning = false; // gradient evaluated at floored density entries
};

// B = C - D with
//   C = 1/4 sum m c { grad theta(rho,rho o sigma) . (L rho, L rho o sigma) } [grad psi]^2
//   D = 1/2 sum m c theta (psi - psi o sigma)(L psi - L psi o sigma)
// Terms accumulate pairwise in active-edge enumeration order.
QuadBResult quad_B(const Density &rho, const Vec &psi, const WeightFunction &theta,
                   const MappingChain &chain);

// Matrix representations of A and B for fixed rho: psi^T A_mat psi = quad_A,
// psi^T B_mat psi = quad_B.
struct QuadraticFormPair {
    Mat A_mat;
    Mat B_mat;
};

QuadraticFormPair assemble_forms(const Density &rho, const WeightFunction &theta,
                                 const MappingChain &chain);

// Carre du champ: Gamma(f,g)(eta) = 1/2 sum_sigma c(eta,sigma) grad f grad g,
// Gamma2(f) = 1/2 L Gamma(f) - Gamma(f, Lf).
Vec gamma(const Vec &f, const Vec &g, const MappingChain &chain);
Vec gamma(const Vec &f, const MappingChain &chain);
Vec gamma2(const Vec &f, const MappingChain &chain);

struct BakryEmerySpecialization {
    double lhs;      // B(rho, phi' o rho)
    double rhs_base; // A(rho, phi' o rho) = Fisher information
    double fisher;   // I^phi(rho)
};

// Appendix identity for psi = phi' o rho with theta = theta_phi.
BakryEmerySpecialization bakry_emery_specialization(const Density &rho,
                                                    const EntropyGenerator &gen,
                                                    const MappingChain &chain);

} // namespace curvlab
