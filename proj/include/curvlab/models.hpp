#pragma once

#include <functional>
#include <map>

#include "curvlab/coupling.hpp"

namespace curvlab {

struct AssumptionCheck {
    std::string name;
    bool ok = false;
    std::string witness; // offending state/move when !ok, else empty
};

// theorem_K(M_theta) = K_offset + M_theta * K_slope. w_inf_bound is the
// continuous-time infinity coarse-Ricci lower bound certified by the
// constructed coupling rates.
struct ModelConstants {
    double kappa_star = 0.0;
    double kappa_bar_star = 0.0;
    double K_offset = 0.0;
    double K_slope = 0.0;
    double w_inf_bound = 0.0;
    bool hypotheses_met = true;

    double theorem_K(double m_theta) const { return K_offset + m_theta * K_slope; }
};

struct ModelInstance {
    std::string name;
    MappingChain chain;
    CouplingRates rates;
    ModelConstants constants;
    std::vector<AssumptionCheck> assumptions;
    std::map<std::string, double> info; // formula cross-checks, limits, brute-force values

    bool assumptions_ok() const {
        for (const auto &a : assumptions)
            if (!a.ok) return false;
        return true;
    }
};

// Glauber dynamics for an involutive commuting move set: rates
// exp(-(beta/2) grad_sigma H), Gibbs measure, the kappa merging rates and the
// contractive coupling table. States are whatever enumeration the caller's
// moves encode.
ModelInstance glauber(int n_states, MoveSet moves, const Vec &hamiltonian, double beta,
                      const std::string &name = "glauber");

// Curie-Weiss: Omega = {-1,1}^N as bit patterns (LSB = site 0, bit 1 = spin
// +1), single-site flips, H = -(sum_i eta_i)^2 / (2N).
ModelInstance curie_weiss(int N, double beta);

// Ising on a connected subset of Z^d with the inherited edges. `edges` lists
// the lattice adjacency; `ambient_d` is the dimension entering the theorem
// constants. States are bit patterns as in Curie-Weiss.
ModelInstance ising(int n_sites, const std::vector<std::pair<int, int>> &edges, int ambient_d,
                    double beta);
// 1-D path of `sites` spins.
ModelInstance ising_path(int sites, double beta);

// Bernoulli-Laplace: N particles on L sites, swap moves sigma_ij, uniform
// measure. States enumerated in increasing bitmask order.
ModelInstance bernoulli_laplace(int L, int N);

// Hardcore model on a simple connected graph (adjacency lists), fugacity
// beta in (0,1). Independent sets enumerated in increasing bitmask order.
ModelInstance hardcore(const std::vector<std::vector<int>> &adjacency, double beta);

// Interacting random walks on N^d localized to Omega_N = {0..N}^d.
// Rates exp(-grad V) clipped at the boundary; the kappa hypotheses are
// evaluated with the unclipped rates on Omega_{N+1}. v_minus defaults to the
// choice giving death rates lambda * eta_i.
using Potential = std::function<double(const std::vector<int> &)>;

ModelInstance interacting_rw_localized(int d, int N, const Potential &v_plus, double lambda,
                                       const Potential &v_minus = nullptr);

// Named potentials for the CLI: "radial-h2" is beta*|eta|^2, "separable-quad"
// is sum_i a*eta_i^2 + b*eta_i.
Potential radial_h2_potential(double beta);
Potential separable_quad_potential(double a, double b);

// Proof-cancellation terms: the summed quantities shown to vanish in the
// model theorems' proofs, evaluated for concrete (rho, psi). scale is the
// accumulated absolute mass for relative comparisons.
struct CancellationTerm {
    std::string name;
    double value;
    double scale;
};

std::vector<CancellationTerm> cancellation_terms(const ModelInstance &inst, const Density &rho,
                                                 const Vec &psi, const WeightFunction &theta);

} // namespace curvlab
