#pragma once

#include <map>

#include "curvlab/functionals.hpp"

namespace curvlab {

struct CouplingEntry {
    int gamma;
    int gammabar;
    double rate;
};

struct EdgeCoupling {
    int eta;
    int sigma;
    std::vector<CouplingEntry> entries;
};

// Per-edge coupling rate tables c_cpl(eta, sigma eta, gamma, gammabar).
// Row marginals over gammabar must reproduce c(eta, .), column marginals
// c(sigma eta, .); the identity row/column are free up to the recorded
// diagonal adjustment (the paper's WLOG on c(., e)).
class CouplingRates {
public:
    void set_edge(EdgeCoupling edge);
    const EdgeCoupling *find(int eta, int sigma) const;
    const std::vector<EdgeCoupling> &edges() const { return edges_; }

private:
    std::vector<EdgeCoupling> edges_;
    std::map<std::pair<int, int>, int> index_;
};

struct EAdjustment {
    int eta;
    int sigma;
    double implied_eta_e;    // identity rate at eta implied by the table
    double implied_target_e; // identity rate at sigma eta implied by the table
};

struct CouplingValidation {
    bool ok = false;
    double worst_violation = 0.0;
    int worst_eta = -1;
    int worst_sigma = -1;
    int worst_move = -1;
    bool negative_entry = false;
    std::vector<EAdjustment> e_adjustments;
};

// Marginal checks for every active edge carrying a table. Negative entries
// fail hard regardless of tol. Identity-move marginal defects are absorbed
// into c_cpl(.,.,e,e) when the row and column defects agree and are
// nonnegative; otherwise the implied c(., e) values are recorded as
// adjustments (sanctioned by the diagonal freedom, not a failure).
CouplingValidation validate_coupling_rates(const CouplingRates &rates, const MappingChain &chain,
                                           double tol = 1e-10);

// Product coupling rates on one edge: c(eta,g) c(sigma eta,g') / Z after
// padding the identity rates so both totals equal Z.
EdgeCoupling product_coupling_rates(const MappingChain &chain, int eta, int sigma);
CouplingRates product_coupling(const MappingChain &chain);

// J and I of the coupling lemma. Signs follow the displayed definitions:
// J >= I always, with gap theta(rho,rho o sigma) [psi - psi o sigma - psi o
// gamma + psi o gammabar sigma]^2.
double J_term(int eta, int sigma, int gamma, int gammabar, const Density &rho, const Vec &psi,
              const WeightFunction &theta, const MappingChain &chain);
double I_term(int eta, int sigma, int gamma, int gammabar, const Density &rho, const Vec &psi,
              const WeightFunction &theta, const MappingChain &chain);

// (1/4) sum m c c_cpl J over all tabled edges; a lower bound for B(rho,psi)
// for concave theta.
double coupling_lower_bound(const Density &rho, const Vec &psi, const WeightFunction &theta,
                            const CouplingRates &rates, const MappingChain &chain);

struct EdgeContractivity {
    int eta;
    int sigma;
    double expanding_mass; // mass on pairs with d(gamma eta, gammabar sigma eta) > d(eta, sigma eta)
    double merging_mass;   // mass on pairs landing on the diagonal
};

struct ContractivityReport {
    std::vector<EdgeContractivity> edges;
    double total_expanding = 0.0;
    double max_expanding = 0.0;
};

ContractivityReport contractivity_report(const CouplingRates &rates, const MappingChain &chain,
                                         const DistanceMatrix &d);

std::string coupling_to_json(const CouplingRates &rates);

} // namespace curvlab
