#pragma once

#include "curvlab/chain.hpp"

namespace curvlab {

// Exact transportation LP: minimize sum f_ij c_ij over nonnegative flows on
// the allowed arcs with fixed row sums (supplies) and column sums (demands).
// Solved by successive shortest augmenting paths with node potentials;
// optimality is certified by the returned duals (complementary slackness).
struct TransportArc {
    int src;
    int dst;
    double cost;
};

struct TransportPlanEntry {
    int src;
    int dst;
    double flow;
};

struct TransportResult {
    bool feasible = false;
    double cost = 0.0;
    std::vector<TransportPlanEntry> plan;
    Vec dual_src; // u_i
    Vec dual_dst; // v_j, with u_i + v_j <= c_ij on arcs, equality on support
    double dual_gap = 0.0;
};

TransportResult solve_transport(const Vec &supply, const Vec &demand,
                                const std::vector<TransportArc> &arcs);

struct WassersteinResult {
    double value = 0.0;  // W_p
    double cost_p = 0.0; // W_p^p
    Mat plan;
    double dual_gap = 0.0;
};

// W_p between probability vectors for the metric d (p >= 1). Throws on mass
// mismatch beyond 1e-12.
WassersteinResult wasserstein_p(const Vec &mu, const Vec &nu, const DistanceMatrix &d, double p);

double total_variation(const Vec &mu, const Vec &nu);

} // namespace curvlab
