#include "curvlab/coupling.hpp"

#include <cmath>

#include <json.hpp>

namespace curvlab {

void CouplingRates::set_edge(EdgeCoupling edge) {
    auto key = std::make_pair(edge.eta, edge.sigma);
    auto it = index_.find(key);
    if (it == index_.end()) {
        index_[key] = static_cast<int>(edges_.size());
        edges_.push_back(std::move(edge));
    } else {
        edges_[it->second] = std::move(edge);
    }
}

const EdgeCoupling *CouplingRates::find(int eta, int sigma) const {
    auto it = index_.find({eta, sigma});
    return it == index_.end() ? nullptr : &edges_[it->second];
}

CouplingValidation validate_coupling_rates(const CouplingRates &rates, const MappingChain &chain,
                                           double tol) {
    CouplingValidation rep;
    rep.ok = true;
    const int e_move = chain.identity();
    const int ng = chain.move_count();
    for (const EdgeCoupling &ec : rates.edges()) {
        const int target = chain.apply(ec.sigma, ec.eta);
        std::vector<double> row(ng, 0.0), col(ng, 0.0);
        for (const CouplingEntry &entry : ec.entries) {
            if (entry.rate < 0.0) {
                rep.ok = false;
                rep.negative_entry = true;
                rep.worst_eta = ec.eta;
                rep.worst_sigma = ec.sigma;
                return rep;
            }
            row[entry.gamma] += entry.rate;
            col[entry.gammabar] += entry.rate;
        }
        for (int g = 0; g < ng; ++g) {
            if (g != e_move) {
                double rv = std::fabs(row[g] - chain.rate(ec.eta, g));
                double cv = std::fabs(col[g] - chain.rate(target, g));
                double v = std::max(rv, cv);
                if (v > rep.worst_violation) {
                    rep.worst_violation = v;
                    rep.worst_eta = ec.eta;
                    rep.worst_sigma = ec.sigma;
                    rep.worst_move = g;
                }
            }
        }
        // Identity-move bookkeeping: the defects can be absorbed at (e,e)
        // exactly when they are equal and nonnegative; otherwise record the
        // implied c(., e) values.
        double def_row = chain.rate(ec.eta, e_move) - row[e_move];
        double def_col = chain.rate(target, e_move) - col[e_move];
        bool absorbed = std::fabs(def_row - def_col) <= tol && def_row >= -tol;
        if (!absorbed)
            rep.e_adjustments.push_back({ec.eta, ec.sigma, row[e_move], col[e_move]});
    }
    rep.ok = rep.ok && rep.worst_violation <= tol;
    return rep;
}

EdgeCoupling product_coupling_rates(const MappingChain &chain, int eta, int sigma) {
    const int e_move = chain.identity();
    const int target = chain.apply(sigma, eta);
    const int ng = chain.move_count();
    double r1 = 0.0, r2 = 0.0;
    for (int g = 0; g < ng; ++g) {
        if (g == e_move) continue;
        r1 += chain.rate(eta, g);
        r2 += chain.rate(target, g);
    }
    double z = std::max(r1, r2);
    if (z <= 0.0) throw std::runtime_error("product coupling: zero total rate");
    // identity padding so both sides total z
    auto padded = [&](int state, double real_total, int g) {
        if (g == e_move) return z - real_total;
        return chain.rate(state, g);
    };
    EdgeCoupling ec;
    ec.eta = eta;
    ec.sigma = sigma;
    for (int g = 0; g < ng; ++g) {
        double a = padded(eta, r1, g);
        if (a <= 0.0) continue;
        for (int gb = 0; gb < ng; ++gb) {
            double b = padded(target, r2, gb);
            if (b <= 0.0) continue;
            ec.entries.push_back({g, gb, a * b / z});
        }
    }
    return ec;
}

CouplingRates product_coupling(const MappingChain &chain) {
    CouplingRates out;
    for (const ActiveEdge &e : chain.active_edges())
        out.set_edge(product_coupling_rates(chain, e.eta, e.sigma));
    return out;
}

double J_term(int eta, int sigma, int gamma, int gammabar, const Density &rho, const Vec &psi,
              const WeightFunction &theta, const MappingChain &chain) {
    const int s_eta = chain.apply(sigma, eta);
    const int g_eta = chain.apply(gamma, eta);
    const int gb_s_eta = chain.apply(gammabar, s_eta);
    double dpsi = psi(eta) - psi(s_eta);
    double th_base = theta.theta(rho(eta), rho(s_eta));
    double th_moved = theta.theta(rho(g_eta), rho(gb_s_eta));
    return (th_moved + th_base) * dpsi * dpsi -
           2.0 * th_base * dpsi * (psi(g_eta) - psi(gb_s_eta));
}

double I_term(int eta, int sigma, int gamma, int gammabar, const Density &rho, const Vec &psi,
              const WeightFunction &theta, const MappingChain &chain) {
    const int s_eta = chain.apply(sigma, eta);
    const int g_eta = chain.apply(gamma, eta);
    const int gb_s_eta = chain.apply(gammabar, s_eta);
    double dpsi = psi(eta) - psi(s_eta);
    double dpsi_moved = psi(g_eta) - psi(gb_s_eta);
    return theta.theta(rho(g_eta), rho(gb_s_eta)) * dpsi * dpsi -
           theta.theta(rho(eta), rho(s_eta)) * dpsi_moved * dpsi_moved;
}

double coupling_lower_bound(const Density &rho, const Vec &psi, const WeightFunction &theta,
                            const CouplingRates &rates, const MappingChain &chain) {
    PairwiseAccumulator acc;
    for (const EdgeCoupling &ec : rates.edges()) {
        double mc = chain.measure()(ec.eta) * chain.rate(ec.eta, ec.sigma);
        for (const CouplingEntry &entry : ec.entries) {
            if (entry.rate == 0.0) continue;
            acc.add(0.25 * mc * entry.rate *
                    J_term(ec.eta, ec.sigma, entry.gamma, entry.gammabar, rho, psi, theta, chain));
        }
    }
    return acc.total();
}

ContractivityReport contractivity_report(const CouplingRates &rates, const MappingChain &chain,
                                         const DistanceMatrix &d) {
    ContractivityReport rep;
    for (const EdgeCoupling &ec : rates.edges()) {
        const int target = chain.apply(ec.sigma, ec.eta);
        EdgeContractivity e{ec.eta, ec.sigma, 0.0, 0.0};
        const int base_dist = d(ec.eta, target);
        for (const CouplingEntry &entry : ec.entries) {
            int u = chain.apply(entry.gamma, ec.eta);
            int v = chain.apply(entry.gammabar, target);
            int dist = d(u, v);
            if (dist > base_dist) e.expanding_mass += entry.rate;
            if (dist == 0) e.merging_mass += entry.rate;
        }
        rep.total_expanding += e.expanding_mass;
        rep.max_expanding = std::max(rep.max_expanding, e.expanding_mass);
        rep.edges.push_back(e);
    }
    return rep;
}

std::string coupling_to_json(const CouplingRates &rates) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EdgeCoupling &ec : rates.edges()) {
        nlohmann::json entries = nlohmann::json::array();
        for (const CouplingEntry &entry : ec.entries)
            entries.push_back(
                {{"gamma", entry.gamma}, {"gammabar", entry.gammabar}, {"rate", entry.rate}});
        arr.push_back({{"eta", ec.eta}, {"sigma", ec.sigma}, {"entries", std::move(entries)}});
    }
    return arr.dump(2);
}

} // namespace curvlab
