#include "curvlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace curvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-15;

// Residual bipartite graph for successive shortest paths. Node layout:
// sources [0, ns), sinks [ns, ns+nt).
struct Ssp {
    int ns, nt;
    std::vector<std::vector<int>> out; // arc ids per source
    std::vector<std::vector<int>> in;  // arc ids per sink
    std::vector<TransportArc> arcs;
    std::vector<double> flow;
    std::vector<double> pot; // node potentials
    Vec remaining_supply, remaining_demand;

    int nodes() const { return ns + nt; }

    // Dijkstra over reduced costs from all sources with remaining supply.
    // Returns the reached sink with smallest distance, or -1.
    int shortest(std::vector<double> &dist, std::vector<int> &pred_arc) {
        const int nn = nodes();
        dist.assign(nn, kInf);
        pred_arc.assign(nn, -1);
        std::vector<bool> done(nn, false);
        for (int s = 0; s < ns; ++s)
            if (remaining_supply(s) > kMassEps) dist[s] = 0.0;
        for (;;) {
            int u = -1;
            double best = kInf;
            for (int v = 0; v < nn; ++v)
                if (!done[v] && dist[v] < best) {
                    best = dist[v];
                    u = v;
                }
            if (u < 0) break;
            done[u] = true;
            if (u < ns) {
                for (int a : out[u]) {
                    int v = ns + arcs[a].dst;
                    double rc = arcs[a].cost + pot[u] - pot[v];
                    if (dist[u] + rc < dist[v] - 1e-300) {
                        dist[v] = dist[u] + rc;
                        pred_arc[v] = a;
                    }
                }
            } else {
                for (int a : in[u - ns]) {
                    if (flow[a] <= kMassEps) continue; // backward residual arc
                    int v = arcs[a].src;
                    double rc = -arcs[a].cost + pot[u] - pot[v];
                    if (dist[u] + rc < dist[v] - 1e-300) {
                        dist[v] = dist[u] + rc;
                        pred_arc[v] = a;
                    }
                }
            }
        }
        int best_sink = -1;
        double best = kInf;
        for (int t = 0; t < nt; ++t)
            if (remaining_demand(t) > kMassEps && dist[ns + t] < best) {
                best = dist[ns + t];
                best_sink = t;
            }
        return best_sink;
    }
};

} // namespace

TransportResult solve_transport(const Vec &supply, const Vec &demand,
                                const std::vector<TransportArc> &arcs) {
    const int ns = static_cast<int>(supply.size());
    const int nt = static_cast<int>(demand.size());
    TransportResult res;
    res.dual_src = Vec::Zero(ns);
    res.dual_dst = Vec::Zero(nt);

    Ssp g;
    g.ns = ns;
    g.nt = nt;
    g.arcs = arcs;
    g.flow.assign(arcs.size(), 0.0);
    g.pot.assign(ns + nt, 0.0);
    g.out.assign(ns, {});
    g.in.assign(nt, {});
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
        if (arcs[a].cost < 0.0) throw std::invalid_argument("transport: negative arc cost");
        g.out[arcs[a].src].push_back(a);
        g.in[arcs[a].dst].push_back(a);
    }
    g.remaining_supply = supply;
    g.remaining_demand = demand;

    std::vector<double> dist;
    std::vector<int> pred;
    for (;;) {
        double pending = 0.0;
        for (int s = 0; s < ns; ++s) pending += std::max(g.remaining_supply(s), 0.0);
        if (pending <= kMassEps * std::max(1.0, supply.sum())) break;

        int sink = g.shortest(dist, pred);
        if (sink < 0) {
            res.feasible = false;
            return res;
        }
        // potential update capped at the target distance keeps reduced costs
        // nonnegative on both visited and unvisited nodes
        double dt = dist[ns + sink];
        for (int v = 0; v < g.nodes(); ++v) g.pot[v] += std::min(dist[v], dt);

        // bottleneck along the path
        double push = g.remaining_demand(sink);
        for (int v = ns + sink; pred[v] >= 0;) {
            int a = pred[v];
            if (v >= ns) {
                v = g.arcs[a].src;
            } else {
                push = std::min(push, g.flow[a]);
                v = ns + g.arcs[a].dst;
            }
        }
        {
            // trace back to the originating source for its supply bound
            int v = ns + sink;
            while (pred[v] >= 0) v = (v >= ns) ? g.arcs[pred[v]].src : ns + g.arcs[pred[v]].dst;
            push = std::min(push, g.remaining_supply(v));
        }
        if (push <= kMassEps) {
            // numerically exhausted; drop the crumbs
            g.remaining_demand(sink) = 0.0;
            continue;
        }
        int v = ns + sink;
        while (pred[v] >= 0) {
            int a = pred[v];
            if (v >= ns) {
                g.flow[a] += push;
                v = g.arcs[a].src;
            } else {
                g.flow[a] -= push;
                v = ns + g.arcs[a].dst;
            }
        }
        g.remaining_supply(v) -= push;
        g.remaining_demand(sink) -= push;
    }

    res.feasible = true;
    PairwiseAccumulator cost;
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a)
        if (g.flow[a] > 0.0) {
            res.plan.push_back({arcs[a].src, arcs[a].dst, g.flow[a]});
            cost.add(g.flow[a] * arcs[a].cost);
        }
    res.cost = cost.total();
    for (int s = 0; s < ns; ++s) res.dual_src(s) = -g.pot[s];
    for (int t = 0; t < nt; ++t) res.dual_dst(t) = g.pot[ns + t];
    double dual_obj = res.dual_src.dot(supply) + res.dual_dst.dot(demand);
    res.dual_gap = std::fabs(res.cost - dual_obj);
    return res;
}

WassersteinResult wasserstein_p(const Vec &mu, const Vec &nu, const DistanceMatrix &d, double p) {
    if (p < 1.0) throw std::invalid_argument("wasserstein_p: p >= 1 required");
    if (mu.size() != nu.size() || mu.size() != d.size())
        throw std::invalid_argument("wasserstein_p: dimension mismatch");
    if (std::fabs(mu.sum() - nu.sum()) > 1e-12)
        throw std::invalid_argument("wasserstein_p: marginal masses differ");
    const int n = static_cast<int>(mu.size());

    std::vector<int> srcs, dsts;
    for (int i = 0; i < n; ++i) {
        if (mu(i) < -1e-14 || nu(i) < -1e-14)
            throw std::invalid_argument("wasserstein_p: negative mass");
        if (mu(i) > kMassEps) srcs.push_back(i);
        if (nu(i) > kMassEps) dsts.push_back(i);
    }
    Vec a(srcs.size()), b(dsts.size());
    for (std::size_t i = 0; i < srcs.size(); ++i) a(i) = mu(srcs[i]);
    for (std::size_t j = 0; j < dsts.size(); ++j) b(j) = nu(dsts[j]);
    std::vector<TransportArc> arcs;
    arcs.reserve(srcs.size() * dsts.size());
    for (std::size_t i = 0; i < srcs.size(); ++i)
        for (std::size_t j = 0; j < dsts.size(); ++j)
            arcs.push_back({static_cast<int>(i), static_cast<int>(j),
                            std::pow(static_cast<double>(d(srcs[i], dsts[j])), p)});
    TransportResult tr = solve_transport(a, b, arcs);
    if (!tr.feasible) throw std::runtime_error("wasserstein_p: infeasible (mass mismatch)");

    WassersteinResult out;
    out.cost_p = tr.cost;
    out.value = tr.cost <= 0.0 ? 0.0 : std::pow(tr.cost, 1.0 / p);
    out.dual_gap = tr.dual_gap;
    out.plan = Mat::Zero(n, n);
    for (const auto &entry : tr.plan) out.plan(srcs[entry.src], dsts[entry.dst]) += entry.flow;
    return out;
}

double total_variation(const Vec &mu, const Vec &nu) {
    return 0.5 * (mu - nu).cwiseAbs().sum();
}

} // namespace curvlab
