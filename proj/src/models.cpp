#include "curvlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace curvlab {

namespace {

std::string state_move_witness(int eta, int sigma) {
    std::ostringstream ss;
    ss << "(eta=" << eta << ", sigma=" << sigma << ")";
    return ss.str();
}

// Single-site spin flips on {-1,1}^sites encoded as bit patterns,
// LSB = site 0, set bit = spin +1. Identity move at index `sites`.
MoveSet flip_move_set(int sites) {
    const int n = 1 << sites;
    MoveSet ms;
    for (int i = 0; i < sites; ++i) {
        Move mv;
        mv.map.resize(n);
        for (int s = 0; s < n; ++s) mv.map[s] = s ^ (1 << i);
        mv.inverse = i;
        ms.moves.push_back(std::move(mv));
    }
    Move idm;
    idm.map.resize(n);
    for (int s = 0; s < n; ++s) idm.map[s] = s;
    idm.inverse = sites;
    ms.moves.push_back(std::move(idm));
    ms.identity = sites;
    return ms;
}

double spin(int state, int i) { return (state >> i) & 1 ? 1.0 : -1.0; }

// kappa(eta, sigma) = c(sigma eta, sigma) - sum_{gamma != sigma} max{-grad_sigma c(eta,gamma), 0}
Mat glauber_kappa(const MappingChain &chain) {
    const int n = chain.n(), ng = chain.move_count(), e = chain.identity();
    Mat kappa = Mat::Zero(n, ng);
    for (int eta = 0; eta < n; ++eta)
        for (int s = 0; s < ng; ++s) {
            if (s == e) continue;
            int seta = chain.apply(s, eta);
            double k = chain.rate(seta, s);
            for (int g = 0; g < ng; ++g) {
                if (g == s || g == e) continue;
                double grad = chain.rate(seta, g) - chain.rate(eta, g);
                if (grad < 0.0) k += grad;
            }
            kappa(eta, s) = k;
        }
    return kappa;
}

CouplingRates glauber_coupling(const MappingChain &chain, const Mat &kappa) {
    const int ng = chain.move_count(), e = chain.identity();
    CouplingRates rates;
    for (const ActiveEdge &edge : chain.active_edges()) {
        const int eta = edge.eta, s = edge.sigma, seta = edge.target;
        EdgeCoupling ec;
        ec.eta = eta;
        ec.sigma = s;
        for (int g = 0; g < ng; ++g) {
            if (g == s || g == e) continue;
            double lo = std::min(chain.rate(eta, g), chain.rate(seta, g));
            if (lo > 0.0) ec.entries.push_back({g, g, lo});
            double grad = chain.rate(seta, g) - chain.rate(eta, g);
            if (grad < 0.0) ec.entries.push_back({g, s, -grad});
            if (grad > 0.0) ec.entries.push_back({s, g, grad});
        }
        if (kappa(seta, s) != 0.0) ec.entries.push_back({s, e, kappa(seta, s)});
        if (kappa(eta, s) != 0.0) ec.entries.push_back({e, s, kappa(eta, s)});
        rates.set_edge(std::move(ec));
    }
    return rates;
}

} // namespace

ModelInstance glauber(int n_states, MoveSet moves, const Vec &hamiltonian, double beta,
                      const std::string &name) {
    const int ng = moves.size(), e = moves.identity;
    if (hamiltonian.size() != n_states) throw std::invalid_argument("glauber: H has wrong length");

    bool involutive = true;
    std::string inv_witness;
    for (int g = 0; g < ng && involutive; ++g)
        if (moves.inverse(g) != g) {
            involutive = false;
            inv_witness = "move " + std::to_string(g);
        }
    bool commute = true;
    std::string comm_witness;
    for (int g = 0; g < ng && commute; ++g)
        for (int h = g + 1; h < ng && commute; ++h)
            for (int eta = 0; eta < n_states; ++eta)
                if (moves.apply(g, moves.apply(h, eta)) != moves.apply(h, moves.apply(g, eta))) {
                    commute = false;
                    comm_witness = "moves " + std::to_string(g) + "," + std::to_string(h);
                    break;
                }
    if (!involutive || !commute)
        throw std::invalid_argument("glauber: move set must be involutive and commuting (" +
                                    inv_witness + comm_witness + ")");

    Mat c = Mat::Zero(n_states, ng);
    for (int eta = 0; eta < n_states; ++eta)
        for (int g = 0; g < ng; ++g) {
            if (g == e) continue;
            double dh = hamiltonian(moves.apply(g, eta)) - hamiltonian(eta);
            c(eta, g) = std::exp(-0.5 * beta * dh);
        }
    double hmin = hamiltonian.minCoeff();
    Vec m(n_states);
    for (int eta = 0; eta < n_states; ++eta) m(eta) = std::exp(-beta * (hamiltonian(eta) - hmin));

    MappingChain chain(n_states, std::move(moves), std::move(c), std::move(m));
    Mat kappa = glauber_kappa(chain);

    bool kappa_ok = true;
    std::string kappa_witness;
    double kbar = std::numeric_limits<double>::infinity();
    double kstar = std::numeric_limits<double>::infinity();
    for (int eta = 0; eta < n_states; ++eta)
        for (int s = 0; s < chain.move_count(); ++s) {
            if (s == chain.identity()) continue;
            double k = kappa(eta, s);
            if (k < 0.0 && kappa_ok) {
                kappa_ok = false;
                kappa_witness = state_move_witness(eta, s);
            }
            kbar = std::min(kbar, k);
            kstar = std::min(kstar, k + kappa(chain.apply(s, eta), s));
        }

    ModelInstance inst{name,
                       std::move(chain),
                       CouplingRates{},
                       ModelConstants{},
                       {},
                       {}};
    inst.rates = glauber_coupling(inst.chain, kappa);
    inst.constants.kappa_star = kstar;
    inst.constants.kappa_bar_star = kbar;
    inst.constants.K_offset = 0.5 * kstar;
    inst.constants.K_slope = kbar;
    inst.constants.w_inf_bound = kstar;
    inst.constants.hypotheses_met = kappa_ok;
    inst.assumptions.push_back({"moves-involutive", involutive, inv_witness});
    inst.assumptions.push_back({"moves-commute", commute, comm_witness});
    inst.assumptions.push_back({"kappa-nonnegative", kappa_ok, kappa_witness});
    return inst;
}

ModelInstance curie_weiss(int N, double beta) {
    if (N < 2) throw std::invalid_argument("curie_weiss: N >= 2 required");
    const int n = 1 << N;
    Vec H(n);
    for (int s = 0; s < n; ++s) {
        double mag = 0.0;
        for (int i = 0; i < N; ++i) mag += spin(s, i);
        H(s) = -mag * mag / (2.0 * N);
    }
    ModelInstance inst = glauber(n, flip_move_set(N), H, beta, "curie-weiss");

    const double c = std::exp(2.0 * beta / N) - 1.0;
    const double cond = (N - 1) * c;
    inst.assumptions.push_back(
        {"curie-weiss-condition", cond <= 1.0, cond <= 1.0 ? "" : "(N-1)(e^{2b/N}-1) > 1"});
    inst.constants.hypotheses_met = inst.constants.hypotheses_met && cond <= 1.0;

    auto f_cw = [&](int mm) {
        double a = beta / N * (N - 1 - 2 * mm);
        return std::exp(-a) * (1.0 - (N - 1 - mm) * c) + std::exp(a) * (1.0 - mm * c);
    };
    double kstar_f = f_cw((N - 1) / 2);
    double kbar_f = std::exp(-beta * (N - 1) / N) * (1.0 - (N - 1) * c);
    inst.info["kappa_star_bruteforce"] = inst.constants.kappa_star;
    inst.info["kappa_bar_star_bruteforce"] = inst.constants.kappa_bar_star;
    inst.info["condition_value"] = cond;
    if (cond <= 1.0) {
        inst.constants.kappa_star = kstar_f;
        inst.constants.kappa_bar_star = kbar_f;
        inst.constants.K_offset = 0.5 * kstar_f;
        inst.constants.K_slope = kbar_f;
        inst.constants.w_inf_bound = kstar_f;
    }
    if (beta <= 0.5)
        inst.info["K_log_limit_N_inf"] = (1.0 - beta) + (1.0 - 2.0 * beta) * std::exp(-beta);
    return inst;
}

ModelInstance ising(int n_sites, const std::vector<std::pair<int, int>> &edges, int ambient_d,
                    double beta) {
    if (n_sites < 1 || n_sites > 20) throw std::invalid_argument("ising: unsupported site count");
    // connectivity of Lambda
    std::vector<std::vector<int>> adj(n_sites);
    for (auto [x, y] : edges) {
        if (x < 0 || y < 0 || x >= n_sites || y >= n_sites || x == y)
            throw std::invalid_argument("ising: bad edge");
        adj[x].push_back(y);
        adj[y].push_back(x);
    }
    std::vector<bool> seen(n_sites, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw std::invalid_argument("ising: Lambda must be connected");

    const int n = 1 << n_sites;
    Vec H = Vec::Zero(n);
    for (int s = 0; s < n; ++s)
        for (auto [x, y] : edges) H(s) -= spin(s, x) * spin(s, y);
    ModelInstance inst = glauber(n, flip_move_set(n_sites), H, beta, "ising");

    const double d = ambient_d;
    const double cond = 2.0 * d * (1.0 - std::exp(-2.0 * beta)) * std::exp(4.0 * d * beta);
    inst.assumptions.push_back(
        {"ising-condition", cond <= 1.0, cond <= 1.0 ? "" : "2d(1-e^{-2b})e^{4db} > 1"});
    inst.constants.hypotheses_met = inst.constants.hypotheses_met && cond <= 1.0;

    double pen = 2.0 * d * (1.0 - std::exp(-2.0 * beta)) * std::exp(2.0 * beta * d);
    double kstar_f = 2.0 - pen;
    double kbar_f = std::exp(-2.0 * beta * d) - pen;
    inst.info["kappa_star_bruteforce"] = inst.constants.kappa_star;
    inst.info["kappa_bar_star_bruteforce"] = inst.constants.kappa_bar_star;
    inst.info["condition_value"] = cond;
    inst.info["K_log_mean_formula"] =
        1.0 + std::exp(-2.0 * beta * d) - 3.0 * d * (1.0 - std::exp(-2.0 * beta)) * std::exp(2.0 * beta * d);
    if (cond <= 1.0) {
        inst.constants.kappa_star = kstar_f;
        inst.constants.kappa_bar_star = kbar_f;
        inst.constants.K_offset = 0.5 * kstar_f;
        inst.constants.K_slope = kbar_f;
        inst.constants.w_inf_bound = kstar_f;
    }
    return inst;
}

ModelInstance ising_path(int sites, double beta) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < sites; ++i) edges.emplace_back(i, i + 1);
    return ising(sites, edges, 1, beta);
}

ModelInstance bernoulli_laplace(int L, int N) {
    if (N <= 0 || N >= L) throw std::domain_error("bernoulli_laplace: need 0 < N < L");
    std::vector<int> states;
    for (int mask = 0; mask < (1 << L); ++mask)
        if (__builtin_popcount(mask) == N) states.push_back(mask);
    const int n = static_cast<int>(states.size());
    std::map<int, int> index;
    for (int k = 0; k < n; ++k) index[states[k]] = k;

    // moves sigma_ij for ordered pairs i != j, then the identity
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            if (i != j) pairs.emplace_back(i, j);
    const int ng = static_cast<int>(pairs.size()) + 1;
    std::map<std::pair<int, int>, int> move_of;
    for (int g = 0; g < ng - 1; ++g) move_of[pairs[g]] = g;

    MoveSet ms;
    for (int g = 0; g < ng - 1; ++g) {
        auto [i, j] = pairs[g];
        Move mv;
        mv.map.resize(n);
        for (int k = 0; k < n; ++k) {
            int mask = states[k];
            bool can = ((mask >> i) & 1) && !((mask >> j) & 1);
            mv.map[k] = can ? index.at((mask & ~(1 << i)) | (1 << j)) : k;
        }
        mv.inverse = move_of.at({j, i});
        ms.moves.push_back(std::move(mv));
    }
    Move idm;
    idm.map.resize(n);
    for (int k = 0; k < n; ++k) idm.map[k] = k;
    idm.inverse = ng - 1;
    ms.moves.push_back(std::move(idm));
    ms.identity = ng - 1;

    Mat c = Mat::Zero(n, ng);
    for (int k = 0; k < n; ++k)
        for (int g = 0; g < ng - 1; ++g) {
            auto [i, j] = pairs[g];
            int mask = states[k];
            c(k, g) = (((mask >> i) & 1) && !((mask >> j) & 1)) ? 1.0 : 0.0;
        }
    Vec m = Vec::Ones(n);
    MappingChain chain(n, std::move(ms), std::move(c), std::move(m));

    CouplingRates rates;
    for (const ActiveEdge &edge : chain.active_edges()) {
        int mask = states[edge.eta];
        // recover (i,j) of this move
        auto [i, j] = pairs[edge.sigma];
        EdgeCoupling ec;
        ec.eta = edge.eta;
        ec.sigma = edge.sigma;
        for (int g = 0; g < ng - 1; ++g) {
            double lo = std::min(chain.rate(edge.eta, g), chain.rate(edge.target, g));
            if (lo > 0.0) ec.entries.push_back({g, g, lo});
        }
        ec.entries.push_back({edge.sigma, chain.identity(), 1.0});
        ec.entries.push_back({chain.identity(), move_of.at({j, i}), 1.0});
        for (int l = 0; l < L; ++l) {
            if (l == i || l == j) continue;
            if (!((mask >> l) & 1)) // empty site: both walkers push their particle to l
                ec.entries.push_back({move_of.at({i, l}), move_of.at({j, l}), 1.0});
            else // occupied site: its particle jumps to j resp. i
                ec.entries.push_back({move_of.at({l, j}), move_of.at({l, i}), 1.0});
        }
        rates.set_edge(std::move(ec));
    }

    ModelInstance inst{"bernoulli-laplace", std::move(chain), std::move(rates), ModelConstants{},
                       {},                 {}};
    inst.constants.kappa_star = static_cast<double>(L); // merging mass of the table per edge
    inst.constants.kappa_bar_star = 1.0;
    inst.constants.K_offset = 0.5 * L;
    inst.constants.K_slope = 1.0;
    inst.constants.w_inf_bound = static_cast<double>(L);
    inst.constants.hypotheses_met = true;
    inst.assumptions.push_back({"0<N<L", true, ""});
    inst.info["L"] = L;
    inst.info["N"] = N;
    return inst;
}

namespace {

struct HardcoreLayout {
    std::vector<int> states; // occupation bitmasks, increasing
    std::map<int, int> index;
    int V;
};

bool independent(int mask, const std::vector<std::vector<int>> &adj) {
    for (std::size_t x = 0; x < adj.size(); ++x) {
        if (!((mask >> x) & 1)) continue;
        for (int y : adj[x])
            if ((mask >> y) & 1) return false;
    }
    return true;
}

} // namespace

ModelInstance hardcore(const std::vector<std::vector<int>> &adjacency, double beta) {
    const int V = static_cast<int>(adjacency.size());
    if (V < 1 || V > 20) throw std::invalid_argument("hardcore: unsupported vertex count");
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("hardcore: beta must lie in (0,1)");
    for (int x = 0; x < V; ++x)
        for (int y : adjacency[x]) {
            if (y < 0 || y >= V || y == x) throw std::invalid_argument("hardcore: bad adjacency");
            if (std::find(adjacency[y].begin(), adjacency[y].end(), x) == adjacency[y].end())
                throw std::invalid_argument("hardcore: adjacency must be symmetric");
        }
    if (V > 1) {
        std::vector<bool> seen(V, false);
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adjacency[u])
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
        if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
            throw std::invalid_argument("hardcore: graph must be connected");
    }

    HardcoreLayout lay;
    lay.V = V;
    for (int mask = 0; mask < (1 << V); ++mask)
        if (independent(mask, adjacency)) {
            lay.index[mask] = static_cast<int>(lay.states.size());
            lay.states.push_back(mask);
        }
    const int n = static_cast<int>(lay.states.size());

    // moves: gamma_x^+ at x, gamma_x^- at V + x, identity at 2V
    MoveSet ms;
    auto closed_free = [&](int mask, int x) {
        if ((mask >> x) & 1) return false;
        for (int y : adjacency[x])
            if ((mask >> y) & 1) return false;
        return true;
    };
    for (int x = 0; x < V; ++x) {
        Move plus;
        plus.map.resize(n);
        for (int k = 0; k < n; ++k) {
            int mask = lay.states[k];
            plus.map[k] = closed_free(mask, x) ? lay.index.at(mask | (1 << x)) : k;
        }
        plus.inverse = V + x;
        ms.moves.push_back(std::move(plus));
    }
    for (int x = 0; x < V; ++x) {
        Move minus;
        minus.map.resize(n);
        for (int k = 0; k < n; ++k) {
            int mask = lay.states[k];
            minus.map[k] = ((mask >> x) & 1) ? lay.index.at(mask & ~(1 << x)) : k;
        }
        minus.inverse = x;
        ms.moves.push_back(std::move(minus));
    }
    Move idm;
    idm.map.resize(n);
    for (int k = 0; k < n; ++k) idm.map[k] = k;
    idm.inverse = 2 * V;
    ms.moves.push_back(std::move(idm));
    ms.identity = 2 * V;

    Mat c = Mat::Zero(n, 2 * V + 1);
    Vec m(n);
    for (int k = 0; k < n; ++k) {
        int mask = lay.states[k];
        for (int x = 0; x < V; ++x) {
            if (closed_free(mask, x)) c(k, x) = beta;
            if ((mask >> x) & 1) c(k, V + x) = 1.0;
        }
        m(k) = std::pow(beta, __builtin_popcount(mask));
    }
    MappingChain chain(n, std::move(ms), std::move(c), std::move(m));

    int delta = 0;
    for (int x = 0; x < V; ++x) delta = std::max(delta, static_cast<int>(adjacency[x].size()));
    const bool cond_ok = beta * delta <= 1.0;

    // plus-edge tables; minus edges by the reversal rule
    CouplingRates rates;
    auto plus_table = [&](int k, int x) {
        int mask = lay.states[k];
        EdgeCoupling ec;
        ec.eta = k;
        ec.sigma = x;
        int target = chain.apply(x, k);
        for (int g = 0; g < 2 * V; ++g) {
            double lo = std::min(chain.rate(k, g), chain.rate(target, g));
            if (lo > 0.0) ec.entries.push_back({g, g, lo});
        }
        int free_nbrs = 0;
        for (int y : adjacency[x])
            if (closed_free(mask, y)) {
                ec.entries.push_back({y, V + x, beta}); // gamma_y^+ paired with gamma_x^-
                ++free_nbrs;
            }
        ec.entries.push_back({x, chain.identity(), beta});
        ec.entries.push_back({chain.identity(), V + x, 1.0 - beta * free_nbrs});
        return ec;
    };
    for (const ActiveEdge &edge : chain.active_edges()) {
        if (edge.sigma < V) {
            rates.set_edge(plus_table(edge.eta, edge.sigma));
        } else {
            int x = edge.sigma - V;
            EdgeCoupling fwd = plus_table(edge.target, x); // (gamma_x^- eta, gamma_x^+)
            EdgeCoupling ec;
            ec.eta = edge.eta;
            ec.sigma = edge.sigma;
            for (const CouplingEntry &entry : fwd.entries)
                ec.entries.push_back({entry.gammabar, entry.gamma, entry.rate});
            rates.set_edge(std::move(ec));
        }
    }

    ModelInstance inst{"hardcore", std::move(chain), std::move(rates), ModelConstants{}, {}, {}};
    inst.constants.kappa_star = 1.0 - beta * (delta - 1);
    inst.constants.kappa_bar_star = std::min(beta, 1.0 - beta * delta);
    inst.constants.K_offset = 0.5 * inst.constants.kappa_star;
    inst.constants.K_slope = inst.constants.kappa_bar_star;
    inst.constants.w_inf_bound = inst.constants.kappa_star;
    inst.constants.hypotheses_met = cond_ok;
    inst.assumptions.push_back(
        {"hardcore-condition", cond_ok, cond_ok ? "" : "beta*Delta > 1"});
    inst.info["Delta"] = delta;
    inst.info["beta"] = beta;
    // brute-force merging masses of the table
    double kbar_brute = beta, kstar_brute = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        int mask = lay.states[k];
        for (int x = 0; x < V; ++x) {
            if (!closed_free(mask, x)) continue;
            int free_nbrs = 0;
            for (int y : adjacency[x])
                if (closed_free(mask, y)) ++free_nbrs;
            kbar_brute = std::min(kbar_brute, 1.0 - beta * free_nbrs);
            kstar_brute = std::min(kstar_brute, beta + 1.0 - beta * free_nbrs);
        }
    }
    inst.info["kappa_star_bruteforce"] = kstar_brute;
    inst.info["kappa_bar_star_bruteforce"] = kbar_brute;
    return inst;
}

namespace {

struct IrwLayout {
    int d, N;
    std::vector<std::vector<int>> coords; // state index -> coordinates in {0..N}^d

    int index_of(const std::vector<int> &eta) const {
        int idx = 0, stride = 1;
        for (int i = 0; i < d; ++i) {
            idx += eta[i] * stride;
            stride *= (N + 1);
        }
        return idx;
    }
};

IrwLayout irw_layout(int d, int N) {
    IrwLayout lay{d, N, {}};
    int n = 1;
    for (int i = 0; i < d; ++i) n *= (N + 1);
    lay.coords.resize(n, std::vector<int>(d, 0));
    for (int k = 0; k < n; ++k) {
        int rem = k;
        for (int i = 0; i < d; ++i) {
            lay.coords[k][i] = rem % (N + 1);
            rem /= (N + 1);
        }
    }
    return lay;
}

} // namespace

Potential radial_h2_potential(double beta) {
    return [beta](const std::vector<int> &eta) {
        double s = 0.0;
        for (int x : eta) s += x;
        return beta * s * s;
    };
}

Potential separable_quad_potential(double a, double b) {
    return [a, b](const std::vector<int> &eta) {
        double v = 0.0;
        for (int x : eta) v += a * x * x + b * x;
        return v;
    };
}

ModelInstance interacting_rw_localized(int d, int N, const Potential &v_plus, double lambda,
                                       const Potential &v_minus) {
    if (N < 2) throw std::invalid_argument("interacting_rw_localized: N >= 2 required");
    if (d < 1 || d > 6) throw std::invalid_argument("interacting_rw_localized: bad dimension");
    if (!(lambda > 0.0)) throw std::invalid_argument("interacting_rw_localized: lambda > 0 required");

    // unclipped rate functions on N^d
    auto birth = [&](std::vector<int> eta, int i) {
        double v0 = v_plus(eta);
        eta[i] += 1;
        return std::exp(-(v_plus(eta) - v0));
    };
    auto death = [&](const std::vector<int> &eta, int i) -> double {
        if (eta[i] == 0) return 0.0;
        if (!v_minus) return lambda * eta[i];
        std::vector<int> down = eta;
        down[i] -= 1;
        return std::exp(-(v_minus(down) - v_minus(eta)));
    };
    auto vminus_value = [&](const std::vector<int> &eta) {
        if (v_minus) return v_minus(eta);
        double v = 0.0;
        for (int x : eta) v += std::log(lambda) * x + std::lgamma(x + 1.0);
        return v;
    };

    IrwLayout lay = irw_layout(d, N);
    const int n = static_cast<int>(lay.coords.size());

    // moves: gamma_i^{+,N} at i, gamma_i^{-,N} at d + i, identity at 2d
    MoveSet ms;
    for (int i = 0; i < d; ++i) {
        Move plus;
        plus.map.resize(n);
        for (int k = 0; k < n; ++k) {
            std::vector<int> eta = lay.coords[k];
            if (eta[i] < N) eta[i] += 1;
            plus.map[k] = lay.index_of(eta);
        }
        plus.inverse = d + i;
        ms.moves.push_back(std::move(plus));
    }
    for (int i = 0; i < d; ++i) {
        Move minus;
        minus.map.resize(n);
        for (int k = 0; k < n; ++k) {
            std::vector<int> eta = lay.coords[k];
            if (eta[i] > 0) eta[i] -= 1;
            minus.map[k] = lay.index_of(eta);
        }
        minus.inverse = i;
        ms.moves.push_back(std::move(minus));
    }
    Move idm;
    idm.map.resize(n);
    for (int k = 0; k < n; ++k) idm.map[k] = k;
    idm.inverse = 2 * d;
    ms.moves.push_back(std::move(idm));
    ms.identity = 2 * d;

    // localized rates: zero on boundary-clipped incidences so the support
    // carries only genuine transitions
    Mat c = Mat::Zero(n, 2 * d + 1);
    Vec m(n);
    double vshift = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k)
        vshift = std::min(vshift, v_plus(lay.coords[k]) + vminus_value(lay.coords[k]));
    for (int k = 0; k < n; ++k) {
        const std::vector<int> &eta = lay.coords[k];
        for (int i = 0; i < d; ++i) {
            if (eta[i] < N) c(k, i) = birth(eta, i);
            c(k, d + i) = death(eta, i);
        }
        m(k) = std::exp(-(v_plus(eta) + vminus_value(eta) - vshift));
    }
    MappingChain chain(n, std::move(ms), std::move(c), std::move(m));

    // hypothesis families, unclipped rates, exhaustive on Omega_{N+1}
    IrwLayout wide = irw_layout(d, N + 1);
    auto unclipped_rate = [&](const std::vector<int> &eta, int g) {
        return g < d ? birth(eta, g) : death(eta, g - d);
    };
    auto grad_plus = [&](const std::vector<int> &eta, int i, int g) {
        std::vector<int> up = eta;
        up[i] += 1;
        return unclipped_rate(up, g) - unclipped_rate(eta, g);
    };
    auto kappa_plus = [&](const std::vector<int> &eta, int i) {
        double k = -grad_plus(eta, i, i);
        for (int g = 0; g < 2 * d; ++g) {
            if (g == i || g == d + i) continue;
            k -= std::max(grad_plus(eta, i, g), 0.0);
        }
        return k;
    };
    auto kappa_minus = [&](const std::vector<int> &eta, int i) {
        double k = grad_plus(eta, i, d + i);
        for (int g = 0; g < 2 * d; ++g) {
            if (g == i || g == d + i) continue;
            k -= std::max(-grad_plus(eta, i, g), 0.0);
        }
        return k;
    };

    bool kp_ok = true, km_ok = true, birth_mono = true, death_mono = true;
    std::string kp_w, km_w, bm_w, dm_w;
    auto witness = [&](const std::vector<int> &eta, int i, int j) {
        std::ostringstream ss;
        ss << "(eta=(";
        for (std::size_t t = 0; t < eta.size(); ++t) ss << (t ? "," : "") << eta[t];
        ss << "), i=" << i << ", j=" << j << ")";
        return ss.str();
    };
    for (const auto &eta : wide.coords)
        for (int i = 0; i < d; ++i) {
            if (kp_ok && kappa_plus(eta, i) < -1e-12) {
                kp_ok = false;
                kp_w = witness(eta, i, -1);
            }
            if (km_ok && kappa_minus(eta, i) < -1e-12) {
                km_ok = false;
                km_w = witness(eta, i, -1);
            }
            for (int j = 0; j < d; ++j) {
                if (birth_mono && grad_plus(eta, i, j) > 1e-12) {
                    birth_mono = false;
                    bm_w = witness(eta, i, j);
                }
                if (death_mono && grad_plus(eta, i, d + j) < -1e-12) {
                    death_mono = false;
                    dm_w = witness(eta, i, j);
                }
            }
        }

    // theorem constants: unclipped infima over Omega_N (Omega_{N+1} reported)
    double kp_min_N = std::numeric_limits<double>::infinity(), km_min_N = kp_min_N,
           ks_min_N = kp_min_N, kp_min_W = kp_min_N, km_min_W = kp_min_N, ks_min_W = kp_min_N;
    for (const auto &eta : wide.coords) {
        bool in_N = true;
        for (int x : eta)
            if (x > N) in_N = false;
        for (int i = 0; i < d; ++i) {
            double kp = kappa_plus(eta, i), km = kappa_minus(eta, i);
            kp_min_W = std::min(kp_min_W, kp);
            km_min_W = std::min(km_min_W, km);
            ks_min_W = std::min(ks_min_W, kp + km);
            if (in_N) {
                kp_min_N = std::min(kp_min_N, kp);
                km_min_N = std::min(km_min_N, km);
                ks_min_N = std::min(ks_min_N, kp + km);
            }
        }
    }

    // coupling tables with the clipped rates and clipped gradients
    auto cgrad = [&](int k, int i, int g) {
        return chain.rate(chain.apply(i, k), g) - chain.rate(k, g);
    };
    CouplingRates rates;
    auto plus_table = [&](int k, int i) {
        EdgeCoupling ec;
        ec.eta = k;
        ec.sigma = i;
        int target = chain.apply(i, k);
        for (int g = 0; g < 2 * d; ++g) {
            double lo = std::min(chain.rate(k, g), chain.rate(target, g));
            if (lo > 0.0) ec.entries.push_back({g, g, lo});
        }
        double kp = -cgrad(k, i, i), km = cgrad(k, i, d + i);
        for (int g = 0; g < 2 * d; ++g) {
            if (g == i || g == d + i) continue;
            double gp = cgrad(k, i, g);
            if (gp > 0.0) ec.entries.push_back({i, g, gp});
            if (gp < 0.0) ec.entries.push_back({g, d + i, -gp});
            kp -= std::max(gp, 0.0);
            km -= std::max(-gp, 0.0);
        }
        if (kp != 0.0) ec.entries.push_back({i, chain.identity(), kp});
        if (km != 0.0) ec.entries.push_back({chain.identity(), d + i, km});
        return ec;
    };
    for (const ActiveEdge &edge : chain.active_edges()) {
        if (edge.sigma < d) {
            rates.set_edge(plus_table(edge.eta, edge.sigma));
        } else {
            int i = edge.sigma - d;
            EdgeCoupling fwd = plus_table(edge.target, i);
            EdgeCoupling ec;
            ec.eta = edge.eta;
            ec.sigma = edge.sigma;
            for (const CouplingEntry &entry : fwd.entries)
                ec.entries.push_back({entry.gammabar, entry.gamma, entry.rate});
            rates.set_edge(std::move(ec));
        }
    }

    ModelInstance inst{"irw", std::move(chain), std::move(rates), ModelConstants{}, {}, {}};
    inst.constants.kappa_star = ks_min_N;
    inst.constants.kappa_bar_star = std::min(kp_min_N, km_min_N);
    inst.constants.K_offset = 0.5 * ks_min_N;
    inst.constants.K_slope = inst.constants.kappa_bar_star;
    inst.constants.w_inf_bound = ks_min_N;
    inst.constants.hypotheses_met = kp_ok && km_ok && birth_mono && death_mono;
    inst.assumptions.push_back({"kappa-plus-nonnegative", kp_ok, kp_w});
    inst.assumptions.push_back({"kappa-minus-nonnegative", km_ok, km_w});
    inst.assumptions.push_back({"birth-rates-nonincreasing", birth_mono, bm_w});
    inst.assumptions.push_back({"death-rates-nondecreasing", death_mono, dm_w});
    inst.info["kappa_star_omega_N1"] = ks_min_W;
    inst.info["kappa_bar_star_omega_N1"] = std::min(kp_min_W, km_min_W);
    inst.info["d"] = d;
    inst.info["N"] = N;
    inst.info["lambda"] = lambda;
    return inst;
}

namespace {

void add_term(std::vector<CancellationTerm> &out, const std::string &name,
              const PairwiseAccumulator &acc) {
    out.push_back({name, acc.total(), acc.abs_total()});
}

} // namespace

std::vector<CancellationTerm> cancellation_terms(const ModelInstance &inst, const Density &rho,
                                                 const Vec &psi, const WeightFunction &theta) {
    const MappingChain &chain = inst.chain;
    const int n = chain.n(), ng = chain.move_count(), e = chain.identity();
    const auto &m = chain.measure();
    std::vector<CancellationTerm> out;

    if (inst.name == "curie-weiss" || inst.name == "ising" || inst.name == "glauber") {
        PairwiseAccumulator A, B, C;
        for (int eta = 0; eta < n; ++eta)
            for (int s = 0; s < ng; ++s) {
                if (s == e) continue;
                double cs = chain.rate(eta, s);
                if (cs == 0.0) continue;
                int seta = chain.apply(s, eta);
                for (int g = 0; g < ng; ++g) {
                    if (g == e || g == s) continue;
                    double lo = std::min(chain.rate(eta, g), chain.rate(seta, g));
                    if (lo > 0.0)
                        A.add(m(eta) * cs * lo * I_term(eta, s, g, g, rho, psi, theta, chain));
                    double grad = chain.rate(seta, g) - chain.rate(eta, g);
                    if (grad < 0.0)
                        B.add(-m(eta) * cs * grad * I_term(eta, s, g, s, rho, psi, theta, chain));
                    if (grad > 0.0)
                        C.add(m(eta) * cs * grad * I_term(eta, s, s, g, rho, psi, theta, chain));
                }
            }
        add_term(out, "A", A);
        add_term(out, "B", B);
        add_term(out, "C", C);
        return out;
    }

    if (inst.name == "bernoulli-laplace") {
        PairwiseAccumulator A;
        for (const ActiveEdge &edge : chain.active_edges()) {
            double cs = chain.rate(edge.eta, edge.sigma);
            for (int g = 0; g < ng; ++g) {
                if (g == e) continue;
                double lo = std::min(chain.rate(edge.eta, g), chain.rate(edge.target, g));
                if (lo > 0.0)
                    A.add(m(edge.eta) * cs * lo *
                          I_term(edge.eta, edge.sigma, g, g, rho, psi, theta, chain));
            }
        }
        add_term(out, "A", A);
        return out;
    }

    if (inst.name == "hardcore") {
        const int V = (ng - 1) / 2;
        PairwiseAccumulator A, B;
        for (const ActiveEdge &edge : chain.active_edges()) {
            if (edge.sigma >= V) continue; // plus edges carry the proof terms
            double cs = chain.rate(edge.eta, edge.sigma);
            for (int g = 0; g < ng; ++g) {
                if (g == e) continue;
                double lo = std::min(chain.rate(edge.eta, g), chain.rate(edge.target, g));
                if (lo > 0.0)
                    A.add(m(edge.eta) * cs * lo *
                          I_term(edge.eta, edge.sigma, g, g, rho, psi, theta, chain));
            }
            // (gamma_y^+, gamma_x^-) entries: y adjacent to x with free closed
            // neighborhood, i.e. both plus rates positive but incompatible after
            // the add at x
            const EdgeCoupling *ec = inst.rates.find(edge.eta, edge.sigma);
            for (const CouplingEntry &entry : ec->entries)
                if (entry.gamma < V && entry.gammabar == V + edge.sigma && entry.gamma != edge.sigma)
                    B.add(m(edge.eta) * cs * entry.rate *
                          I_term(edge.eta, edge.sigma, entry.gamma, entry.gammabar, rho, psi,
                                 theta, chain));
        }
        add_term(out, "A", A);
        add_term(out, "B", B);
        return out;
    }

    if (inst.name == "irw") {
        const int d = (ng - 1) / 2;
        PairwiseAccumulator A, B, C;
        for (const ActiveEdge &edge : chain.active_edges()) {
            if (edge.sigma >= d) continue; // plus edges
            int i = edge.sigma;
            double cs = chain.rate(edge.eta, edge.sigma);
            for (int g = 0; g < ng; ++g) {
                if (g == e) continue;
                double lo = std::min(chain.rate(edge.eta, g), chain.rate(edge.target, g));
                if (lo > 0.0)
                    A.add(m(edge.eta) * cs * lo *
                          I_term(edge.eta, i, g, g, rho, psi, theta, chain));
            }
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                double gminus = chain.rate(edge.target, d + j) - chain.rate(edge.eta, d + j);
                if (gminus > 0.0)
                    B.add(m(edge.eta) * cs * gminus *
                          I_term(edge.eta, i, i, d + j, rho, psi, theta, chain));
                double gplus = chain.rate(edge.target, j) - chain.rate(edge.eta, j);
                if (gplus < 0.0)
                    C.add(-m(edge.eta) * cs * gplus *
                          I_term(edge.eta, i, j, d + i, rho, psi, theta, chain));
            }
        }
        add_term(out, "A", A);
        add_term(out, "B", B);
        add_term(out, "C", C);
        return out;
    }

    throw std::invalid_argument("cancellation_terms: unknown model " + inst.name);
}

} // namespace curvlab
