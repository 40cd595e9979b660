#include "curvlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace curvlab {

namespace {

void validate_moves(int n, const MoveSet &ms) {
    if (ms.identity < 0 || ms.identity >= ms.size())
        throw std::invalid_argument("move set: identity index out of range");
    for (int g = 0; g < ms.size(); ++g) {
        const Move &mv = ms.moves[g];
        if (static_cast<int>(mv.map.size()) != n)
            throw std::invalid_argument("move map has wrong length");
        for (int s : mv.map)
            if (s < 0 || s >= n) throw std::invalid_argument("move maps outside the state set");
        if (mv.inverse < 0 || mv.inverse >= ms.size())
            throw std::invalid_argument("move inverse index out of range");
        if (ms.moves[mv.inverse].inverse != g)
            throw std::invalid_argument("inverse(inverse(g)) != g");
    }
    for (int s = 0; s < n; ++s)
        if (ms.apply(ms.identity, s) != s)
            throw std::invalid_argument("identity move does not fix every state");
}

} // namespace

MappingChain::MappingChain(int n, MoveSet moves, Mat rates, Vec measure)
    : n_(n), move_set_(std::move(moves)), rates_(std::move(rates)), measure_(std::move(measure)) {
    if (n_ <= 0) throw std::invalid_argument("state count must be positive");
    validate_moves(n_, move_set_);
    if (rates_.rows() != n_ || rates_.cols() != move_set_.size())
        throw std::invalid_argument("rate matrix must be n x |G|");
    for (int eta = 0; eta < n_; ++eta)
        for (int g = 0; g < move_set_.size(); ++g) {
            double c = rates_(eta, g);
            if (!std::isfinite(c) || c < 0.0)
                throw std::invalid_argument("rates must be finite and nonnegative");
        }
    if (measure_.size() != n_) throw std::invalid_argument("measure has wrong length");
    double mass = 0.0;
    for (int eta = 0; eta < n_; ++eta) {
        if (!(measure_(eta) > 0.0)) throw std::invalid_argument("measure must be strictly positive");
        mass += measure_(eta);
    }
    measure_ /= mass;

    adjacency_.assign(n_, {});
    for (int eta = 0; eta < n_; ++eta)
        for (int g = 0; g < move_set_.size(); ++g) {
            if (rates_(eta, g) <= 0.0) continue;
            int target = move_set_.apply(g, eta);
            if (target == eta) continue;
            // unique inverse on the active support
            int inv = move_set_.inverse(g);
            if (move_set_.apply(inv, target) != eta)
                throw std::invalid_argument("inverse condition fails on the support");
            edges_.push_back({eta, g, target});
            adjacency_[eta].push_back(target);
        }
    for (auto &nbrs : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
}

const Mat &MappingChain::generator() const {
    if (!generator_) generator_ = build_generator(*this);
    return *generator_;
}

Mat build_generator(const MappingChain &chain) {
    const int n = chain.n();
    Mat L = Mat::Zero(n, n);
    for (const ActiveEdge &e : chain.active_edges()) {
        double c = chain.rate(e.eta, e.sigma);
        L(e.eta, e.target) += c;
        L(e.eta, e.eta) -= c;
    }
    return L;
}

ReversibilityReport check_reversibility(const MappingChain &chain, double tol) {
    ReversibilityReport rep;
    rep.ok = true;
    for (const ActiveEdge &e : chain.active_edges()) {
        int inv = chain.moves().inverse(e.sigma);
        double fwd = chain.measure()(e.eta) * chain.rate(e.eta, e.sigma);
        double bwd = chain.measure()(e.target) * chain.rate(e.target, inv);
        double v = 0.5 * std::fabs(fwd - bwd);
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.worst_eta = e.eta;
            rep.worst_sigma = e.sigma;
        }
    }
    rep.ok = rep.max_violation <= tol;
    return rep;
}

DistanceMatrix graph_distance(const MappingChain &chain) {
    const int n = chain.n();
    Eigen::MatrixXi d = Eigen::MatrixXi::Constant(n, n, -1);
    for (int src = 0; src < n; ++src) {
        d(src, src) = 0;
        std::deque<int> queue{src};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : chain.adjacency()[u])
                if (d(src, v) < 0) {
                    d(src, v) = d(src, u) + 1;
                    queue.push_back(v);
                }
        }
        for (int v = 0; v < n; ++v)
            if (d(src, v) < 0) throw std::runtime_error("not irreducible: move graph is disconnected");
    }
    return DistanceMatrix{std::move(d)};
}

Vec discrete_gradient(const MappingChain &chain, const Vec &psi, int sigma) {
    Vec out(chain.n());
    for (int eta = 0; eta < chain.n(); ++eta) out(eta) = psi(chain.apply(sigma, eta)) - psi(eta);
    return out;
}

std::string chain_to_json(const MappingChain &chain) {
    nlohmann::json j;
    j["n"] = chain.n();
    j["identity"] = chain.identity();
    nlohmann::json moves = nlohmann::json::array();
    for (const Move &mv : chain.moves().moves)
        moves.push_back({{"map", mv.map}, {"inverse", mv.inverse}});
    j["moves"] = std::move(moves);
    std::vector<std::vector<double>> rates(chain.n());
    for (int eta = 0; eta < chain.n(); ++eta) {
        rates[eta].resize(chain.move_count());
        for (int g = 0; g < chain.move_count(); ++g) rates[eta][g] = chain.rate(eta, g);
    }
    j["rates"] = rates;
    std::vector<double> m(chain.n());
    for (int eta = 0; eta < chain.n(); ++eta) m[eta] = chain.measure()(eta);
    j["measure"] = m;
    return j.dump(2);
}

MappingChain chain_from_json(const std::string &text) {
    nlohmann::json j = nlohmann::json::parse(text);
    int n = j.at("n").get<int>();
    MoveSet ms;
    ms.identity = j.at("identity").get<int>();
    for (const auto &jm : j.at("moves")) {
        Move mv;
        mv.map = jm.at("map").get<std::vector<int>>();
        mv.inverse = jm.at("inverse").get<int>();
        ms.moves.push_back(std::move(mv));
    }
    auto rates = j.at("rates").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rates.size()) != n) throw std::invalid_argument("rates: wrong row count");
    Mat c(n, ms.size());
    for (int eta = 0; eta < n; ++eta) {
        if (static_cast<int>(rates[eta].size()) != ms.size())
            throw std::invalid_argument("rates: wrong column count");
        for (int g = 0; g < ms.size(); ++g) c(eta, g) = rates[eta][g];
    }
    auto mvec = j.at("measure").get<std::vector<double>>();
    if (static_cast<int>(mvec.size()) != n) throw std::invalid_argument("measure: wrong length");
    Vec m(n);
    for (int eta = 0; eta < n; ++eta) m(eta) = mvec[eta];
    return MappingChain(n, std::move(ms), std::move(c), std::move(m));
}

MappingChain load_chain(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open chain file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return chain_from_json(ss.str());
}

void save_chain(const MappingChain &chain, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write chain file: " + path);
    out << chain_to_json(chain) << "\n";
}

} // namespace curvlab
