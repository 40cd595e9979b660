#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvlab/util.hpp"

namespace curvlab {

// One move: a total map on states plus the index of its inverse move.
struct Move {
    std::vector<int> map;
    int inverse = -1;
};

struct MoveSet {
    std::vector<Move> moves;
    int identity = -1;

    int size() const { return static_cast<int>(moves.size()); }
    int apply(int g, int state) const { return moves[g].map[state]; }
    int inverse(int g) const { return moves[g].inverse; }
};

// (eta, sigma) with c(eta,sigma) > 0 and sigma*eta != eta. Rates on pairs
// where the move acts as the identity are dynamically irrelevant and are
// excluded from all support-based iterations.
struct ActiveEdge {
    int eta;
    int sigma;
    int target; // sigma * eta
};

struct ReversibilityReport {
    bool ok = false;
    double max_violation = 0.0;
    int worst_eta = -1;
    int worst_sigma = -1;
};

struct DistanceMatrix {
    Eigen::MatrixXi d;

    int operator()(int x, int y) const { return d(x, y); }
    int size() const { return static_cast<int>(d.rows()); }
};

// Finite Markov chain in mapping representation: a move set, per-state move
// rates c(eta, sigma) and a positive stationary measure m (normalized to a
// probability vector at construction).
class MappingChain {
public:
    MappingChain(int n, MoveSet moves, Mat rates, Vec measure);

    int n() const { return n_; }
    const MoveSet &moves() const { return move_set_; }
    int move_count() const { return move_set_.size(); }
    double rate(int eta, int g) const { return rates_(eta, g); }
    const Mat &rates() const { return rates_; }
    const Vec &measure() const { return measure_; }
    int apply(int g, int eta) const { return move_set_.apply(g, eta); }
    int identity() const { return move_set_.identity; }

    const std::vector<ActiveEdge> &active_edges() const { return edges_; }
    // Neighbors in the move graph (deduplicated, sorted).
    const std::vector<std::vector<int>> &adjacency() const { return adjacency_; }

    const Mat &generator() const;

private:
    int n_;
    MoveSet move_set_;
    Mat rates_;
    Vec measure_;
    std::vector<ActiveEdge> edges_;
    std::vector<std::vector<int>> adjacency_;
    mutable std::optional<Mat> generator_;
};

// (L psi)(eta) = sum_sigma c(eta,sigma) (psi(sigma eta) - psi(eta)).
Mat build_generator(const MappingChain &chain);

// Pointwise detailed balance m(eta)c(eta,sigma) = m(sigma eta)c(sigma eta,
// sigma^-1) over the active support. Violations are reported as half the
// absolute defect of the pair.
ReversibilityReport check_reversibility(const MappingChain &chain, double tol = 1e-10);

// BFS distances in the move graph; throws if the graph is not connected.
DistanceMatrix graph_distance(const MappingChain &chain);

// grad_sigma psi = psi(sigma .) - psi.
Vec discrete_gradient(const MappingChain &chain, const Vec &psi, int sigma);

// JSON chain format round-trip (schema documented in the README).
std::string chain_to_json(const MappingChain &chain);
MappingChain chain_from_json(const std::string &text);
MappingChain load_chain(const std::string &path);
void save_chain(const MappingChain &chain, const std::string &path);

} // namespace curvlab
