#include "curvlab/functionals.hpp"

#include <cmath>

namespace curvlab {

Density make_density(const MappingChain &chain, Vec values, bool normalize) {
    if (values.size() != chain.n()) throw std::invalid_argument("density has wrong length");
    Density rho;
    rho.floored = false;
    for (int eta = 0; eta < chain.n(); ++eta) {
        if (!std::isfinite(values(eta))) throw std::invalid_argument("density entries must be finite");
        if (values(eta) < kDensityFloor) {
            values(eta) = kDensityFloor;
            rho.floored = true;
        }
    }
    if (normalize) {
        double mass = chain.measure().dot(values);
        values /= mass;
        rho.normalized = true;
    }
    rho.values = std::move(values);
    return rho;
}

Density uniform_density(const MappingChain &chain) {
    return make_density(chain, Vec::Ones(chain.n()));
}

Density dirac_density(const MappingChain &chain, int eta) {
    Vec v = Vec::Zero(chain.n());
    v(eta) = 1.0 / chain.measure()(eta);
    return make_density(chain, std::move(v));
}

double phi_entropy(const Density &rho, const EntropyGenerator &gen, const MappingChain &chain) {
    PairwiseAccumulator acc;
    for (int eta = 0; eta < chain.n(); ++eta)
        acc.add(chain.measure()(eta) * gen.phi(rho(eta)));
    double mean = chain.measure().dot(rho.values);
    return acc.total() - gen.phi(mean);
}

double dirichlet_form(const Vec &f, const Vec &g, const MappingChain &chain) {
    Vec lg = chain.generator() * g;
    PairwiseAccumulator acc;
    for (int eta = 0; eta < chain.n(); ++eta)
        acc.add(-chain.measure()(eta) * f(eta) * lg(eta));
    return acc.total();
}

double phi_fisher(const Density &rho, const EntropyGenerator &gen, const MappingChain &chain) {
    Vec g(chain.n());
    for (int eta = 0; eta < chain.n(); ++eta) g(eta) = gen.phi_prime(rho(eta));
    return dirichlet_form(rho.values, g, chain);
}

double quad_A(const Density &rho, const Vec &psi, const WeightFunction &theta,
              const MappingChain &chain) {
    PairwiseAccumulator acc;
    for (const ActiveEdge &e : chain.active_edges()) {
        double dpsi = psi(e.eta) - psi(e.target);
        acc.add(0.5 * chain.measure()(e.eta) * chain.rate(e.eta, e.sigma) *
                theta.theta(rho(e.eta), rho(e.target)) * dpsi * dpsi);
    }
    return acc.total();
}

QuadBResult quad_B(const Density &rho, const Vec &psi, const WeightFunction &theta,
                   const MappingChain &chain) {
    const Mat &L = chain.generator();
    Vec lrho = L * rho.values;
    Vec lpsi = L * psi;
    PairwiseAccumulator accC, accD;
    QuadBResult out;
    out.grad_warning = rho.floored;
    for (const ActiveEdge &e : chain.active_edges()) {
        double mc = chain.measure()(e.eta) * chain.rate(e.eta, e.sigma);
        double s = rho(e.eta), t = rho(e.target);
        double dpsi = psi(e.eta) - psi(e.target);
        auto [gs, gt] = theta.grad(s, t);
        accC.add(0.25 * mc * (gs * lrho(e.eta) + gt * lrho(e.target)) * dpsi * dpsi);
        accD.add(0.5 * mc * theta.theta(s, t) * dpsi * (lpsi(e.eta) - lpsi(e.target)));
    }
    out.C = accC.total();
    out.D = accD.total();
    out.B = out.C - out.D;
    return out;
}

QuadraticFormPair assemble_forms(const Density &rho, const WeightFunction &theta,
                                 const MappingChain &chain) {
    const int n = chain.n();
    const Mat &L = chain.generator();
    Vec lrho = L * rho.values;
    Mat A = Mat::Zero(n, n);
    Mat B = Mat::Zero(n, n);
    for (const ActiveEdge &e : chain.active_edges()) {
        double mc = chain.measure()(e.eta) * chain.rate(e.eta, e.sigma);
        double s = rho(e.eta), t = rho(e.target);
        double th = theta.theta(s, t);
        auto [gs, gt] = theta.grad(s, t);
        double wC = 0.25 * mc * (gs * lrho(e.eta) + gt * lrho(e.target));
        int i = e.eta, j = e.target;

        // [psi(i)-psi(j)]^2 as a symmetric form
        A(i, i) += 0.5 * mc * th;
        A(j, j) += 0.5 * mc * th;
        A(i, j) -= 0.5 * mc * th;
        A(j, i) -= 0.5 * mc * th;

        B(i, i) += wC;
        B(j, j) += wC;
        B(i, j) -= wC;
        B(j, i) -= wC;

        // -D contribution: -1/2 mc theta (psi_i - psi_j)(Lpsi_i - Lpsi_j);
        // expand via rows of L so B stays an explicit matrix.
        double w = -0.5 * mc * th;
        for (int k = 0; k < n; ++k) {
            double lik = L(i, k), ljk = L(j, k);
            if (lik == 0.0 && ljk == 0.0) continue;
            double v = w * (lik - ljk);
            // (psi_i - psi_j) * psi_k, symmetrized
            B(i, k) += 0.5 * v;
            B(k, i) += 0.5 * v;
            B(j, k) -= 0.5 * v;
            B(k, j) -= 0.5 * v;
        }
    }
    return {std::move(A), std::move(B)};
}

Vec gamma(const Vec &f, const Vec &g, const MappingChain &chain) {
    Vec out = Vec::Zero(chain.n());
    for (const ActiveEdge &e : chain.active_edges())
        out(e.eta) += 0.5 * chain.rate(e.eta, e.sigma) * (f(e.target) - f(e.eta)) *
                      (g(e.target) - g(e.eta));
    return out;
}

Vec gamma(const Vec &f, const MappingChain &chain) { return gamma(f, f, chain); }

Vec gamma2(const Vec &f, const MappingChain &chain) {
    const Mat &L = chain.generator();
    Vec gf = gamma(f, chain);
    Vec lf = L * f;
    return 0.5 * (L * gf) - gamma(f, lf, chain);
}

BakryEmerySpecialization bakry_emery_specialization(const Density &rho,
                                                    const EntropyGenerator &gen,
                                                    const MappingChain &chain) {
    WeightFunction theta = theta_from_phi(gen);
    Vec psi(chain.n());
    for (int eta = 0; eta < chain.n(); ++eta) psi(eta) = gen.phi_prime(rho(eta));
    BakryEmerySpecialization out;
    out.lhs = quad_B(rho, psi, theta, chain).B;
    out.rhs_base = quad_A(rho, psi, theta, chain);
    out.fisher = phi_fisher(rho, gen, chain);
    return out;
}

} // namespace curvlab
