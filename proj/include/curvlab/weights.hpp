#pragma once

#include <functional>
#include <string>
#include <utility>

#include "curvlab/util.hpp"

namespace curvlab {

// Convex entropy generator phi on (0, inf) with its first two derivatives.
struct EntropyGenerator {
    std::function<double(double)> phi;
    std::function<double(double)> phi_prime;
    std::function<double(double)> phi_second;
    bool lower_bounded = true;
    std::string label;
};

// Symmetric concave weight function theta with gradient.
struct WeightFunction {
    std::function<double(double, double)> theta;
    std::function<std::pair<double, double>(double, double)> grad;
    std::string label;
};

struct WeightValidation {
    bool symmetric = true;
    bool concave = true;
    bool grad_ok = true;
    double worst_symmetry = 0.0;
    double worst_concavity = 0.0; // most negative midpoint gap
    double worst_grad_rel = 0.0;

    bool ok() const { return symmetric && concave && grad_ok; }
};

struct MThetaEnclosure {
    double lo = 0.0;
    double hi = 0.0;
    double argmin_lambda = 1.0;
};

// phi_alpha of the Beckner family: alpha = 1 gives t log t - t + 1,
// alpha in (1,2] gives (t^alpha - t)/(alpha-1) - t + 1.
EntropyGenerator phi_alpha(double alpha);

// theta_alpha: alpha = 1 logarithmic mean, alpha = 2 constant 1/2,
// alpha in (1,2) the Beckner weight.
WeightFunction theta_alpha(double alpha);
WeightFunction log_mean();
WeightFunction arithmetic_mean();

// theta(s,t) = (s - t)/(phi'(s) - phi'(t)), 1/phi''(s) on the diagonal. The
// diagonal formula is used whenever |s - t| < 1e-8 * max(s,t): the generic
// quotient loses half the mantissa to cancellation there.
WeightFunction theta_from_phi(const EntropyGenerator &gen);

// Randomized checks of Assumption-style properties (symmetry, midpoint
// concavity, gradient vs central differences).
WeightValidation validate_weight(const WeightFunction &wf, std::uint64_t seed = 7,
                                 int n_pairs = 2000);

// Enclosure of M_theta = inf (theta(s,s)+theta(t,t)) / (2 theta(s,t)).
// The infimum is sampled on {(1, lambda) : lambda in log-grid (1, lambda_max]};
// exact restriction for 1-homogeneous weights. hi is the sampled minimum, lo
// additionally subtracts a grid-resolution slack and a tail-extrapolation
// estimate when the minimum sits at the grid end (heuristic, documented).
MThetaEnclosure m_theta_numeric(const WeightFunction &wf, double lambda_max = 1e6,
                                int grid = 4000);

// Closed form for theta_alpha: 1 on [1,3/2] and at 2, 1/(2(alpha-1)) on (3/2,2).
double m_theta_closed_form(double alpha);

// The documented slow-tail convergence bound for the numeric enclosure at
// finite lambda_max, alpha in (3/2,2):
//   (lambda_max^{alpha-2} + lambda_max^{1-alpha}) / (2(alpha-1)).
double m_theta_tail_bound(double alpha, double lambda_max);

// Parse "log", "arith" or "alpha:<x>".
WeightFunction parse_theta(const std::string &spec);
EntropyGenerator parse_phi(const std::string &spec);

// User phi supplied as tabulated (t, phi, phi', phi'') rows with monotone
// cubic (Fritsch-Carlson) interpolation.
EntropyGenerator tabulated_phi_from_csv(const std::string &path);

} // namespace curvlab
