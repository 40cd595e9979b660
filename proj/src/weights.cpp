#include "curvlab/weights.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace curvlab {

namespace {

constexpr double kDiagonalSwitch = 1e-8; // relative |s-t| below which diagonal formulas kick in

void require_positive(double s, double t) {
    if (!(s > 0.0) || !(t > 0.0))
        throw std::domain_error("weight function arguments must be strictly positive");
}

bool near_diagonal(double s, double t) {
    return std::fabs(s - t) < kDiagonalSwitch * std::max(s, t);
}

} // namespace

EntropyGenerator phi_alpha(double alpha) {
    if (alpha < 1.0 || alpha > 2.0) throw std::domain_error("phi_alpha: alpha must lie in [1,2]");
    EntropyGenerator gen;
    gen.lower_bounded = true;
    std::ostringstream lbl;
    lbl << "phi_alpha(" << alpha << ")";
    gen.label = lbl.str();
    if (alpha == 1.0) {
        gen.phi = [](double t) { return t > 0.0 ? t * std::log(t) - t + 1.0 : 1.0; };
        gen.phi_prime = [](double t) { return std::log(t); };
        gen.phi_second = [](double t) { return 1.0 / t; };
    } else {
        gen.phi = [alpha](double t) {
            return (std::pow(t, alpha) - t) / (alpha - 1.0) - t + 1.0;
        };
        gen.phi_prime = [alpha](double t) {
            return (alpha * std::pow(t, alpha - 1.0) - 1.0) / (alpha - 1.0) - 1.0;
        };
        gen.phi_second = [alpha](double t) { return alpha * std::pow(t, alpha - 2.0); };
    }
    return gen;
}

WeightFunction log_mean() {
    WeightFunction wf;
    wf.label = "log-mean";
    wf.theta = [](double s, double t) {
        require_positive(s, t);
        if (near_diagonal(s, t)) return 0.5 * (s + t);
        return (s - t) / (std::log(s) - std::log(t));
    };
    wf.grad = [](double s, double t) -> std::pair<double, double> {
        require_positive(s, t);
        if (near_diagonal(s, t)) return {0.5, 0.5};
        double dl = std::log(s) - std::log(t);
        double th = (s - t) / dl;
        // d/ds [(s-t)/(log s - log t)] = (1 - theta/s)/dl
        return {(1.0 - th / s) / dl, (-1.0 + th / t) / dl};
    };
    return wf;
}

WeightFunction arithmetic_mean() {
    WeightFunction wf;
    wf.label = "arithmetic";
    wf.theta = [](double s, double t) {
        require_positive(s, t);
        return 0.5 * (s + t);
    };
    wf.grad = [](double, double) -> std::pair<double, double> { return {0.5, 0.5}; };
    return wf;
}

WeightFunction theta_alpha(double alpha) {
    if (alpha < 1.0 || alpha > 2.0) throw std::domain_error("theta_alpha: alpha must lie in [1,2]");
    if (alpha == 1.0) return log_mean();
    if (alpha == 2.0) {
        WeightFunction wf;
        wf.label = "theta_alpha(2)";
        wf.theta = [](double s, double t) {
            require_positive(s, t);
            return 0.5;
        };
        wf.grad = [](double, double) -> std::pair<double, double> { return {0.0, 0.0}; };
        return wf;
    }
    WeightFunction wf;
    std::ostringstream lbl;
    lbl << "theta_alpha(" << alpha << ")";
    wf.label = lbl.str();
    const double a = alpha - 1.0;
    wf.theta = [alpha, a](double s, double t) {
        require_positive(s, t);
        if (near_diagonal(s, t)) {
            double mid = 0.5 * (s + t);
            return std::pow(mid, 2.0 - alpha) / alpha;
        }
        return (a / alpha) * (s - t) / (std::pow(s, a) - std::pow(t, a));
    };
    wf.grad = [alpha, a](double s, double t) -> std::pair<double, double> {
        require_positive(s, t);
        if (near_diagonal(s, t)) {
            double mid = 0.5 * (s + t);
            double g = (2.0 - alpha) * std::pow(mid, 1.0 - alpha) / (2.0 * alpha);
            return {g, g};
        }
        double ps = std::pow(s, a), pt = std::pow(t, a);
        double denom = ps - pt;
        double th = (a / alpha) * (s - t) / denom;
        double gs = (a / alpha - th * a * std::pow(s, a - 1.0)) / denom;
        double gt = (-a / alpha + th * a * std::pow(t, a - 1.0)) / denom;
        return {gs, gt};
    };
    return wf;
}

WeightFunction theta_from_phi(const EntropyGenerator &gen) {
    WeightFunction wf;
    wf.label = "theta_phi[" + gen.label + "]";
    auto p = gen.phi_prime;
    auto pp = gen.phi_second;
    wf.theta = [p, pp](double s, double t) {
        require_positive(s, t);
        if (near_diagonal(s, t)) {
            double mid = 0.5 * (s + t);
            double c = pp(mid);
            if (!(c > 0.0)) throw std::domain_error("theta_from_phi: phi'' must be positive");
            return 1.0 / c;
        }
        double d = p(s) - p(t);
        if (d == 0.0) throw std::domain_error("theta_from_phi: phi' is degenerate (phi'(s)=phi'(t), s!=t)");
        return (s - t) / d;
    };
    auto theta = wf.theta;
    wf.grad = [theta](double s, double t) -> std::pair<double, double> {
        // Central differences on theta itself; robust for tabulated phi.
        double hs = 1e-6 * std::max(s, 1.0);
        double ht = 1e-6 * std::max(t, 1.0);
        if (s - hs <= 0.0) hs = 0.5 * s;
        if (t - ht <= 0.0) ht = 0.5 * t;
        double gs = (theta(s + hs, t) - theta(s - hs, t)) / (2.0 * hs);
        double gt = (theta(s, t + ht) - theta(s, t - ht)) / (2.0 * ht);
        return {gs, gt};
    };
    return wf;
}

WeightValidation validate_weight(const WeightFunction &wf, std::uint64_t seed, int n_pairs) {
    WeightValidation v;
    Rng rng(seed);
    auto sample = [&rng]() { return std::exp(3.0 * (rng.uniform() - 0.5) * 2.0); }; // ~ e^{±3}
    for (int k = 0; k < n_pairs; ++k) {
        double s = sample(), t = sample();
        double sym = std::fabs(wf.theta(s, t) - wf.theta(t, s));
        v.worst_symmetry = std::max(v.worst_symmetry, sym);
        if (sym > 1e-12 * std::max(1.0, std::fabs(wf.theta(s, t)))) v.symmetric = false;

        double s2 = sample(), t2 = sample();
        double mid = wf.theta(0.5 * (s + s2), 0.5 * (t + t2));
        double gap = mid - 0.5 * (wf.theta(s, t) + wf.theta(s2, t2));
        v.worst_concavity = std::min(v.worst_concavity, gap);
        if (gap < -1e-12 * std::max(1.0, std::fabs(mid))) v.concave = false;

        auto [gs, gt] = wf.grad(s, t);
        double hs = 1e-5 * std::max(s, 1.0), ht = 1e-5 * std::max(t, 1.0);
        double fs = (wf.theta(s + hs, t) - wf.theta(s - hs, t)) / (2.0 * hs);
        double ft = (wf.theta(s, t + ht) - wf.theta(s, t - ht)) / (2.0 * ht);
        double scale = std::max({1e-3, std::fabs(fs), std::fabs(ft)});
        double rel = std::max(std::fabs(gs - fs), std::fabs(gt - ft)) / scale;
        v.worst_grad_rel = std::max(v.worst_grad_rel, rel);
        if (rel > 1e-5) v.grad_ok = false;
    }
    return v;
}

MThetaEnclosure m_theta_numeric(const WeightFunction &wf, double lambda_max, int grid) {
    if (grid < 8) throw std::invalid_argument("m_theta_numeric: grid too small");
    auto ratio = [&wf](double lam) {
        double denom = wf.theta(1.0, lam);
        if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
        return (wf.theta(1.0, 1.0) + wf.theta(lam, lam)) / (2.0 * denom);
    };
    const double log_max = std::log(lambda_max);
    std::vector<double> values(grid);
    double hi = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 1; k <= grid; ++k) {
        double lam = std::exp(log_max * k / grid);
        double r = ratio(lam);
        values[k - 1] = r;
        if (r < hi) {
            hi = r;
            arg = k - 1;
        }
    }
    if (!std::isfinite(hi)) throw std::runtime_error("m_theta_numeric: theta vanished on the grid");

    // Grid-resolution slack: local curvature of the sampled ratio.
    double grid_slack = 0.0;
    if (arg > 0) grid_slack = std::max(grid_slack, std::fabs(values[arg - 1] - values[arg]));
    if (arg + 1 < grid) grid_slack = std::max(grid_slack, std::fabs(values[arg + 1] - values[arg]));

    // Tail slack: when the minimum sits at the last grid point the ratio may
    // still be decreasing towards lambda -> inf; extrapolate the limit with
    // Aitken's delta-squared on three log-equispaced tail samples.
    double tail_slack = 0.0;
    if (arg == grid - 1) {
        double r0 = ratio(std::exp(log_max * (1.0 - 2.0 / 3.0)));
        double r1 = ratio(std::exp(log_max * (1.0 - 1.0 / 3.0)));
        double r2 = values[grid - 1];
        double d1 = r1 - r0, d2 = r2 - r1;
        if (std::fabs(d2 - d1) > 1e-300) {
            double limit = r2 - d2 * d2 / (d2 - d1);
            if (limit < r2) tail_slack = r2 - limit;
        }
    }

    MThetaEnclosure enc;
    enc.hi = hi;
    enc.lo = std::max(0.0, hi - grid_slack - tail_slack);
    enc.argmin_lambda = std::exp(log_max * (arg + 1) / grid);
    return enc;
}

double m_theta_closed_form(double alpha) {
    if (alpha < 1.0 || alpha > 2.0) throw std::domain_error("m_theta_closed_form: alpha in [1,2]");
    if (alpha <= 1.5 || alpha == 2.0) return 1.0;
    return 1.0 / (2.0 * (alpha - 1.0));
}

double m_theta_tail_bound(double alpha, double lambda_max) {
    if (alpha <= 1.5 || alpha >= 2.0) return 0.0;
    return (std::pow(lambda_max, alpha - 2.0) + std::pow(lambda_max, 1.0 - alpha)) /
           (2.0 * (alpha - 1.0));
}

WeightFunction parse_theta(const std::string &spec) {
    if (spec == "log") return log_mean();
    if (spec == "arith") return arithmetic_mean();
    if (spec.rfind("alpha:", 0) == 0) return theta_alpha(std::stod(spec.substr(6)));
    throw std::invalid_argument("unknown theta spec: " + spec + " (expected log|arith|alpha:<x>)");
}

EntropyGenerator parse_phi(const std::string &spec) {
    if (spec.rfind("alpha:", 0) == 0) return phi_alpha(std::stod(spec.substr(6)));
    throw std::invalid_argument("unknown phi spec: " + spec + " (expected alpha:<x>)");
}

namespace {

// Monotone cubic interpolation (Fritsch-Carlson) through (x_i, y_i).
struct MonotoneCubic {
    std::vector<double> x, y, m;

    static MonotoneCubic fit(std::vector<double> xs, std::vector<double> ys) {
        MonotoneCubic c;
        c.x = std::move(xs);
        c.y = std::move(ys);
        const int n = static_cast<int>(c.x.size());
        if (n < 2) throw std::invalid_argument("tabulated phi needs at least two rows");
        std::vector<double> d(n - 1);
        for (int i = 0; i + 1 < n; ++i) d[i] = (c.y[i + 1] - c.y[i]) / (c.x[i + 1] - c.x[i]);
        c.m.resize(n);
        c.m[0] = d[0];
        c.m[n - 1] = d[n - 2];
        for (int i = 1; i + 1 < n; ++i)
            c.m[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        for (int i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                c.m[i] = c.m[i + 1] = 0.0;
                continue;
            }
            double a = c.m[i] / d[i], b = c.m[i + 1] / d[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double tau = 3.0 / std::sqrt(s);
                c.m[i] = tau * a * d[i];
                c.m[i + 1] = tau * b * d[i];
            }
        }
        return c;
    }

    double eval(double q) const {
        const int n = static_cast<int>(x.size());
        if (q <= x.front()) return y.front() + m.front() * (q - x.front());
        if (q >= x.back()) return y.back() + m.back() * (q - x.back());
        int lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            (x[mid] <= q ? lo : hi) = mid;
        }
        double h = x[lo + 1] - x[lo];
        double t = (q - x[lo]) / h;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * y[lo] + h10 * h * m[lo] + h01 * y[lo + 1] + h11 * h * m[lo + 1];
    }
};

} // namespace

EntropyGenerator tabulated_phi_from_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open phi table: " + path);
    std::vector<double> t, f, fp, fpp;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != 4) throw std::runtime_error("phi table rows must be t,phi,phi',phi''");
        t.push_back(row[0]);
        f.push_back(row[1]);
        fp.push_back(row[2]);
        fpp.push_back(row[3]);
    }
    auto c0 = std::make_shared<MonotoneCubic>(MonotoneCubic::fit(t, f));
    auto c1 = std::make_shared<MonotoneCubic>(MonotoneCubic::fit(t, fp));
    auto c2 = std::make_shared<MonotoneCubic>(MonotoneCubic::fit(t, fpp));
    EntropyGenerator gen;
    gen.label = "tabulated[" + path + "]";
    gen.phi = [c0](double q) { return c0->eval(q); };
    gen.phi_prime = [c1](double q) { return c1->eval(q); };
    gen.phi_second = [c2](double q) { return c2->eval(q); };
    return gen;
}

} // namespace curvlab
