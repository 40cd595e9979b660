#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace curvlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Pairwise (tree) accumulation. Summation order depends only on the order
// terms were pushed, never on thread count.
double pairwise_sum(std::span<const double> terms);

class PairwiseAccumulator {
public:
    void add(double x) { terms_.push_back(x); }
    double total() const { return pairwise_sum(terms_); }
    // Sum of |term|, used as the scale for "vanishes to eps*scale" checks.
    double abs_total() const;
    std::size_t size() const { return terms_.size(); }

private:
    std::vector<double> terms_;
};

// Seeded RNG wrapper so samplers are reproducible per seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return unif_(gen_); }
    double normal() { return norm_(gen_); }
    double exponential() { return expo_(gen_); }
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }
    std::mt19937_64 &engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> norm_{0.0, 1.0};
    std::exponential_distribution<double> expo_{1.0};
};

// Number of worker threads: min(hardware, CURVLAB_THREADS if set).
int worker_count();

// Evaluates fn(i) for i in [0, n) on the worker pool, results indexed by i so
// reductions downstream stay deterministic.
void parallel_for_index(int n, const std::function<void(int)> &fn);

// FNV-1a, used for config hashes embedded in reports.
std::uint64_t fnv1a(const std::string &s);
std::string hex64(std::uint64_t v);

} // namespace curvlab
