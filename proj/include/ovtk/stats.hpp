#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace ovtk {

/// Sum with a fixed pairwise reduction tree. The tree depends only on the
/// length, never on thread count, so cross-path reductions are reproducible.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const Eigen::VectorXd& v) {
    return pairwise_sum(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

/// Monte Carlo mean with a 95% normal confidence halfwidth.
struct MeanCI {
    double mean = 0.0;
    double ci95 = 0.0;  // 1.96 * sd / sqrt(n)
    std::size_t n = 0;
};

inline MeanCI mean_ci(std::span<const double> v) {
    MeanCI r;
    r.n = v.size();
    if (r.n == 0) return r;
    r.mean = pairwise_sum(v) / static_cast<double>(r.n);
    if (r.n < 2) return r;
    double ss = 0.0;
    {
        // Pairwise over squared deviations, same fixed tree.
        struct Acc {
            static double run(std::span<const double> s, double mu) {
                if (s.size() <= 16) {
                    double a = 0.0;
                    for (double x : s) a += (x - mu) * (x - mu);
                    return a;
                }
                const std::size_t half = s.size() / 2;
                return run(s.first(half), mu) + run(s.subspan(half), mu);
            }
        };
        ss = Acc::run(v, r.mean);
    }
    const double var = ss / static_cast<double>(r.n - 1);
    r.ci95 = 1.96 * std::sqrt(var / static_cast<double>(r.n));
    return r;
}

inline MeanCI mean_ci(const Eigen::VectorXd& v) {
    return mean_ci(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace ovtk
