#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

// Rank columns of the 20-row loss sample, transcribed from the published table.
inline constexpr std::array<int, 20> kRanksX{4, 20, 8, 19, 13, 17, 18, 11, 3, 15, 5, 10, 9, 16, 14, 6, 1, 12, 7, 2};
inline constexpr std::array<int, 20> kRanksY{9, 20, 4, 19, 8, 15, 18, 10, 12, 16, 6, 17, 7, 13, 11, 5, 1, 14, 3, 2};

// Sup distance between the empirical cdf of `xs` and `cdf`.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double f = cdf(xs[j]);
        d = std::max({d, std::abs(f - j / n), std::abs((j + 1) / n - f)});
    }
    return d;
}

inline double ks_uniform(std::vector<double> xs) {
    return ks_distance(std::move(xs), [](double x) { return std::clamp(x, 0.0, 1.0); });
}

inline double binomial_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 1e-300) / n); }

}  // namespace testsupport
