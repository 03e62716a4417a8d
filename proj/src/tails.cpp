#include "ipu/tails.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ipu {

double lambda_u_nb_exact(int a) {
    if (a < 1) throw std::domain_error("lambda_u_nb_exact: a must be a positive integer");
    // C(2a, a) / 4^a, exact in floating point while the product stays small.
    if (a <= 500) {
        double ratio = 1.0;
        for (int j = 1; j <= a; ++j) ratio *= (static_cast<double>(a + j) / j) / 4.0;
        return 1.0 - ratio;
    }
    const double da = a;
    const double log_ratio = std::lgamma(2.0 * da + 1.0) - 2.0 * std::lgamma(da + 1.0) - 2.0 * da * std::numbers::ln2;
    return 1.0 - std::exp(log_ratio);
}

double lambda_u_nb_asymptotic(double a) {
    if (!(a > 0.0)) throw std::domain_error("lambda_u_nb_asymptotic: a must be positive");
    return std::clamp(1.0 - 1.0 / std::sqrt(std::numbers::pi * a), 0.0, 1.0);
}

TailEstimate empirical_lambda_u(const Matrix<double>& samples, double t) {
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("empirical_lambda_u: threshold must lie in (0,1)");
    if (samples.rows() == 0 || samples.cols() < 2) {
        throw std::invalid_argument("empirical_lambda_u: need at least one bivariate sample");
    }
    std::size_t joint = 0;
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        if (samples(r, 0) > t && samples(r, 1) > t) ++joint;
    }
    const double n = static_cast<double>(samples.rows());
    return {t, std::clamp(static_cast<double>(joint) / (n * (1.0 - t)), 0.0, 1.0), samples.rows()};
}

}  // namespace ipu
