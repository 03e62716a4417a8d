#pragma once

#include <cstddef>

#include "ipu/matrix.hpp"

namespace ipu {

/// Upper tail dependence coefficient of the symmetric negative binomial
/// copula with comonotone driver: 1 - C(2a, a) / 4^a.
double lambda_u_nb_exact(int a);

/// Large-a approximation 1 - 1/sqrt(pi a), clamped to [0, 1].
double lambda_u_nb_asymptotic(double a);

struct TailEstimate {
    double threshold = 0.0;
    double estimate = 0.0;
    std::size_t sample_count = 0;
};

/// Plug-in estimate #{u > t, v > t} / (N (1 - t)), clamped to [0, 1].
/// Uses the first two columns of `samples`.
TailEstimate empirical_lambda_u(const Matrix<double>& samples, double t);

}  // namespace ipu
