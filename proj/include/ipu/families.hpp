#pragma once

#include <cstdint>
#include <string>

#include "ipu/random.hpp"

namespace ipu {

enum class FamilyKind { NegativeBinomial, Poisson };

std::string to_string(FamilyKind kind);

/// One coordinate's partition-of-unity family.
///
/// NegativeBinomial: phi_i(u) = C(a+i-1, i) u^i (1-u)^a, a a positive integer.
/// Poisson:          phi_i(u) = (1-u)^a (a L(u))^i / i!, L(u) = -ln(1-u), a > 0.
///
/// The marginal masses alpha_i = int_0^1 phi_i are a discrete Pareto-type law
/// (NB) or a geometric law (Poisson). Driver coordinates take values in
/// {0, 1, 2, ...} with exactly those masses.
class FamilyParams {
public:
    static FamilyParams negative_binomial(int a);
    static FamilyParams poisson(double a);
    /// Validating constructor for either kind; NB requires integral a.
    static FamilyParams make(FamilyKind kind, double a);

    [[nodiscard]] FamilyKind kind() const noexcept { return kind_; }
    [[nodiscard]] double a() const noexcept { return a_; }

    friend bool operator==(const FamilyParams&, const FamilyParams&) = default;

private:
    FamilyParams(FamilyKind kind, double a) : kind_(kind), a_(a) {}
    FamilyKind kind_;
    double a_;
};

/// Component index of a driver coordinate.
using ComponentIndex = std::int64_t;

double phi_weight(const FamilyParams& p, ComponentIndex i, double u);
double log_phi_weight(const FamilyParams& p, ComponentIndex i, double u);

double marginal_alpha(const FamilyParams& p, ComponentIndex i);

/// f_i(u) = phi_i(u) / alpha_i. NB: Beta(i+1, a+1) density. Poisson: density
/// of 1 - exp(-Y) with Y ~ Gamma(shape i+1, rate a+1).
double component_density(const FamilyParams& p, ComponentIndex i, double u);
double log_component_density(const FamilyParams& p, ComponentIndex i, double u);

/// sum_i f_i(u) in closed form; bounds truncated density sums.
double component_density_sum(const FamilyParams& p, double u);

/// Draw from f_i. Result lies strictly inside (0,1).
double sample_component(const FamilyParams& p, ComponentIndex i, Rng& rng);

/// Generalized inverse of the driver cdf: the i with cdf(i-1) <= u_hat < cdf(i).
ComponentIndex driver_quantile(const FamilyParams& p, double u_hat);

/// P(Z <= i); returns 0 for i < 0.
double driver_cdf(const FamilyParams& p, ComponentIndex i);

/// Smallest i with driver_cdf(i) > 1 - tail_eps, capped at `cap`.
ComponentIndex driver_cutoff(const FamilyParams& p, double tail_eps, ComponentIndex cap);

/// Range of component indices carrying all but `tail_mass` of the weights
/// phi_i(u) for fixed u, clipped to [0, cap].
struct ComponentWindow {
    ComponentIndex lo = 0;
    ComponentIndex hi = 0;
    double tail_mass = 0.0;  ///< upper bound on sum of phi_i(u) outside [lo, hi]
    bool capped = false;     ///< hi was clipped by `cap` with mass left above it
};

ComponentWindow phi_window(const FamilyParams& p, double u, double tail_eps, ComponentIndex cap);

}  // namespace ipu
