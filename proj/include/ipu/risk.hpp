#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ipu/engine.hpp"

namespace ipu {

enum class MarginalKind { Lognormal, Frechet };

/// How a marginal is estimated from data.
///
/// MaximumLikelihood is the textbook estimator. ProbabilityPlot fits a
/// straight line by least squares through the log order statistics against
/// the standardized quantiles at Blom plotting positions (i - 3/8)/(n + 1/4);
/// this is the estimator that reproduces the published reference VaR values
/// for the Cottin-Pfeifer data.
enum class FitMethod { MaximumLikelihood, ProbabilityPlot };

std::string to_string(MarginalKind kind);
std::string to_string(FitMethod method);

/// Lognormal(mu, sigma) or two-parameter Frechet F(y) = exp(-(y/scale)^-shape).
class MarginalModel {
public:
    static MarginalModel lognormal(double mu, double sigma);
    static MarginalModel frechet(double shape, double scale);

    [[nodiscard]] MarginalKind kind() const noexcept { return kind_; }
    /// Lognormal: mu, sigma. Frechet: shape, scale.
    [[nodiscard]] double first() const noexcept { return first_; }
    [[nodiscard]] double second() const noexcept { return second_; }

private:
    MarginalModel(MarginalKind kind, double first, double second) : kind_(kind), first_(first), second_(second) {}
    MarginalKind kind_;
    double first_;
    double second_;
};

MarginalModel fit_lognormal(std::span<const double> data, FitMethod method = FitMethod::MaximumLikelihood);
MarginalModel fit_frechet(std::span<const double> data, FitMethod method = FitMethod::MaximumLikelihood);

double quantile_marginal(const MarginalModel& model, double p);

/// The ceil((1 - alpha) N)-th smallest sample. Partially reorders `samples`.
double empirical_var_inplace(std::span<double> samples, double alpha);
double empirical_var(std::span<const double> samples, double alpha);

struct QuantilePoint {
    double p = 0.0;
    double quantile = 0.0;
};

/// Order statistic ceil(p N) for each p, with the same convention as
/// empirical_var (quantile at p equals VaR at alpha = 1 - p).
std::vector<QuantilePoint> quantile_table(std::span<const double> samples, std::span<const double> probabilities);

/// Row sums S = sum_k q_k(U_k) over `count` copula draws, q_k the marginal
/// quantile functions. Deterministic in (seed, count).
std::vector<double> simulate_aggregate(const IpuModel& model, std::span<const MarginalModel> marginals,
                                       std::size_t count, std::uint64_t seed, unsigned threads = 0);
/// Same, with rows drawn from a base copula directly (e.g. the plain
/// Bernstein copula).
std::vector<double> simulate_aggregate(const BaseCopula& base, std::span<const MarginalModel> marginals,
                                       std::size_t count, std::uint64_t seed, unsigned threads = 0);

struct VarReport {
    double alpha = 0.0;
    std::vector<double> marginal_var;  ///< q_k(1 - alpha) per coordinate
    double aggregate = 0.0;            ///< empirical VaR of S
    double comparator = 0.0;           ///< sum of marginal VaRs
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo VaR of the aggregate loss. When `sums_out` is non-null it
/// receives the simulated aggregate losses (reordered).
VarReport aggregate_var(const IpuModel& model, std::span<const MarginalModel> marginals, double alpha,
                        std::size_t count, std::uint64_t seed, std::vector<double>* sums_out = nullptr,
                        unsigned threads = 0);

VarReport aggregate_var(const BaseCopula& base, std::span<const MarginalModel> marginals, double alpha,
                        std::size_t count, std::uint64_t seed, std::vector<double>* sums_out = nullptr,
                        unsigned threads = 0);

void write_quantile_table_csv(std::ostream& out, std::span<const QuantilePoint> table);

}  // namespace ipu
