#include "ipu/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

namespace ipu {

namespace {

void check_fit_data(std::span<const double> data, const char* what) {
    if (data.size() < 2) throw std::invalid_argument(std::string(what) + ": need at least two data points");
    for (double x : data) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw std::domain_error(std::string(what) + ": data must be positive and finite");
        }
    }
    const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
    if (*mn == *mx) throw std::invalid_argument(std::string(what) + ": degenerate data (all values equal)");
}

void check_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error(std::string(what) + ": probability must lie in (0,1)");
}

std::vector<double> sorted_logs(std::span<const double> data) {
    std::vector<double> logs(data.size());
    std::transform(data.begin(), data.end(), logs.begin(), [](double x) { return std::log(x); });
    std::sort(logs.begin(), logs.end());
    return logs;
}

double blom_position(std::size_t i, std::size_t n) {
    return (static_cast<double>(i) + 1.0 - 0.375) / (static_cast<double>(n) + 0.25);
}

struct LineFit {
    double intercept;
    double slope;
};

// Least squares y = intercept + slope * x.
LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

double standard_normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// Order statistic index (1-based) ceil(q N), snapping q N to an integer
// when it is one up to rounding.
std::size_t order_statistic_rank(double q, std::size_t n) {
    const double x = q * static_cast<double>(n);
    double k = std::round(x);
    if (std::abs(x - k) > 1e-9 * std::max(1.0, x)) k = std::ceil(x);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

}  // namespace

std::string to_string(MarginalKind kind) { return kind == MarginalKind::Lognormal ? "lognormal" : "frechet"; }

std::string to_string(FitMethod method) {
    return method == FitMethod::MaximumLikelihood ? "mle" : "probability-plot";
}

MarginalModel MarginalModel::lognormal(double mu, double sigma) {
    if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("lognormal: need finite mu and positive sigma");
    }
    return MarginalModel(MarginalKind::Lognormal, mu, sigma);
}

MarginalModel MarginalModel::frechet(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
        throw std::invalid_argument("frechet: need positive shape and scale");
    }
    return MarginalModel(MarginalKind::Frechet, shape, scale);
}

MarginalModel fit_lognormal(std::span<const double> data, FitMethod method) {
    check_fit_data(data, "fit_lognormal");
    const auto logs = sorted_logs(data);
    const std::size_t n = logs.size();
    if (method == FitMethod::ProbabilityPlot) {
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = standard_normal_quantile(blom_position(i, n));
        const auto line = least_squares(scores, logs);
        return MarginalModel::lognormal(line.intercept, line.slope);
    }
    const double mu = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double l : logs) ss += (l - mu) * (l - mu);
    return MarginalModel::lognormal(mu, std::sqrt(ss / static_cast<double>(n)));
}

MarginalModel fit_frechet(std::span<const double> data, FitMethod method) {
    check_fit_data(data, "fit_frechet");
    const auto logs = sorted_logs(data);
    const std::size_t n = logs.size();
    if (method == FitMethod::ProbabilityPlot) {
        // log y = log scale + (1/shape) * (-log(-log p)).
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = -std::log(-std::log(blom_position(i, n)));
        const auto line = least_squares(scores, logs);
        if (!(line.slope > 0.0)) throw std::runtime_error("fit_frechet: probability plot has nonpositive slope");
        return MarginalModel::frechet(1.0 / line.slope, std::exp(line.intercept));
    }

    // Profile likelihood in the shape a, with centred logs l_i:
    //   g(a) = 1/a + sum l_i e^{-a l_i} / sum e^{-a l_i} = 0,
    // decreasing from +inf to min(l_i) < 0.
    const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(n);
    std::vector<double> centred(n);
    std::transform(logs.begin(), logs.end(), centred.begin(), [&](double l) { return l - mean; });
    const double lmin = centred.front();

    auto weighted = [&](double a, double& log_sum) {
        // e^{-a l} is largest at lmin; shift by it.
        double num = 0.0, den = 0.0;
        for (double l : centred) {
            const double w = std::exp(-a * (l - lmin));
            num += w * l;
            den += w;
        }
        log_sum = -a * lmin + std::log(den);
        return num / den;
    };
    auto g = [&](double a) {
        double unused = 0.0;
        return 1.0 / a + weighted(a, unused);
    };

    double lo = 1e-3, hi = 1.0;
    while (g(lo) <= 0.0 && lo > 1e-12) lo *= 0.1;
    while (g(hi) >= 0.0 && hi < 1e8) hi *= 2.0;
    const double g_lo = g(lo), g_hi = g(hi);
    if (!(g_lo > 0.0 && g_hi < 0.0)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "fit_frechet: no sign change in shape bracket [%g, %g] (g = %g, %g)", lo, hi,
                      g_lo, g_hi);
        throw std::runtime_error(buf);
    }
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi,
                                                           boost::math::tools::eps_tolerance<double>(35), iterations);
    if (iterations >= 200) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "fit_frechet: shape solve did not converge, bracket [%.12g, %.12g]",
                      bracket.first, bracket.second);
        throw std::runtime_error(buf);
    }
    const double shape = 0.5 * (bracket.first + bracket.second);
    // scale^shape = n / sum y^{-shape}.
    double log_sum = 0.0;
    weighted(shape, log_sum);
    const double log_scale = mean + (std::log(static_cast<double>(n)) - log_sum) / shape;
    return MarginalModel::frechet(shape, std::exp(log_scale));
}

double quantile_marginal(const MarginalModel& model, double p) {
    check_probability(p, "quantile_marginal");
    if (model.kind() == MarginalKind::Lognormal) {
        return std::exp(model.first() + model.second() * standard_normal_quantile(p));
    }
    return model.second() * std::pow(-std::log(p), -1.0 / model.first());
}

double empirical_var_inplace(std::span<double> samples, double alpha) {
    if (samples.empty()) throw std::invalid_argument("empirical_var: empty sample");
    check_probability(alpha, "empirical_var");
    const std::size_t k = order_statistic_rank(1.0 - alpha, samples.size());
    auto nth = samples.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(samples.begin(), nth, samples.end());
    return *nth;
}

double empirical_var(std::span<const double> samples, double alpha) {
    std::vector<double> copy(samples.begin(), samples.end());
    return empirical_var_inplace(copy, alpha);
}

std::vector<QuantilePoint> quantile_table(std::span<const double> samples, std::span<const double> probabilities) {
    if (samples.empty()) throw std::invalid_argument("quantile_table: empty sample");
    for (double p : probabilities) check_probability(p, "quantile_table");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<QuantilePoint> table;
    table.reserve(probabilities.size());
    for (double p : probabilities) table.push_back({p, sorted[order_statistic_rank(p, sorted.size()) - 1]});
    return table;
}

namespace {

// Drawer: callable(Rng&, std::span<double> row), one per block.
template <typename MakeDrawer>
std::vector<double> simulate_sums(std::size_t dim, std::span<const MarginalModel> marginals, std::size_t count,
                                  std::uint64_t seed, unsigned threads, MakeDrawer make_drawer) {
    if (marginals.size() != dim) {
        throw std::invalid_argument("simulate_aggregate: need one marginal per copula coordinate");
    }
    if (count == 0) throw std::invalid_argument("simulate_aggregate: count must be positive");
    std::vector<double> sums(count);
    for_each_block(count, seed, threads, [&](std::size_t begin, std::size_t end, Rng& rng) {
        auto draw = make_drawer();
        std::vector<double> row(dim);
        for (std::size_t r = begin; r < end; ++r) {
            draw(rng, std::span<double>(row));
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += quantile_marginal(marginals[k], row[k]);
            sums[r] = s;
        }
    });
    return sums;
}

VarReport finish_report(std::vector<double> sums, std::span<const MarginalModel> marginals, double alpha,
                        std::uint64_t seed, std::vector<double>* sums_out) {
    VarReport report;
    report.alpha = alpha;
    report.count = sums.size();
    report.seed = seed;
    report.aggregate = empirical_var_inplace(sums, alpha);
    for (const auto& m : marginals) {
        report.marginal_var.push_back(quantile_marginal(m, 1.0 - alpha));
        report.comparator += report.marginal_var.back();
    }
    if (sums_out) *sums_out = std::move(sums);
    return report;
}

}  // namespace

std::vector<double> simulate_aggregate(const IpuModel& model, std::span<const MarginalModel> marginals,
                                       std::size_t count, std::uint64_t seed, unsigned threads) {
    return simulate_sums(model.dim(), marginals, count, seed, threads, [&] {
        return [sampler = CopulaSampler(model)](Rng& rng, std::span<double> row) mutable { sampler.draw(rng, row); };
    });
}

std::vector<double> simulate_aggregate(const BaseCopula& base, std::span<const MarginalModel> marginals,
                                       std::size_t count, std::uint64_t seed, unsigned threads) {
    return simulate_sums(base.dim(), marginals, count, seed, threads, [&] {
        return [&base](Rng& rng, std::span<double> row) { sample_base(base, rng, row); };
    });
}

VarReport aggregate_var(const IpuModel& model, std::span<const MarginalModel> marginals, double alpha,
                        std::size_t count, std::uint64_t seed, std::vector<double>* sums_out, unsigned threads) {
    check_probability(alpha, "aggregate_var");
    return finish_report(simulate_aggregate(model, marginals, count, seed, threads), marginals, alpha, seed, sums_out);
}

VarReport aggregate_var(const BaseCopula& base, std::span<const MarginalModel> marginals, double alpha,
                        std::size_t count, std::uint64_t seed, std::vector<double>* sums_out, unsigned threads) {
    check_probability(alpha, "aggregate_var");
    return finish_report(simulate_aggregate(base, marginals, count, seed, threads), marginals, alpha, seed, sums_out);
}

void write_quantile_table_csv(std::ostream& out, std::span<const QuantilePoint> table) {
    char buf[64];
    out << "p,quantile\n";
    for (const auto& q : table) {
        std::snprintf(buf, sizeof buf, "%.6g,%.12g\n", q.p, q.quantile);
        out << buf;
    }
}

}  // namespace ipu
