#include "ipu/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ipu {

namespace {

void require_open_unit(double u, const char* what) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error(std::string(what) + ": argument must lie in (0,1), got " + std::to_string(u));
    }
}

void require_index(ComponentIndex i, const char* what) {
    if (i < 0) throw std::domain_error(std::string(what) + ": component index must be >= 0");
}

constexpr double kLargestBelowOne = 1.0 - 0x1.0p-53;
constexpr ComponentIndex kIndexLimit = ComponentIndex{1} << 62;

ComponentIndex floor_to_index(double x) {
    if (!(x >= 0.0)) return 0;
    if (x >= static_cast<double>(kIndexLimit)) return kIndexLimit;
    return static_cast<ComponentIndex>(std::floor(x));
}

// Ratio phi_{i+1}(u) / phi_i(u).
double up_ratio(const FamilyParams& p, ComponentIndex i, double u, double lambda) {
    const double di = static_cast<double>(i);
    return p.kind() == FamilyKind::NegativeBinomial ? u * (p.a() + di) / (di + 1.0) : lambda / (di + 1.0);
}

// Ratio phi_{i-1}(u) / phi_i(u), i >= 1.
double down_ratio(const FamilyParams& p, ComponentIndex i, double u, double lambda) {
    const double di = static_cast<double>(i);
    return p.kind() == FamilyKind::NegativeBinomial ? di / (u * (p.a() + di - 1.0)) : di / lambda;
}

}  // namespace

std::string to_string(FamilyKind kind) {
    return kind == FamilyKind::NegativeBinomial ? "negative-binomial" : "poisson";
}

FamilyParams FamilyParams::negative_binomial(int a) {
    if (a < 1) throw std::invalid_argument("negative binomial family: a must be a positive integer");
    return FamilyParams(FamilyKind::NegativeBinomial, static_cast<double>(a));
}

FamilyParams FamilyParams::poisson(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("poisson family: a must be positive and finite");
    return FamilyParams(FamilyKind::Poisson, a);
}

FamilyParams FamilyParams::make(FamilyKind kind, double a) {
    if (kind == FamilyKind::Poisson) return poisson(a);
    if (!(a >= 1.0) || a != std::floor(a) || a > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("negative binomial family: a must be a positive integer");
    }
    return negative_binomial(static_cast<int>(a));
}

double log_phi_weight(const FamilyParams& p, ComponentIndex i, double u) {
    require_open_unit(u, "phi_weight");
    require_index(i, "phi_weight");
    const double a = p.a();
    const double di = static_cast<double>(i);
    const double log_tail = a * std::log1p(-u);
    if (i == 0) return log_tail;
    if (p.kind() == FamilyKind::NegativeBinomial) {
        const double log_binom = std::lgamma(a + di) - std::lgamma(di + 1.0) - std::lgamma(a);
        return log_binom + di * std::log(u) + log_tail;
    }
    const double L = -std::log1p(-u);
    return log_tail + di * (std::log(a) + std::log(L)) - std::lgamma(di + 1.0);
}

double phi_weight(const FamilyParams& p, ComponentIndex i, double u) {
    return std::exp(log_phi_weight(p, i, u));
}

namespace {
double log_marginal_alpha(const FamilyParams& p, ComponentIndex i) {
    const double a = p.a();
    const double di = static_cast<double>(i);
    if (p.kind() == FamilyKind::NegativeBinomial) return std::log(a) - std::log(a + di) - std::log(a + di + 1.0);
    return di * std::log(a) - (di + 1.0) * std::log(a + 1.0);
}
}  // namespace

double marginal_alpha(const FamilyParams& p, ComponentIndex i) {
    require_index(i, "marginal_alpha");
    const double a = p.a();
    const double di = static_cast<double>(i);
    if (p.kind() == FamilyKind::NegativeBinomial) return a / ((a + di) * (a + di + 1.0));
    return std::exp(log_marginal_alpha(p, i));
}

double log_component_density(const FamilyParams& p, ComponentIndex i, double u) {
    return log_phi_weight(p, i, u) - log_marginal_alpha(p, i);
}

double component_density(const FamilyParams& p, ComponentIndex i, double u) {
    return std::exp(log_component_density(p, i, u));
}

double component_density_sum(const FamilyParams& p, double u) {
    require_open_unit(u, "component_density_sum");
    const double tail = 1.0 - u;
    if (p.kind() == FamilyKind::NegativeBinomial) return (p.a() + 1.0) / (tail * tail);
    return (p.a() + 1.0) / tail;
}

double sample_component(const FamilyParams& p, ComponentIndex i, Rng& rng) {
    require_index(i, "sample_component");
    const double shape = static_cast<double>(i) + 1.0;
    double u = 0.0;
    if (p.kind() == FamilyKind::NegativeBinomial) {
        u = rng.beta(shape, p.a() + 1.0);
    } else {
        u = -std::expm1(-rng.gamma(shape, p.a() + 1.0));
    }
    return std::clamp(u, std::numeric_limits<double>::min(), kLargestBelowOne);
}

double driver_cdf(const FamilyParams& p, ComponentIndex i) {
    if (i < 0) return 0.0;
    const double di = static_cast<double>(i);
    if (p.kind() == FamilyKind::NegativeBinomial) return (di + 1.0) / (p.a() + di + 1.0);
    return -std::expm1(-(di + 1.0) * std::log1p(1.0 / p.a()));
}

ComponentIndex driver_quantile(const FamilyParams& p, double u_hat) {
    require_open_unit(u_hat, "driver_quantile");
    const double a = p.a();
    ComponentIndex i = p.kind() == FamilyKind::NegativeBinomial
                           ? floor_to_index(a * u_hat / (1.0 - u_hat))
                           : floor_to_index(-std::log1p(-u_hat) / std::log1p(1.0 / a));
    // The closed forms can land one step off at interval boundaries.
    if (i < kIndexLimit) {
        if (driver_cdf(p, i) <= u_hat) {
            ++i;
        } else if (i > 0 && driver_cdf(p, i - 1) > u_hat) {
            --i;
        }
    }
    return i;
}

ComponentIndex driver_cutoff(const FamilyParams& p, double tail_eps, ComponentIndex cap) {
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw std::invalid_argument("driver_cutoff: tail_eps must lie in (0,1)");
    const double a = p.a();
    const double guess = p.kind() == FamilyKind::NegativeBinomial ? a / tail_eps - a - 1.0
                                                                  : -std::log(tail_eps) / std::log1p(1.0 / a) - 1.0;
    if (guess >= static_cast<double>(cap)) return cap;
    ComponentIndex i = std::max<ComponentIndex>(0, floor_to_index(guess));
    while (i > 0 && driver_cdf(p, i - 1) > 1.0 - tail_eps) --i;
    while (i < cap && !(driver_cdf(p, i) > 1.0 - tail_eps)) ++i;
    return i;
}

ComponentWindow phi_window(const FamilyParams& p, double u, double tail_eps, ComponentIndex cap) {
    require_open_unit(u, "phi_window");
    const double a = p.a();
    const double lambda = p.kind() == FamilyKind::Poisson ? -a * std::log1p(-u) : 0.0;
    double mode_real = 0.0;
    if (p.kind() == FamilyKind::NegativeBinomial) {
        mode_real = a > 1.0 ? (a - 1.0) * u / (1.0 - u) : 0.0;
    } else {
        mode_real = lambda;
    }
    const ComponentIndex mode = std::min(floor_to_index(mode_real), cap);

    ComponentWindow w;
    w.lo = w.hi = mode;
    const double t_mode = phi_weight(p, mode, u);
    double t_lo = t_mode, t_hi = t_mode, mass = t_mode;
    const double inf = std::numeric_limits<double>::infinity();

    auto upper_bound = [&]() {
        if (w.hi >= cap) return inf;
        const double r = up_ratio(p, w.hi, u, lambda);
        return r < 1.0 ? t_hi * r / (1.0 - r) : inf;
    };
    auto lower_bound = [&]() {
        if (w.lo == 0) return 0.0;
        const double q = down_ratio(p, w.lo, u, lambda);
        return q < 1.0 ? t_lo * q / (1.0 - q) : inf;
    };

    for (;;) {
        const double bu = upper_bound();
        const double bd = lower_bound();
        if (w.hi >= cap && bd <= tail_eps) {
            // Anything left sits above the cap.
            w.tail_mass = std::max(0.0, 1.0 - mass);
            w.capped = w.tail_mass > tail_eps;
            if (!w.capped) w.tail_mass = std::max(w.tail_mass, bd);
            return w;
        }
        if (bu + bd <= tail_eps) {
            w.tail_mass = bu + bd;
            return w;
        }
        if (bu >= bd && w.hi < cap) {
            t_hi *= up_ratio(p, w.hi, u, lambda);
            ++w.hi;
            mass += t_hi;
        } else {
            t_lo *= down_ratio(p, w.lo, u, lambda);
            --w.lo;
            mass += t_lo;
        }
    }
}

}  // namespace ipu
