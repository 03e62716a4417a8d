#include "ipu/engine.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ipu {

void CopulaSampler::draw(Rng& rng, std::span<double> out) {
    const auto& spec = model_->spec();
    sample_driver(spec, rng, base_point_, driver_);
    for (std::size_t k = 0; k < spec.dim(); ++k) out[k] = sample_component(spec.families()[k], driver_[k], rng);
}

std::vector<double> sample_copula_row(const IpuModel& model, Rng& rng) {
    CopulaSampler sampler(model);
    std::vector<double> row(model.dim());
    sampler.draw(rng, row);
    return row;
}

Matrix<double> sample_copula(const IpuModel& model, std::size_t count, std::uint64_t seed, unsigned threads) {
    if (count == 0) throw std::invalid_argument("sample_copula: count must be positive");
    Matrix<double> out(count, model.dim());
    for_each_block(count, seed, threads, [&](std::size_t begin, std::size_t end, Rng& rng) {
        CopulaSampler sampler(model);
        for (std::size_t r = begin; r < end; ++r) sampler.draw(rng, out.row(r));
    });
    return out;
}

namespace {

struct CoordinateTerms {
    ComponentWindow window;
    std::vector<double> f;  // f_{k,i}(u_k) for i in [window.lo, window.hi]
    double density_sum = 0.0;
};

CoordinateTerms coordinate_terms(const FamilyParams& fam, double u, const TruncationPolicy& policy) {
    CoordinateTerms t;
    const ComponentIndex cap = driver_cutoff(fam, policy.tail_eps, policy.max_index);
    t.window = phi_window(fam, u, policy.tail_eps, cap);
    t.density_sum = component_density_sum(fam, u);
    const auto len = static_cast<std::size_t>(t.window.hi - t.window.lo + 1);
    t.f.resize(len);
    // phi by its ratio recurrence from the window start; f = phi / alpha.
    const double a = fam.a();
    const double lambda = fam.kind() == FamilyKind::Poisson ? -a * std::log1p(-u) : 0.0;
    double phi = phi_weight(fam, t.window.lo, u);
    for (std::size_t s = 0; s < len; ++s) {
        const ComponentIndex i = t.window.lo + static_cast<ComponentIndex>(s);
        t.f[s] = phi / marginal_alpha(fam, i);
        const double di = static_cast<double>(i);
        phi *= fam.kind() == FamilyKind::NegativeBinomial ? u * (a + di) / (di + 1.0) : lambda / (di + 1.0);
    }
    return t;
}

}  // namespace

DensityValue density(const IpuModel& model, std::span<const double> u, const TruncationPolicy& policy) {
    const auto& spec = model.spec();
    const std::size_t d = spec.dim();
    if (u.size() != d) throw std::invalid_argument("density: point dimension does not match the model");
    for (double x : u) {
        if (!(x > 0.0 && x < 1.0)) throw std::domain_error("density: point must lie strictly inside the unit cube");
    }
    if (!(policy.tail_eps > 0.0 && policy.tail_eps < 1.0) || policy.max_index < 1) {
        throw std::invalid_argument("density: invalid truncation policy");
    }

    std::vector<CoordinateTerms> terms;
    terms.reserve(d);
    IndexBox box;
    DensityValue result;
    for (std::size_t k = 0; k < d; ++k) {
        terms.push_back(coordinate_terms(spec.families()[k], u[k], policy));
        box.lo.push_back(terms.back().window.lo);
        box.hi.push_back(terms.back().window.hi);
        result.capped = result.capped || terms.back().window.capped;
    }

    const BaseKind kind = spec.base().kind();
    if (kind == BaseKind::Independence || kind == BaseKind::Bernstein) {
        std::vector<std::vector<std::vector<double>>> weights(d);
        std::size_t m = 0;
        for (std::size_t k = 0; k < d; ++k) m = product_form_weights(spec, k, box.lo[k], box.hi[k], weights[k]);
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double prod = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                double inner = 0.0;
                const auto& w = weights[k][j];
                for (std::size_t s = 0; s < w.size(); ++s) inner += w[s] * terms[k].f[s];
                prod *= inner;
            }
            total += prod;
        }
        result.value = total / static_cast<double>(m);
    } else {
        double total = 0.0;
        for_each_support_point(spec, box, [&](std::span<const ComponentIndex> i, double p) {
            double prod = p;
            for (std::size_t k = 0; k < d; ++k) prod *= terms[k].f[static_cast<std::size_t>(i[k] - box.lo[k])];
            total += prod;
        });
        result.value = total;
    }

    // A term with i_k outside its window is at most phi_{k,i_k}(u_k) times
    // the other coordinates' component densities, because P(Z = i) never
    // exceeds the marginal mass alpha_{k,i_k}.
    for (std::size_t k = 0; k < d; ++k) {
        double others = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (j != k) others *= terms[j].density_sum;
        }
        result.error_bound += terms[k].window.tail_mass * others;
    }
    return result;
}

std::vector<GridPoint> density_grid(const IpuModel& model, std::size_t resolution, const TruncationPolicy& policy) {
    if (model.dim() != 2) throw std::invalid_argument("density_grid: tabular output needs a bivariate model");
    if (resolution < 2) throw std::invalid_argument("density_grid: resolution must be at least 2");
    std::vector<GridPoint> grid;
    grid.reserve(resolution * resolution);
    const double step = 1.0 / static_cast<double>(resolution);
    for (std::size_t j = 0; j < resolution; ++j) {
        const double u = (static_cast<double>(j) + 0.5) * step;
        for (std::size_t l = 0; l < resolution; ++l) {
            const double v = (static_cast<double>(l) + 0.5) * step;
            const double point[2] = {u, v};
            grid.push_back({u, v, density(model, point, policy).value});
        }
    }
    return grid;
}

void write_samples_csv(std::ostream& out, const Matrix<double>& samples) {
    char buf[32];
    for (std::size_t k = 0; k < samples.cols(); ++k) out << (k ? "," : "") << "u" << (k + 1);
    out << '\n';
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        for (std::size_t k = 0; k < samples.cols(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g", samples(r, k));
            out << (k ? "," : "") << buf;
        }
        out << '\n';
    }
}

void write_density_grid_csv(std::ostream& out, std::span<const GridPoint> grid) {
    char buf[96];
    out << "u,v,density\n";
    for (const auto& g : grid) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", g.u, g.v, g.value);
        out << buf;
    }
}

}  // namespace ipu
