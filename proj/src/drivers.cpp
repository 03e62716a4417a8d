#include "ipu/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace ipu {

namespace {

// Intersection length of [a0, a1) with (0, 1).
double clip_length(double a0, double a1) {
    return std::max(0.0, std::min(a1, 1.0) - std::max(a0, 0.0));
}

// Per-coordinate affine map of a shuffle cell: u = (offset + sign * V) / n.
struct SegmentMap {
    double offset;
    double sign;
};

SegmentMap segment_map(const ShuffleCell& cell, std::size_t k) {
    const double r = cell.ranks[k];
    if (k > 0 && cell.slope == Slope::Negative) return {r, -1.0};
    return {r - 1.0, 1.0};
}

// V-range of a segment coordinate inside [lo, hi).
std::pair<double, double> segment_preimage(SegmentMap m, double n, double lo, double hi) {
    if (m.sign > 0) return {n * lo - m.offset, n * hi - m.offset};
    return {m.offset - n * hi, m.offset - n * lo};
}

void check_box(const BaseCopula& base, std::span<const double> lo, std::span<const double> hi) {
    if (lo.size() != base.dim() || hi.size() != base.dim()) {
        throw std::invalid_argument("rectangle_mass: box dimension does not match the copula");
    }
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (!(lo[k] >= 0.0 && hi[k] <= 1.0 && lo[k] <= hi[k])) {
            throw std::invalid_argument("rectangle_mass: malformed box in coordinate " + std::to_string(k + 1));
        }
    }
}

double bernstein_cdf(int r, std::size_t n, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(static_cast<double>(r), static_cast<double>(n + 1) - r, x);
}

std::vector<ShuffleCell> cells_from_ranks(const RankMatrix& ranks) {
    std::vector<ShuffleCell> cells(ranks.n());
    for (std::size_t j = 0; j < ranks.n(); ++j) {
        cells[j].ranks.resize(ranks.d());
        for (std::size_t k = 0; k < ranks.d(); ++k) cells[j].ranks[k] = ranks(j, k);
    }
    return cells;
}

std::set<std::size_t> top_observations(const RankMatrix& ranks, std::size_t k, std::size_t m) {
    std::set<std::size_t> out;
    const auto threshold = static_cast<int>(ranks.n() - m);
    for (std::size_t j = 0; j < ranks.n(); ++j) {
        if (ranks(j, k) > threshold) out.insert(j);
    }
    return out;
}

// Component index containing u, for a left-closed ([F(i-1), F(i))) or
// right-closed ((F(i-1), F(i)]) partition of the unit interval.
ComponentIndex locate(const FamilyParams& p, double u, bool right_closed) {
    if (u <= 0.0) return 0;
    ComponentIndex i = u < 1.0 ? driver_quantile(p, u) : std::numeric_limits<ComponentIndex>::max() / 2;
    if (right_closed) {
        while (i > 0 && driver_cdf(p, i - 1) >= u) --i;
    }
    return i;
}

}  // namespace

std::string to_string(BaseKind kind) {
    switch (kind) {
        case BaseKind::ShuffleM: return "shuffle";
        case BaseKind::ShuffleMWorstCase: return "wc-shuffle";
        case BaseKind::Bernstein: return "bernstein";
        case BaseKind::Comonotone: return "comonotone";
        case BaseKind::Independence: return "independence";
    }
    return "unknown";
}

BaseCopula::BaseCopula(BaseKind kind, std::size_t dim, std::size_t grid, std::vector<ShuffleCell> cells)
    : kind_(kind), dim_(dim), grid_(grid), cells_(std::move(cells)) {
    if (dim_ < 1) throw std::invalid_argument("base copula: dimension must be positive");
    for (const auto& cell : cells_) {
        if (cell.ranks.size() != dim_) throw std::invalid_argument("base copula: cell dimension mismatch");
        if (cell.slope == Slope::Negative && kind_ != BaseKind::ShuffleMWorstCase) {
            throw std::invalid_argument("base copula: negative slopes only occur in the worst-case shuffle");
        }
    }
}

BaseCopula BaseCopula::comonotone(std::size_t d) { return BaseCopula(BaseKind::Comonotone, d, 0, {}); }
BaseCopula BaseCopula::independence(std::size_t d) { return BaseCopula(BaseKind::Independence, d, 0, {}); }

BaseCopula shuffle_of_m(const RankMatrix& ranks) {
    return BaseCopula(BaseKind::ShuffleM, ranks.d(), ranks.n(), cells_from_ranks(ranks));
}

BaseCopula worst_case_shuffle(const RankMatrix& ranks, std::optional<int> corner_size) {
    if (ranks.d() != 2) throw std::invalid_argument("worst_case_shuffle: only bivariate data is supported");
    const std::size_t n = ranks.n();
    std::size_t m = 0;
    if (corner_size) {
        if (*corner_size < 1 || static_cast<std::size_t>(*corner_size) > n) {
            throw std::invalid_argument("worst_case_shuffle: corner_size must lie in 1..n");
        }
        m = static_cast<std::size_t>(*corner_size);
        if (top_observations(ranks, 0, m) != top_observations(ranks, 1, m)) {
            throw std::invalid_argument("worst_case_shuffle: the top " + std::to_string(m) +
                                        " observations differ between the two coordinates");
        }
    } else {
        while (m < n && top_observations(ranks, 0, m + 1) == top_observations(ranks, 1, m + 1)) ++m;
        if (m == 0) {
            throw std::invalid_argument("worst_case_shuffle: the largest observation differs between coordinates");
        }
    }

    auto cells = cells_from_ranks(ranks);
    const int first_corner_rank = static_cast<int>(n - m) + 1;
    for (auto& cell : cells) {
        if (cell.ranks[0] >= first_corner_rank) {
            cell.ranks[1] = first_corner_rank + (static_cast<int>(n) - cell.ranks[0]);
            cell.slope = Slope::Negative;
        }
    }
    return BaseCopula(BaseKind::ShuffleMWorstCase, 2, n, std::move(cells));
}

BaseCopula bernstein(const RankMatrix& ranks) {
    return BaseCopula(BaseKind::Bernstein, ranks.d(), ranks.n(), cells_from_ranks(ranks));
}

void sample_base(const BaseCopula& base, Rng& rng, std::span<double> out) {
    const std::size_t d = base.dim();
    switch (base.kind()) {
        case BaseKind::Comonotone: {
            const double u = rng.uniform();
            std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d), u);
            return;
        }
        case BaseKind::Independence:
            for (std::size_t k = 0; k < d; ++k) out[k] = rng.uniform();
            return;
        case BaseKind::Bernstein: {
            const auto& cell = base.cells()[rng.index(base.cells().size())];
            const double n1 = static_cast<double>(base.grid_size()) + 1.0;
            for (std::size_t k = 0; k < d; ++k) out[k] = rng.beta(cell.ranks[k], n1 - cell.ranks[k]);
            return;
        }
        case BaseKind::ShuffleM:
        case BaseKind::ShuffleMWorstCase: {
            const std::size_t cell = rng.index(base.cells().size());
            shuffle_point(base, cell, rng.uniform(), out);
            return;
        }
    }
}

void shuffle_point(const BaseCopula& base, std::size_t cell, double v, std::span<double> out) {
    if (!base.is_shuffle()) throw std::invalid_argument("shuffle_point: base is not a shuffle of M");
    const auto& c = base.cells().at(cell);
    const double n = static_cast<double>(base.grid_size());
    for (std::size_t k = 0; k < base.dim(); ++k) {
        const auto m = segment_map(c, k);
        out[k] = (m.offset + m.sign * v) / n;
    }
}

double rectangle_mass(const BaseCopula& base, std::span<const double> lo, std::span<const double> hi) {
    check_box(base, lo, hi);
    const std::size_t d = base.dim();
    switch (base.kind()) {
        case BaseKind::Comonotone: {
            const double top = *std::min_element(hi.begin(), hi.end());
            const double bottom = *std::max_element(lo.begin(), lo.end());
            return std::max(0.0, top - bottom);
        }
        case BaseKind::Independence: {
            double mass = 1.0;
            for (std::size_t k = 0; k < d; ++k) mass *= hi[k] - lo[k];
            return mass;
        }
        case BaseKind::Bernstein: {
            const std::size_t n = base.grid_size();
            double total = 0.0;
            for (const auto& cell : base.cells()) {
                double term = 1.0;
                for (std::size_t k = 0; k < d && term > 0.0; ++k) {
                    term *= bernstein_cdf(cell.ranks[k], n, hi[k]) - bernstein_cdf(cell.ranks[k], n, lo[k]);
                }
                total += term;
            }
            return total / static_cast<double>(base.cells().size());
        }
        case BaseKind::ShuffleM:
        case BaseKind::ShuffleMWorstCase: {
            const double n = static_cast<double>(base.grid_size());
            double total = 0.0;
            for (const auto& cell : base.cells()) {
                double v0 = 0.0, v1 = 1.0;
                for (std::size_t k = 0; k < d && v0 < v1; ++k) {
                    const auto [a0, a1] = segment_preimage(segment_map(cell, k), n, lo[k], hi[k]);
                    v0 = std::max(v0, a0);
                    v1 = std::min(v1, a1);
                }
                total += clip_length(v0, v1);
            }
            return total / static_cast<double>(base.cells().size());
        }
    }
    return 0.0;
}

DriverSpec::DriverSpec(BaseCopula base, std::vector<FamilyParams> families)
    : base_(std::move(base)), families_(std::move(families)) {
    if (families_.size() != base_.dim()) {
        throw std::invalid_argument("driver spec: " + std::to_string(families_.size()) + " families for a " +
                                    std::to_string(base_.dim()) + "-dimensional base copula");
    }
}

void sample_driver(const DriverSpec& spec, Rng& rng, std::span<double> scratch, std::span<ComponentIndex> out) {
    sample_base(spec.base(), rng, scratch);
    for (std::size_t k = 0; k < spec.dim(); ++k) out[k] = driver_quantile(spec.families()[k], scratch[k]);
}

std::vector<ComponentIndex> sample_driver(const DriverSpec& spec, Rng& rng) {
    std::vector<double> scratch(spec.dim());
    std::vector<ComponentIndex> z(spec.dim());
    sample_driver(spec, rng, scratch, z);
    return z;
}

std::vector<ComponentIndex> driver_at(const DriverSpec& spec, std::span<const double> base_point) {
    if (base_point.size() != spec.dim()) throw std::invalid_argument("driver_at: point dimension mismatch");
    std::vector<ComponentIndex> z(spec.dim());
    for (std::size_t k = 0; k < spec.dim(); ++k) z[k] = driver_quantile(spec.families()[k], base_point[k]);
    return z;
}

double driver_pmf(const DriverSpec& spec, std::span<const ComponentIndex> i) {
    if (i.size() != spec.dim()) throw std::invalid_argument("driver_pmf: index dimension mismatch");
    std::vector<double> lo(spec.dim()), hi(spec.dim());
    for (std::size_t k = 0; k < spec.dim(); ++k) {
        if (i[k] < 0) throw std::domain_error("driver_pmf: component index must be >= 0");
        lo[k] = driver_cdf(spec.families()[k], i[k] - 1);
        hi[k] = driver_cdf(spec.families()[k], i[k]);
    }
    return rectangle_mass(spec.base(), lo, hi);
}

void for_each_support_point(const DriverSpec& spec, const IndexBox& box,
                            const std::function<void(std::span<const ComponentIndex>, double)>& fn) {
    const std::size_t d = spec.dim();
    const auto& fams = spec.families();
    const auto& base = spec.base();
    if (box.lo.size() != d || box.hi.size() != d) throw std::invalid_argument("support box dimension mismatch");
    for (std::size_t k = 0; k < d; ++k) {
        if (box.lo[k] < 0 || box.lo[k] > box.hi[k]) throw std::invalid_argument("support box is malformed");
    }
    std::vector<ComponentIndex> idx(d);

    if (base.kind() == BaseKind::Comonotone) {
        double w = 0.0, w_end = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            w = std::max(w, driver_cdf(fams[k], box.lo[k] - 1));
            w_end = std::min(w_end, driver_cdf(fams[k], box.hi[k]));
        }
        if (!(w < w_end)) return;
        for (std::size_t k = 0; k < d; ++k) {
            idx[k] = box.lo[k];
            while (idx[k] < box.hi[k] && driver_cdf(fams[k], idx[k]) <= w) ++idx[k];
        }
        for (;;) {
            double next = w_end;
            for (std::size_t k = 0; k < d; ++k) next = std::min(next, driver_cdf(fams[k], idx[k]));
            if (next > w) fn(idx, next - w);
            w = next;
            if (w >= w_end) return;
            for (std::size_t k = 0; k < d; ++k) {
                if (driver_cdf(fams[k], idx[k]) <= w) {
                    if (++idx[k] > box.hi[k]) return;
                }
            }
        }
    }

    if (!base.is_shuffle()) throw std::invalid_argument("for_each_support_point: base copula is not singular");

    const double n = static_cast<double>(base.grid_size());
    const double cell_weight = 1.0 / static_cast<double>(base.cells().size());
    std::vector<SegmentMap> maps(d);
    std::vector<double> breaks(d);

    auto next_break = [&](std::size_t k) {
        const auto& m = maps[k];
        return m.sign > 0 ? n * driver_cdf(fams[k], idx[k]) - m.offset
                          : m.offset - n * driver_cdf(fams[k], idx[k] - 1);
    };

    for (const auto& cell : base.cells()) {
        double v = 0.0, v_end = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            maps[k] = segment_map(cell, k);
            const auto [a0, a1] = segment_preimage(maps[k], n, driver_cdf(fams[k], box.lo[k] - 1),
                                                   driver_cdf(fams[k], box.hi[k]));
            v = std::max(v, a0);
            v_end = std::min(v_end, a1);
        }
        if (!(v < v_end)) continue;

        bool inside = true;
        for (std::size_t k = 0; k < d; ++k) {
            const double u = (maps[k].offset + maps[k].sign * v) / n;
            idx[k] = std::clamp(locate(fams[k], u, maps[k].sign < 0), box.lo[k], box.hi[k]);
            breaks[k] = next_break(k);
        }
        while (inside) {
            double next = v_end;
            for (std::size_t k = 0; k < d; ++k) next = std::min(next, breaks[k]);
            if (next > v) fn(idx, (next - v) * cell_weight);
            v = std::max(v, next);
            if (v >= v_end) break;
            for (std::size_t k = 0; k < d; ++k) {
                if (breaks[k] <= v) {
                    idx[k] += maps[k].sign > 0 ? 1 : -1;
                    if (idx[k] < box.lo[k] || idx[k] > box.hi[k]) {
                        inside = false;
                        break;
                    }
                    breaks[k] = next_break(k);
                }
            }
        }
    }
}

std::size_t product_form_weights(const DriverSpec& spec, std::size_t k, ComponentIndex lo, ComponentIndex hi,
                                 std::vector<std::vector<double>>& weights) {
    const auto& fam = spec.families().at(k);
    const auto& base = spec.base();
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    if (base.kind() == BaseKind::Independence) {
        weights.assign(1, std::vector<double>(len));
        for (std::size_t t = 0; t < len; ++t) weights[0][t] = marginal_alpha(fam, lo + static_cast<ComponentIndex>(t));
        return 1;
    }
    if (base.kind() != BaseKind::Bernstein) throw std::invalid_argument("product_form_weights: base is not a product mixture");

    const std::size_t n = base.grid_size();
    std::vector<double> edges(len + 1);
    for (std::size_t t = 0; t <= len; ++t) edges[t] = driver_cdf(fam, lo + static_cast<ComponentIndex>(t) - 1);
    weights.assign(base.cells().size(), std::vector<double>(len));
    for (std::size_t j = 0; j < base.cells().size(); ++j) {
        const int r = base.cells()[j].ranks[k];
        double prev = bernstein_cdf(r, n, edges[0]);
        for (std::size_t t = 0; t < len; ++t) {
            const double cur = bernstein_cdf(r, n, edges[t + 1]);
            weights[j][t] = cur - prev;
            prev = cur;
        }
    }
    return base.cells().size();
}

}  // namespace ipu
