#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipu/data_model.hpp"
#include "ipu/families.hpp"
#include "ipu/random.hpp"

namespace ipu {

enum class BaseKind { ShuffleM, ShuffleMWorstCase, Bernstein, Comonotone, Independence };

std::string to_string(BaseKind kind);

enum class Slope { Positive, Negative };

/// One grid cell of a shuffle of M. `ranks[k]` selects the cell's slot in
/// coordinate k; the segment inside the cell is increasing in every
/// coordinate (Positive) or, for coordinates k >= 2, decreasing (Negative).
struct ShuffleCell {
    std::vector<int> ranks;
    Slope slope = Slope::Positive;
};

/// A sampleable copula on (0,1)^d with an exact rectangle-mass oracle.
class BaseCopula {
public:
    static BaseCopula comonotone(std::size_t d);
    static BaseCopula independence(std::size_t d);

    [[nodiscard]] BaseKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    /// Grid size of data-driven kinds; 0 for comonotone/independence.
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<ShuffleCell>& cells() const noexcept { return cells_; }
    [[nodiscard]] bool is_shuffle() const noexcept {
        return kind_ == BaseKind::ShuffleM || kind_ == BaseKind::ShuffleMWorstCase;
    }

private:
    BaseCopula(BaseKind kind, std::size_t dim, std::size_t grid, std::vector<ShuffleCell> cells);

    friend BaseCopula shuffle_of_m(const RankMatrix&);
    friend BaseCopula worst_case_shuffle(const RankMatrix&, std::optional<int>);
    friend BaseCopula bernstein(const RankMatrix&);

    BaseKind kind_;
    std::size_t dim_;
    std::size_t grid_;
    // Shuffle kinds: one cell per observation. Bernstein: the rank vectors
    // (slope unused), one beta mixture component per observation.
    std::vector<ShuffleCell> cells_;
};

/// Shuffle of M with local upper Frechet bounds: one increasing segment per
/// observation, placed in the cell given by its rank vector.
BaseCopula shuffle_of_m(const RankMatrix& ranks);

/// Bivariate shuffle whose top-right corner of m x m cells carries a local
/// lower Frechet bound: the m observations ranked highest in both
/// coordinates are re-paired countermonotonically and their segments get a
/// negative slope. Without `corner_size`, m is the largest value for which
/// the top-m observations coincide in both coordinates.
BaseCopula worst_case_shuffle(const RankMatrix& ranks, std::optional<int> corner_size = std::nullopt);

/// Bernstein copula with grid size n: pick an observation uniformly, then
/// draw coordinate k from Beta(r_k, n + 1 - r_k).
BaseCopula bernstein(const RankMatrix& ranks);

/// Writes one draw from the base copula into `out` (size dim()).
void sample_base(const BaseCopula& base, Rng& rng, std::span<double> out);

/// Point on the segment of shuffle cell `cell` at parameter v in (0,1).
void shuffle_point(const BaseCopula& base, std::size_t cell, double v, std::span<double> out);

/// Base measure of the box prod_k [lo_k, hi_k).
double rectangle_mass(const BaseCopula& base, std::span<const double> lo, std::span<const double> hi);

/// Base copula plus one partition family per coordinate.
class DriverSpec {
public:
    DriverSpec(BaseCopula base, std::vector<FamilyParams> families);

    [[nodiscard]] const BaseCopula& base() const noexcept { return base_; }
    [[nodiscard]] const std::vector<FamilyParams>& families() const noexcept { return families_; }
    [[nodiscard]] std::size_t dim() const noexcept { return families_.size(); }

private:
    BaseCopula base_;
    std::vector<FamilyParams> families_;
};

/// Z_k = driver_quantile(families[k], U_k) with U drawn from the base.
/// `scratch` must hold dim() doubles.
void sample_driver(const DriverSpec& spec, Rng& rng, std::span<double> scratch, std::span<ComponentIndex> out);
std::vector<ComponentIndex> sample_driver(const DriverSpec& spec, Rng& rng);

/// Driver value for a given base point: driver_quantile per coordinate.
std::vector<ComponentIndex> driver_at(const DriverSpec& spec, std::span<const double> base_point);

/// P(Z = i) as the base mass of the box prod_k [cdf_k(i_k - 1), cdf_k(i_k)).
double driver_pmf(const DriverSpec& spec, std::span<const ComponentIndex> i);

/// Inclusive index range per coordinate.
struct IndexBox {
    std::vector<ComponentIndex> lo;
    std::vector<ComponentIndex> hi;
};

/// Calls fn(i, p_i) for every i in the box with P(Z = i) > 0, for the
/// singular bases (shuffle kinds and comonotone). Cost is linear in the box
/// side lengths per cell rather than in the box volume.
void for_each_support_point(const DriverSpec& spec, const IndexBox& box,
                            const std::function<void(std::span<const ComponentIndex>, double)>& fn);

/// For product-form bases the driver law is a mixture of independent
/// coordinates: P(Z = i) = (1/m) sum_j prod_k w_jk(i_k). Fills
/// weights[j][i - lo] for coordinate k over [lo, hi]; returns m.
std::size_t product_form_weights(const DriverSpec& spec, std::size_t k, ComponentIndex lo, ComponentIndex hi,
                                 std::vector<std::vector<double>>& weights);

}  // namespace ipu
