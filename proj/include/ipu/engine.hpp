#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "ipu/drivers.hpp"
#include "ipu/matrix.hpp"

namespace ipu {

/// Infinite partition-of-unity copula: a driver Z selects one component per
/// coordinate, and coordinate k is drawn from the component density
/// f_{k, Z_k}. The copula density is c(u) = sum_i P(Z = i) prod_k f_{k,i_k}(u_k).
class IpuModel {
public:
    explicit IpuModel(DriverSpec spec) : spec_(std::move(spec)) {}

    [[nodiscard]] const DriverSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::size_t dim() const noexcept { return spec_.dim(); }

private:
    DriverSpec spec_;
};

struct TruncationPolicy {
    double tail_eps = 1e-10;
    std::int64_t max_index = 10'000;
};

/// Truncated density value. `error_bound` bounds the neglected part of the
/// series, so the true density lies in [value, value + error_bound].
/// `capped` is set when max_index stopped the enumeration before the
/// neglected weight fell below tail_eps.
struct DensityValue {
    double value = 0.0;
    double error_bound = 0.0;
    bool capped = false;
};

/// Draws rows of an IPU copula; owns the per-row working buffers.
class CopulaSampler {
public:
    explicit CopulaSampler(const IpuModel& model)
        : model_(&model), base_point_(model.dim()), driver_(model.dim()) {}

    /// Writes one draw into `out` (size dim()).
    void draw(Rng& rng, std::span<double> out);

private:
    const IpuModel* model_;
    std::vector<double> base_point_;
    std::vector<ComponentIndex> driver_;
};

std::vector<double> sample_copula_row(const IpuModel& model, Rng& rng);

/// count x d draws. Rows are generated in fixed blocks with per-block
/// streams derived from `seed`, so the output depends on seed and count
/// only, never on `threads` (0 = hardware concurrency).
Matrix<double> sample_copula(const IpuModel& model, std::size_t count, std::uint64_t seed, unsigned threads = 0);

DensityValue density(const IpuModel& model, std::span<const double> u, const TruncationPolicy& policy = {});

struct GridPoint {
    double u = 0.0;
    double v = 0.0;
    double value = 0.0;
};

/// Bivariate density at the midpoints ((j - 0.5)/res, (l - 0.5)/res),
/// j, l = 1..res, u-major order.
std::vector<GridPoint> density_grid(const IpuModel& model, std::size_t resolution, const TruncationPolicy& policy = {});

void write_samples_csv(std::ostream& out, const Matrix<double>& samples);
void write_density_grid_csv(std::ostream& out, std::span<const GridPoint> grid);

}  // namespace ipu
