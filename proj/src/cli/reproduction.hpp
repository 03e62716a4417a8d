#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace ipu::cli {

/// One column of the published VaR_0.05 comparison for the Cottin-Pfeifer data.
struct ReferenceConfiguration {
    std::string label;
    BaseKind base;
    std::optional<FamilyKind> family;  ///< nullopt: the Bernstein copula itself
    int a = 0;
    std::optional<int> corner_size;
    double reference_var;
};

/// Bernstein; NB 5/10/15 and Poisson 6/10/15, each with its worst-case twin.
/// Worst-case twins flip the single top-right cell (corner_size = 1).
const std::vector<ReferenceConfiguration>& reference_configurations();

inline constexpr double kReferenceVarX = 6.8190;
inline constexpr double kReferenceVarY = 2.0984;
inline constexpr double kReferenceComparator = 8.9174;
inline constexpr std::size_t kReferenceCount = 5'000'000;

struct ReproductionRow {
    ReferenceConfiguration config;
    VarReport report;
};

/// Run config for one reference column on top of `common` (dataset, seed,
/// count, alpha, fit method).
RunConfig configuration_for(const ReferenceConfiguration& ref, const RunConfig& common);

/// VaR report for one reference column; `sums_out` optional.
VarReport run_reference(const ReferenceConfiguration& ref, const RunConfig& common,
                        const std::vector<MarginalModel>& marginals, std::vector<double>* sums_out = nullptr);

/// Full reproduction: fits marginals on the dataset, runs every reference
/// column, writes fits.json, comparison.csv (flushed after each column),
/// comparison.json and quantiles/<label>.csv under `out_dir`.
std::vector<ReproductionRow> reproduce_reference_table(const RunConfig& common, const std::filesystem::path& out_dir,
                                                       std::ostream& progress);

/// Probabilities at which quantile functions are tabulated.
std::vector<double> quantile_grid();

}  // namespace ipu::cli
