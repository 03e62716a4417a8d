#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ipu/matrix.hpp"

namespace ipu {

/// Malformed or unreadable observation data. `row()` is the 1-based line
/// number in the source, or 0 when the problem is not tied to a line.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row = 0)
        : std::runtime_error(row ? "row " + std::to_string(row) + ": " + what : what), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// n observations of a d-variate loss vector (n >= 2, d >= 2, all finite).
class ObservationSet {
public:
    explicit ObservationSet(Matrix<double> values);

    [[nodiscard]] std::size_t n() const noexcept { return values_.rows(); }
    [[nodiscard]] std::size_t d() const noexcept { return values_.cols(); }
    [[nodiscard]] const Matrix<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double> column(std::size_t k) const { return values_.column(k); }

private:
    Matrix<double> values_;
};

/// Coordinate-wise ordinal ranks in {1..n}; every column is a permutation.
class RankMatrix {
public:
    explicit RankMatrix(Matrix<int> ranks);

    [[nodiscard]] std::size_t n() const noexcept { return ranks_.rows(); }
    [[nodiscard]] std::size_t d() const noexcept { return ranks_.cols(); }
    [[nodiscard]] int operator()(std::size_t row, std::size_t k) const { return ranks_(row, k); }
    [[nodiscard]] const Matrix<int>& ranks() const noexcept { return ranks_; }

private:
    Matrix<int> ranks_;
};

enum class RankConvention { RankOverN, RankOverNPlus1 };

struct PseudoObservations {
    Matrix<double> values;
    RankConvention convention = RankConvention::RankOverN;
};

/// Parses comma-separated rows. Blank lines are skipped.
ObservationSet parse_observations(std::istream& in, bool has_header);
ObservationSet load_observations(const std::filesystem::path& path, bool has_header);

/// True when the first non-blank line of the file does not parse as numbers.
bool sniff_header(const std::filesystem::path& path);

inline constexpr std::string_view kFixturePrefix = "fixture:";
inline constexpr std::string_view kCottinPfeiferFixture = "cottin-pfeifer-4.2";

/// The 20-point bivariate loss sample of Cottin and Pfeifer (2014), Example 4.2.
const ObservationSet& cottin_pfeifer_fixture();

/// Resolves "fixture:<name>" (or a bare fixture name) to an embedded dataset,
/// anything else to a CSV path with header auto-detection.
ObservationSet resolve_dataset(std::string_view spec);

/// Rank of a value is 1 + #strictly smaller values; ties are ordered by row.
RankMatrix compute_ranks(const ObservationSet& obs);

PseudoObservations pseudo_observations(const RankMatrix& ranks,
                                       RankConvention convention = RankConvention::RankOverN);

}  // namespace ipu
