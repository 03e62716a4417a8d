#include "ipu/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

namespace ipu {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

ObservationSet::ObservationSet(Matrix<double> values) : values_(std::move(values)) {
    if (values_.cols() < 2) throw DataError("d < 2: at least two columns are required");
    if (values_.rows() < 2) throw DataError("n < 2: at least two observations are required");
    for (std::size_t r = 0; r < values_.rows(); ++r) {
        for (double v : values_.row(r)) {
            if (!std::isfinite(v)) throw DataError("non-finite value", r + 1);
        }
    }
}

RankMatrix::RankMatrix(Matrix<int> ranks) : ranks_(std::move(ranks)) {
    const std::size_t n = ranks_.rows();
    for (std::size_t k = 0; k < ranks_.cols(); ++k) {
        std::vector<bool> seen(n + 1, false);
        for (std::size_t r = 0; r < n; ++r) {
            const int v = ranks_(r, k);
            if (v < 1 || static_cast<std::size_t>(v) > n || seen[static_cast<std::size_t>(v)]) {
                throw DataError("rank column " + std::to_string(k + 1) + " is not a permutation of 1..n");
            }
            seen[static_cast<std::size_t>(v)] = true;
        }
    }
}

ObservationSet parse_observations(std::istream& in, bool has_header) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t d = 0;
    std::vector<double> flat;
    bool header_pending = has_header;

    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto cells = split(line);
        if (d == 0) {
            d = cells.size();
            if (d < 2) throw DataError("d < 2: at least two columns are required", line_no);
        } else if (cells.size() != d) {
            throw DataError("ragged row: expected " + std::to_string(d) + " columns, found " +
                                std::to_string(cells.size()),
                            line_no);
        }
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const auto v = parse_double(cells[k]);
            if (!v) throw DataError("non-numeric cell in column " + std::to_string(k + 1), line_no);
            if (!std::isfinite(*v)) throw DataError("non-finite value in column " + std::to_string(k + 1), line_no);
            flat.push_back(*v);
        }
    }
    if (in.bad()) throw DataError("I/O failure while reading observations");
    if (d == 0) throw DataError("n < 2: no observations found");
    const std::size_t n = flat.size() / d;
    if (n < 2) throw DataError("n < 2: at least two observations are required");

    Matrix<double> values(n, d);
    std::copy(flat.begin(), flat.end(), values.data().begin());
    return ObservationSet(std::move(values));
}

ObservationSet load_observations(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return parse_observations(in, has_header);
}

bool sniff_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank(line)) continue;
        const auto cells = split(line);
        return std::any_of(cells.begin(), cells.end(), [](std::string_view c) { return !parse_double(c); });
    }
    return false;
}

const ObservationSet& cottin_pfeifer_fixture() {
    static const ObservationSet fixture = [] {
        constexpr double data[20][2] = {
            {0.468, 0.966}, {9.951, 2.679}, {0.866, 0.897}, {6.731, 2.249}, {1.421, 0.956},
            {2.040, 1.141}, {2.967, 1.707}, {1.200, 1.008}, {0.426, 1.065}, {1.946, 1.162},
            {0.676, 0.918}, {1.184, 1.336}, {0.960, 0.933}, {1.972, 1.077}, {1.549, 1.041},
            {0.819, 0.899}, {0.063, 0.710}, {1.280, 1.118}, {0.824, 0.894}, {0.227, 0.837},
        };
        Matrix<double> m(20, 2);
        for (std::size_t r = 0; r < 20; ++r) {
            m(r, 0) = data[r][0];
            m(r, 1) = data[r][1];
        }
        return ObservationSet(std::move(m));
    }();
    return fixture;
}

ObservationSet resolve_dataset(std::string_view spec) {
    std::string_view name = spec;
    const bool prefixed = name.starts_with(kFixturePrefix);
    if (prefixed) name.remove_prefix(kFixturePrefix.size());
    if (name == kCottinPfeiferFixture) return cottin_pfeifer_fixture();
    if (prefixed) throw DataError("unknown fixture '" + std::string(name) + "'");
    const std::filesystem::path path{std::string(spec)};
    return load_observations(path, sniff_header(path));
}

RankMatrix compute_ranks(const ObservationSet& obs) {
    const std::size_t n = obs.n();
    Matrix<int> ranks(n, obs.d());
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < obs.d(); ++k) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return obs.values()(a, k) < obs.values()(b, k);
        });
        for (std::size_t pos = 0; pos < n; ++pos) ranks(order[pos], k) = static_cast<int>(pos + 1);
    }
    return RankMatrix(std::move(ranks));
}

PseudoObservations pseudo_observations(const RankMatrix& ranks, RankConvention convention) {
    const double denom = static_cast<double>(ranks.n()) + (convention == RankConvention::RankOverNPlus1 ? 1.0 : 0.0);
    PseudoObservations out{Matrix<double>(ranks.n(), ranks.d()), convention};
    for (std::size_t r = 0; r < ranks.n(); ++r) {
        for (std::size_t k = 0; k < ranks.d(); ++k) out.values(r, k) = ranks(r, k) / denom;
    }
    return out;
}

}  // namespace ipu
