#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipu/drivers.hpp"
#include "ipu/engine.hpp"
#include "ipu/families.hpp"
#include "ipu/risk.hpp"

namespace ipu::cli {

/// Invalid configuration value; `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Everything a run needs. JSON config files use the same flat keys as
/// to_json() emits (plus "out" and "threads"); command-line flags override
/// file values.
struct RunConfig {
    std::string dataset = "fixture:cottin-pfeifer-4.2";
    /// nullopt runs the base copula directly, without the IPU layer.
    std::optional<FamilyKind> family = FamilyKind::NegativeBinomial;
    std::vector<double> a{5.0};
    BaseKind base = BaseKind::ShuffleM;
    std::optional<int> corner_size;
    std::size_t count = 100'000;
    std::uint64_t seed = 20171023;
    double alpha = 0.05;
    double t = 0.99;
    std::size_t resolution = 100;
    std::string out;
    FitMethod fit_method = FitMethod::ProbabilityPlot;
    std::vector<MarginalKind> marginals;
    unsigned threads = 0;  ///< not part of the echoed config: results never depend on it
};

/// Canonical form embedded in artifacts. Leaves out `out` and `threads`,
/// which do not affect results.
nlohmann::json to_json(const RunConfig& cfg);

/// Applies the keys present in `j` on top of `cfg`. Unknown keys are errors.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::optional<FamilyKind> parse_family(const std::string& s);
BaseKind parse_base(const std::string& s);
FitMethod parse_fit_method(const std::string& s);
MarginalKind parse_marginal(const std::string& s);
std::string family_name(const std::optional<FamilyKind>& family);

/// Field-level checks shared by every command.
void validate(const RunConfig& cfg);

/// Driver dimension: the dataset's for data-driven bases, otherwise the
/// number of a values (at least 2).
std::size_t model_dimension(const RunConfig& cfg, const ObservationSet* obs);

BaseCopula build_base(const RunConfig& cfg, const ObservationSet* obs);
IpuModel build_model(const RunConfig& cfg, const ObservationSet* obs);

/// Fitted marginal per column of the dataset.
std::vector<MarginalModel> fit_marginals(const RunConfig& cfg, const ObservationSet& obs);

bool is_data_driven(BaseKind kind);

}  // namespace ipu::cli
