#include "cli/config.hpp"

#include <cmath>
#include <cstdio>

namespace ipu::cli {

using nlohmann::json;

std::optional<FamilyKind> parse_family(const std::string& s) {
    if (s == "nb" || s == "negative-binomial") return FamilyKind::NegativeBinomial;
    if (s == "poisson") return FamilyKind::Poisson;
    if (s == "none") return std::nullopt;
    throw ConfigError("family", "family must be one of nb, poisson, none (got '" + s + "')");
}

std::string family_name(const std::optional<FamilyKind>& family) {
    if (!family) return "none";
    return *family == FamilyKind::NegativeBinomial ? "nb" : "poisson";
}

BaseKind parse_base(const std::string& s) {
    for (auto k : {BaseKind::ShuffleM, BaseKind::ShuffleMWorstCase, BaseKind::Bernstein, BaseKind::Comonotone,
                   BaseKind::Independence}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("base", "base must be one of shuffle, wc-shuffle, bernstein, comonotone, independence (got '" +
                                  s + "')");
}

FitMethod parse_fit_method(const std::string& s) {
    if (s == "mle") return FitMethod::MaximumLikelihood;
    if (s == "probability-plot") return FitMethod::ProbabilityPlot;
    throw ConfigError("fit_method", "fit_method must be mle or probability-plot (got '" + s + "')");
}

MarginalKind parse_marginal(const std::string& s) {
    if (s == "lognormal") return MarginalKind::Lognormal;
    if (s == "frechet") return MarginalKind::Frechet;
    throw ConfigError("marginals", "marginal must be lognormal or frechet (got '" + s + "')");
}

json to_json(const RunConfig& cfg) {
    json j;
    j["dataset"] = cfg.dataset;
    j["family"] = family_name(cfg.family);
    j["a"] = cfg.a;
    j["base"] = to_string(cfg.base);
    j["corner_size"] = cfg.corner_size ? json(*cfg.corner_size) : json(nullptr);
    j["count"] = cfg.count;
    j["seed"] = cfg.seed;
    j["alpha"] = cfg.alpha;
    j["t"] = cfg.t;
    j["resolution"] = cfg.resolution;
    j["fit_method"] = to_string(cfg.fit_method);
    json marginals = json::array();
    for (auto m : cfg.marginals) marginals.push_back(to_string(m));
    j["marginals"] = marginals;
    return j;
}

namespace {

template <typename T>
T get_field(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(key, "config field '" + key + "' has the wrong type");
    }
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw ConfigError("config", "config file must contain a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "dataset") {
            cfg.dataset = get_field<std::string>(value, key);
        } else if (key == "family") {
            cfg.family = parse_family(get_field<std::string>(value, key));
        } else if (key == "a") {
            cfg.a = value.is_array() ? get_field<std::vector<double>>(value, key)
                                     : std::vector<double>{get_field<double>(value, key)};
        } else if (key == "base") {
            cfg.base = parse_base(get_field<std::string>(value, key));
        } else if (key == "corner_size") {
            cfg.corner_size = value.is_null() ? std::nullopt : std::optional<int>(get_field<int>(value, key));
        } else if (key == "count") {
            const auto c = get_field<double>(value, key);
            if (!(c >= 1.0) || c != std::floor(c)) throw ConfigError(key, "count must be a positive integer");
            cfg.count = static_cast<std::size_t>(c);
        } else if (key == "seed") {
            cfg.seed = get_field<std::uint64_t>(value, key);
        } else if (key == "alpha") {
            cfg.alpha = get_field<double>(value, key);
        } else if (key == "t") {
            cfg.t = get_field<double>(value, key);
        } else if (key == "resolution") {
            cfg.resolution = get_field<std::size_t>(value, key);
        } else if (key == "out") {
            cfg.out = get_field<std::string>(value, key);
        } else if (key == "fit_method") {
            cfg.fit_method = parse_fit_method(get_field<std::string>(value, key));
        } else if (key == "marginals") {
            cfg.marginals.clear();
            for (const auto& m : get_field<std::vector<std::string>>(value, key)) cfg.marginals.push_back(parse_marginal(m));
        } else if (key == "threads") {
            cfg.threads = get_field<unsigned>(value, key);
        } else {
            throw ConfigError(key, "unknown config field '" + key + "'");
        }
    }
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const RunConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0,1)");
    if (!(cfg.t > 0.0 && cfg.t < 1.0)) throw ConfigError("t", "t must lie in (0,1)");
    if (cfg.count < 1) throw ConfigError("count", "count must be at least 1");
    if (cfg.resolution < 2) throw ConfigError("resolution", "resolution must be at least 2");
    if (cfg.corner_size && *cfg.corner_size < 1) throw ConfigError("corner_size", "corner_size must be positive");
    if (cfg.corner_size && cfg.base != BaseKind::ShuffleMWorstCase) {
        throw ConfigError("corner_size", "corner_size only applies to the wc-shuffle base");
    }
    if (cfg.a.empty()) throw ConfigError("a", "at least one family parameter a is required");
    for (double a : cfg.a) {
        if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("a", "family parameter a must be positive");
        if (cfg.family == FamilyKind::NegativeBinomial && a != std::floor(a)) {
            throw ConfigError("a", "negative binomial family needs an integer a");
        }
    }
}

bool is_data_driven(BaseKind kind) {
    return kind == BaseKind::ShuffleM || kind == BaseKind::ShuffleMWorstCase || kind == BaseKind::Bernstein;
}

std::size_t model_dimension(const RunConfig& cfg, const ObservationSet* obs) {
    if (is_data_driven(cfg.base)) {
        if (!obs) throw ConfigError("dataset", "data-driven base copula needs a dataset");
        return obs->d();
    }
    return std::max<std::size_t>(2, cfg.a.size());
}

BaseCopula build_base(const RunConfig& cfg, const ObservationSet* obs) {
    const std::size_t d = model_dimension(cfg, obs);
    switch (cfg.base) {
        case BaseKind::Comonotone: return BaseCopula::comonotone(d);
        case BaseKind::Independence: return BaseCopula::independence(d);
        case BaseKind::ShuffleM: return shuffle_of_m(compute_ranks(*obs));
        case BaseKind::Bernstein: return bernstein(compute_ranks(*obs));
        case BaseKind::ShuffleMWorstCase:
            try {
                return worst_case_shuffle(compute_ranks(*obs), cfg.corner_size);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("corner_size", e.what());
            }
    }
    throw ConfigError("base", "unsupported base copula");
}

IpuModel build_model(const RunConfig& cfg, const ObservationSet* obs) {
    if (!cfg.family) throw ConfigError("family", "this command needs an IPU family (nb or poisson)");
    auto base = build_base(cfg, obs);
    const std::size_t d = base.dim();
    if (cfg.a.size() != 1 && cfg.a.size() != d) {
        throw ConfigError("a", "give one a, or one per coordinate (" + std::to_string(d) + ")");
    }
    std::vector<FamilyParams> families;
    for (std::size_t k = 0; k < d; ++k) {
        families.push_back(FamilyParams::make(*cfg.family, cfg.a.size() == 1 ? cfg.a[0] : cfg.a[k]));
    }
    return IpuModel(DriverSpec(std::move(base), std::move(families)));
}

std::vector<MarginalModel> fit_marginals(const RunConfig& cfg, const ObservationSet& obs) {
    std::vector<MarginalKind> kinds = cfg.marginals;
    if (kinds.empty()) {
        kinds.assign(obs.d(), MarginalKind::Lognormal);
        if (obs.d() == 2) kinds[1] = MarginalKind::Frechet;
    }
    if (kinds.size() != obs.d()) {
        throw ConfigError("marginals", "need one marginal kind per dataset column (" + std::to_string(obs.d()) + ")");
    }
    std::vector<MarginalModel> fitted;
    for (std::size_t k = 0; k < obs.d(); ++k) {
        const auto column = obs.column(k);
        try {
            fitted.push_back(kinds[k] == MarginalKind::Lognormal ? fit_lognormal(column, cfg.fit_method)
                                                                 : fit_frechet(column, cfg.fit_method));
        } catch (const std::logic_error& e) {
            throw ConfigError("dataset", "column " + std::to_string(k + 1) + ": " + e.what());
        }
    }
    return fitted;
}

}  // namespace ipu::cli
