#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cli/artifacts.hpp"
#include "cli/config.hpp"
#include "cli/reproduction.hpp"
#include "ipu/tails.hpp"

namespace ipu::cli {

using nlohmann::json;

ArtifactStamp make_stamp(const RunConfig& cfg) {
    return {cfg.seed, cfg.count, config_hash(cfg), to_json(cfg)};
}

std::string stamp_comment(const ArtifactStamp& stamp) {
    return "# ipucop seed=" + std::to_string(stamp.seed) + " count=" + std::to_string(stamp.count) +
           " config_hash=" + stamp.config_hash + "\n";
}

json stamp_json(const ArtifactStamp& stamp) {
    json j;
    j["seed"] = stamp.seed;
    j["count"] = stamp.count;
    j["config_hash"] = stamp.config_hash;
    j["config"] = stamp.config;
    return j;
}

json marginals_json(const std::vector<MarginalModel>& marginals, double alpha) {
    json arr = json::array();
    for (std::size_t k = 0; k < marginals.size(); ++k) {
        const auto& m = marginals[k];
        json j;
        j["column"] = k + 1;
        j["kind"] = to_string(m.kind());
        if (m.kind() == MarginalKind::Lognormal) {
            j["mu"] = m.first();
            j["sigma"] = m.second();
        } else {
            j["shape"] = m.first();
            j["scale"] = m.second();
        }
        j["var"] = quantile_marginal(m, 1.0 - alpha);
        arr.push_back(j);
    }
    return arr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
}

namespace {

struct Flags {
    std::string config, dataset, family, base, out, fit_method;
    std::vector<double> a;
    std::vector<std::string> marginals;
    int corner_size = 0;
    std::size_t count = 0, resolution = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0, t = 0.0;
    unsigned threads = 0;
};

using OptionMap = std::map<std::string, CLI::Option*>;

OptionMap add_flags(CLI::App* sub, Flags& f) {
    OptionMap o;
    o["config"] = sub->add_option("--config", f.config, "JSON config file (flat keys)");
    o["dataset"] = sub->add_option("--dataset", f.dataset, "CSV path or fixture:cottin-pfeifer-4.2");
    o["family"] = sub->add_option("--family", f.family, "nb | poisson | none");
    o["a"] = sub->add_option("--a", f.a, "family parameter, repeatable per coordinate");
    o["base"] = sub->add_option("--base", f.base, "shuffle | wc-shuffle | bernstein | comonotone | independence");
    o["corner_size"] = sub->add_option("--corner-size", f.corner_size, "worst-case corner size m");
    o["count"] = sub->add_option("--count", f.count, "number of Monte Carlo rows");
    o["seed"] = sub->add_option("--seed", f.seed, "master random seed");
    o["alpha"] = sub->add_option("--alpha", f.alpha, "risk level");
    o["t"] = sub->add_option("--t", f.t, "tail threshold");
    o["resolution"] = sub->add_option("--resolution", f.resolution, "density grid resolution");
    o["out"] = sub->add_option("--out", f.out, "output directory");
    o["fit_method"] = sub->add_option("--fit-method", f.fit_method, "probability-plot | mle");
    o["marginals"] = sub->add_option("--marginal", f.marginals, "lognormal | frechet, one per column");
    o["threads"] = sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    for (auto& [name, opt] : o) {
        if (name != "a" && name != "marginals") opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    return o;
}

RunConfig command_defaults(const std::string& command) {
    RunConfig cfg;
    if (command == "simulate") {
        cfg.count = 10'000;
    } else if (command == "density" || command == "taildep") {
        cfg.base = BaseKind::Comonotone;
        cfg.count = 1'000'000;
    } else if (command == "var") {
        cfg.count = 1'000'000;
    } else if (command == "reproduce-paper") {
        cfg.count = kReferenceCount;
        cfg.out = "reproduction";
    }
    return cfg;
}

RunConfig resolve_config(const std::string& command, const Flags& f, const OptionMap& o) {
    RunConfig cfg = command_defaults(command);
    auto given = [&](const char* name) { return o.at(name)->count() > 0; };
    if (given("config")) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("config", "cannot open config file '" + f.config + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config", std::string("config file is not valid JSON: ") + e.what());
        }
        apply_json(cfg, j);
    }
    if (given("dataset")) cfg.dataset = f.dataset;
    if (given("family")) cfg.family = parse_family(f.family);
    if (given("a")) cfg.a = f.a;
    if (given("base")) cfg.base = parse_base(f.base);
    if (given("corner_size")) cfg.corner_size = f.corner_size;
    if (given("count")) cfg.count = f.count;
    if (given("seed")) cfg.seed = f.seed;
    if (given("alpha")) cfg.alpha = f.alpha;
    if (given("t")) cfg.t = f.t;
    if (given("resolution")) cfg.resolution = f.resolution;
    if (given("out")) cfg.out = f.out;
    if (given("fit_method")) cfg.fit_method = parse_fit_method(f.fit_method);
    if (given("marginals")) {
        cfg.marginals.clear();
        for (const auto& m : f.marginals) cfg.marginals.push_back(parse_marginal(m));
    }
    if (given("threads")) cfg.threads = f.threads;
    validate(cfg);
    return cfg;
}

// Writes to <out>/<name> when an output directory is set, else to `out`.
void emit(const RunConfig& cfg, const std::string& name, const std::string& text, std::ostream& out) {
    if (cfg.out.empty()) {
        out << text;
    } else {
        write_text(std::filesystem::path(cfg.out) / name, text);
    }
}

void run_ranks(const RunConfig& cfg, std::ostream& out) {
    const auto obs = resolve_dataset(cfg.dataset);
    const auto ranks = compute_ranks(obs);
    std::ostringstream csv;
    csv << stamp_comment(make_stamp(cfg)) << "row";
    for (std::size_t k = 0; k < ranks.d(); ++k) csv << ",r" << (k + 1);
    csv << '\n';
    for (std::size_t r = 0; r < ranks.n(); ++r) {
        csv << (r + 1);
        for (std::size_t k = 0; k < ranks.d(); ++k) csv << ',' << ranks(r, k);
        csv << '\n';
    }
    emit(cfg, "ranks.csv", csv.str(), out);
}

std::optional<ObservationSet> dataset_if_needed(const RunConfig& cfg) {
    if (is_data_driven(cfg.base)) return resolve_dataset(cfg.dataset);
    return std::nullopt;
}

void run_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto obs = dataset_if_needed(cfg);
    const ObservationSet* data = obs ? &*obs : nullptr;
    Matrix<double> samples;
    if (cfg.family) {
        samples = sample_copula(build_model(cfg, data), cfg.count, cfg.seed, cfg.threads);
    } else {
        const auto base = build_base(cfg, data);
        samples = Matrix<double>(cfg.count, base.dim());
        for_each_block(cfg.count, cfg.seed, cfg.threads, [&](std::size_t begin, std::size_t end, Rng& rng) {
            for (std::size_t r = begin; r < end; ++r) sample_base(base, rng, samples.row(r));
        });
    }
    std::ostringstream csv;
    csv << stamp_comment(make_stamp(cfg));
    write_samples_csv(csv, samples);
    emit(cfg, "samples.csv", csv.str(), out);
}

void run_density(const RunConfig& cfg, std::ostream& out) {
    const auto obs = dataset_if_needed(cfg);
    const auto model = build_model(cfg, obs ? &*obs : nullptr);
    if (model.dim() != 2) throw ConfigError("a", "density grids are bivariate; the model has dimension " +
                                                     std::to_string(model.dim()));
    std::ostringstream csv;
    csv << stamp_comment(make_stamp(cfg));
    write_density_grid_csv(csv, density_grid(model, cfg.resolution));
    emit(cfg, "density.csv", csv.str(), out);
}

void run_taildep(const RunConfig& cfg, std::ostream& out) {
    const auto obs = dataset_if_needed(cfg);
    const auto model = build_model(cfg, obs ? &*obs : nullptr);
    json j = stamp_json(make_stamp(cfg));
    const bool symmetric = std::all_of(cfg.a.begin(), cfg.a.end(), [&](double a) { return a == cfg.a[0]; });
    if (*cfg.family == FamilyKind::NegativeBinomial && symmetric) {
        j["exact"] = lambda_u_nb_exact(static_cast<int>(cfg.a[0]));
        j["asymptotic"] = lambda_u_nb_asymptotic(cfg.a[0]);
    } else if (*cfg.family == FamilyKind::Poisson && symmetric) {
        j["exact"] = 0.0;
        j["asymptotic"] = 0.0;
    } else {
        j["exact"] = nullptr;
        j["asymptotic"] = nullptr;
    }
    const auto samples = sample_copula(model, cfg.count, cfg.seed, cfg.threads);
    const auto est = empirical_lambda_u(samples, cfg.t);
    j["empirical"] = {{"t", est.threshold}, {"estimate", est.estimate}, {"sample_count", est.sample_count}};
    emit(cfg, "taildep.json", j.dump(2) + "\n", out);
}

void run_fit(const RunConfig& cfg, std::ostream& out) {
    const auto obs = resolve_dataset(cfg.dataset);
    const auto marginals = fit_marginals(cfg, obs);
    json j = stamp_json(make_stamp(cfg));
    j["method"] = to_string(cfg.fit_method);
    j["alpha"] = cfg.alpha;
    j["marginals"] = marginals_json(marginals, cfg.alpha);
    double comparator = 0.0;
    for (const auto& m : marginals) comparator += quantile_marginal(m, 1.0 - cfg.alpha);
    j["comparator"] = comparator;
    emit(cfg, "fit.json", j.dump(2) + "\n", out);
}

void run_var(RunConfig cfg, std::ostream& out) {
    const auto obs = resolve_dataset(cfg.dataset);
    const auto marginals = fit_marginals(cfg, obs);
    if (model_dimension(cfg, &obs) != obs.d()) {
        throw ConfigError("a", "model dimension does not match the dataset's " + std::to_string(obs.d()) + " columns");
    }
    std::vector<double> sums;
    const VarReport report =
        cfg.family ? aggregate_var(build_model(cfg, &obs), marginals, cfg.alpha, cfg.count, cfg.seed, &sums, cfg.threads)
                   : aggregate_var(build_base(cfg, &obs), marginals, cfg.alpha, cfg.count, cfg.seed, &sums, cfg.threads);
    const auto stamp = make_stamp(cfg);
    json j = stamp_json(stamp);
    j["alpha"] = report.alpha;
    j["marginal_var"] = report.marginal_var;
    j["aggregate"] = report.aggregate;
    j["comparator"] = report.comparator;
    j["marginals"] = marginals_json(marginals, cfg.alpha);
    const std::string text = j.dump(2) + "\n";

    std::ostringstream csv;
    csv << stamp_comment(stamp);
    write_quantile_table_csv(csv, quantile_table(sums, quantile_grid()));

    if (cfg.out.empty()) cfg.out = ".";
    write_text(std::filesystem::path(cfg.out) / "var_report.json", text);
    write_text(std::filesystem::path(cfg.out) / "quantiles.csv", csv.str());
    out << text;
}

void run_reproduce(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto rows = reproduce_reference_table(cfg, cfg.out, err);
    char line[160];
    out << "label,reference_var,estimate,abs_diff,comparator\n";
    for (const auto& row : rows) {
        std::snprintf(line, sizeof line, "%s,%.4f,%.4f,%.4f,%.4f\n", row.config.label.c_str(),
                      row.config.reference_var, row.report.aggregate,
                      std::abs(row.report.aggregate - row.config.reference_var), row.report.comparator);
        out << line;
    }
}

void report_error(std::ostream& err, json j) { err << j.dump() << '\n'; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Partition-of-unity copulas: simulation, densities, tail dependence and VaR aggregation", "ipucop"};
    app.require_subcommand(1, 1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ranks", "emit the rank table of a dataset"},
        {"simulate", "emit copula samples"},
        {"density", "emit a bivariate density grid"},
        {"taildep", "exact, asymptotic and empirical upper tail dependence"},
        {"fit", "fit the marginal distributions"},
        {"var", "Monte Carlo VaR of the aggregate loss"},
        {"reproduce-paper", "run the full reference VaR comparison"},
    };
    std::map<std::string, Flags> flags;
    std::map<std::string, OptionMap> options;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        subs[name] = app.add_subcommand(name, help);
        options[name] = add_flags(subs[name], flags[name]);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        report_error(err, {{"error", "usage"}, {"message", e.what()}});
        return 2;
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) command = name;
    }

    try {
        const RunConfig cfg = resolve_config(command, flags[command], options[command]);
        json echo;
        echo["command"] = command;
        echo["config"] = to_json(cfg);
        echo["config_hash"] = config_hash(cfg);
        echo["out"] = cfg.out;
        err << echo.dump() << '\n';

        if (command == "ranks") run_ranks(cfg, out);
        else if (command == "simulate") run_simulate(cfg, out);
        else if (command == "density") run_density(cfg, out);
        else if (command == "taildep") run_taildep(cfg, out);
        else if (command == "fit") run_fit(cfg, out);
        else if (command == "var") run_var(cfg, out);
        else if (command == "reproduce-paper") run_reproduce(cfg, out, err);
        return 0;
    } catch (const ConfigError& e) {
        report_error(err, {{"error", "config"}, {"field", e.field()}, {"message", e.what()}});
        return 2;
    } catch (const DataError& e) {
        report_error(err, {{"error", "data"}, {"row", e.row()}, {"message", e.what()}});
        return 1;
    } catch (const std::exception& e) {
        report_error(err, {{"error", "runtime"}, {"message", e.what()}});
        return 1;
    }
}

}  // namespace ipu::cli
