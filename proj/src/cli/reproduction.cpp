#include "cli/reproduction.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cli/artifacts.hpp"

namespace ipu::cli {

using nlohmann::json;

const std::vector<ReferenceConfiguration>& reference_configurations() {
    using enum BaseKind;
    constexpr auto NB = FamilyKind::NegativeBinomial;
    constexpr auto Po = FamilyKind::Poisson;
    static const std::vector<ReferenceConfiguration> table = {
        {"Bernstein", Bernstein, std::nullopt, 0, std::nullopt, 8.9586},
        {"NB 5", ShuffleM, NB, 5, std::nullopt, 8.8474},
        {"NB 5 WC", ShuffleMWorstCase, NB, 5, 1, 9.3989},
        {"NB 10", ShuffleM, NB, 10, std::nullopt, 8.8834},
        {"NB 10 WC", ShuffleMWorstCase, NB, 10, 1, 9.5421},
        {"NB 15", ShuffleM, NB, 15, std::nullopt, 8.8978},
        {"NB 15 WC", ShuffleMWorstCase, NB, 15, 1, 9.6198},
        {"Po 6", ShuffleM, Po, 6, std::nullopt, 8.8200},
        {"Po 6 WC", ShuffleMWorstCase, Po, 6, 1, 9.1402},
        {"Po 10", ShuffleM, Po, 10, std::nullopt, 8.8453},
        {"Po 10 WC", ShuffleMWorstCase, Po, 10, 1, 9.2412},
        {"Po 15", ShuffleM, Po, 15, std::nullopt, 8.8820},
        {"Po 15 WC", ShuffleMWorstCase, Po, 15, 1, 9.3532},
    };
    return table;
}

RunConfig configuration_for(const ReferenceConfiguration& ref, const RunConfig& common) {
    RunConfig cfg = common;
    cfg.base = ref.base;
    cfg.family = ref.family;
    cfg.a = {static_cast<double>(ref.a ? ref.a : 1)};
    cfg.corner_size = ref.corner_size;
    return cfg;
}

VarReport run_reference(const ReferenceConfiguration& ref, const RunConfig& common,
                        const std::vector<MarginalModel>& marginals, std::vector<double>* sums_out) {
    const RunConfig cfg = configuration_for(ref, common);
    const auto obs = resolve_dataset(cfg.dataset);
    if (!cfg.family) {
        return aggregate_var(build_base(cfg, &obs), marginals, cfg.alpha, cfg.count, cfg.seed, sums_out, cfg.threads);
    }
    return aggregate_var(build_model(cfg, &obs), marginals, cfg.alpha, cfg.count, cfg.seed, sums_out, cfg.threads);
}

std::vector<double> quantile_grid() {
    std::vector<double> p;
    for (int j = 1; j <= 999; ++j) p.push_back(j / 1000.0);
    return p;
}

namespace {

std::string file_stem(const std::string& label) {
    std::string stem;
    for (char c : label) stem += (c == ' ') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return stem;
}

}  // namespace

std::vector<ReproductionRow> reproduce_reference_table(const RunConfig& common, const std::filesystem::path& out_dir,
                                                       std::ostream& progress) {
    const auto obs = resolve_dataset(common.dataset);
    const auto marginals = fit_marginals(common, obs);
    const ArtifactStamp stamp = make_stamp(common);

    std::filesystem::create_directories(out_dir / "quantiles");
    {
        json fits = stamp_json(stamp);
        fits["method"] = to_string(common.fit_method);
        fits["marginals"] = marginals_json(marginals, common.alpha);
        fits["reference_var"] = {kReferenceVarX, kReferenceVarY};
        write_text(out_dir / "fits.json", fits.dump(2) + "\n");
    }

    std::ofstream csv(out_dir / "comparison.csv", std::ios::binary);
    csv << stamp_comment(stamp) << "label,base,family,a,corner_size,reference_var,estimate,abs_diff,"
                                   "comparator,reference_comparator\n";
    csv.flush();

    std::vector<ReproductionRow> rows;
    json table = json::array();
    const auto probs = quantile_grid();
    for (const auto& ref : reference_configurations()) {
        std::vector<double> sums;
        const VarReport report = run_reference(ref, common, marginals, &sums);
        rows.push_back({ref, report});

        char line[256];
        std::snprintf(line, sizeof line, "%s,%s,%s,%d,%s,%.4f,%.6f,%.6f,%.6f,%.4f\n", ref.label.c_str(),
                      to_string(ref.base).c_str(), family_name(ref.family).c_str(), ref.a,
                      ref.corner_size ? std::to_string(*ref.corner_size).c_str() : "", ref.reference_var,
                      report.aggregate, std::abs(report.aggregate - ref.reference_var), report.comparator,
                      kReferenceComparator);
        csv << line;
        csv.flush();

        json row;
        row["label"] = ref.label;
        row["base"] = to_string(ref.base);
        row["family"] = family_name(ref.family);
        row["a"] = ref.a;
        row["corner_size"] = ref.corner_size ? json(*ref.corner_size) : json(nullptr);
        row["reference_var"] = ref.reference_var;
        row["estimate"] = report.aggregate;
        row["abs_diff"] = std::abs(report.aggregate - ref.reference_var);
        row["comparator"] = report.comparator;
        row["reference_comparator"] = kReferenceComparator;
        table.push_back(row);

        std::ofstream q(out_dir / "quantiles" / (file_stem(ref.label) + ".csv"), std::ios::binary);
        q << stamp_comment(stamp);
        write_quantile_table_csv(q, quantile_table(sums, probs));

        std::snprintf(line, sizeof line, "%-10s reference %.4f  estimate %.4f  comparator %.4f\n", ref.label.c_str(),
                      ref.reference_var, report.aggregate, report.comparator);
        progress << line << std::flush;
    }

    json summary = stamp_json(stamp);
    summary["rows"] = table;
    write_text(out_dir / "comparison.json", summary.dump(2) + "\n");
    return rows;
}

}  // namespace ipu::cli
