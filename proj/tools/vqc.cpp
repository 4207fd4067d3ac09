#include <CLI11.hpp>
#include <iostream>

#include "vqc/harness.hpp"
#include "vqc/text.hpp"

namespace {

vqc::SweepConfig load_config(const std::string& path, int workers_override) {
    vqc::SweepConfig cfg = vqc::parse_config_file(path);
    if (workers_override > 0) cfg.workers = workers_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vqc - variational quantum classifier workbench"};
    app.require_subcommand(1);

    std::string config_path;
    int workers = 0;

    auto* sweep = app.add_subcommand("sweep", "sample circuits and train them over a dataset");
    sweep->add_option("config", config_path, "sweep config file")->required();
    sweep->add_option("--workers", workers, "parallel workers (overrides config)");

    auto* curve = app.add_subcommand("noise-curve", "train fixed circuits across target error rates");
    curve->add_option("config", config_path, "noise-curve config file")->required();
    curve->add_option("--workers", workers, "parallel workers (overrides config)");

    auto* surface = app.add_subcommand("error-surface", "estimate the T1/T2 error surface");
    surface->add_option("config", config_path, "error-surface config file")->required();

    std::string agg_csv, agg_by = "depth", agg_out;
    auto* agg = app.add_subcommand("aggregate", "best mean accuracy grouped by depth or qubits");
    agg->add_option("csv", agg_csv, "results CSV from a sweep")->required();
    agg->add_option("--by", agg_by, "grouping key: depth or qubits")->required();
    agg->add_option("-o,--output", agg_out, "write the aggregate CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            const auto out = vqc::run_sweep(load_config(config_path, workers));
            std::cout << "wrote " << out.records.size() << " records to " << out.csv_path << "\n"
                      << "specs: " << out.specs_path << "\n"
                      << "times: " << out.times_path << "\n";
        } else if (curve->parsed()) {
            const auto out = vqc::run_noise_curve(load_config(config_path, workers));
            std::cout << "wrote " << out.records.size() << " records to " << out.csv_path << "\n";
        } else if (surface->parsed()) {
            const auto path = vqc::run_error_surface(load_config(config_path, 0));
            std::cout << "wrote " << path << "\n";
        } else if (agg->parsed()) {
            const auto rows = vqc::aggregate_csv(agg_csv, agg_by);
            std::ostream* os = &std::cout;
            std::ofstream file;
            if (!agg_out.empty()) {
                file.open(agg_out, std::ios::binary);
                if (!file) throw std::runtime_error("cannot write '" + agg_out + "'");
                os = &file;
            }
            *os << (agg_by == "depth" ? "depth" : "num_qubits") << ",best_mean_accuracy\n";
            for (const auto& [key, acc] : rows) *os << key << ',' << vqc::format_double(acc) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
