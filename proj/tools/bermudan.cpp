// Command line front end: experiment runs, table reproduction and a
// European pricing oracle.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bermudan/analytic.hpp"
#include "bermudan/harness.hpp"

namespace {

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bermudan min-put bounds under Merton jump diffusion"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one experiment and write a JSON report");
    std::string config_path, run_out;
    std::uint64_t seed = 0;
    bool timings = false;
    run->add_option("--config", config_path, "JSON config (defaults when omitted)");
    auto* seed_opt = run->add_option("--seed", seed, "Root seed, overrides the config");
    run->add_option("--out", run_out, "Report path (stdout when omitted)");
    run->add_flag("--timings", timings, "Include wall times in the report");

    auto* table = app.add_subcommand("table", "Reproduce a published table as CSV");
    std::string table_id, table_out;
    bermudan::TableOptions topts;
    table->add_option("--id", table_id, "5.1, 5.2 or 5.4")->required();
    table->add_option("--scale", topts.scale, "Sample size factor in (0, 1]");
    table->add_option("--seed", topts.seed, "Root seed");
    table->add_flag("--with-n2", topts.with_n2, "Add the two-asset rows of table 5.1");
    table->add_option("--out", table_out, "CSV path (stdout when omitted)");

    auto* euro = app.add_subcommand("price-euro", "Price the European min-put");
    int assets = 1;
    std::vector<double> x;
    double tau = 1.0;
    bermudan::ModelParams params;
    euro->add_option("--n", assets, "Number of assets")->check(CLI::PositiveNumber);
    euro->add_option("--x", x, "Spot price(s); one value is repeated for every asset")->required()->delimiter(',');
    euro->add_option("--tau", tau, "Time to maturity")->check(CLI::PositiveNumber);
    euro->add_option("--lambda", params.lambda, "Jump intensity for the jump-diffusion price");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto cfg = config_path.empty() ? bermudan::ExperimentConfig{} : bermudan::config_from_json(read_json(config_path));
            if (*seed_opt) {
                cfg.seed = seed;
                cfg.seeds.reset();
            }
            if (!run_out.empty()) cfg.report_path = run_out;
            const auto report = bermudan::run_experiment(cfg);
            write_output(cfg.report_path, bermudan::report_to_json(report, timings));
        } else if (table->parsed()) {
            const auto result = bermudan::reproduce_table(table_id, topts);
            write_output(table_out, result.csv());
        } else if (euro->parsed()) {
            if (x.size() == 1) x.assign(static_cast<std::size_t>(assets), x.front());
            if (x.size() != static_cast<std::size_t>(assets))
                throw std::invalid_argument("--x needs one value or one per asset");
            params.x0 = x;
            params.maturity = tau;
            nlohmann::json doc;
            doc["n"] = assets;
            doc["x"] = x;
            doc["tau"] = tau;
            doc["bs_min_put"] = bermudan::bs_min_put(0.0, x, tau, params, {});
            doc["bs_min_put_delta"] = bermudan::bs_min_put_delta(0.0, x, tau, 0, params, {});
            if (assets == 1) doc["merton_put"] = bermudan::merton_put_1d(0.0, x[0], tau, params, {});
            std::cout << doc.dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
