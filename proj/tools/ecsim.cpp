#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "ecsim/cli.hpp"

namespace {

void add_common(CLI::App* sub, ecsim::cli::RunConfig& c) {
    sub->add_option("--out", c.out_dir, "output directory (default $ECSIM_OUT_DIR or ./out)");
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    const std::map<std::string, ecsim::cli::Format> formats{{"csv", ecsim::cli::Format::Csv},
                                                             {"json", ecsim::cli::Format::Json}};
    sub->add_option("--format", c.format, "csv or json")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
    using ecsim::cli::Command;
    ecsim::cli::RunConfig c;
    CLI::App app{"ecsim: energy-currency economy simulator"};
    app.require_subcommand(1);

    auto* scen = app.add_subcommand("run-scenario", "replay a ledger scenario (built-in name or JSON file)");
    scen->add_option("scenario", c.input, "scenario name (new-energy) or path")->required();
    add_common(scen, c);

    auto* kap = app.add_subcommand("demo-kapitza", "inverted pendulum held by a fast pivot drive");
    kap->add_option("--amplitude", c.amplitude, "drive amplitude")->capture_default_str();
    add_common(kap, c);

    auto* diss = app.add_subcommand("demo-dissipation-sweep", "equilibria of the double well as dissipation grows");
    add_common(diss, c);

    auto* fc = app.add_subcommand("demo-forecast", "conservative and diffusive ensemble forecasts");
    fc->add_option("--mode", c.forecast_mode, "conservative, diffusive or both")->capture_default_str();
    fc->add_option("--realizations", c.realizations, "ensemble size")->capture_default_str()->check(CLI::PositiveNumber);
    fc->add_option("--horizon", c.horizon, "forecast horizon")->capture_default_str()->check(CLI::PositiveNumber);
    add_common(fc, c);

    auto* arb = app.add_subcommand("demo-arbitrage", "reserve arbitrage around a target price");
    add_common(arb, c);

    auto* val = app.add_subcommand("valuation", "Kuhn-Tucker operating point and NPV comparison");
    val->add_option("input", c.input, "optional JSON with curves and cash-flow profile");
    val->add_option("--m-e", c.m_e, "EC multiplier");
    val->add_option("--s0", c.S_0, "savings turnover time, years");
    val->add_option("--ti", c.T_I, "investment period, years");
    val->add_option("--nu", c.nu, "discount rate");
    val->add_option("--horizon", c.T_0, "evaluation horizon, years");
    val->add_option("--mu", c.mu, "constraint level (default: the maximal level)");
    add_common(val, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (scen->parsed()) c.command = Command::RunScenario;
    else if (kap->parsed()) c.command = Command::DemoKapitza;
    else if (diss->parsed()) c.command = Command::DemoDissipationSweep;
    else if (fc->parsed()) c.command = Command::DemoForecast;
    else if (arb->parsed()) c.command = Command::DemoArbitrage;
    else c.command = Command::Valuation;

    return ecsim::cli::run(c, std::cout, std::cerr);
}
