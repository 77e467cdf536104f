#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Spatiotemporal constraints on Bernoulli, PPP and PMBM trajectory densities"};
    app.require_subcommand(1);

    trajcon::cli::RunOptions options;
    std::uint64_t seed = 0;
    std::string out_dir;
    for (const char* name : {"simulate", "constrain", "oracle"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", options.config, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "Override the configured seed");
        sub->add_option("--out-dir", out_dir, "Output directory (default: config out_dir, else ./out)");
        sub->add_flag("--verbose", options.verbose, "Progress messages on stderr");
    }
    app.get_subcommand("simulate")->description("Simulate truth and measurements");
    app.get_subcommand("constrain")->description("Constrain a fitted or given density and write marginals");
    app.get_subcommand("oracle")->description("Check constrained parameters against sampling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return trajcon::cli::kConfigError;
    }

    const auto* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) options.seed = seed;
    if (sub->count("--out-dir") > 0) options.out_dir = out_dir;
    return trajcon::cli::run(sub->get_name(), options, std::cout, std::cerr);
}
