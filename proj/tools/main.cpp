#include "app.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using namespace kgnls::app;
    CLI::App cli{"Klein-Gordon / NLS normal-form and torus experiments"};
    cli.require_subcommand(1);

    RunOptions opts;
    std::string config;
    std::uint64_t seed = 0;
    int workers = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON run config");
        sub->add_option("--seed", seed, "RNG seed (overrides the config)");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
        sub->add_flag("--strict", opts.strict, "refuse questionable numerical settings");
    };
    for (const auto& e : experiments()) {
        if (e == "report") continue;
        add_common(cli.add_subcommand(e, "run the " + e + " experiment"));
    }
    std::vector<std::string> dirs;
    auto* rep = cli.add_subcommand("report", "aggregate fitted exponents from run directories");
    rep->add_option("dirs", dirs, "run directories");
    rep->add_option("--out", opts.out_dir, "output directory for report.csv");
    cli.add_subcommand("schema", "print the JSON schema for run configs");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return kConfig;
    }

    auto* sub = cli.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "schema") {
        std::cout << schema().dump(2) << "\n";
        return kOk;
    }
    if (name == "report") {
        std::vector<std::string> skipped;
        const auto rows = collect_report(dirs, skipped);
        for (const auto& s : skipped) std::cerr << "skipped (no manifest): " << s << "\n";
        write_report(rows, std::cout);
        if (sub->count("--out")) {
            std::filesystem::create_directories(opts.out_dir);
            std::ofstream os(std::filesystem::path(opts.out_dir) / "report.csv");
            write_report(rows, os);
        }
        return kOk;
    }
    if (sub->count("--config")) opts.config_path = config;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--workers")) opts.workers = workers;
    return run(name, opts, std::cerr);
}
