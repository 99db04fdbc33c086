// Command-line front end: omit <mode> [--config PATH | --preset NAME] [options]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omit/omit.hpp"

int main(int argc, char** argv) {
    CLI::App app{"SAW-controlled optomechanically induced transparency simulator"};
    app.require_subcommand(1);

    std::string config_path, preset, branch, out;
    std::vector<std::string> sets;
    bool no_saw = false, plot = false;
    std::optional<unsigned> threads;

    const std::vector<std::pair<std::string, std::string>> modes{
        {"derive", "parameter report with provenance and regime checks"},
        {"steady", "steady-state branch report"},
        {"spectrum", "probe spectrum CSV over the delta grid"},
        {"sweep", "spectra along a P_pu or P_rf axis (long CSV)"},
        {"delay", "group delay versus pump power"},
        {"oracle", "time-domain check of the linear response"},
    };
    for (const auto& [name, help] : modes) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "INI run configuration");
        sub->add_option("--preset", preset, "built-in parameter set (fig3)");
        sub->add_option("--set", sets, "override, section.key_unit=value (repeatable)");
        sub->add_option("--branch", branch, "steady-state branch")->check(CLI::IsMember({"lower", "middle", "upper"}));
        sub->add_flag("--no-saw", no_saw, "switch the SAW drive and coupling off");
        sub->add_flag("--plot", plot, "also write an SVG plot");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--threads", threads, "worker threads for sweeps");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    const std::string mode = app.get_subcommands().front()->get_name();

    try {
        if (config_path.empty() && preset.empty())
            throw omit::ConfigError("", "give --config PATH or --preset NAME");
        std::vector<std::string> overrides = sets;
        overrides.push_back("run.mode=" + mode);
        if (!branch.empty()) overrides.push_back("run.branch=" + branch);
        if (no_saw) overrides.push_back("run.saw=false");
        if (plot) overrides.push_back("run.plot=true");
        if (!out.empty()) overrides.push_back("run.out=" + out);
        if (threads) overrides.push_back("run.threads=" + std::to_string(*threads));

        const omit::RunConfig cfg = config_path.empty() ? omit::load_preset(preset, overrides)
                                                        : omit::load_config(config_path, overrides, preset);
        return omit::run(cfg, std::cout);
    } catch (const omit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
