#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dicke/expcli/experiments.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Open Dicke / Tavis-Cummings simulator for cavity-assisted Raman experiments"};
    app.require_subcommand(1);

    dicke::expcli::RunRequest request;
    for (int i = 0; i < argc; ++i)
        request.command.emplace_back(argv[i]);

    const std::vector<std::pair<std::string, std::string>> experiments = {
        {"params", "print effective model parameters"},
        {"splitting-map", "transmission map versus dispersive shift (normal-mode splitting)"},
        {"transmission", "single transmission scan and splitting fit"},
        {"ramp", "mean-field power ramp and detected threshold"},
        {"threshold-map", "ramp and static thresholds versus atom number"},
        {"quantum-check", "cross-validation battery on small systems"},
    };
    for (const auto& [name, help] : experiments) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", request.config_path, "configuration file")->check(CLI::ExistingFile);
        sub->add_option("-s,--set", request.overrides, "override, key=value (repeatable)");
        sub->add_option("-o,--out", request.out_dir, "output directory for the run record");
        sub->callback([&request, n = name] { request.experiment = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dicke::expcli::exit_config;
    }
    return dicke::expcli::run(request, std::cout, std::cerr);
}
