#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "canouq/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Optimal uncertainty quantification under moment constraints"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "Run the sweep or quantile search described by a config");
    run->add_option("config", config, "Problem configuration (JSON)")->required();
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config, "Problem configuration (JSON)")->required();
    app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return canouq::kExitValidation;
    }

    if (*run) return canouq::run_command(config, std::cerr);
    if (*validate) return canouq::validate_command(config, std::cout, std::cerr);
    std::cout << "canouq " << canouq::kVersion << "\n";
    return canouq::kExitOk;
}
