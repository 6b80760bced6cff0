// hypint: intermediate integrals and certified exact solutions of 1-D
// hyperbolic equations u_tt - a^2 u_xx = f, driven by plain-text configs.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hypint/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"intermediate integrals and exact solutions of 1-D hyperbolic PDEs"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"check", "evaluate compatibility / determinant / structural residuals"},
        {"reduce", "integrate a reduction along characteristics, write a strip CSV"},
        {"family", "sample a closed-form solution family, write a field CSV"},
        {"linear-general", "build and sample the general solution of a linear equation"},
        {"linear-ivp", "solve an initial-value problem for a linear equation"},
        {"verify", "finite-difference residual and leapfrog cross-check"},
    };
    std::string config_path;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("config", config_path, "configuration file")->required();
    }

    CLI11_PARSE(app, argc, argv);

    std::string cmd = app.get_subcommands().front()->get_name();
    try {
        hypint::Config cfg = hypint::load_config(config_path);
        return hypint::cli::run_command(cmd, cfg, std::cout);
    } catch (const hypint::ConfigError& e) {
        std::cerr << "hypint " << cmd << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hypint " << cmd << ": " << e.what() << "\n";
        return 1;
    }
}
