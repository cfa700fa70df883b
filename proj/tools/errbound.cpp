// errbound: error-bound moduli, Phi, Hoffman constants and tilt stability.

#include <iostream>

#include "CLI11.hpp"

#include <errbound/cli/commands.hpp>

namespace {

using namespace errbound::cli;

void add_source(CLI::App* cmd, source& src)
{
    cmd->add_option("path", src.path, "system spec (JSON)");
    cmd->add_option("--function", src.function, "named scalar function: exp_minus_one, zero, abs");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"errbound: error-bound moduli, Hoffman constants and stability under tilts"};
    app.require_subcommand(1);

    hoffman_options ho;
    auto* hoffman = app.add_subcommand("hoffman", "active sets, Hoffman lower bound, sampled sigma, sweeps");
    hoffman->add_option("path", ho.path, "system spec (JSON)")->required();
    hoffman->add_option("--max-size", ho.max_size, "largest active set searched (0 = all rows)");
    hoffman->add_option("--sweep", ho.sweep, "perturbation magnitudes")->delimiter(',');
    hoffman->add_option("--anchor", ho.anchors, "sweep anchor x1,x2,... (repeatable)");
    hoffman->add_option("--direction", ho.directions, "sweep direction u1,u2,... (repeatable)");
    hoffman->add_option("--random-directions", ho.random_directions, "seeded random sweep directions");
    hoffman->add_option("--seed", ho.seed, "sampler seed");
    hoffman->add_option("--samples", ho.samples, "uniform samples per shell");
    hoffman->add_option("--radii", ho.radii, "shell radii")->delimiter(',');
    hoffman->add_option("--out", ho.out, "sweep CSV path");

    phi_options po;
    auto* phi = app.add_subcommand("phi", "Phi(x) = inf over unit h of d+f(x, h)");
    add_source(phi, po.src);
    phi->add_option("--at", po.at, "point x1,x2,...")->required();

    modulus_options mo;
    bool global_flag = false;
    auto* modulus = app.add_subcommand("modulus", "global or local error-bound modulus by both routes");
    add_source(modulus, mo.src);
    auto* g = modulus->add_flag("--global", global_flag, "global modulus (default)");
    modulus->add_flag("--local", mo.local, "local modulus at --at")->excludes(g);
    modulus->add_option("--at", mo.at, "anchor (local) or sampling center (global)");
    modulus->add_option("--radius,--shells", mo.radii, "ball radii")->delimiter(',');
    modulus->add_option("--samples", mo.samples, "samples per ball");
    modulus->add_option("--seed", mo.seed, "sampler seed");

    stability_options so;
    auto* stability = app.add_subcommand("stability", "stability certificate; destabilizing tilt when unstable");
    add_source(stability, so.src);
    stability->add_option("--at", so.at, "anchor x1,x2,... on the zero level");
    stability->add_flag("--global", so.global, "global stability");
    stability->add_option("--tau", so.tau, "zero band (point) or tau for the interior condition (global)");
    stability->add_option("--eps", so.eps, "tilt magnitude for the destabilizer");

    oracle_check_options oo;
    auto* oracle = app.add_subcommand("oracle-check", "compare kernels with brute-force oracles");
    oracle->add_option("path", oo.path, "system spec (JSON)")->required();
    oracle->add_option("--seed", oo.seed, "sample seed");
    oracle->add_option("--points", oo.points, "projection test points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : bad_input;
    }

    if (hoffman->parsed()) return run_hoffman(ho, std::cout, std::cerr);
    if (phi->parsed()) return run_phi(po, std::cout, std::cerr);
    if (modulus->parsed()) return run_modulus(mo, std::cout, std::cerr);
    if (stability->parsed()) return run_stability(so, std::cout, std::cerr);
    if (oracle->parsed()) return run_oracle_check(oo, std::cout, std::cerr);
    return bad_input;
}
