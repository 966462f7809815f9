#include <iostream>

#include <CLI11.hpp>

#include "fragrate/fragrate.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fragrate: fragmentation-rate recovery for the growth-fragmentation equation"};
    app.require_subcommand(1);
    fragrate::CommandOptions opt;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory (overrides output.dir)");
        sub->add_flag("--plot", opt.plot, "also write SVG charts");
        sub->add_option("--seed", opt.seed, "noise seed (overrides noise.seed)");
    };
    auto* direct = app.add_subcommand("direct", "compute the eigenpair (N, lambda)");
    common(direct);
    auto* invert = app.add_subcommand("invert", "reconstruct H = BN and B from N and lambda");
    common(invert);
    invert->add_option("--n-csv", opt.n_csv, "CSV with columns x, N")->required();
    invert->add_option("--lambda", opt.lambda, "eigenvalue (default: eigen.meta next to the CSV)");
    auto* sweep = app.add_subcommand("sweep", "noise sweep and error slopes");
    common(sweep);
    auto* check = app.add_subcommand("check", "integrability and invertibility checks");
    common(check);
    auto* selftest = app.add_subcommand("selftest", "run the built-in property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fragrate::kExitError;
    }
    if (*direct) return fragrate::cmd_direct(opt, std::cout, std::cerr);
    if (*invert) return fragrate::cmd_invert(opt, std::cout, std::cerr);
    if (*sweep) return fragrate::cmd_sweep(opt, std::cout, std::cerr);
    if (*check) return fragrate::cmd_check(opt, std::cout, std::cerr);
    if (*selftest) return fragrate::cmd_selftest(std::cout);
    return fragrate::kExitError;
}
