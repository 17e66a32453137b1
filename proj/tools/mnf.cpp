// Command-line front end: mnf verify | simulate | route | probe-f

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "mnf/forgetting.hpp"
#include "mnf/harness.hpp"
#include "mnf/parallel.hpp"

int main(int argc, char** argv)
{
    mnf::RunConfig cfg;
    CLI::App app{"Move-and-forget small-world simulator"};
    app.require_subcommand(1);

    auto common = [&cfg](CLI::App* sub) {
        sub->add_option("--k", cfg.k, "lattice dimension");
        sub->add_option("--epsilon", cfg.epsilon, "forgetting exponent");
        sub->add_option("--side", cfg.side, "torus side L (even)");
        sub->add_option("--a-max", cfg.a_max, "largest tracked link age");
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--format", cfg.format, "report format on stdout: csv or text");
    };

    auto* verify = app.add_subcommand("verify", "analytic checks of the schedule and walk laws");
    common(verify);

    auto* simulate = app.add_subcommand("simulate", "run the token dynamics");
    common(simulate);
    simulate->add_option("--tokens", cfg.tokens, "number of tokens");
    simulate->add_option("--ticks", cfg.ticks, "number of ticks");
    simulate->add_option("--start", cfg.start, "fresh or stationary");
    simulate->add_option("--checkpoints", cfg.checkpoints, "ticks at which to record TV")
        ->delimiter(',');
    simulate->add_flag("--lazy-walk", cfg.lazy_walk, "coordinates move with probability 1/2");
    simulate->add_option("--save-state", cfg.save_state, "write the final world checkpoint here");

    auto* route = app.add_subcommand("route", "greedy routing experiment");
    common(route);
    route->add_option("--distances", cfg.distances, "comma-separated l1 distances")->delimiter(',');
    route->add_option("--trials", cfg.trials, "trials per distance");
    route->add_option("--halving-deltas", cfg.halving_deltas, "distances for the halving estimate")
        ->delimiter(',');
    route->add_option("--halving-trials", cfg.halving_trials, "samples per halving estimate");
    route->add_option("--d0", cfg.d0, "threshold distance d0");
    route->add_flag("--trace", cfg.trace, "dump one route per distance, hop by hop");

    auto* probe = app.add_subcommand("probe-f", "evaluate the stationary link law");
    common(probe);
    probe->add_option("--distances", cfg.distances, "comma-separated distances")->delimiter(',');
    probe->add_option("--d0", cfg.d0, "threshold distance d0");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    try
    {
        return mnf::run_command(cfg, std::cout, mnf::worker_count());
    }
    catch (mnf::ConfigError const& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (mnf::ScheduleError const& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
