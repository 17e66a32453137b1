#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mnf {

//! Invalid run configuration (exit status 2).
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig
{
    std::string command;  //!< verify | simulate | route | probe-f
    int k = 1;
    double epsilon = 1.0;
    std::int64_t side = 0;  //!< 0: 2^16, or for simulate the smallest even L with L^k >= tokens
    std::uint64_t a_max = 1'000'000'000'000ULL;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string format = "text";  //!< stdout report: csv | text

    // simulate
    std::uint64_t tokens = 100'000;
    std::uint64_t ticks = 1000;
    std::string start = "fresh";  //!< fresh | stationary
    std::vector<std::uint64_t> checkpoints;  //!< empty: powers of ten up to ticks
    bool lazy_walk = false;
    std::string save_state;  //!< optional world checkpoint path

    // route / probe-f
    std::vector<std::int64_t> distances;
    std::uint64_t trials = 2000;
    std::vector<std::int64_t> halving_deltas{512, 1024, 2048, 4096};
    std::uint64_t halving_trials = 1'000'000;
    bool trace = false;
    std::int64_t d0 = 64;
};

//! Command defaults (distance grids) filled in where the user gave none.
void apply_defaults(RunConfig& cfg);

//! Throws ConfigError naming the first invalid parameter.
void validate(RunConfig const& cfg);

//! Every parameter as (key, value) text, in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(RunConfig const& cfg);

/*!
 * Subcommands. Each validates, writes its files under cfg.out, prints a
 * report to `report`, and returns 0 when every check passed and 1
 * otherwise. Results never depend on the worker count.
 */
int cmd_verify(RunConfig const& cfg, std::ostream& report, unsigned workers);
int cmd_simulate(RunConfig const& cfg, std::ostream& report, unsigned workers);
int cmd_route(RunConfig const& cfg, std::ostream& report, unsigned workers);
int cmd_probe_f(RunConfig const& cfg, std::ostream& report, unsigned workers);

//! Dispatch on cfg.command; ConfigError propagates.
int run_command(RunConfig cfg, std::ostream& report, unsigned workers);

//---------------------------------------------------------------------------//
// Analytic checks shared by verify and the acceptance suite
//---------------------------------------------------------------------------//

struct CheckResult
{
    std::string name;
    bool passed = false;
    double value = 0;  //!< measured quantity
    double bound = 0;  //!< threshold it is compared with
    std::string detail;
};

//! Enclosure of sum_{a >= N} a^{-1-k/2} ln^{-(1+eps)} a by direct summation
//! to M plus a bound on the remainder.
struct SeriesEnclosure
{
    double lower = 0;
    double upper = 0;
};
SeriesEnclosure brute_tail_series(double n, int k, double epsilon, std::uint64_t m);

//! The analytic suite for one (epsilon, a_max).
std::vector<CheckResult> analytic_checks(double epsilon, std::uint64_t a_max, unsigned workers);

}  // namespace mnf
