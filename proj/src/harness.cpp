#include "mnf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mnf/dynamics.hpp"
#include "mnf/forgetting.hpp"
#include "mnf/lattice.hpp"
#include "mnf/linkdist.hpp"
#include "mnf/parallel.hpp"
#include "mnf/routing.hpp"
#include "mnf/stats.hpp"
#include "mnf/walk.hpp"

namespace mnf {
namespace {

template<class T>
std::string join(std::vector<T> const& v)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    return os.str();
}

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

class OutputDir
{
  public:
    explicit OutputDir(RunConfig const& cfg) : cfg_(cfg)
    {
        std::filesystem::create_directories(cfg.out);
    }

    //! Opens a file and writes the self-describing "# key=value" preamble.
    std::ofstream open(std::string const& name) const
    {
        std::ofstream f(std::filesystem::path(cfg_.out) / name);
        if (!f)
            throw std::runtime_error("cannot write " + name + " under " + cfg_.out);
        for (auto const& [key, value] : describe(cfg_))
            f << "# " << key << '=' << value << '\n';
        return f;
    }

  private:
    RunConfig const& cfg_;
};

void report_checks(std::vector<CheckResult> const& checks, std::string const& format,
                   std::ostream& os)
{
    if (format == "csv")
    {
        os << "check,passed,value,bound\n";
        for (auto const& c : checks)
            os << c.name << ',' << (c.passed ? 1 : 0) << ',' << num(c.value) << ','
               << num(c.bound) << '\n';
        return;
    }
    for (auto const& c : checks)
        os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
}

double log_pow(double base, double p)
{
    return std::exp(p * std::log(base));
}

}  // namespace

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

void apply_defaults(RunConfig& cfg)
{
    if (cfg.side == 0)
    {
        cfg.side = 1 << 16;
        if (cfg.command == "simulate" && cfg.k >= 1)
        {
            auto l = static_cast<std::int64_t>(
                std::ceil(std::pow(static_cast<double>(cfg.tokens), 1.0 / cfg.k)));
            while (std::pow(static_cast<double>(l), cfg.k) < static_cast<double>(cfg.tokens))
                ++l;
            cfg.side = std::max<std::int64_t>(8, l + (l % 2));
        }
    }
    if (cfg.distances.empty())
    {
        if (cfg.command == "route")
            cfg.distances = {16, 64, 256, 1024, 4096};
        else if (cfg.command == "probe-f")
            cfg.distances = {64, 128, 256, 512, 1024, 2048, 4096};
    }
    if (cfg.command == "simulate" && cfg.checkpoints.empty())
    {
        cfg.checkpoints.push_back(0);
        for (std::uint64_t t = 10; t <= cfg.ticks; t *= 10)
            cfg.checkpoints.push_back(t);
        if (cfg.checkpoints.back() != cfg.ticks)
            cfg.checkpoints.push_back(cfg.ticks);
    }
}

void validate(RunConfig const& cfg)
{
    static std::vector<std::string> const commands{"verify", "simulate", "route", "probe-f"};
    if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
        throw ConfigError("unknown command '" + cfg.command + "'");
    if (cfg.k < 1 || cfg.k > 8)
        throw ConfigError("--k must be between 1 and 8");
    if (!(cfg.epsilon > 0) || !std::isfinite(cfg.epsilon))
        throw ConfigError("--epsilon must be positive");
    if (static_cast<double>(cfg.a_max) < min_a_max(cfg.epsilon))
        throw ConfigError("--a-max must be at least e^{2(1+epsilon)} = " + num(min_a_max(cfg.epsilon)));
    if (cfg.side % 2 != 0 || cfg.side < 4)
        throw ConfigError("--side must be even and at least 4");
    if (cfg.format != "csv" && cfg.format != "text")
        throw ConfigError("--format must be csv or text");
    if (cfg.out.empty())
        throw ConfigError("--out must name a directory");

    auto lattice = [&] {
        try
        {
            return LatticeConfig(cfg.k, cfg.side);
        }
        catch (std::invalid_argument const& e)
        {
            throw ConfigError(std::string("--side/--k: ") + e.what());
        }
    };

    if (cfg.command == "simulate")
    {
        LatticeConfig const lat = lattice();
        if (cfg.tokens < 1 || cfg.tokens > lat.node_count())
            throw ConfigError("--tokens must be between 1 and side^k");
        if (cfg.start != "fresh" && cfg.start != "stationary")
            throw ConfigError("--start must be fresh or stationary");
        if (!std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end())
            || (!cfg.checkpoints.empty() && cfg.checkpoints.back() > cfg.ticks))
            throw ConfigError("--checkpoints must be ascending and at most --ticks");
    }
    if (cfg.command == "route")
    {
        lattice();
        if (cfg.distances.size() < 1)
            throw ConfigError("--distances must not be empty");
        auto const [lo, hi] = std::minmax_element(cfg.distances.begin(), cfg.distances.end());
        if (*lo < 1)
            throw ConfigError("--distances must be positive");
        if (cfg.side < 8 * *hi)
            throw ConfigError("--side must be at least 8 times the largest distance");
        if (cfg.trials < 1 || cfg.halving_trials < 1)
            throw ConfigError("--trials and --halving-trials must be positive");
        for (auto delta : cfg.halving_deltas)
            if (delta < 6 * cfg.k * cfg.d0)
                throw ConfigError("--halving-deltas must be at least 6 k d0");
    }
    if (cfg.command == "probe-f")
    {
        for (auto d : cfg.distances)
            if (d < 1 || static_cast<std::uint64_t>(d) > cfg.a_max)
                throw ConfigError("--distances must be in [1, a_max]");
    }
}

std::vector<std::pair<std::string, std::string>> describe(RunConfig const& cfg)
{
    std::vector<std::pair<std::string, std::string>> kv{
        {"command", cfg.command},
        {"k", std::to_string(cfg.k)},
        {"epsilon", num(cfg.epsilon)},
        {"side", std::to_string(cfg.side)},
        {"a_max", std::to_string(cfg.a_max)},
        {"seed", std::to_string(cfg.seed)},
    };
    if (cfg.command == "simulate")
    {
        kv.emplace_back("tokens", std::to_string(cfg.tokens));
        kv.emplace_back("ticks", std::to_string(cfg.ticks));
        kv.emplace_back("start", cfg.start);
        kv.emplace_back("checkpoints", join(cfg.checkpoints));
        kv.emplace_back("lazy_walk", cfg.lazy_walk ? "1" : "0");
    }
    if (cfg.command == "route")
    {
        kv.emplace_back("distances", join(cfg.distances));
        kv.emplace_back("trials", std::to_string(cfg.trials));
        kv.emplace_back("halving_deltas", join(cfg.halving_deltas));
        kv.emplace_back("halving_trials", std::to_string(cfg.halving_trials));
        kv.emplace_back("d0", std::to_string(cfg.d0));
    }
    if (cfg.command == "probe-f")
    {
        kv.emplace_back("distances", join(cfg.distances));
        kv.emplace_back("d0", std::to_string(cfg.d0));
    }
    return kv;
}

//---------------------------------------------------------------------------//
// Analytic suite
//---------------------------------------------------------------------------//

SeriesEnclosure brute_tail_series(double n, int k, double epsilon, std::uint64_t m)
{
    double const p = 1 + 0.5 * k;
    double const q = 1 + epsilon;
    auto term = [&](double a) { return std::exp(-p * std::log(a) - q * std::log(std::log(a))); };
    auto const first = static_cast<std::uint64_t>(std::ceil(n));
    if (m <= first)
        throw std::invalid_argument("brute_tail_series: M must exceed N");
    CompensatedSum s;
    for (std::uint64_t a = first; a < m; ++a)
        s.add(term(static_cast<double>(a)));
    double const md = static_cast<double>(m);
    // sum_{a>=M} F <= F(M) + int_M^inf x^{-p} ln^{-q} M dx
    double const rest = term(md) + (2.0 / k) * std::exp(-0.5 * k * std::log(md) - q * std::log(std::log(md)));
    return {s.value(), s.value() + rest};
}

std::vector<CheckResult> analytic_checks(double epsilon, std::uint64_t a_max, unsigned workers)
{
    std::vector<CheckResult> out;
    auto const schedule = ForgettingSchedule::build(epsilon, a_max);

    {
        BalanceReport const b = verify_balance(schedule);
        double const worst = std::max(b.max_state_residual, b.reset_residual);
        std::ostringstream os;
        os << "state residual " << b.max_state_residual << " (age " << b.worst_state
           << "), reset residual " << b.reset_residual << " over " << b.reset_horizon
           << " ages; bound 1e-9 + tail_mass = " << b.bound;
        out.push_back({"balance", b.passed(), worst, b.bound, os.str()});
    }

    {
        // pi(a) a ln^{1+eps} a = 2 ln^{1+eps} 2 * pi(0) for a >= 3
        double const scale = 2 * log_pow(std::numbers::ln2, 1 + epsilon) * schedule.c_norm();
        double worst = 0;
        std::uint64_t const top = std::min<std::uint64_t>(10'000, a_max);
        for (std::uint64_t a = 3; a <= top; ++a)
        {
            double const ad = static_cast<double>(a);
            double const v = schedule.pi(a) * ad * log_pow(std::log(ad), 1 + epsilon);
            worst = std::max(worst, std::fabs(v / scale - 1));
        }
        out.push_back({"closed_form", worst <= 1e-10, worst, 1e-10,
                       "max relative deviation of pi(a) a ln^{1+eps} a from 2 ln^{1+eps}2 c_norm, "
                       "3 <= a <= 1e4: " + num(worst)});
        double const bound = 3 + 2 * std::numbers::ln2 / epsilon;
        double const series = schedule.survival_series();
        out.push_back({"survival_series", series <= bound, series, bound,
                       "sum B(j) = " + num(series) + " <= 3 + 2 ln2/eps = " + num(bound)});
    }

    {
        // Running product of (1 - phi(i)) against the telescoped closed form.
        double log_b = 0;
        double worst = 0;
        for (std::uint64_t j = 1; j <= 10'000; ++j)
        {
            log_b += log_keep(j, epsilon);
            worst = std::max(worst, std::fabs(std::expm1(log_b - log_survival_product(j, epsilon))));
        }
        out.push_back({"telescoping", worst <= 1e-10, worst, 1e-10,
                       "running product vs closed form, j <= 1e4: " + num(worst)});
    }

    {
        double worst = 0;
        for (std::uint64_t a : {0ULL, 1ULL, 2ULL, 7ULL, 100ULL, 1001ULL, 10'000ULL})
        {
            CompensatedSum s;
            auto const sa = static_cast<std::int64_t>(a);
            for (std::int64_t d = -sa; d <= sa; ++d)
                s.add(exact_pmf_1d(a, d));
            worst = std::max(worst, std::fabs(s.value() - 1));
        }
        out.push_back({"pmf_normalization", worst <= 1e-12, worst, 1e-12,
                       "max |sum_d pmf(a, d) - 1| for a up to 1e4: " + num(worst)});
    }

    {
        std::vector<double> worst(2001, 0.0);
        parallel_for(2000, workers, [&](std::size_t i) {
            auto const a = static_cast<std::uint64_t>(i + 1);
            auto const sa = static_cast<std::int64_t>(a);
            double w = 0;
            for (std::int64_t d = -sa; d <= sa; ++d)
                w = std::max(w, exact_pmf_1d(a, d) / chernoff_bound(a, d));
            worst[i] = w;
        });
        double const w = *std::max_element(worst.begin(), worst.end());
        out.push_back({"chernoff_dominance", w <= 1, w, 1,
                       "max pmf / (2 exp(-d^2/(32a))) over a <= 2000, |d| <= a: " + num(w)});
    }

    {
        CltThreshold const t = find_clt_threshold(0.1, 4096);
        std::ostringstream os;
        os << "zeta = 0.1: sandwich holds for every even d in [" << t.d0 << ", 4096]; "
           << t.failures << " of " << t.points_checked << " points fail below";
        out.push_back({"clt_sandwich_d0", t.d0 <= 1024, static_cast<double>(t.d0), 1024, os.str()});
    }

    {
        double const r = central_binomial_ratio(100'000);
        out.push_back({"stirling", std::fabs(r - 1) <= 1e-3, std::fabs(r - 1), 1e-3,
                       "C(2m,m) sqrt(pi m) / 4^m at m = 1e5: " + num(r)});
    }

    {
        bool all = true;
        double worst_margin = std::numeric_limits<double>::infinity();
        std::ostringstream os;
        for (int kk : {1, 2})
            for (double eps : {0.5, 1.0})
                for (double n : {1e3, 1e4})
                {
                    TailBracket const br = tail_bracket(n, kk, eps);
                    auto const m = static_cast<std::uint64_t>(std::max(1e6, 100 * n));
                    SeriesEnclosure const s = brute_tail_series(n, kk, eps, m);
                    bool const ok = br.lower <= s.lower && s.upper <= br.upper;
                    all = all && ok;
                    worst_margin = std::min({worst_margin, s.lower / br.lower - 1,
                                             br.upper / s.upper - 1});
                    if (!ok)
                        os << "k=" << kk << " eps=" << eps << " N=" << n << " outside; ";
                }
        os << "min relative margin inside the brackets " << num(worst_margin);
        out.push_back({"tail_brackets", all, worst_margin, 0, os.str()});
    }

    {
        // phi(a) = 1/a from a = 1 (phi(1) = 1), and from a = 2 with phi(1) = 0
        // so that only the convergence rules can reject it.
        int rejected = 0;
        std::string why;
        for (std::uint64_t from : {1u, 2u})
        {
            try
            {
                ForgettingSchedule::build(
                    [from](std::uint64_t a) { return a < from ? 0.0 : 1.0 / static_cast<double>(a); },
                    epsilon, 100'000);
            }
            catch (ScheduleError const& e)
            {
                ++rejected;
                why += std::string(why.empty() ? "" : "; ") + e.what();
            }
        }
        out.push_back({"rejects_phi_1_over_a", rejected == 2, static_cast<double>(rejected), 2,
                       "builder rejected " + std::to_string(rejected) + " of 2 variants: " + why});
    }

    return out;
}

//---------------------------------------------------------------------------//
// Subcommands
//---------------------------------------------------------------------------//

int cmd_verify(RunConfig const& cfg, std::ostream& report, unsigned workers)
{
    validate(cfg);
    OutputDir dir(cfg);
    auto const checks = analytic_checks(cfg.epsilon, cfg.a_max, workers);
    auto const schedule = ForgettingSchedule::build(cfg.epsilon, cfg.a_max);

    {
        auto f = dir.open("verify.csv");
        report_checks(checks, "csv", f);
    }
    std::ostringstream text;
    text << "c_norm " << num(schedule.c_norm()) << '\n'
         << "tail_mass " << num(schedule.tail_mass()) << '\n'
         << "survival_series " << num(schedule.survival_series()) << '\n';
    report_checks(checks, "text", text);
    {
        auto f = dir.open("verify.txt");
        f << text.str();
    }
    {
        auto f = dir.open("schedule.txt");
        write_schedule(f, schedule);
    }

    if (cfg.format == "csv")
        report_checks(checks, "csv", report);
    else
        report << text.str();
    bool const ok = std::all_of(checks.begin(), checks.end(), [](auto const& c) { return c.passed; });
    return ok ? 0 : 1;
}

int cmd_simulate(RunConfig const& cfg, std::ostream& report, unsigned workers)
{
    validate(cfg);
    OutputDir dir(cfg);
    LatticeConfig const lattice(cfg.k, cfg.side);
    auto const schedule = make_schedule(cfg.epsilon, cfg.a_max);
    DynamicsOptions opts;
    opts.lazy_walk = cfg.lazy_walk;
    World world = cfg.start == "fresh"
                      ? World::fresh(lattice, schedule, cfg.tokens, cfg.seed, opts)
                      : World::stationary(lattice, schedule, cfg.tokens, cfg.seed, opts);

    std::vector<std::pair<std::uint64_t, double>> tv;
    std::string failure;
    try
    {
        for (auto c : cfg.checkpoints)
        {
            world.advance(c - world.tick_count(), workers);
            tv.emplace_back(c, age_tv_distance(world));
        }
        world.advance(cfg.ticks - world.tick_count(), workers);
    }
    catch (ScheduleExhausted const& e)
    {
        failure = e.what();
    }

    {
        auto f = dir.open("tv.csv");
        f << "tick,tv\n";
        for (auto const& [t, v] : tv)
            f << t << ',' << num(v) << '\n';
    }
    bool invariants = true;
    if (failure.empty())
    {
        invariants = world.find_invalid_token() == world.size();
        auto const counts = age_histogram(world.ages());
        auto const ref = age_reference(*schedule);
        auto f = dir.open("ages.csv");
        f << "bin,age_lo,age_hi,count,expected\n";
        for (std::size_t b = 0; b < kAgeBins; ++b)
        {
            auto const [lo, hi] = age_bin_range(b);
            if (lo > cfg.a_max)
                break;
            f << b << ',' << lo << ',' << std::min(hi, cfg.a_max) << ',' << counts[b] << ','
              << num(ref[b] * static_cast<double>(world.size())) << '\n';
        }
        auto g = dir.open("lengths.csv");
        write_histogram_csv(g, length_histogram(world, true));
        if (!cfg.save_state.empty())
        {
            std::ofstream s(cfg.save_state);
            world.write_checkpoint(s);
        }
    }

    std::ostringstream text;
    text << "tokens " << world.size() << '\n' << "tick " << world.tick_count() << '\n';
    for (auto const& [t, v] : tv)
        text << "tv_at_" << t << ' ' << num(v) << '\n';
    if (!failure.empty())
        text << "error " << failure << '\n';
    text << "token_invariants " << (invariants ? "hold" : "violated") << '\n';
    {
        auto f = dir.open("summary.txt");
        f << text.str();
    }
    if (cfg.format == "csv")
    {
        report << "tick,tv\n";
        for (auto const& [t, v] : tv)
            report << t << ',' << num(v) << '\n';
    }
    else
        report << text.str();
    return failure.empty() && invariants ? 0 : 1;
}

int cmd_route(RunConfig const& cfg, std::ostream& report, unsigned workers)
{
    validate(cfg);
    OutputDir dir(cfg);
    auto const schedule = make_schedule(cfg.epsilon, cfg.a_max);
    RouteExperiment ex;
    ex.k = cfg.k;
    ex.epsilon = cfg.epsilon;
    ex.side = cfg.side;
    ex.a_max = cfg.a_max;
    ex.distances = cfg.distances;
    ex.trials = cfg.trials;
    ex.seed = cfg.seed;
    ex.d0 = cfg.d0;

    std::vector<RouteRow> rows;
    for (auto kind : {ProviderKind::move_and_forget, ProviderKind::harmonic})
    {
        auto r = routing_experiment(ex, kind, schedule, workers);
        rows.insert(rows.end(), r.begin(), r.end());
    }

    std::ostringstream table;
    table << "k,epsilon,provider,d,trials,mean_hops,stderr,failure_rate\n";
    for (auto const& r : rows)
        table << cfg.k << ',' << num(cfg.epsilon) << ',' << to_string(r.provider) << ',' << r.d
              << ',' << r.trials << ',' << num(r.mean_hops) << ',' << num(r.stderr_hops) << ','
              << num(r.failure_rate) << '\n';
    {
        auto f = dir.open("route.csv");
        f << table.str();
    }

    std::vector<HalvingEstimate> halving;
    for (auto delta : cfg.halving_deltas)
        halving.push_back(halving_probability(delta, *schedule, cfg.k, cfg.halving_trials,
                                              cfg.seed, workers, cfg.d0));
    {
        auto f = dir.open("halving.csv");
        f << "delta,trials,probability,stderr,scaled\n";
        for (std::size_t i = 0; i < halving.size(); ++i)
        {
            double const scaled = halving[i].probability
                                  * log_pow(std::log(static_cast<double>(cfg.halving_deltas[i])),
                                            1 + cfg.epsilon);
            f << cfg.halving_deltas[i] << ',' << halving[i].trials << ','
              << num(halving[i].probability) << ',' << num(halving[i].stderr_prob) << ','
              << num(scaled) << '\n';
        }
    }

    std::ostringstream text;
    double worst_failure = 0;
    for (auto kind : {ProviderKind::move_and_forget, ProviderKind::harmonic})
    {
        std::vector<std::pair<double, double>> pts;
        for (auto const& r : rows)
        {
            if (r.provider != kind)
                continue;
            pts.emplace_back(static_cast<double>(r.d), r.mean_hops);
            worst_failure = std::max(worst_failure, r.failure_rate);
        }
        try
        {
            PolylogFit const fit = fit_polylog(pts);
            text << to_string(kind) << "_polylog_exponent " << num(fit.exponent) << '\n'
                 << to_string(kind) << "_polylog_residual " << num(fit.residual) << '\n';
        }
        catch (std::invalid_argument const&)
        {
            text << to_string(kind) << "_polylog_exponent n/a\n";
        }
    }
    text << "max_failure_rate " << num(worst_failure) << '\n';
    {
        auto f = dir.open("summary.txt");
        f << text.str();
    }

    if (cfg.trace)
    {
        auto f = dir.open("traces.txt");
        f << "provider d hop node distance long_range\n";
        std::shared_ptr<const HarmonicBaseline> baseline =
            std::make_shared<const HarmonicBaseline>(LatticeConfig(cfg.k, cfg.side));
        for (auto kind : {ProviderKind::move_and_forget, ProviderKind::harmonic})
            for (std::size_t di = 0; di < cfg.distances.size(); ++di)
            {
                RoutingTrace const tr = run_route_trial(ex, kind, schedule, baseline, di, 0);
                for (std::size_t h = 0; h < tr.nodes.size(); ++h)
                    f << to_string(kind) << ' ' << cfg.distances[di] << ' ' << h << ' '
                      << to_string(tr.nodes[h]) << ' ' << tr.distances[h] << ' '
                      << (h == 0 ? 0 : static_cast<int>(tr.used_long_range[h - 1])) << '\n';
            }
    }

    if (cfg.format == "csv")
        report << table.str();
    else
        report << table.str() << text.str();
    return worst_failure > 0 ? 1 : 0;
}

int cmd_probe_f(RunConfig const& cfg, std::ostream& report, unsigned workers)
{
    validate(cfg);
    OutputDir dir(cfg);
    auto const schedule = make_schedule(cfg.epsilon, cfg.a_max);
    LinkLengthTable table(schedule, cfg.k);

    // The diagonal (d, ..., d) per distance; in k >= 2 also a mixed-parity
    // neighbour (d, d-1, d, ...) to exercise the zero set.
    std::vector<Displacement> probes;
    for (auto d : cfg.distances)
    {
        probes.emplace_back(std::vector<std::int64_t>(static_cast<std::size_t>(cfg.k), d));
        if (cfg.k >= 2)
        {
            Displacement m(std::vector<std::int64_t>(static_cast<std::size_t>(cfg.k), d));
            m[1] = d - 1;
            probes.push_back(std::move(m));
        }
    }
    std::vector<LinkValue> values(probes.size());
    parallel_for(probes.size(), workers, [&](std::size_t i) { values[i] = table.probe(probes[i]); });

    std::ostringstream csv;
    csv << "k,epsilon";
    for (int i = 1; i <= cfg.k; ++i)
        csv << ",d_" << i;
    csv << ",f,err,ratio,admissible\n";
    std::vector<double> x, y, ratios, scaled;
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (std::size_t i = 0; i < probes.size(); ++i)
    {
        Displacement const& d = probes[i];
        bool const admissible = parity_admissible(d);
        auto const m = static_cast<double>(linf_norm(d));
        std::int64_t min_abs = std::numeric_limits<std::int64_t>::max();
        for (auto v : d.x)
            min_abs = std::min(min_abs, v < 0 ? -v : v);
        std::string ratio = "";
        if (admissible && min_abs >= cfg.d0 && m > 1)
        {
            double const r = values[i].value * std::pow(m, cfg.k) * log_pow(std::log(m), 1 + cfg.epsilon);
            ratio = num(r);
            ratios.push_back(r);
            scaled.push_back(r / log_pow(std::log(m), 0.5 * cfg.k));
        }
        if (admissible && values[i].value > 0)
        {
            x.push_back(std::log(m));
            y.push_back(std::log(values[i].value));
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        csv << cfg.k << ',' << num(cfg.epsilon);
        for (auto v : d.x)
            csv << ',' << v;
        csv << ',' << num(values[i].value) << ',' << num(values[i].error) << ',' << ratio << ','
            << (admissible ? 1 : 0) << '\n';
    }
    {
        auto f = dir.open("probe_f.csv");
        f << csv.str();
    }

    std::ostringstream text;
    if (x.size() >= 2 && hi / lo >= 10)
    {
        LinearFit const fit = least_squares(x, y);
        text << "loglog_slope " << num(fit.slope) << '\n'
             << "loglog_residual " << num(fit.residual_rms) << '\n';
    }
    else
        text << "loglog_slope n/a\n";
    if (!ratios.empty())
    {
        text << "ratio_min " << num(*std::min_element(ratios.begin(), ratios.end())) << '\n'
             << "ratio_max " << num(*std::max_element(ratios.begin(), ratios.end())) << '\n'
             << "ratio_over_sqrt_log_max " << num(*std::max_element(scaled.begin(), scaled.end()))
             << '\n';
    }
    text << "max_error " << num(table.truncation_error()) << '\n';
    {
        auto f = dir.open("summary.txt");
        f << text.str();
    }
    if (cfg.format == "csv")
        report << csv.str();
    else
        report << csv.str() << text.str();
    return 0;
}

int run_command(RunConfig cfg, std::ostream& report, unsigned workers)
{
    apply_defaults(cfg);
    validate(cfg);
    if (cfg.command == "verify")
        return cmd_verify(cfg, report, workers);
    if (cfg.command == "simulate")
        return cmd_simulate(cfg, report, workers);
    if (cfg.command == "route")
        return cmd_route(cfg, report, workers);
    return cmd_probe_f(cfg, report, workers);
}

}  // namespace mnf
