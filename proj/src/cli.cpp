#include "dualsel/cli.hpp"

#include "dualsel/errors.hpp"
#include "dualsel/selection.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef DUALSEL_VERSION
#define DUALSEL_VERSION "dev"
#endif

namespace dualsel::cli
{

namespace
{

const std::map<std::string, Mode> kModes = {
    {"esr", Mode::esr},       {"sweep-n", Mode::sweep_n}, {"sweep-rho", Mode::sweep_rho},
    {"select", Mode::select}, {"compare", Mode::compare},
};

const std::map<std::string, Engine> kEngines = {
    {"analytic", Engine::analytic}, {"mc", Engine::mc},     {"high-snr", Engine::high_snr},
    {"tdma", Engine::tdma},         {"both", Engine::both},
};

const std::map<std::string, Units> kUnits = {{"nats", Units::nats}, {"bits", Units::bits}};

template <class Enum>
std::string name_of(const std::map<std::string, Enum>& table, Enum value)
{
    for (const auto& [name, v] : table)
        if (v == value)
            return name;
    return "?";
}

struct HelpRequested
{
    std::string text;
};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string format_double(const char* fmt, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, value);
    return buf;
}

double parse_number(std::string_view text)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
        throw UsageError("invalid number '" + std::string(text) + "' in --rho-db");
    return value;
}

std::string iso_utc(std::chrono::system_clock::time_point when)
{
    const std::time_t t = std::chrono::system_clock::to_time_t(when);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join(const std::vector<std::string>& parts)
{
    std::string out;
    for (const auto& p : parts)
    {
        if (!out.empty())
            out += ' ';
        out += p;
    }
    return out;
}

// Row builders for one (K, n, rho) point.

CsvRow analytic_row(int k, int n, double db, double tol)
{
    const EsrValue v = esr_exact(SystemConfig(k, n, db_to_linear(db)), ThetaForm::exact, tol);
    return {"analytic", k, n, db, v.value, {}, {}, {}};
}

montecarlo::EsrEstimate mc_estimate(const SystemConfig& cfg, std::uint64_t trials,
                                    std::uint64_t seed, unsigned workers)
{
    if (cfg.is_tdma())
        return montecarlo::estimate_esr_tdma(cfg.num_users(), cfg.rho(), trials, seed, workers);
    return montecarlo::estimate_esr(cfg, trials, seed, workers);
}

CsvRow mc_row(std::string mode, int k, int n, double db, const montecarlo::EsrEstimate& e)
{
    return {std::move(mode), k, n, db, e.esr, e.std_error, e.trials, e.seed};
}

CsvRow high_snr_row(int k, int n, double db)
{
    const EsrValue v = esr_high_snr(SystemConfig(k, n, db_to_linear(db)));
    return {"high-snr", k, n, db, v.value, {}, {}, {}};
}

std::vector<CsvRow> tdma_rows(int k, double db)
{
    return {
        {"tdma-exact", k, k, db, esr_tdma_exact(k, db_to_linear(db)).value, {}, {}, {}},
        {"tdma-hi-corrected", k, k, db, esr_tdma_high_snr(k, TdmaVariant::corrected).value, {}, {}, {}},
        {"tdma-hi-flipped", k, k, db, esr_tdma_high_snr(k, TdmaVariant::flipped_sign).value, {}, {}, {}},
    };
}

struct JobOutput
{
    std::vector<CsvRow> rows;
    std::string diag;
};

struct Job
{
    bool uses_mc = false;
    std::function<JobOutput()> run;
};

int served_or_default(const Options& o) { return o.served.value_or(o.num_users - 1); }

// Jobs for one evaluation point of esr / sweep-n / sweep-rho.
void add_point_jobs(std::vector<Job>& jobs, const Options& o, int n, double db)
{
    const int k = o.num_users;
    const auto tol = o.tol;
    switch (o.engine)
    {
    case Engine::analytic:
        jobs.push_back({false, [=] { return JobOutput{{analytic_row(k, n, db, tol)}, {}}; }});
        break;
    case Engine::high_snr:
        jobs.push_back({false, [=] { return JobOutput{{high_snr_row(k, n, db)}, {}}; }});
        break;
    case Engine::mc:
        jobs.push_back({true, [=] {
                            const auto e = mc_estimate(SystemConfig(k, n, db_to_linear(db)),
                                                       o.trials, o.seed, o.workers);
                            return JobOutput{{mc_row("mc", k, n, db, e)}, {}};
                        }});
        break;
    case Engine::tdma:
        jobs.push_back({false, [=] { return JobOutput{tdma_rows(k, db), {}}; }});
        break;
    case Engine::both:
        jobs.push_back({false, [=] { return JobOutput{{analytic_row(k, n, db, tol)}, {}}; }});
        jobs.push_back({true, [=] {
                            const auto e = mc_estimate(SystemConfig(k, n, db_to_linear(db)),
                                                       o.trials, o.seed, o.workers);
                            return JobOutput{{mc_row("mc", k, n, db, e)}, {}};
                        }});
        break;
    }
}

void add_select_job(std::vector<Job>& jobs, const Options& o, Method method, double db)
{
    const std::string label = method == Method::analytic   ? "analytic"
                              : method == Method::high_snr ? "high-snr"
                                                           : "mc";
    const int k = o.num_users;
    SelectionOptions sel;
    sel.trials = o.trials;
    sel.seed = o.seed;
    sel.workers = o.workers;
    sel.tol = o.tol;
    jobs.push_back({method == Method::montecarlo, [=] {
                        const SelectionResult r = select_served(k, db_to_linear(db), method, sel);
                        JobOutput out;
                        auto row_of = [&](const Candidate& c, const std::string& mode) {
                            if (const auto* e = std::get_if<montecarlo::EsrEstimate>(&c.esr))
                                return mc_row(mode, k, c.served_index, db, *e);
                            return CsvRow{mode, k, c.served_index, db, c.value(), {}, {}, {}};
                        };
                        for (const auto& c : r.esr_by_n)
                            out.rows.push_back(row_of(c, label));
                        out.rows.push_back(row_of(
                            r.esr_by_n[static_cast<std::size_t>(r.best_n - 1)], label + "-best"));
                        return out;
                    }});
}

void add_compare_job(std::vector<Job>& jobs, const Options& o, double db)
{
    const int k = o.num_users;
    const int n = served_or_default(o);
    jobs.push_back({true, [=] {
                        const AgreementReport report = compare_engines(
                            SystemConfig(k, n, db_to_linear(db)), o.trials, o.seed, o.workers, o.tol);
                        JobOutput out;
                        std::ostringstream diag;
                        for (const auto& p : report.points)
                        {
                            out.rows.push_back({"analytic", k, n, db, p.analytic, {}, {}, {}});
                            out.rows.push_back(
                                {"mc", k, n, db, p.montecarlo, p.std_error, o.trials, o.seed});
                            diag << "compare K=" << k << " n=" << n << " rho_db="
                                 << format_double("%.6g", db) << " analytic="
                                 << format_double("%.10f", p.analytic)
                                 << " mc=" << format_double("%.10f", p.montecarlo)
                                 << " stderr=" << format_double("%.3e", p.std_error)
                                 << " z=" << format_double("%.3f", p.z_score)
                                 << (p.within ? " ok" : " EXCEEDS-3-STDERR") << '\n';
                        }
                        out.diag = diag.str();
                        return out;
                    }});
}

std::vector<JobOutput> run_jobs(const std::vector<Job>& jobs, unsigned workers)
{
    std::vector<JobOutput> results(jobs.size());

    // Closed-form jobs fan out over a small pool; Monte Carlo jobs are already
    // parallel inside and run one at a time.
    std::vector<std::size_t> closed_form;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!jobs[i].uses_mc)
            closed_form.push_back(i);

    if (workers == montecarlo::kAutoWorkers)
        workers = std::max(1u, std::thread::hardware_concurrency());
    const auto threads = std::min<std::size_t>(workers, closed_form.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto drain = [&] {
        for (std::size_t idx = next.fetch_add(1); idx < closed_form.size(); idx = next.fetch_add(1))
        {
            try
            {
                results[closed_form[idx]] = jobs[closed_form[idx]].run();
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    if (threads <= 1)
    {
        drain();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(drain);
    }
    if (failure)
        std::rethrow_exception(failure);

    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (jobs[i].uses_mc)
            results[i] = jobs[i].run();
    return results;
}

void write_manifest(const Options& o, const std::vector<std::string>& raw_args,
                    std::chrono::system_clock::time_point started,
                    std::chrono::system_clock::time_point finished, std::size_t rows)
{
    std::ofstream file(o.manifest_path);
    if (!file)
        throw std::runtime_error("cannot write manifest to '" + o.manifest_path + "'");
    file << "tool_version=" << DUALSEL_VERSION << '\n'
         << "invocation=" << join(raw_args) << '\n'
         << "args=" << join(canonical_args(o)) << '\n'
         << "seed=" << o.seed << '\n'
         << "started=" << iso_utc(started) << '\n'
         << "finished=" << iso_utc(finished) << '\n'
         << "rows_emitted=" << rows << '\n';
}

} // namespace

std::vector<double> parse_rho_db(std::string_view spec)
{
    const auto first = spec.find(':');
    if (first == std::string_view::npos)
        return {parse_number(spec)};
    const auto second = spec.find(':', first + 1);
    if (second == std::string_view::npos || spec.find(':', second + 1) != std::string_view::npos)
        throw UsageError("--rho-db range must have the form a:b:c");

    const double start = parse_number(spec.substr(0, first));
    const double stop = parse_number(spec.substr(first + 1, second - first - 1));
    const double step = parse_number(spec.substr(second + 1));
    if (step == 0.0 || (stop - start) * step < 0.0)
        throw UsageError("--rho-db step must be nonzero and point from a towards b");

    const double span = (stop - start) / step;
    if (span > 1e6)
        throw UsageError("--rho-db range has too many points");
    const auto count = static_cast<long>(std::floor(span + 1e-9)) + 1;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        values.push_back(start + static_cast<double>(i) * step);
    return values;
}

Options parse_args(const std::vector<std::string>& args)
{
    Options o;
    std::string mode = "esr";
    std::string engine = "both";
    std::string units = "nats";
    int served = 0;
    std::string replay;

    CLI::App app{"Uplink secrecy with a jamming user: ergodic secrecy rate analysis and simulation",
                 "dualsel"};
    app.add_option("--mode", mode, "esr | sweep-n | sweep-rho | select | compare")
        ->check(CLI::IsMember({"esr", "sweep-n", "sweep-rho", "select", "compare"}));
    app.add_option("--engine", engine, "analytic | mc | high-snr | tdma | both")
        ->check(CLI::IsMember({"analytic", "mc", "high-snr", "tdma", "both"}));
    app.add_option("--k", o.num_users, "number of users K");
    auto* served_opt = app.add_option("--served", served, "served user index n (default K-1)");
    app.add_option("--rho-db", o.rho_db_spec, "transmit SNR in dB: VAL or a:b:c");
    app.add_option("--trials", o.trials, "Monte Carlo trials per point");
    app.add_option("--seed", o.seed, "Monte Carlo seed (64-bit)");
    app.add_option("--units", units, "nats | bits")->check(CLI::IsMember({"nats", "bits"}));
    app.add_option("--manifest", o.manifest_path, "where to write the run manifest");
    app.add_option("--tol", o.tol, "absolute quadrature tolerance");
    app.add_option("--workers", o.workers, "worker threads (0 = all cores); output is unaffected");
    auto* replay_opt = app.add_option("--replay", replay, "re-run the flags recorded in a manifest");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        throw HelpRequested{app.help()};
    }
    catch (const CLI::ParseError& e)
    {
        throw UsageError(e.what());
    }

    o.mode = kModes.at(mode);
    o.engine = kEngines.at(engine);
    o.units = kUnits.at(units);
    if (replay_opt->count() > 0)
        o.replay_path = replay;

    if (o.num_users < 2)
        throw UsageError("--k must be at least 2");
    if (served_opt->count() > 0)
    {
        if (o.mode == Mode::sweep_n || o.mode == Mode::select)
            throw UsageError("--served has no meaning in mode " + mode);
        if (served < 1 || served > o.num_users)
            throw UsageError("--served must lie in [1, K]");
        o.served = served;
    }
    if (o.mode == Mode::select && o.engine == Engine::tdma)
        throw UsageError("--engine tdma cannot drive a served-user search");
    if (o.trials < 1)
        throw UsageError("--trials must be at least 1");
    if (!(o.tol > 0.0))
        throw UsageError("--tol must be positive");
    o.rho_db = parse_rho_db(o.rho_db_spec);
    return o;
}

std::vector<std::string> canonical_args(const Options& o)
{
    std::vector<std::string> args = {
        "--mode", name_of(kModes, o.mode), "--engine", name_of(kEngines, o.engine),
        "--k",    std::to_string(o.num_users),
    };
    if (o.served)
    {
        args.emplace_back("--served");
        args.push_back(std::to_string(*o.served));
    }
    args.insert(args.end(), {"--rho-db", o.rho_db_spec, "--trials", std::to_string(o.trials),
                             "--seed", std::to_string(o.seed), "--units", name_of(kUnits, o.units),
                             "--tol", format_double("%.17g", o.tol)});
    return args;
}

std::string format_row(const CsvRow& row, Units units)
{
    const double scale = units == Units::bits ? 1.0 / std::log(2.0) : 1.0;
    std::string line = row.mode;
    line += ',' + std::to_string(row.num_users);
    line += ',' + std::to_string(row.served_index);
    line += ',' + format_double("%.6g", row.rho_db);
    line += ',' + format_double("%.10f", row.esr_nats * scale);
    line += ',' + (row.std_error ? format_double("%.10f", *row.std_error * scale) : std::string());
    line += ',' + (row.trials ? std::to_string(*row.trials) : std::string());
    line += ',' + (row.seed ? std::to_string(*row.seed) : std::string());
    return line;
}

AgreementReport compare_engines(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                                unsigned workers, double tol, double threshold)
{
    const double analytic = esr_exact(cfg, ThetaForm::exact, tol).value;
    const auto mc = mc_estimate(cfg, trials, seed, workers);

    AgreementPoint p;
    p.num_users = cfg.num_users();
    p.served_index = cfg.served_index();
    p.rho_db = 10.0 * std::log10(cfg.rho());
    p.analytic = analytic;
    p.montecarlo = mc.esr;
    p.std_error = mc.std_error;
    const double gap = std::abs(analytic - mc.esr);
    p.z_score = mc.std_error > 0.0 ? gap / mc.std_error
                                   : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    p.within = p.z_score <= threshold;

    AgreementReport report;
    report.points.push_back(p);
    report.max_z = p.z_score;
    report.all_within = p.within;
    return report;
}

std::vector<CsvRow> evaluate(const Options& o, std::ostream& diag)
{
    if (o.num_users > kMaxUsers)
        throw CapabilityError("K = " + std::to_string(o.num_users) +
                              " exceeds the supported maximum of " + std::to_string(kMaxUsers));

    std::vector<Job> jobs;
    for (const double db : o.rho_db)
    {
        switch (o.mode)
        {
        case Mode::esr:
        case Mode::sweep_rho:
            add_point_jobs(jobs, o, served_or_default(o), db);
            break;
        case Mode::sweep_n:
            if (o.engine == Engine::tdma)
                add_point_jobs(jobs, o, o.num_users, db);
            else
                for (int n = 1; n <= o.num_users; ++n)
                    add_point_jobs(jobs, o, n, db);
            break;
        case Mode::select:
            if (o.engine == Engine::both)
            {
                add_select_job(jobs, o, Method::analytic, db);
                add_select_job(jobs, o, Method::montecarlo, db);
            }
            else
            {
                add_select_job(jobs, o,
                               o.engine == Engine::analytic   ? Method::analytic
                               : o.engine == Engine::high_snr ? Method::high_snr
                                                              : Method::montecarlo,
                               db);
            }
            break;
        case Mode::compare:
            add_compare_job(jobs, o, db);
            break;
        }
    }

    std::vector<CsvRow> rows;
    for (auto& out : run_jobs(jobs, o.workers))
    {
        diag << out.diag;
        rows.insert(rows.end(), std::make_move_iterator(out.rows.begin()),
                    std::make_move_iterator(out.rows.end()));
    }
    return rows;
}

std::vector<std::string> read_manifest_args(const std::string& path)
{
    std::ifstream file(path);
    if (!file)
        throw UsageError("cannot read manifest '" + path + "'");
    std::string line;
    while (std::getline(file, line))
    {
        if (line.rfind("args=", 0) != 0)
            continue;
        std::istringstream fields(line.substr(5));
        std::vector<std::string> args;
        for (std::string token; fields >> token;)
            args.push_back(token);
        return args;
    }
    throw UsageError("manifest '" + path + "' has no args= line");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    const auto started = std::chrono::system_clock::now();
    try
    {
        Options o = parse_args(args);
        if (o.replay_path)
        {
            Options replayed = parse_args(read_manifest_args(*o.replay_path));
            replayed.manifest_path = o.manifest_path;
            replayed.workers = o.workers;
            o = std::move(replayed);
        }

        const std::vector<CsvRow> rows = evaluate(o, err);
        std::string csv;
        csv += kCsvHeader;
        csv += '\n';
        for (const auto& row : rows)
            csv += format_row(row, o.units) + '\n';
        out << csv << std::flush;

        write_manifest(o, args, started, std::chrono::system_clock::now(), rows.size());
        return kExitOk;
    }
    catch (const HelpRequested& help)
    {
        out << help.text;
        return kExitOk;
    }
    catch (const UsageError& e)
    {
        err << "usage error: " << e.what() << "\nrun with --help for the flag list\n";
        return kExitUsage;
    }
    catch (const DomainError& e)
    {
        err << "domain error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const CapabilityError& e)
    {
        err << "capability error: " << e.what() << '\n';
        return kExitCapability;
    }
    catch (const NumericalError& e)
    {
        err << "numerical error: " << e.what() << " (best estimate "
            << format_double("%.12g", e.best_estimate()) << ", error bound "
            << format_double("%.3g", e.error_bound()) << ")\n";
        return kExitNumerical;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace dualsel::cli
