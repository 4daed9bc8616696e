#pragma once

#include "dualsel/analytic.hpp"
#include "dualsel/montecarlo.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dualsel::cli
{

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCapability = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr std::string_view kCsvHeader = "mode,K,n,rho_db,esr_nats,stderr,trials,seed";

class UsageError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class Mode
{
    esr,
    sweep_n,
    sweep_rho,
    select,
    compare,
};

enum class Engine
{
    analytic,
    mc,
    high_snr,
    tdma,
    both,
};

enum class Units
{
    nats,
    bits,
};

struct Options
{
    Mode mode = Mode::esr;
    Engine engine = Engine::both;
    int num_users = 4;
    std::optional<int> served;
    std::string rho_db_spec = "20";
    std::vector<double> rho_db = {20.0};
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    Units units = Units::nats;
    std::string manifest_path = "run-manifest.txt";
    std::optional<std::string> replay_path;
    double tol = specfun::kDefaultTolerance;
    unsigned workers = montecarlo::kAutoWorkers;
};

/// "VAL" or "a:b:c" (inclusive range a..b in steps of c).
std::vector<double> parse_rho_db(std::string_view spec);

/// Parses flags (without the program name). Throws UsageError.
Options parse_args(const std::vector<std::string>& args);

/// Flags that fully determine the CSV; worker count and file paths excluded.
std::vector<std::string> canonical_args(const Options& options);

struct CsvRow
{
    std::string mode;
    int num_users = 0;
    int served_index = 0;
    double rho_db = 0.0;
    double esr_nats = 0.0;
    std::optional<double> std_error;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
};

std::string format_row(const CsvRow& row, Units units);

/// Runs the experiment described by options and returns its rows in
/// deterministic order. Agreement report lines for compare mode go to diag.
std::vector<CsvRow> evaluate(const Options& options, std::ostream& diag);

struct AgreementPoint
{
    int num_users = 0;
    int served_index = 0;
    double rho_db = 0.0;
    double analytic = 0.0;
    double montecarlo = 0.0;
    double std_error = 0.0;
    double z_score = 0.0; // |analytic - MC| / stderr
    bool within = false;  // z_score <= threshold
};

struct AgreementReport
{
    std::vector<AgreementPoint> points;
    double max_z = 0.0;
    bool all_within = true;
};

AgreementReport compare_engines(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                                unsigned workers = montecarlo::kAutoWorkers,
                                double tol = specfun::kDefaultTolerance, double threshold = 3.0);

/// Reads the recorded flag list back from a manifest file.
std::vector<std::string> read_manifest_args(const std::string& path);

/// Full front end: parse, evaluate, print CSV to out, write the manifest.
/// Returns the process exit code; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dualsel::cli
