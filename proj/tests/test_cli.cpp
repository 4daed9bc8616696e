#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dualsel/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace dualsel;
using namespace dualsel::cli;

namespace
{

struct Outcome
{
    int code = 0;
    std::string out;
    std::string err;
};

std::filesystem::path scratch_dir()
{
    const auto dir = std::filesystem::temp_directory_path() / "dualsel_test_cli";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string manifest_path(const std::string& name) { return (scratch_dir() / name).string(); }

Outcome invoke(std::vector<std::string> args, const std::string& manifest = "m.txt")
{
    args.push_back("--manifest");
    args.push_back(manifest_path(manifest));
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ','))
            fields.push_back(field);
        if (!line.empty() && line.back() == ',')
            fields.emplace_back();
        rows.push_back(fields);
    }
    return rows;
}

std::map<std::string, std::string> read_kv(const std::string& path)
{
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line))
    {
        const auto eq = line.find('=');
        if (eq != std::string::npos)
            kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

} // namespace

TEST_CASE("rho-db parsing")
{
    CHECK(parse_rho_db("20") == std::vector<double>{20.0});
    CHECK(parse_rho_db("-3.5") == std::vector<double>{-3.5});
    CHECK(parse_rho_db("10:50:10") == std::vector<double>{10, 20, 30, 40, 50});
    CHECK(parse_rho_db("0:1:0.25") == std::vector<double>{0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parse_rho_db("30:10:-10") == std::vector<double>{30, 20, 10});
    CHECK(parse_rho_db("5:5:1") == std::vector<double>{5});
    // 0.1 steps must still land on the end point
    CHECK(parse_rho_db("0:1:0.1").size() == 11);
    CHECK_THROWS_AS(parse_rho_db(""), UsageError);
    CHECK_THROWS_AS(parse_rho_db("abc"), UsageError);
    CHECK_THROWS_AS(parse_rho_db("1:2"), UsageError);
    CHECK_THROWS_AS(parse_rho_db("1:2:0"), UsageError);
    CHECK_THROWS_AS(parse_rho_db("1:2:-1"), UsageError);
}

TEST_CASE("defaults")
{
    const Options o = parse_args({});
    CHECK(o.mode == Mode::esr);
    CHECK(o.engine == Engine::both);
    CHECK(o.num_users == 4);
    CHECK(o.rho_db == std::vector<double>{20.0});
    CHECK(o.trials == 10000);
    CHECK(o.units == Units::nats);
}

TEST_CASE("usage errors exit with code 2")
{
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"--mode", "bogus"},
             {"--engine", "nope"},
             {"--k", "1"},
             {"--k", "4", "--served", "5"},
             {"--k", "4", "--served", "0"},
             {"--mode", "sweep-n", "--served", "2"},
             {"--mode", "select", "--engine", "tdma"},
             {"--trials", "0"},
             {"--units", "furlongs"},
             {"--rho-db", "1:2"},
             {"--tol", "-1"},
             {"--unknown-flag"},
             {"--k", "four"},
         })
    {
        const Outcome r = invoke(args);
        CAPTURE(args.front());
        CHECK(r.code == kExitUsage);
        CHECK(r.out.empty());
        CHECK_FALSE(r.err.empty());
    }
}

TEST_CASE("capability error for too many users")
{
    const Outcome r = invoke({"--k", "21", "--served", "3", "--engine", "analytic"});
    CHECK(r.code == kExitCapability);
    CHECK(r.err.find("capability") != std::string::npos);
}

TEST_CASE("numerical failure exits with code 4")
{
    // a tolerance far below double resolution exhausts the quadrature budget
    const Outcome r = invoke({"--k", "4", "--served", "2", "--engine", "analytic", "--tol", "1e-30"});
    CHECK(r.code == kExitNumerical);
    CHECK(r.err.find("numerical") != std::string::npos);
}

TEST_CASE("help")
{
    const Outcome r = invoke({"--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("--rho-db") != std::string::npos);
}

TEST_CASE("csv header and row formatting")
{
    const Outcome r = invoke({"--k", "4", "--served", "3", "--engine", "analytic"});
    REQUIRE(r.code == kExitOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(r.out.substr(0, r.out.find('\n')) == kCsvHeader);
    CHECK(rows[1].size() == 8);
    CHECK(rows[1][0] == "analytic");
    CHECK(rows[1][5].empty());
    CHECK(rows[1][6].empty());
    CHECK(rows[1][7].empty());
    CHECK(std::abs(std::stod(rows[1][4]) - 2.1086605356) < 1e-9);

    const CsvRow row{"mc", 4, 3, 20.0, std::log(2.0), 0.001, 123, 9};
    CHECK(format_row(row, Units::nats) == "mc,4,3,20,0.6931471806,0.0010000000,123,9");
    CHECK(format_row(row, Units::bits).substr(0, 20) == "mc,4,3,20,1.00000000");
}

TEST_CASE("sweep over served index")
{
    const Outcome r = invoke({"--mode", "sweep-n", "--k", "4", "--rho-db", "20", "--engine", "analytic"});
    REQUIRE(r.code == kExitOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 5);
    int best = 0;
    double best_value = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        CHECK(std::stoi(rows[i][2]) == static_cast<int>(i));
        const double v = std::stod(rows[i][4]);
        CHECK(v >= 0.0);
        if (v > best_value)
        {
            best_value = v;
            best = std::stoi(rows[i][2]);
        }
    }
    CHECK(best == 3);
}

TEST_CASE("Monte Carlo output is byte-identical across runs and worker counts")
{
    const std::vector<std::string> base = {"--mode", "esr", "--k", "4", "--served", "3", "--rho-db", "20",
                                           "--engine", "mc", "--trials", "10000", "--seed", "42"};
    const Outcome a = invoke(base);
    const Outcome b = invoke(base);
    auto with_workers = base;
    with_workers.insert(with_workers.end(), {"--workers", "3"});
    const Outcome c = invoke(with_workers);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    const auto rows = parse_csv(a.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][6] == "10000");
    CHECK(rows[1][7] == "42");
    CHECK_FALSE(rows[1][5].empty());
}

TEST_CASE("sweep over rho with both engines")
{
    const Outcome r = invoke({"--mode", "sweep-rho", "--k", "8", "--served", "7", "--rho-db", "10:50:10",
                              "--engine", "both", "--trials", "100000"});
    REQUIRE(r.code == kExitOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 11);
    for (std::size_t i = 1; i + 1 < rows.size(); i += 2)
    {
        CHECK(rows[i][0] == "analytic");
        CHECK(rows[i + 1][0] == "mc");
        CHECK(rows[i][3] == rows[i + 1][3]);
        const double gap = std::abs(std::stod(rows[i][4]) - std::stod(rows[i + 1][4]));
        CAPTURE(rows[i][3]);
        CHECK(gap <= 3 * std::stod(rows[i + 1][5]));
    }
}

TEST_CASE("tdma and high-snr engines")
{
    const Outcome t = invoke({"--k", "2", "--engine", "tdma", "--rho-db", "60"});
    REQUIRE(t.code == kExitOk);
    const auto rows = parse_csv(t.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1][0] == "tdma-exact");
    CHECK(rows[2][0] == "tdma-hi-corrected");
    CHECK(rows[3][0] == "tdma-hi-flipped");
    CHECK(std::abs(std::stod(rows[2][4]) - std::log(2.0)) < 1e-9);
    CHECK(std::stod(rows[3][4]) == 0.0);

    const Outcome h = invoke({"--k", "4", "--served", "3", "--engine", "high-snr", "--rho-db", "50"});
    REQUIRE(h.code == kExitOk);
    CHECK(parse_csv(h.out)[1][0] == "high-snr");
}

TEST_CASE("select mode")
{
    const Outcome r = invoke({"--mode", "select", "--k", "4", "--engine", "analytic"});
    REQUIRE(r.code == kExitOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[5][0] == "analytic-best");
    CHECK(rows[5][2] == "3");
}

TEST_CASE("compare mode reports agreement")
{
    const Outcome r = invoke({"--mode", "compare", "--k", "4", "--served", "2", "--rho-db", "10",
                              "--trials", "200000", "--seed", "3"});
    REQUIRE(r.code == kExitOk);
    CHECK(parse_csv(r.out).size() == 3);
    CHECK(r.err.find("compare K=4 n=2") != std::string::npos);
    CHECK(r.err.find(" ok") != std::string::npos);

    const AgreementReport report = compare_engines(SystemConfig(4, 3, 100.0), 100000, 7);
    REQUIRE(report.points.size() == 1);
    const auto& p = report.points.front();
    CHECK(p.z_score == doctest::Approx(std::abs(p.analytic - p.montecarlo) / p.std_error));
    CHECK(report.all_within == (report.max_z <= 3.0));
}

TEST_CASE("manifest contents and replay")
{
    const std::vector<std::string> args = {"--mode", "sweep-n", "--k", "3", "--engine", "both",
                                           "--trials", "5000", "--seed", "77", "--units", "bits"};
    const Outcome first = invoke(args, "replay.txt");
    REQUIRE(first.code == kExitOk);

    const auto kv = read_kv(manifest_path("replay.txt"));
    CHECK(kv.count("tool_version") == 1);
    CHECK(kv.count("invocation") == 1);
    CHECK(kv.count("started") == 1);
    CHECK(kv.count("finished") == 1);
    CHECK(kv.at("seed") == "77");
    CHECK(kv.at("rows_emitted") == std::to_string(parse_csv(first.out).size() - 1));

    const Outcome again = invoke({"--replay", manifest_path("replay.txt"), "--workers", "2"}, "replayed.txt");
    REQUIRE(again.code == kExitOk);
    CHECK(again.out == first.out);
    CHECK(read_kv(manifest_path("replayed.txt")).at("args") == kv.at("args"));

    const Outcome missing = invoke({"--replay", manifest_path("does-not-exist.txt")});
    CHECK(missing.code == kExitUsage);
}

TEST_CASE("canonical args round-trip through the parser")
{
    const Options o = parse_args({"--mode", "compare", "--k", "6", "--served", "2", "--rho-db", "0:20:5",
                                  "--tol", "1e-8", "--workers", "5"});
    const Options back = parse_args(canonical_args(o));
    CHECK(canonical_args(back) == canonical_args(o));
    CHECK(back.rho_db == o.rho_db);
    CHECK(back.tol == o.tol);
    CHECK(back.served == o.served);
}
