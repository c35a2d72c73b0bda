#include "dfsqkd/cli.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace dfsqkd;
using namespace dfsqkd::cli;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields_of(const std::string& row) {
    std::vector<std::string> out;
    std::istringstream is(row);
    for (std::string f; std::getline(is, f, ',');) out.push_back(f);
    return out;
}

}  // namespace

TEST_CASE("empty configuration gives the defaults") {
    const auto c = parse_config("");
    CHECK(c.mode == Mode::fig1_sweep);
    CHECK(c.lambda == 0.1);
    CHECK(c.lambda_prime == 0.01);
    CHECK(c.k_db_per_km == 0.2);
    CHECK(c.dark_count == 1e-6);
    CHECK(c.q == 0.5);
    CHECK(c.f_ec == 1.2);
    CHECK(c.l_start == 0.0);
    CHECK(c.l_end == 60.0);
    CHECK(c.l_step == 1.0);
    CHECK(c.out.empty());
    CHECK(c.eq20_variant == DarkCountTerm::squared_dark);
    CHECK(c.lengths().size() == 61);
}

TEST_CASE("file values override defaults and flags override the file") {
    const auto c = parse_config("lambda = 0.2  # brighter\n\n# comment only\nl_end=10\nmode=pns_limit\n",
                                {{"lambda", "0.3"}, {"eq20_variant", "as_printed"}});
    CHECK(c.lambda == 0.3);
    CHECK(c.l_end == 10.0);
    CHECK(c.mode == Mode::pns_limit);
    CHECK(c.eq20_variant == DarkCountTerm::as_printed);
}

TEST_CASE("malformed configuration is rejected") {
    CHECK_THROWS_AS(parse_config("colour=blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda=0.1x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda=\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda=0.1\nlambda=0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode=sweep\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("diagnostics=maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("eq20_variant=cubed\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("", {{"bogus", "1"}}), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda=nan\n"), ConfigError);
}

TEST_CASE("constraint violations are rejected") {
    for (const char* text : {"lambda=0.01\nlambda_prime=0.1\n", "lambda_prime=0\n", "lambda=0.05\nlambda_prime=0.05\n",
                             "k_db_per_km=0\n", "dark_count=1\n", "dark_count=-1e-6\n", "q=0\n", "q=1.5\n",
                             "f_ec=0.9\n", "l_start=-1\n", "l_start=10\nl_end=5\n", "l_step=0\n",
                             "attack_tolerance=-1\n", "attack_success=2\n", "tail_bound=0\n",
                             "grid_lambda=0.1,0\n"}) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
}

TEST_CASE("grid lists parse") {
    const auto c = parse_config("grid_lambda=0.05, 0.1,0.3\ngrid_lambda_prime=0.01,0.02\n");
    CHECK(c.grid_lambda == std::vector<double>{0.05, 0.1, 0.3});
    CHECK(c.grid_lambda_prime == std::vector<double>{0.01, 0.02});
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0.00000000000e+00");
    CHECK(format_number(-1.5e-7) == "-1.50000000000e-07");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("sweep rows follow the header") {
    const auto text = run_fig1_sweep(parse_config("l_end=20\nl_step=5\n"));
    const auto lines = lines_of(text);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == kFig1Header);
    const auto columns = fields_of(lines[0]).size();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = fields_of(lines[i]);
        REQUIRE(f.size() == columns);
        CHECK(std::stod(f[0]) == doctest::Approx(5.0 * (i - 1)));
        CHECK(std::stod(f[5]) >= 0.0);
        CHECK(std::stod(f[8]) >= 0.0);
    }
}

TEST_CASE("single-distance sweep") {
    const auto lines = lines_of(run_fig1_sweep(parse_config("l_start=12\nl_end=12\n")));
    REQUIRE(lines.size() == 2);
    CHECK(fields_of(lines[1])[0] == format_number(12.0));
}

TEST_CASE("sweep output is deterministic") {
    const auto c = parse_config("");
    CHECK(run_fig1_sweep(c) == run_fig1_sweep(c));
}

TEST_CASE("diagnostic columns expose unclamped values") {
    const auto lines = lines_of(run_fig1_sweep(parse_config("l_start=30\nl_end=30\ndiagnostics=true\n")));
    REQUIRE(lines.size() == 2);
    const auto head = fields_of(lines[0]);
    const auto row = fields_of(lines[1]);
    REQUIRE(head.size() == 15);
    REQUIRE(row.size() == 15);
    CHECK(head[9] == "S1_lower_nodecoy.diag");
    CHECK(std::stod(row[3]) == 0.0);
    CHECK(std::stod(row[9]) == doctest::Approx(-0.07079249298).epsilon(1e-9));
    CHECK(row[10] == "nan");
}

TEST_CASE("bounds table stays on the right side of the truth") {
    const auto lines = lines_of(run_bounds_table(parse_config("l_end=40\nl_step=10\n")));
    REQUIRE(lines.size() == 6);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = fields_of(lines[i]);
        REQUIRE(f.size() == 9);
        const double s1 = std::stod(f[1]), e1 = std::stod(f[2]);
        for (std::size_t j : {3u, 5u, 7u}) CHECK(std::stod(f[j]) <= s1 * (1 + 1e-9));
        for (std::size_t j : {4u, 6u, 8u}) CHECK(std::stod(f[j]) >= e1 * (1 - 1e-9));
    }
}

TEST_CASE("optimize report names the best grid point") {
    const auto text = run_optimize(parse_config("l_start=20\n"));
    CHECK(text.find("# best three_intensity: lambda=" + format_number(0.1)) != std::string::npos);
    CHECK(text.find("# best two_intensity: lambda=" + format_number(0.05)) != std::string::npos);
    const auto far = run_optimize(parse_config("l_start=200\nl_end=200\n"));
    CHECK(far.find("no positive key rate on the grid") != std::string::npos);
}

TEST_CASE("attack verification passes at the default tolerance") {
    const auto r = run_attack_verify(parse_config(""));
    CHECK(r.pass);
    CHECK(r.text.find("VERDICT: PASS") != std::string::npos);
    CHECK(r.text.find("FAIL") == std::string::npos);
    // sign structure of the intermediate states
    CHECK(r.text.find("minus: (+2.000000+0.000000i) X (-1.000000+0.000000i) Y") != std::string::npos);
    CHECK(r.text.find("one: (+2.000000+0.000000i) X' (+0.000000-1.000000i) Y") != std::string::npos);
}

TEST_CASE("zero tolerance cannot be met") {
    const auto r = run_attack_verify(parse_config("attack_tolerance=0\n"));
    CHECK_FALSE(r.pass);
    CHECK(r.text.find("VERDICT: FAIL") != std::string::npos);
}

TEST_CASE("PNS report") {
    const auto r = run(parse_config("mode=pns_limit\n"));
    CHECK(r.pass);
    CHECK(r.text.find("closed_form_km=3.47045") != std::string::npos);
    CHECK(r.text.find("quoted_km=" + format_number(37.4)) != std::string::npos);
    const auto unbounded = run(parse_config("mode=pns_limit\nattack_success=0\n"));
    CHECK(unbounded.pass);
    CHECK(unbounded.text.find("closed_form_km=inf") != std::string::npos);
}

TEST_CASE("output file handling") {
    auto c = parse_config("");
    CHECK_FALSE(write_output(c, "x"));
    const auto path = std::filesystem::temp_directory_path() / "dfsqkd_cli_test.csv";
    c.out = path.string();
    CHECK(write_output(c, "hello\n"));
    std::ifstream f(path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(content == "hello\n");
    std::filesystem::remove(path);
    c.out = "/nonexistent-dir/out.csv";
    CHECK_THROWS_AS(write_output(c, "x"), OutputError);
}
