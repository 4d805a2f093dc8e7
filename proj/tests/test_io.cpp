#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "robustarma/io.hpp"
#include "robustarma/rng.hpp"
#include "robustarma/types.hpp"
#include "test_support.hpp"

using robustarma::BiasCurves;
using robustarma::IfCurve;
using robustarma::McMethodStats;
using robustarma::McReport;
using robustarma::McScenarioResult;
using robustarma::OrderSelection;
using robustarma::Series;
using robustarma::format_full;
using robustarma::parameter_names;
using robustarma::parse_error;
using robustarma::read_series;
using robustarma::write_series;
using testsupport::temp_path;
using testsupport::write_file;

TEST_CASE("series files round-trip bit for bit") {
    robustarma::Rng rng(424242u);
    Series y;
    y.values.resize(10000);
    for (double& v : y.values) v = 1e3 * (rng.uniform() - 0.5) * rng.normal();
    y.values[0] = 1.0 / 3.0;
    y.values[1] = -0.0;
    y.values[2] = 1e-308;
    y.values[3] = 12345678.909876543;

    const std::string path = temp_path("roundtrip.dat");
    write_series(path, y);
    const Series back = read_series(path);
    REQUIRE(back.n() == y.n());
    for (std::size_t t = 0; t < y.n(); ++t) {
        CHECK(back[t] == y[t]);
    }
}

TEST_CASE("full-precision formatting survives the text round trip") {
    for (double v : {1.0 / 3.0, 0.1, -2.5e17, 3.0, 6.02214076e23,
                     -7.2973525693e-3}) {
        const std::string text = format_full(v);
        CHECK(std::stod(text) == v);
    }
    CHECK(format_full(7.0) == "7");
}

TEST_CASE("reader skips one header line and ignores blanks") {
    const std::string path = temp_path("header.dat");
    write_file(path, "value\n\n1.5\n\n  2.5  \n-3.25\n");
    const Series y = read_series(path);
    REQUIRE(y.n() == 3);
    CHECK(y[0] == 1.5);
    CHECK(y[1] == 2.5);
    CHECK(y[2] == -3.25);
}

TEST_CASE("reader reports malformed rows with their line number") {
    const std::string path = temp_path("bad.dat");
    write_file(path, "1.0\n2.0\noops\n4.0\n");
    try {
        (void)read_series(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("oops") != std::string::npos);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    // A second non-numeric line is not forgiven as a header.
    const std::string two_headers = temp_path("two_headers.dat");
    write_file(two_headers, "name\nalso_not_a_number\n1.0\n");
    CHECK_THROWS_AS(read_series(two_headers), parse_error);
}

TEST_CASE("reader rejects missing and empty inputs") {
    CHECK_THROWS_AS(read_series(temp_path("does_not_exist.dat")),
                    parse_error);
    const std::string empty = temp_path("empty.dat");
    write_file(empty, "");
    CHECK_THROWS_AS(read_series(empty), parse_error);
    const std::string only_header = temp_path("only_header.dat");
    write_file(only_header, "value\n\n");
    CHECK_THROWS_AS(read_series(only_header), parse_error);
}

TEST_CASE("parameter labels follow the phi, theta, mu row layout") {
    const std::vector<std::string> names = parameter_names(2, 1);
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "phi1");
    CHECK(names[1] == "phi2");
    CHECK(names[2] == "theta1");
    CHECK(names[3] == "mu");
}

namespace {

McReport tiny_report() {
    McReport report;
    report.runs = 3;
    report.n = 50;
    report.seed = 9;
    McMethodStats stats;
    stats.name = "LS";
    stats.mean = {0.5, 0.25, 0.125};
    stats.sd = {0.015625, 0.03125, 0.0625};
    stats.runs_used = 3;
    stats.runs_failed = 0;
    McScenarioResult sc;
    sc.name = "clean";
    sc.methods = {stats};
    report.scenarios = {sc};
    return report;
}

}  // namespace

TEST_CASE("Monte Carlo CSV emits one exact row per parameter") {
    std::ostringstream out;
    robustarma::write_mc_csv(out, tiny_report(), 1, 1);
    CHECK(out.str() ==
          "scenario,method,parameter,mean,sd,runs_used,runs_failed\n"
          "clean,LS,phi1,0.5,0.015625,3,0\n"
          "clean,LS,theta1,0.25,0.03125,3,0\n"
          "clean,LS,mu,0.125,0.0625,3,0\n");
}

TEST_CASE("Monte Carlo JSON mirrors the report tree") {
    const nlohmann::json j = robustarma::mc_to_json(tiny_report(), 1, 1);
    CHECK(j["runs"] == 3);
    CHECK(j["n"] == 50);
    CHECK(j["seed"] == 9);
    REQUIRE(j["scenarios"].size() == 1);
    const auto& sc = j["scenarios"][0];
    CHECK(sc["name"] == "clean");
    REQUIRE(sc["methods"].size() == 1);
    const auto& m = sc["methods"][0];
    CHECK(m["name"] == "LS");
    CHECK(m["runs_used"] == 3);
    CHECK(m["runs_failed"] == 0);
    CHECK(m["high_failure_rate"] == false);
    CHECK(m["mean"]["phi1"] == 0.5);
    CHECK(m["mean"]["theta1"] == 0.25);
    CHECK(m["mean"]["mu"] == 0.125);
    CHECK(m["sd"]["phi1"] == 0.015625);
}

TEST_CASE("bias curve serializers write summary and surface tables") {
    // Binary-exact values keep the full-precision formatting short.
    BiasCurves bc;
    bc.eps_grid = {0.125, 0.25};
    bc.cw_grid = {1.0, 2.0};
    bc.alphas = {50.0, 100.0};
    bc.max_bias_surface = {{0.5, 0.75}, {0.5, 1.25}};
    bc.qbc = {{0.25, 0.375}, {0.75, 1.25}};
    bc.mbc = {0.75, 1.25};

    std::ostringstream summary;
    robustarma::write_bias_summary_csv(summary, bc);
    CHECK(summary.str() ==
          "epsilon,mbc,qbc50,qbc100\n"
          "0.125,0.75,0.25,0.75\n"
          "0.25,1.25,0.375,1.25\n");

    std::ostringstream surface;
    robustarma::write_bias_surface_csv(surface, bc);
    CHECK(surface.str() ==
          "epsilon,cw,max_abs_bias\n"
          "0.125,1,0.5\n"
          "0.125,2,0.75\n"
          "0.25,1,0.5\n"
          "0.25,2,1.25\n");
}

TEST_CASE("influence CSV pairs the bounded curve with the least-squares "
          "reference") {
    IfCurve curve;
    curve.cw_grid = {2.0};
    curve.if_values = {1.25};
    std::ostringstream out;
    robustarma::write_if_csv(out, curve, -0.5);
    // IF_LS(-0.5, 2) = 0.5 * 0.75 * 4 = 1.5.
    CHECK(out.str() == "cw,if_tau,if_ls\n2,1.25,1.5\n");
}

TEST_CASE("order CSV marks unavailable orders with nan") {
    OrderSelection sel;
    sel.ic = {0.5, std::numeric_limits<double>::infinity(), -0.25};
    sel.sigma_tau = {1.5, 0.0, 0.75};
    sel.available = {true, false, true};
    std::ostringstream out;
    robustarma::write_order_csv(out, sel);
    CHECK(out.str() ==
          "p,sigma_tau,ic,available\n"
          "0,1.5,0.5,1\n"
          "1,0,nan,0\n"
          "2,0.75,-0.25,1\n");
}

TEST_CASE("text file helper writes through the stream serializers") {
    const std::string path = temp_path("helper.csv");
    robustarma::write_text_file(path, [](std::ostream& out) {
        out << "a,b\n1,2\n";
    });
    CHECK(testsupport::read_file(path) == "a,b\n1,2\n");
    CHECK_THROWS_AS(robustarma::write_text_file(
                        "/nonexistent_dir_zz/x.csv",
                        [](std::ostream&) {}),
                    std::runtime_error);
}
