#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "cavspin/errors.hpp"
#include "cavspin/io/config.hpp"
#include "cavspin/io/csv.hpp"
#include "cavspin/io/report.hpp"
#include "cavspin/io/units.hpp"

using namespace cavspin;
using namespace cavspin::io;

namespace {

CsvTable parse(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in, "fixture.csv");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const IngestionError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / ("cavspin_io_" + name);
    std::ofstream(path) << contents;
    return path;
}

}  // namespace

TEST_CASE("csv: headerless tables get default column names") {
    const auto two = parse("1,2\n3,4\n");
    CHECK(two.names == std::vector<std::string>{"x", "y"});
    CHECK(two.column("y") == std::vector<double>{2.0, 4.0});
    CHECK(parse("1,2,0.1\n").names == std::vector<std::string>{"x", "y", "sigma"});
    CHECK(parse("1,2,3,4\n").names == std::vector<std::string>{"c1", "c2", "c3", "c4"});
    CHECK(parse("7\n8\n").names == std::vector<std::string>{"x"});
}

TEST_CASE("csv: header, comments and whitespace") {
    const auto t = parse("# device A\ntime_ns, counts\n0, 10\n# mid comment\n1.5 ,  7e1\n\n");
    CHECK(t.names == std::vector<std::string>{"time_ns", "counts"});
    CHECK(t.rows() == 2);
    CHECK(t.column("counts")[1] == 70.0);
    CHECK(t.comments.size() == 2);
    CHECK(t.comments[0].find("device A") != std::string::npos);
    CHECK_FALSE(t.timestamp_mode);
}

TEST_CASE("csv: timestamp mode") {
    const auto t = parse("# timestamps_ns\n1.5\n20\n31.25\n");
    CHECK(t.timestamp_mode);
    CHECK(t.names.size() == 1);
    CHECK(t.columns[0] == std::vector<double>{1.5, 20.0, 31.25});
    CHECK_FALSE(error_of("# timestamps_ns\n1,2\n").empty());
}

TEST_CASE("csv: non-numeric and ragged rows carry row/column diagnostics") {
    const auto bad = error_of("x,y\n1,2\n3,abc\n");
    CHECK(bad.find("fixture.csv:3") != std::string::npos);
    CHECK(bad.find("column 2") != std::string::npos);
    CHECK(bad.find("'y'") != std::string::npos);

    const auto ragged = error_of("1,2\n3\n");
    CHECK(ragged.find("fixture.csv:2") != std::string::npos);

    CHECK_FALSE(error_of("x,y\n1,nan\n").empty());
    CHECK_FALSE(error_of("x,y\n1,inf\n").empty());
}

TEST_CASE("csv: missing column is named") {
    const auto t = parse("freq,signal\n1,2\n2,3\n");
    try {
        ingest_table(t, "freq", "contrast");
        FAIL("expected IngestionError");
    } catch (const IngestionError& e) {
        const std::string what = e.what();
        CHECK(what.find("contrast") != std::string::npos);
        CHECK(what.find("signal") != std::string::npos);
    }
}

TEST_CASE("ingest: duplicate x rows are averaged with a warning") {
    // Hand-averaged: x = 2 rows (4, 6) -> 5; sigmas (0.3, 0.4) -> 0.5/2.
    const auto t = parse("x,y,sigma\n2,4,0.3\n1,1,0.1\n2,6,0.4\n");
    const auto r = ingest_table(t, "x", "y", std::string("sigma"));
    CHECK(r.series.x == std::vector<double>{1.0, 2.0});
    CHECK(r.series.y == std::vector<double>{1.0, 5.0});
    REQUIRE(r.series.sigma);
    CHECK((*r.series.sigma)[0] == doctest::Approx(0.1));
    CHECK((*r.series.sigma)[1] == doctest::Approx(0.25));
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("averaged 1 duplicate") != std::string::npos);
}

TEST_CASE("ingest: output sorted by x, default columns, row minimum") {
    const auto t = parse("5,50\n1,10\n3,30\n");
    const auto r = ingest_table(t);
    CHECK(r.series.x == std::vector<double>{1.0, 3.0, 5.0});
    CHECK(r.series.y == std::vector<double>{10.0, 30.0, 50.0});
    CHECK(r.warnings.empty());
    CHECK_THROWS_AS(ingest_table(t, "", "", std::nullopt, 4), InsufficientData);
    CHECK_THROWS_AS(ingest_table(parse("1,1\n1,2\n1,3\n")), InsufficientData);
}

TEST_CASE("csv: ingest from disk and missing file") {
    const auto path = temp_file("disk.csv", "t,v\n0,1\n1,0.5\n2,0.25\n");
    const auto r = ingest_csv(path.string(), "t", "v");
    CHECK(r.series.y == std::vector<double>{1.0, 0.5, 0.25});
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_csv("/nonexistent/cavspin.csv"), IngestionError);
}

TEST_CASE("property: 17-digit CSV round trip is bit-exact") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    std::vector<double> a, b;
    for (int i = 0; i < 5000; ++i) {
        a.push_back(std::ldexp(mant(rng), expo(rng)));
        b.push_back(mant(rng) * 1e3);
    }
    a.push_back(std::numeric_limits<double>::denorm_min());
    b.push_back(-0.0);
    a.push_back(std::numeric_limits<double>::max());
    b.push_back(0.1);
    std::stringstream ss;
    write_csv(ss, {"a", "b"}, {a, b}, {"generated"});
    const auto t = parse_csv(ss);
    CHECK(t.names == std::vector<std::string>{"a", "b"});
    CHECK(t.comments.size() == 1);
    CHECK(t.column("a") == a);
    CHECK(t.column("b") == b);
    CHECK(std::signbit(t.column("b")[5000]));
}

TEST_CASE("format_number: 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    std::ostringstream out;
    ReportWriter(out).add("F", 47.826119609518194).add("ok", true).add("n", 3).add("mode", "sweep");
    CHECK(out.str() == "F=47.826119609518194\nok=true\nn=3\nmode=sweep\n");
}

TEST_CASE("units: frequency, time and length suffixes") {
    CHECK(parse_frequency_mhz("1328") == 1328.0);
    CHECK(parse_frequency_mhz("1.328GHz") == doctest::Approx(1328.0));
    CHECK(parse_frequency_mhz("277.984 THz") == doctest::Approx(277984000.0));
    CHECK(parse_frequency_mhz("500kHz") == doctest::Approx(0.5));
    CHECK(parse_frequency_mhz("2e6Hz") == doctest::Approx(2.0));
    CHECK(parse_time_ns("15.7") == 15.7);
    CHECK(parse_time_ns("6.8us") == doctest::Approx(6800.0));
    CHECK(parse_time_ns("6.8µs") == doctest::Approx(6800.0));
    CHECK(parse_time_ns("2ms") == doctest::Approx(2e6));
    CHECK(parse_time_ns("1s") == doctest::Approx(1e9));
    CHECK(parse_time_ns("500ps") == doctest::Approx(0.5));
    CHECK(parse_length_um("1078nm") == doctest::Approx(1.078));
    CHECK(parse_length_um("0.5mm") == doctest::Approx(500.0));
    CHECK_THROWS_AS(parse_frequency_mhz("12 furlongs"), InvalidParameter);
    CHECK_THROWS_AS(parse_time_ns(""), InvalidParameter);
    CHECK_THROWS_AS(parse_number("1.5x"), InvalidParameter);
}

TEST_CASE("config: sections, comments and defaults") {
    std::istringstream in(
        "\xEF\xBB\xBF# run defaults\n"
        "[purcell]\nalpha = 0.06   # measured\nconsistency_threshold=0.1\n"
        "[spin]\ngamma = 2.9\nd_bulk_hh = 1340\n"
        "[fit]\nmax_iterations = 50\ninterval = one_sigma\n"
        "[mc]\nseed = 18446744073709551615\nthreads = 4\n");
    const auto c = parse_config(in, "run.conf");
    CHECK(c.purcell_alpha == 0.06);
    CHECK(c.purcell_consistency_threshold == 0.1);
    CHECK(c.spin_gamma == 2.9);
    CHECK(c.spin_d_bulk_hh == 1340.0);
    CHECK(c.spin_d_nanobeam_hh == 1328.0);
    CHECK(c.fit_max_iterations == 50);
    CHECK(c.fit_interval == "one_sigma");
    CHECK(c.mc_seed == 18446744073709551615ull);
    CHECK(c.mc_threads == 4);
    CHECK(c.set_keys.size() == 8);

    const RunConfig d;
    CHECK(d.purcell_alpha == 0.053);
    CHECK(d.spin_gamma == 2.8);
    CHECK(d.fit_interval == "ci95");
}

TEST_CASE("config: unknown keys suggest the nearest known key") {
    std::istringstream in("[purcell]\nalhpa = 0.05\n");
    try {
        parse_config(in, "run.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("run.conf:2") != std::string::npos);
        CHECK(what.find("did you mean 'purcell.alpha'") != std::string::npos);
    }
    std::istringstream flat("mc.sed = 3\n");
    try {
        parse_config(flat);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'mc.seed'") != std::string::npos);
    }
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("", "abc") == 3);
}

TEST_CASE("config: malformed lines and bad values") {
    for (const char* text : {"[purcell\n", "alpha 0.05\n", "= 3\n", "[fit]\nmax_iterations = 2.5\n",
                             "[fit]\ninterval = ci99\n", "[mc]\nthreads = 0\n", "[purcell]\nalpha = x\n"}) {
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_config(in), ConfigError);
    }
}

TEST_CASE("config: explicit path, environment variable, defaults") {
    const auto a = temp_file("a.conf", "[spin]\ngamma = 3.1\n");
    const auto b = temp_file("b.conf", "[spin]\ngamma = 2.5\n");
    ::unsetenv("CAVSPIN_CONFIG");
    CHECK(resolve_config(std::nullopt).spin_gamma == 2.8);
    ::setenv("CAVSPIN_CONFIG", b.c_str(), 1);
    CHECK(resolve_config(std::nullopt).spin_gamma == 2.5);
    CHECK(resolve_config(a.string()).spin_gamma == 3.1);
    ::unsetenv("CAVSPIN_CONFIG");
    CHECK_THROWS_AS(load_config("/nonexistent/cavspin.conf"), ConfigError);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}
