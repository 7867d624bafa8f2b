#include <cfloat>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "ccmtool/errors.hpp"
#include "ccmtool/io.hpp"

using namespace ccmtool;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the installed binary with stdout/stderr captured to files.
CliRun run_cli(const std::string& args) {
    const std::string out_path = "cli_stdout.txt";
    const std::string err_path = "cli_stderr.txt";
    const std::string cmd = std::string(CCMTOOL_BIN) + " " + args + " >" +
                            out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text_file(out_path);
    r.err = read_text_file(err_path);
    return r;
}

double parse_back(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    REQUIRE(res.ec == std::errc());
    return v;
}

} // namespace

TEST_CASE("format_double emits shortest round-tripping strings") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.1");

    const std::vector<double> values = {
        0.1,   1.0 / 3.0, -0.0,       1e-300, 1e300, 0.9819805060619656,
        1e-17, DBL_MAX,   DBL_EPSILON, 5e-324, -123456.789012345678};
    for (const double v : values) {
        const std::string s = format_double(v);
        const double back = parse_back(s);
        CHECK(back == v);
    }
}

TEST_CASE("recording CSV stream round trip is bitwise") {
    std::vector<double> a = {1.0, 0.1, -2.5e-8, 1.0 / 3.0};
    std::vector<double> b = {0.0, 4.0, 1e200, -7.125};
    const Recording rec({TimeSeries(a, 250.0, "left"),
                         TimeSeries(b, 250.0, "right")});
    std::ostringstream out;
    write_recording_csv(rec, out);

    std::istringstream in(out.str());
    const Recording back = read_recording_csv(in, 250.0, 0.01);
    REQUIRE(back.n_channels() == 2);
    CHECK(back.channel(0).label() == "left");
    CHECK(back.channel(1).label() == "right");
    CHECK(back.channel(0).values() == a);
    CHECK(back.channel(1).values() == b);
    REQUIRE(back.event_onset().has_value());
    CHECK(*back.event_onset() == 0.01);
}

TEST_CASE("CSV reader rejects malformed bodies") {
    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_recording_csv(in, 1.0);
    };
    CHECK_THROWS_AS(parse(""), MalformedInput);               // no header
    CHECK_THROWS_AS(parse("x,y\n"), MalformedInput);          // no samples
    CHECK_THROWS_AS(parse("x,y\n1,2\n3\n"), MalformedInput);  // ragged row
    CHECK_THROWS_AS(parse("x\nfoo\n"), MalformedInput);       // bad number
    CHECK_THROWS_AS(parse("\n1\n"), MalformedInput);          // empty label

    // Whitespace padding and blank lines are tolerated.
    std::istringstream ok("x , y\n 1 ,\t2 \n\n3,4\r\n");
    const Recording rec = read_recording_csv(ok, 1.0);
    CHECK(rec.channel(0).label() == "x");
    CHECK(rec.channel(1).label() == "y");
    CHECK(rec.channel(0).values() == std::vector<double>{1.0, 3.0});
    CHECK(rec.channel(1).values() == std::vector<double>{2.0, 4.0});
}

TEST_CASE("text file helpers") {
    CHECK_THROWS_AS(read_text_file("definitely_missing_file.txt"), IoError);
    const std::string dir = "io_helper_dir";
    fs::remove_all(dir);
    write_text_file(dir + "/nested/file.txt", "payload");
    CHECK(read_text_file(dir + "/nested/file.txt") == "payload");
    fs::remove_all(dir);
}

TEST_CASE("cli synth is byte deterministic and parseable") {
    fs::remove_all("cli_synth");
    fs::create_directories("cli_synth");
    const CliRun a = run_cli("synth --preset unidirectional -n 400 --seed 7 "
                             "-o cli_synth/a.csv");
    REQUIRE(a.exit_code == 0);
    const CliRun b = run_cli("synth --preset unidirectional -n 400 --seed 7 "
                             "-o cli_synth/b.csv");
    REQUIRE(b.exit_code == 0);
    CHECK(read_text_file("cli_synth/a.csv") ==
          read_text_file("cli_synth/b.csv"));

    const Recording rec = read_recording_csv("cli_synth/a.csv", 1.0);
    CHECK(rec.n_channels() == 2);
    CHECK(rec.channel(0).label() == "x");
    CHECK(rec.channel(1).label() == "y");
    CHECK(rec.n_samples() == 400);
}

TEST_CASE("cli reports machine-readable errors with exit code 2") {
    fs::remove_all("cli_err");
    const CliRun missing = run_cli("run --input missing.csv -o cli_err");
    CHECK(missing.exit_code == 2);
    const auto err = nlohmann::json::parse(missing.err);
    CHECK(err.at("stage") == "ingest");
    CHECK(err.at("error") == "IoError");
    CHECK(fs::exists("cli_err/error.json"));

    const CliRun both = run_cli("ingest");
    CHECK(both.exit_code == 2);
    const auto err2 = nlohmann::json::parse(both.err);
    CHECK(err2.at("error") == "MalformedInput");
}

TEST_CASE("cli ccm over a pipe emits a result object") {
    const CliRun r =
        run_cli("synth --preset unidirectional -n 500 --seed 3 | " +
                std::string(CCMTOOL_BIN) +
                " ccm --stdin -s y -t x -E 3 --tau 1 --serial");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("direction") == "y->x");
    CHECK(j.at("mode") == "standard");
    const double rho = j.at("rho").get<double>();
    CHECK(rho >= -1.0);
    CHECK(rho <= 1.0);
    CHECK(j.at("embedding").at("dimension") == 3);
}

TEST_CASE("cli run produces a complete output tree") {
    fs::remove_all("cli_run");
    const CliRun synth = run_cli(
        "synth --preset unidirectional -n 300 --seed 5 -o cli_run_input.csv");
    REQUIRE(synth.exit_code == 0);

    const CliRun run = run_cli(
        "run --input cli_run_input.csv -o cli_run -E 3 --tau 1 "
        "--surrogates 6 --draws 2 --sizes 64 128 --granger-lag 1 "
        "--max-lag 1 --seed 11");
    CHECK(run.err == "");
    REQUIRE(run.exit_code == 0);

    const auto report =
        nlohmann::json::parse(read_text_file("cli_run/report.json"));
    CHECK(report.at("schema") == "ccmtool/report/v1");
    CHECK(report.at("channels") ==
          nlohmann::json(std::vector<std::string>{"x", "y"}));
    CHECK(report.at("bands") ==
          nlohmann::json(std::vector<std::string>{"broadband"}));
    REQUIRE(report.at("tasks").size() == 2);
    // Three methods per directed pair: standard, dbn-informed, granger.
    CHECK(report.at("metrics").size() == 6);
    for (const auto& row : report.at("metrics")) {
        CHECK(row.at("rho_pre").get<double>() >= -1.0);
        CHECK(row.at("rho_pre").get<double>() <= 1.0);
    }

    CHECK(fs::exists("cli_run/metrics.csv"));
    const std::string csv = read_text_file("cli_run/metrics.csv");
    CHECK(csv.rfind("pair,band,method,", 0) == 0);

    for (const char* svg :
         {"connections.svg", "pre_post.svg", "convergence.svg"}) {
        const std::string body =
            read_text_file((fs::path("cli_run") / svg).string());
        CHECK(body.find("<svg") != std::string::npos);
    }

    CHECK(fs::exists("cli_run/models/broadband.json"));
    CHECK(fs::exists("cli_run/manifest.txt"));

    // plot re-renders byte-identical SVGs from the merged report.
    fs::remove_all("cli_plot");
    const CliRun plot =
        run_cli("plot -r cli_run/report.json -o cli_plot");
    REQUIRE(plot.exit_code == 0);
    for (const char* svg :
         {"connections.svg", "pre_post.svg", "convergence.svg"}) {
        CHECK(read_text_file((fs::path("cli_plot") / svg).string()) ==
              read_text_file((fs::path("cli_run") / svg).string()));
    }
}
