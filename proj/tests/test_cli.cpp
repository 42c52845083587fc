#include "evac/cli.hpp"
#include "evac/common.hpp"
#include "evac/demo.hpp"
#include "evac/sweep.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <unistd.h>

using namespace evac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "evacsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// Demo assets plus a small sweep spec, written once per test binary.
const fs::path& workdir()
{
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("evacsim_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        emit_demo_assets(d.string());
        write_text_file((d / "small.cfg").string(), "world = demo.world\n"
                                                    "population_spec = population.cfg\n"
                                                    "storm = 1 2\n"
                                                    "rainfall = 0.25 0.5\n"
                                                    "time_of_day = 0.5 1\n"
                                                    "threshold = 0.7 0.8\n"
                                                    "w_cdm = 0.2 0.3 0.5\n"
                                                    "w_hrf = 0.2 0.3 0.5\n"
                                                    "w_crf = 0.2 0.3 0.5\n"
                                                    "replications = 2\n");
        return d;
    }();
    return dir;
}

std::string at(const char* name)
{
    return (workdir() / name).string();
}

} // namespace

TEST_CASE("usage errors")
{
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"simulate", "--no-such-flag"}).code == 1);
    const auto help = cli({"simulate", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("--threshold") != std::string::npos);
    CHECK(help.out.find("0.7") != std::string::npos);
    CHECK(help.out.find("--rescuers") != std::string::npos);
    CHECK(help.out.find("15") != std::string::npos);
}

TEST_CASE("demo assets")
{
    const auto written = cli({"demo", "--out", (workdir() / "again").string()});
    CHECK(written.code == 0);
    CHECK(std::count(written.out.begin(), written.out.end(), '\n') == 3);
    CHECK(read_text_file(at("demo.world")) == read_text_file((workdir() / "again" / "demo.world").string()));

    const auto spec = load_sweep_spec(at("sweep.cfg"));
    CHECK(enumerate(spec).size() == 18432);
    CHECK(spec.world == at("demo.world"));

    const auto v = cli({"validate", "--world", at("demo.world")});
    CHECK(v.code == 0);
    CHECK(v.out.find("world ok") != std::string::npos);
}

TEST_CASE("validate names the broken invariant")
{
    const auto path = at("broken.world");
    write_text_file(path, "node 0 0 0\nnode 1 10 0\nedge 0 1\nshelter 1 1 0 internal\n");
    const auto r = cli({"validate", "--world", path});
    CHECK(r.code == 1);
    CHECK(r.err.find("capacity must be > 0") != std::string::npos);
    CHECK(r.out.empty());
    CHECK(cli({"validate", "--world", at("missing.world")}).code == 1);
}

TEST_CASE("population generation and simulation")
{
    const auto gen = cli({"gen-population", "--world", at("demo.world"), "--seed", "1", "--out", at("pop.csv")});
    REQUIRE(gen.code == 0);
    const auto csv = read_text_file(at("pop.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 571);
    CHECK(cli({"validate", "--world", at("demo.world"), "--population", at("pop.csv")}).out.find("570 households") !=
          std::string::npos);

    const std::vector<std::string> args{"simulate",  "--world",  at("demo.world"), "--population", at("pop.csv"),
                                        "--storm",   "2",        "--rain",         "orange",       "--time",
                                        "night",     "--threshold", "0.9",         "--weights",    "0.2,0.5,0.3",
                                        "--seed",    "42"};
    const auto a = cli(args);
    const auto b = cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("evacuated=") != std::string::npos);

    // the synthesized default population with the same seed is the same input
    auto synth = args;
    synth.erase(synth.begin() + 3, synth.begin() + 5);
    CHECK(cli(synth).out == a.out);

    auto raw = args;
    raw[6] = "0.5";
    raw[8] = "0.5";
    raw[10] = "1";
    raw.push_back("--raw");
    CHECK(cli(raw).out == a.out);

    auto events = args;
    events.insert(events.end(), {"--events", at("events.csv"), "--series", at("series.csv")});
    CHECK(cli(events).code == 0);
    CHECK(read_text_file(at("events.csv")).rfind("tick,agent_kind", 0) == 0);

    auto bad = args;
    bad[6] = "5";
    const auto r = cli(bad);
    CHECK(r.code == 1);
    CHECK(r.err.find("--storm") != std::string::npos);
    bad = args;
    bad[14] = "0.2,0.5";
    CHECK(cli(bad).code == 1);
    bad = args;
    bad[12] = "1.5";
    CHECK(cli(bad).code == 1);
}

TEST_CASE("sweep, analyze and series")
{
    const auto s1 = cli({"sweep", "--spec", at("small.cfg"), "--out", at("rows1.csv"), "--workers", "1"});
    REQUIRE(s1.code == 0);
    CHECK(s1.out.find("valid=96 (exact_one)") != std::string::npos);
    CHECK(s1.out.find("rows=192") != std::string::npos);
    CHECK(s1.out.find("truncated=0") != std::string::npos);
    const auto s3 = cli({"sweep", "--spec", at("small.cfg"), "--out", at("rows3.csv"), "--workers", "3"});
    REQUIRE(s3.code == 0);
    CHECK(read_text_file(at("rows1.csv")) == read_text_file(at("rows3.csv")));

    const auto an = cli({"analyze", "--in", at("rows1.csv"), "--csv", at("coef.csv")});
    REQUIRE(an.code == 0);
    CHECK(an.out.find("(Intercept)") != std::string::npos);
    CHECK(an.out.find("threshold") != std::string::npos);
    CHECK(read_text_file(at("coef.csv")).rfind("term,estimate", 0) == 0);

    const auto full = cli({"analyze", "--in", at("rows1.csv"), "--mode", "intercept-full"});
    CHECK(full.code == 1);
    CHECK(full.err.find("w_crf") != std::string::npos);
    CHECK(cli({"analyze", "--in", at("rows1.csv"), "--mode", "intercept-full", "--drop-aliased"}).code == 0);
    CHECK(cli({"analyze", "--in", at("rows1.csv"), "--mode", "bogus"}).code == 1);

    const auto ser = cli({"series", "--in", at("rows1.csv"), "--threshold", "0.8"});
    REQUIRE(ser.code == 0);
    CHECK(ser.out.rfind("x,series,mean_evacuated,n\n", 0) == 0);
    CHECK(ser.out.find("w_crf") != std::string::npos);
    CHECK(cli({"series", "--in", at("rows1.csv"), "--storm", "3"}).code == 1);
}
