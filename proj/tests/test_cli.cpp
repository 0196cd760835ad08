#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "gaplab/serialize.hpp"

using namespace gaplab;

namespace {

std::string tmp_dir() {
    static std::string dir = [] {
        std::string d = "cli_scratch";
        if (std::system(("rm -rf " + d + " && mkdir -p " + d).c_str()) != 0)
            throw std::runtime_error("cannot prepare scratch dir");
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(GAPLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("bands subcommand emits the free band row") {
    const std::string out = tmp_dir() + "/free";
    REQUIRE(run_cli("bands --word 0 --out " + out) == 0);
    CHECK(slurp(out + ".csv") == "band_index,E_minus,E_plus\n1,-2,2\n");
    Json j = Json::parse(slurp(out + ".json"));
    CHECK(j.at("q") == 1);
    CHECK(j.at("total_measure").get<double>() == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("bands output is byte-identical across reruns") {
    const std::string a = tmp_dir() + "/rerun_a", b = tmp_dir() + "/rerun_b";
    REQUIRE(run_cli("bands --word 2,0,-1 --out " + a) == 0);
    REQUIRE(run_cli("bands --word 2,0,-1 --out " + b) == 0);
    CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
    CHECK(slurp(a + ".json") == slurp(b + ".json"));
}

TEST_CASE("band csv round trips through the parser") {
    const std::string out = tmp_dir() + "/roundtrip";
    REQUIRE(run_cli("bands --word 2,0 --out " + out) == 0);
    BandSet b = bands_from_csv(slurp(out + ".csv"));
    REQUIRE(b.bands.size() == 2);
    CHECK(b.bands[0].lo == doctest::Approx(1.0 - std::sqrt(5.0)).epsilon(1e-12));
    CHECK(b.bands[1].hi == doctest::Approx(1.0 + std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("malformed word json exits with the validation code") {
    spit(tmp_dir() + "/bad.json", "{\"block_size\": 2, \"letters\": [[1.0]]");
    CHECK(run_cli("bands --word " + tmp_dir() + "/bad.json") == 2);
    CHECK(run_cli("bands") == 2);  // no word at all
}

TEST_CASE("thinspec decay run produces a decreasing measure column") {
    const std::string out = tmp_dir() + "/thin";
    REQUIRE(run_cli("thinspec --word 0 --window -1.2,1.2 --eps 1.0 --grid-step 0.05 "
                    "--couplings 1 --out " + out) == 0);
    std::vector<ThinTrace> traces = thin_traces_from_csv(slurp(out + ".csv"));
    REQUIRE(traces.size() == 4);
    for (std::size_t i = 1; i < traces.size(); ++i)
        CHECK(traces[i].measure_by_lambda[0].second <
              traces[i - 1].measure_by_lambda[0].second);
    Json j = Json::parse(slurp(out + ".json"));
    CHECK(j.at("c0").get<double>() > 0.0);
}

TEST_CASE("thinspec rejects N below the cover floor with the typed code") {
    CHECK(run_cli("thinspec --word 0 --window -1.2,1.2 --eps 1.0 --grid-step 0.05 "
                  "--couplings 1 --n-list 1 --out " + tmp_dir() + "/small") == 3);
}

TEST_CASE("dimension subcommand digests a band csv") {
    // level-8 middle-thirds construction written as a CSV fixture
    std::vector<Interval> cur{{0.0, 1.0}};
    for (int level = 0; level < 10; ++level) {
        std::vector<Interval> next;
        for (const auto& iv : cur) {
            const double third = iv.length() / 3.0;
            next.push_back({iv.lo, iv.lo + third});
            next.push_back({iv.hi - third, iv.hi});
        }
        cur = std::move(next);
    }
    BandSet b;
    b.bands = cur;
    b.q = static_cast<long>(cur.size());
    spit(tmp_dir() + "/cantor.csv", bands_to_csv(b));

    const std::string out = tmp_dir() + "/dim";
    std::string eps_list = "0.33333333333333331,0.1111111111111111,0.037037037037037035,"
                           "0.012345679012345678,0.0041152263374485596";
    REQUIRE(run_cli("dimension --input " + tmp_dir() + "/cantor.csv --window 0,1 --eps-list " +
                    eps_list + " --out " + out) == 0);
    Json j = Json::parse(slurp(out + ".json"));
    CHECK(j.at("slope").get<double>() ==
          doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.02));

    CHECK(run_cli("dimension --input " + tmp_dir() + "/missing.csv") == 2);
}

TEST_CASE("continuum subcommand bands and repeat gap") {
    spit(tmp_dir() + "/zero.json", R"({"cells":[{"a":3.141592653589793,"samples":[0.0]}]})");
    const std::string out = tmp_dir() + "/cont";
    REQUIRE(run_cli("continuum --word " + tmp_dir() + "/zero.json --window 0.1,10 "
                    "--grid-step 0.01 --out " + out) == 0);
    BandSet b = bands_from_csv(slurp(out + ".csv"));
    REQUIRE(b.bands.size() == 1);
    CHECK(b.bands[0].lo == doctest::Approx(0.1));
    CHECK(b.bands[0].hi == doctest::Approx(10.0));

    const std::string gout = tmp_dir() + "/gap";
    REQUIRE(run_cli("continuum --gap-mode repeat --gap-a 1 --gap-n 2 --gap-e 0 "
                    "--lambda-max 10 --out " + gout) == 0);
    Json j = Json::parse(slurp(gout + ".json"));
    CHECK(j.at("repeat_gap").at("lambda").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("repeat_gap").at("trace").get<double>() ==
          doctest::Approx(2.0 * std::cosh(2.0)).epsilon(1e-12));

    // degenerate scan bound: typed numeric failure
    CHECK(run_cli("continuum --gap-mode repeat --gap-a 1 --gap-n 2 --gap-e 5 "
                  "--lambda-max 2 --out " + tmp_dir() + "/gap2") == 3);
}

TEST_CASE("config file drives a whole run") {
    Json cfg{{"subcommand", "bands"},
             {"word", "0"},
             {"couplings", std::vector<double>{1.0}},
             {"out", tmp_dir() + "/cfg"}};
    spit(tmp_dir() + "/run.json", cfg.dump());
    REQUIRE(run_cli("--config " + tmp_dir() + "/run.json") == 0);
    CHECK(slurp(tmp_dir() + "/cfg.csv") == "band_index,E_minus,E_plus\n1,-2,2\n");
}
