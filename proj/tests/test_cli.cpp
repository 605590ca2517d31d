#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mstep/errors.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() { return MSTEP_CLI; }

fs::path workdir() {
    fs::path p = fs::path(MSTEP_BUILD_DIR) / "cli_tests";
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("desk-scale pipeline: make-reduced, keystream, solve, reruns byte-identical") {
    fs::path d = workdir();
    std::string spec = (d / "spec.json").string();
    std::string ks = (d / "ks.txt").string();
    REQUIRE(run("make-reduced --r1 7 --r2 6 --r3 8 --out " + spec) == 0);
    REQUIRE(run("keystream --spec " + spec + " --random-state --seed 11 --warmup 0 --count 22 --out " +
                ks + " --state-out " + (d / "st.txt").string()) == 0);

    std::string run1 = (d / "run1").string(), run2 = (d / "run2").string();
    REQUIRE(run("solve --spec " + spec + " --keystream " + ks +
                " --steps 8:12 -B 4 -D 2 --mode count-everything --seed 3 --out-dir " + run1) == 0);
    REQUIRE(run("solve --spec " + spec + " --keystream " + ks +
                " --steps 8:12 -B 4 -D 2 --mode count-everything --seed 3 --out-dir " + run2) == 0);
    CHECK(slurp(run1 + "/manifest.json") == slurp(run2 + "/manifest.json"));
    CHECK(slurp(run1 + "/solution.json") == slurp(run2 + "/solution.json"));

    nlohmann::json sol;
    std::ifstream(run1 + "/solution.json") >> sol;
    CHECK(sol.at("status") == "solution");
    std::string planted = slurp(d / "st.txt");
    planted.erase(planted.find_last_not_of("\n") + 1);
    std::string rec;
    for (const char* reg : {"x", "y", "z"}) {
        unsigned len = reg[0] == 'x' ? 7 : reg[0] == 'y' ? 6 : 8;
        for (unsigned i = 0; i < len; ++i)
            rec += std::to_string(
                sol.at("assignment").at(std::string(reg) + "(" + std::to_string(i) + ")").get<int>());
    }
    CHECK(rec == planted);
}

TEST_CASE("exit codes: no-solution and plan violation") {
    fs::path d = workdir();
    // inconsistent system -> failure marker {1} and exit 2
    nlohmann::json sys = {{"q", 2},
                          {"variables", {"a", "b"}},
                          {"polynomials", {"a", "a + 1", "b"}}};
    std::ofstream(d / "bad.json") << sys.dump();
    CHECK(run("solve --system " + (d / "bad.json").string() +
              " --guess-vars b --steps 1 -B 2 -D 2 --out-dir " + (d / "runbad").string()) == 2);
    nlohmann::json out;
    std::ifstream(d / "runbad" / "solution.json") >> out;
    CHECK(out.at("status") == "no-solution");

    // everything wild at B=0 with a tiny plan -> plan violation, exit 3
    nlohmann::json wild = {{"q", 2},
                           {"variables", {"a", "b", "c", "d", "e", "f"}},
                           {"polynomials", {"a*b + c*d + e*f + 1"}}};
    std::ofstream(d / "wild.json") << wild.dump();
    CHECK(run("solve --system " + (d / "wild.json").string() +
              " --guess-vars a --steps 1 -B 0 -D 2 --out-dir " + (d / "runwild").string()) == 3);

    // matrix caps -> resource error, exit 4
    CHECK(run("solve --system " + (d / "wild.json").string() +
              " --guess-vars a --steps 1 -B 5 -D 2 --max-cols 2 --out-dir " +
              (d / "runcap").string()) == 4);
}

TEST_CASE("estimate and report round trip on a desk cipher") {
    fs::path d = workdir();
    std::string spec = (d / "spec2.json").string();
    REQUIRE(run("make-reduced --r1 5 --r2 4 --r3 6 --out " + spec) == 0);
    std::string prefix = (d / "tab").string();
    REQUIRE(run("estimate --spec " + spec +
                " --k 6:9 --B 3:4 -D 2 --testset exhaustive --instances 2 --seed 5 --out-prefix " +
                prefix) == 0);
    REQUIRE(fs::exists(prefix + ".csv"));
    REQUIRE(fs::exists(prefix + ".json"));
    // rerun reproduces the table byte for byte
    std::string prefix2 = (d / "tab2").string();
    REQUIRE(run("estimate --spec " + spec +
                " --k 6:9 --B 3:4 -D 2 --testset exhaustive --instances 2 --seed 5 --out-prefix " +
                prefix2) == 0);
    CHECK(slurp(prefix + ".csv") == slurp(prefix2 + ".csv"));

    CHECK(run("report --random " + prefix + ".csv --k-first 6 --out " +
              (d / "rep.json").string()) == 0);
    nlohmann::json rep;
    std::ifstream(d / "rep.json") >> rep;
    CHECK(rep.at("rows").size() >= 1);
}

TEST_CASE("invert writes the inverse images") {
    fs::path d = workdir();
    std::string spec = (d / "spec.json").string();
    if (!fs::exists(spec)) REQUIRE(run("make-reduced --out " + spec) == 0);
    std::string out = (d / "inv.txt").string();
    REQUIRE(run("invert --spec " + spec + " --out " + out) == 0);
    std::string text = slurp(out);
    CHECK(text.find("x(0) = ") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 21);
}

TEST_CASE("rank-subsets orders candidates deterministically") {
    fs::path d = workdir();
    nlohmann::json sys = {{"q", 2},
                          {"variables", {"a", "b", "c", "d"}},
                          {"polynomials", {"a*c + b*d + c", "a*d + b*c + d + 1"}}};
    std::ofstream(d / "rk.json") << sys.dump();
    nlohmann::json subsets = {{"a", "b"}, {"c", "d"}};
    std::ofstream(d / "subsets.json") << subsets.dump();
    std::string out = (d / "ranked.json").string();
    REQUIRE(run("rank-subsets --system " + (d / "rk.json").string() + " --subsets " +
                (d / "subsets.json").string() + " --samples 16 --seed 2 --out " + out) == 0);
    nlohmann::json ranked;
    std::ifstream(out) >> ranked;
    REQUIRE(ranked.at("ranking").size() == 2);
    CHECK(ranked.at("ranking")[0].at("average_nrv").get<double>() <=
          ranked.at("ranking")[1].at("average_nrv").get<double>());
}

}  // TEST_SUITE
