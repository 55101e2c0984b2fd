#include "cli_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using cli::q;
using cli::run;
using cli::slurp;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

bool no_partials(const std::filesystem::path& dir) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".partial") return false;
    }
    return true;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("synth then every analysis subcommand") {
    cli::TempDir dir;
    auto log = dir / "log.csv";
    REQUIRE(run("synth --family er --n 120 --p 0.04 --bau-bins 40 --spike-bins 10 --seed 3 --out " + q(log)) == 0);
    REQUIRE(std::filesystem::exists(log));
    std::string meta = slurp(dir / "log.csv.meta");
    CHECK(meta.find("bau_end=2400\n") != std::string::npos);
    CHECK(slurp(log).rfind("time,sender,receiver\n", 0) == 0);

    CHECK(run("volume --input " + q(log) + " --out " + q(dir / "vol.csv")) == 0);
    CHECK(slurp(dir / "vol.csv").rfind("bin,volume\n0,", 0) == 0);

    CHECK(run("rank --input " + q(log) + " --bau-start 0 --bau-end 40 --alpha-star 0.5 --top 10 --out " +
              q(dir / "rank.csv") + " --adjacency-out " + q(dir / "adj.csv")) == 0);
    std::string rank = slurp(dir / "rank.csv");
    CHECK(rank.rfind("rank,user,score\n1,", 0) == 0);
    CHECK(std::count(rank.begin(), rank.end(), '\n') == 11);
    CHECK(slurp(dir / "adj.csv").rfind("receiver,sender\n", 0) == 0);

    CHECK(run("sweep --input " + q(log) + " --bau-start 0 --bau-end 40 --spike-start 40 --spike-end 50 --top 10 --out " +
              q(dir / "sweep.csv")) == 0);
    std::string sweep = slurp(dir / "sweep.csv");
    CHECK(sweep.rfind("alpha_star,total,delta\n0,", 0) == 0);
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 27);

    CHECK(run("simulate --input " + q(log) + " --bau-start 0 --bau-end 40 --alpha-star 0.5 --steps 10 --basal-scale 0.001 --out " +
              q(dir / "sim.csv") + " --per-node " + q(dir / "wide.csv")) == 0);
    std::string sim = slurp(dir / "sim.csv");
    CHECK(sim.rfind("step,total\n0,", 0) == 0);
    CHECK(std::count(sim.begin(), sim.end(), '\n') == 12);
    CHECK(slurp(dir / "wide.csv").rfind("step,", 0) == 0);

    CHECK(run("responsiveness --input " + q(log) + " --out " + q(dir / "resp.csv")) == 0);
    CHECK(slurp(dir / "resp.csv").rfind("bin,responsiveness\n", 0) == 0);

    CHECK(run("halflife --input " + q(log) + " --out " + q(dir / "hl.csv")) == 0);
    CHECK(slurp(dir / "hl.csv").rfind("mode,gamma,half_life,decaying,first_bin,last_bin\nfit,", 0) == 0);
    CHECK(no_partials(dir.path()));
}

TEST_CASE("halflife theory mode") {
    cli::TempDir dir;
    CHECK(run("halflife --alpha 0.0625 --lambda1 8 --out " + q(dir / "hl.csv")) == 0);
    CHECK(slurp(dir / "hl.csv") == "mode,gamma,half_life,decaying,first_bin,last_bin\ntheory,0.5,1,1,,\n");
    CHECK(run("halflife --volume 100,50,25,12.5 --out " + q(dir / "fit.csv")) == 0);
    std::string fit = slurp(dir / "fit.csv");
    REQUIRE(fit.rfind("mode,gamma,half_life,decaying,first_bin,last_bin\nfit,", 0) == 0);
    std::istringstream row(fit.substr(fit.find("fit,") + 4));
    double gamma = 0.0, half = 0.0;
    char comma = 0;
    row >> gamma >> comma >> half;
    CHECK(std::fabs(gamma - 0.5) < 1e-12);
    CHECK(std::fabs(half - 1.0) < 1e-12);
    CHECK(fit.substr(fit.find(",1,0,3\n")) == ",1,0,3\n");
}

TEST_CASE("usage errors exit 2 and leave no output") {
    cli::TempDir dir;
    auto log = dir / "log.csv";
    write_file(log, "time,sender,receiver\n1,a,b\n70,b,a\n");
    auto out = dir / "out.csv";
    CHECK(run("rank --input " + q(log) + " --bau-start 0 --bau-end 2 --alpha-star 1.0 --out " + q(out)) == 2);
    CHECK(run("rank --input " + q(log) + " --bau-start 3 --bau-end 2 --out " + q(out)) == 2);
    CHECK(run("rank --input " + q(log) + " --bau-start 0 --bau-end 2 --top 0 --out " + q(out)) == 2);
    CHECK(run("halflife --alpha 0.5 --lambda1 4 --out " + q(out)) == 2);
    CHECK(run("halflife --alpha 0.5 --out " + q(out)) == 2);
    CHECK(run("volume --input " + q(log) + " --bin 0 --out " + q(out)) == 2);
    CHECK(run("sweep --input " + q(log) + " --bau-start 0 --bau-end 1 --spike-start 1 --spike-end 2 --grid 0.5,1 --out " +
              q(out)) == 2);
    CHECK(run("synth --family ring --n 10 --k 3 --out " + q(out)) == 2);
    CHECK(run("simulate --input " + q(log) + " --bau-start 0 --bau-end 2 --mode sideways --out " + q(out)) == 2);
    CHECK_FALSE(std::filesystem::exists(out));
    CHECK(no_partials(dir.path()));
}

TEST_CASE("parse errors exit nonzero and leave no output") {
    cli::TempDir dir;
    auto bad = dir / "bad.csv";
    write_file(bad, "time,sender,receiver\n1,a,b\nnope,a,b\n");
    auto out = dir / "out.csv";
    CHECK(run("volume --input " + q(bad) + " --out " + q(out)) == 1);
    CHECK(run("volume --input " + q(dir / "missing.csv") + " --out " + q(out)) == 1);
    CHECK_FALSE(std::filesystem::exists(out));
    CHECK(no_partials(dir.path()));
    CHECK(run("") != 0);
    CHECK(run("frobnicate") != 0);
}

TEST_CASE("an existing output survives a failing run") {
    cli::TempDir dir;
    auto bad = dir / "bad.csv";
    write_file(bad, "time,sender,receiver\n1,a\n");
    auto out = dir / "out.csv";
    write_file(out, "keep me\n");
    CHECK(run("volume --input " + q(bad) + " --out " + q(out)) == 1);
    CHECK(slurp(out) == "keep me\n");
}

TEST_CASE("stdin and stdout") {
    cli::TempDir dir;
    auto log = dir / "log.csv";
    write_file(log, "time,sender,receiver\n1,a,b\n70,b,a\n75,a,b\n");
    std::string cmd = std::string("'") + cli::binary() + "' volume --input - --out - < " + q(log) + " > " + q(dir / "o.csv");
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(slurp(dir / "o.csv") == "bin,volume\n0,1\n1,2\n");
}

TEST_CASE("repeated runs are byte identical") {
    cli::TempDir dir;
    auto a = dir / "a.csv";
    auto b = dir / "b.csv";
    std::string synth = "synth --family er --n 200 --p 0.03 --bau-bins 30 --spike-bins 10 --seed 9 --out ";
    REQUIRE(run(synth + q(a)) == 0);
    REQUIRE(run(synth + q(b)) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(dir / "a.csv.meta") == slurp(dir / "b.csv.meta"));

    std::string sim = "simulate --input " + q(a) + " --bau-start 0 --bau-end 30 --alpha-star 0.7 --steps 20 --seed 4 --basal-scale 0.001 --out ";
    REQUIRE(run(sim + q(dir / "s1.csv")) == 0);
    REQUIRE(run(sim + q(dir / "s2.csv")) == 0);
    CHECK(slurp(dir / "s1.csv") == slurp(dir / "s2.csv"));
    REQUIRE(run("simulate --input " + q(a) + " --bau-start 0 --bau-end 30 --alpha-star 0.7 --steps 20 --seed 5 --basal-scale 0.001 --out " +
                q(dir / "s3.csv")) == 0);
    CHECK(slurp(dir / "s1.csv") != slurp(dir / "s3.csv"));
}

} // TEST_SUITE
