// End-to-end checks of the installed command-line surface. The binary path
// comes from the build system.

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dsnfp/frame_io.hpp"
#include "support.hpp"

using testsup::TempDir;

namespace {

#ifndef DSNFP_CLI_PATH
#error "DSNFP_CLI_PATH must be defined by the build"
#endif

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DSNFP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("usage errors exit with status 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("residue --out /tmp/x") == 2); // missing required --in
}

TEST_CASE("simulate -> residue -> fingerprint -> correlate -> estimate-temp plumbing") {
    TempDir dir;
    const std::string base = dir.path().string();
    const std::string sim_args =
        " --width 48 --height 48 --seed 11 --hot-fraction 0 --dark-e30 8 --sigma-ln 0.8";

    REQUIRE(run_cli("simulate --out " + base + "/darks --temps 10:50:10 --frames 4" + sim_args) == 0);
    REQUIRE(run_cli("simulate --out " + base + "/flats --temps 30 --frames 4 --flat 50000"
                    " --frame-base 100" + sim_args) == 0);

    REQUIRE(run_cli("residue --in " + base + "/darks/t10.00 --out " + base + "/res/t10") == 0);
    for (const std::string t : {"20.00", "30.00", "40.00", "50.00"}) {
        REQUIRE(run_cli("residue --in " + base + "/darks/t" + t + " --out " + base + "/res/t" +
                        t.substr(0, 2)) == 0);
    }
    REQUIRE(run_cli("residue --in " + base + "/flats --out " + base + "/qres") == 0);

    for (const std::string t : {"10", "20", "30", "40", "50"}) {
        REQUIRE(run_cli("fingerprint --residues " + base + "/res/t" + t + " --frames " + base +
                        "/darks/t" + t + ".00 --out " + base + "/patterns/t" + t + ".dsnf") == 0);
    }

    REQUIRE(run_cli("correlate --residues " + base + "/qres --patterns " + base +
                    "/patterns --out " + base + "/corr.csv") == 0);
    const std::string csv = slurp(dir.path() / "corr.csv");
    CHECK(csv.find("camera_id,lens_id,pattern_temp_c,rho,n_pixels") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 5);

    REQUIRE(run_cli("fit --in " + base + "/corr.csv --out " + base + "/fit.json") == 0);
    const std::string fit_json = slurp(dir.path() / "fit.json");
    CHECK(fit_json.find("\"adj_r2\"") != std::string::npos);
    CHECK(fit_json.find("\"delta_e_ev\"") != std::string::npos);

    const int est = run_cli("estimate-temp --in " + base + "/corr.csv --out " + base + "/est.json");
    if (est == 0) {
        const std::string est_json = slurp(dir.path() / "est.json");
        CHECK(est_json.find("\"t_star_c\"") != std::string::npos);
        CHECK(est_json.find("\"forensic_range_c\"") != std::string::npos);
    } else {
        // tiny noisy scenario may legitimately refuse (no rising segment)
        CHECK(est == 1);
    }
}

TEST_CASE("correlate reports dimension mismatches as data errors naming both files") {
    TempDir dir;
    dsnfp::ReferencePattern small;
    small.width = 4;
    small.height = 4;
    small.frame_count = 1;
    small.data.assign(16, 1.0f);
    small.data[0] = 2.0f;
    small.mask.assign(16, 0);
    dsnfp::ReferencePattern big;
    big.width = 8;
    big.height = 8;
    big.frame_count = 1;
    big.data.assign(64, 1.0f);
    big.data[1] = 3.0f;
    big.mask.assign(64, 0);

    std::filesystem::create_directories(dir.path() / "res");
    std::filesystem::create_directories(dir.path() / "pat");
    dsnfp::save_pattern(small, dir.path() / "res" / "q.dsnf");
    dsnfp::save_pattern(big, dir.path() / "pat" / "p.dsnf");

    const std::string cmd = std::string(DSNFP_CLI_PATH) + " correlate --residues " +
                            (dir.path() / "res").string() + " --patterns " +
                            (dir.path() / "pat").string() + " --out " +
                            (dir.path() / "out.csv").string() + " 2>" +
                            (dir.path() / "err.txt").string();
    const int status = WEXITSTATUS(std::system(cmd.c_str()));
    CHECK(status == 1);
    const std::string err = slurp(dir.path() / "err.txt");
    CHECK(err.find("q.dsnf") != std::string::npos);
    CHECK(err.find("p.dsnf") != std::string::npos);
    CHECK(err.find("DimensionMismatch") != std::string::npos);
}

TEST_CASE("wavelet residue path and thread-count independence") {
    TempDir dir;
    const std::string base = dir.path().string();
    const std::string sim_args =
        " --width 40 --height 40 --seed 21 --hot-fraction 0 --dark-e30 5 --sigma-ln 0.6";
    REQUIRE(run_cli("simulate --out " + base + "/darks --temps 30 --frames 6" + sim_args) == 0);

    REQUIRE(run_cli("residue --in " + base + "/darks/t30.00 --out " + base + "/wav"
                    " --filter wavelet --levels 3") == 0);
    REQUIRE(run_cli("residue --in " + base + "/darks/t30.00 --out " + base + "/st --threads 1") == 0);
    REQUIRE(run_cli("residue --in " + base + "/darks/t30.00 --out " + base + "/mt --threads 3") == 0);

    std::size_t compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "st")) {
        const auto other = dir.path() / "mt" / entry.path().filename();
        REQUIRE(std::filesystem::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
        ++compared;
    }
    CHECK(compared == 6 * 2); // .dsnf plus .meta per frame

    // wavelet output differs from dct output but shares the container
    const auto wav = dsnfp::load_pattern(dir.path() / "wav" / "frame_00000.dsnf");
    const auto dct = dsnfp::load_pattern(dir.path() / "st" / "frame_00000.dsnf");
    CHECK(wav.width == dct.width);
    CHECK(wav.frame_count == 1);
    CHECK(wav.data != dct.data);
}

TEST_CASE("benchmark subcommand emits the CSV report") {
    TempDir dir;
    const std::string base = dir.path().string();
    REQUIRE(run_cli("simulate --out " + base + "/frames --temps 30 --frames 2"
                    " --width 32 --height 32 --seed 5") == 0);
    REQUIRE(run_cli("benchmark --frames " + base + "/frames --out " + base + "/bench.csv") == 0);
    const std::string csv = slurp(dir.path() / "bench.csv");
    CHECK(csv.find("filter,frames,total_s,delta_s,delta_pct\n") == 0);
    CHECK(csv.find("wavelet,2,") != std::string::npos);
    CHECK(csv.find("dct,2,") != std::string::npos);
}

TEST_CASE("estimate-temp accepts a pre-aggregated series CSV") {
    TempDir dir;
    std::ofstream csv(dir.path() / "series.csv");
    csv << "temperature_c,mean_rho\n";
    for (double t = 10; t <= 50; t += 5)
        csv << t << "," << 0.05 * std::exp(0.03 * std::min(t, 30.0)) << "\n";
    csv.close();

    REQUIRE(run_cli("estimate-temp --in " + (dir.path() / "series.csv").string() + " --out " +
                    (dir.path() / "est.json").string()) == 0);
    const std::string est = slurp(dir.path() / "est.json");
    CHECK(est.find("\"t_star_c\": 30.0") != std::string::npos);
}
