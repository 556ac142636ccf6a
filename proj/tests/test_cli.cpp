#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bellbox/bellbox.hpp"

using namespace bellbox;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

// Runs the CLI binary with stdout+stderr captured to a file.
RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path out = fs::temp_directory_path() / ("bellbox_cli_out_" + std::to_string(counter++));
    std::string cmd = std::string(BELLBOX_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    RunResult result;
#ifdef WEXITSTATUS
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
    result.exit_code = status;
#endif
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    fs::remove(out);
    return result;
}

fs::path scratch_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

JointBox all_parities_even() {
    JointBox box = JointBox::uniform();
    for (Setting w : kSettings) box.block(w, w) = {0.5, 0.0, 0.0, 0.5};
    return box;
}

}  // namespace

TEST_CASE("validate accepts the uniform box at level 3", "[cli]") {
    fs::path box = scratch_file("uniform_box.json");
    save_box_file(box.string(), JointBox::uniform());
    RunResult r = run_cli("validate " + box.string() + " --level 3");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("PASS") != std::string::npos);
    fs::remove(box);
}

TEST_CASE("validate flags the all-parities-even box at level 2", "[cli]") {
    fs::path box = scratch_file("even_box.json");
    save_box_file(box.string(), all_parities_even());
    RunResult r = run_cli("validate " + box.string() + " --level 2 --json");
    CHECK(r.exit_code == 1);
    auto j = nlohmann::json::parse(r.output);
    CHECK_FALSE(j.at("pass").get<bool>());
    REQUIRE(j.at("violations").size() == 1);
    CHECK(j["violations"][0].at("constraint").get<std::string>() == "bell_p4");
    CHECK(j["violations"][0].at("magnitude").get<double>() == Catch::Approx(0.5).margin(1e-12));
    CHECK(j.at("bell_probs")[3].get<double>() == Catch::Approx(-0.5).margin(1e-12));
    CHECK(j.at("constraints").size() >= 34);  // 18 table + 12 no-signaling + 4 outcomes

    RunResult level1 = run_cli("validate " + box.string() + " --level 1");
    CHECK(level1.exit_code == 0);
    fs::remove(box);
}

TEST_CASE("validate rejects malformed input with exit 2", "[cli]") {
    fs::path bad = scratch_file("bad_box.json");
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("validate " + bad.string()).exit_code == 2);
    fs::remove(bad);

    CHECK(run_cli("validate missing_file_xyz.json").exit_code == 2);
    CHECK(run_cli("validate").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);

    // level 3 with a nonmax family is an invalid combination
    fs::path box = scratch_file("uniform_box2.json");
    save_box_file(box.string(), JointBox::uniform());
    CHECK(run_cli("validate " + box.string() + " --level 3 --alpha 0.3").exit_code == 2);
    CHECK(run_cli("validate " + box.string() + " --lambda 0.2 --alpha 0.3").exit_code == 2);
    CHECK(run_cli("validate " + box.string() + " --level 2 --alpha 0.3").exit_code == 0);
    fs::remove(box);
}

TEST_CASE("scan-ball emits the documented CSV", "[cli]") {
    fs::path csv = scratch_file("ball_scan.csv");
    RunResult r = run_cli("scan-ball --lambda 0 --grid 11 --out " + csv.string());
    REQUIRE(r.exit_code == 0);
    std::string content = read_file(csv);
    std::istringstream in(content);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# axes: p_x,p_y,p_z; params: lambda=0, grid=11");
    std::size_t rows = 0;
    bool center = false, corner_infeasible = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line == "0.5,0.5,0.5,1") center = true;
        if (line == "1,1,1,0") corner_infeasible = true;
    }
    CHECK(rows == 11 * 11 * 11);
    CHECK(center);
    CHECK(corner_infeasible);

    // Byte-identical across runs and worker counts.
    fs::path csv2 = scratch_file("ball_scan2.csv");
    run_cli("scan-ball --lambda 0 --grid 11 --out " + csv2.string() + " --threads 3");
    CHECK(read_file(csv2) == content);
    fs::remove(csv);
    fs::remove(csv2);
}

TEST_CASE("scan-ball slice mode emits a 2-D grid", "[cli]") {
    fs::path csv = scratch_file("ball_slice.csv");
    RunResult r = run_cli("scan-ball --lambda 0 --grid 11 --slice 0.5 --out " + csv.string());
    REQUIRE(r.exit_code == 0);
    std::istringstream in(read_file(csv));
    std::string header;
    std::getline(in, header);
    CHECK(header == "# axes: p_x,p_y; params: lambda=0, grid=11, p_z=0.5");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 121);
    fs::remove(csv);
}

TEST_CASE("scan-lh emits the documented CSV and respects the angle flags", "[cli]") {
    fs::path csv = scratch_file("lh_scan.csv");
    RunResult r = run_cli("scan-lh --alpha 0 --grid 11 --out " + csv.string());
    REQUIRE(r.exit_code == 0);
    std::string content = read_file(csv);
    CHECK(content.find("# axes: h,l; params: alpha=0, grid=11") == 0);
    // (h=0, l=0.7): 2*0.49 <= 1 feasible; (h=1, l=0.1): infeasible.
    CHECK(content.find("\n0,0.7,1\n") != std::string::npos);
    CHECK(content.find("\n1,0.1,0\n") != std::string::npos);

    // alpha = 4 * pi/16 = pi/4: everything feasible.
    fs::path csv2 = scratch_file("lh_scan2.csv");
    run_cli("scan-lh --alpha-sixteenths 4 --grid 11 --out " + csv2.string());
    std::istringstream in(read_file(csv2));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CHECK(line.back() == '1');
    }
    fs::remove(csv);
    fs::remove(csv2);

    CHECK(run_cli("scan-lh --grid 11 --out " + csv.string()).exit_code == 2);
    CHECK(run_cli("scan-lh --alpha 0 --alpha-sixteenths 1 --grid 11 --out " + csv.string())
              .exit_code == 2);
}

TEST_CASE("chsh exact optimum and witness", "[cli]") {
    fs::path witness = scratch_file("chsh_witness.json");
    RunResult r = run_cli("chsh --exact --level 2 --a1 X --a2 Z --b1 X --b2 Z --witness " +
                          witness.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find(": 4") != std::string::npos);
    JointBox box = load_box_file(witness.string());
    CHECK(membership(box, 2).pass);
    CHECK(chsh_value(box, {Setting::X, Setting::Z, Setting::X, Setting::Z}) ==
          Catch::Approx(4.0).margin(1e-9));
    fs::remove(witness);

    RunResult level1 = run_cli("chsh --exact --level 1 --json");
    CHECK(level1.exit_code == 0);
    CHECK(level1.output.find("\"value\": 4.0") != std::string::npos);

    CHECK(run_cli("chsh --exact --level 3").exit_code == 2);
    CHECK(run_cli("chsh --level 2").exit_code == 2);
    CHECK(run_cli("chsh --exact --level 2 --a1 X --a2 X").exit_code == 2);
}

TEST_CASE("chsh sampling stays below the quantum bound", "[cli]") {
    RunResult r = run_cli("chsh --level 3 --trials 200 --seed 0 --json");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.output);
    CHECK(j.at("value").get<double>() <= 2.8285);
}

TEST_CASE("oracle consistency checks", "[cli]") {
    RunResult r = run_cli("oracle --samples 1000 --seed 0");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("PASS") != std::string::npos);

    // An absurd tolerance forces the failure path.
    RunResult strict = run_cli("oracle --samples 5 --seed 0 --tol 1e-20");
    CHECK(strict.exit_code == 1);
    CHECK(strict.output.find("FAIL") != std::string::npos);

    RunResult json = run_cli("oracle --samples 20 --seed 1 --json");
    CHECK(json.exit_code == 0);
    auto j = nlohmann::json::parse(json.output);
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("max_parity_residual").get<double>() < 1e-12);
}
