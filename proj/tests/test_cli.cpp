#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "test_util.hpp"

namespace fs = std::filesystem;
using testutil::data_path;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const fs::path capture = fs::temp_directory_path() / "rcwbc_cli_capture.txt";
  const std::string cmd = std::string("RCWBC_LOG_LEVEL=error '") + RCWBC_CLI_PATH + "' " + args + " > '" +
                          capture.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rcwbc_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("check") {
    const Run ok = run_cli("check " + q(data_path("models/biped_rcj.yaml")));
    CHECK(ok.code == 0);
    CHECK(ok.out.find("100/100 pass") != std::string::npos);

    const fs::path broken = scratch("broken.yaml");
    std::ofstream(broken) << read_text(data_path("models/biped_rcj.yaml")).substr(0, 400) << "\n  - [unclosed: {\n";
    const Run parse = run_cli("check " + q(broken));
    CHECK(parse.code == 2);
    CHECK(parse.out.find("parse error") != std::string::npos);

    std::string text = read_text(data_path("models/biped_rcj.yaml"));
    const std::string lim = "position_limits: [-0.6, 0.6]";
    REQUIRE(text.find(lim) != std::string::npos);
    text.replace(text.find(lim), lim.size(), "position_limits: [0.6, -0.6]");
    const fs::path inverted = scratch("inverted.yaml");
    std::ofstream(inverted) << text;
    const Run bad = run_cli("check " + q(inverted));
    CHECK(bad.code == 1);
    CHECK(bad.out.find("validation error") != std::string::npos);

    CHECK(run_cli("check " + q(scratch("missing.yaml"))).code != 0);
    CHECK(run_cli("frobnicate").code != 0);
  }

  TEST_CASE("simulate writes log and summary") {
    const fs::path dir = scratch("sim/nested");
    fs::remove_all(dir.parent_path());
    const fs::path scenario = scratch("short.yaml");
    std::ofstream(scenario) << "name: short\nmodel: " << data_path("models/biped_rcj.yaml").string()
                            << "\ncontroller: " << data_path("config/controller.yaml").string()
                            << "\ninitial: {knee_bend: 0.8, joint_angles: {l_hip_pitch: -0.4, r_hip_pitch: -0.4, "
                               "l_ankle_pitch: -0.4, r_ankle_pitch: -0.4}}\n"
                               "phases: [{kind: initialize, duration: 0.2}, {kind: balance, duration: 0.3}]\n";
    const Run r = run_cli("simulate " + q(scenario) + " -o " + q(dir) + " --log-every 10 --seed 7");
    CHECK(r.code == 0);
    CHECK(r.out.find("balance") != std::string::npos);
    REQUIRE(fs::exists(dir / "log.csv"));
    REQUIRE(fs::exists(dir / "summary.yaml"));
    const std::string log = read_text(dir / "log.csv");
    CHECK(std::count(log.begin(), log.end(), '\n') == 1 + 50);
    CHECK(read_text(dir / "summary.yaml").find("completed: true") != std::string::npos);
  }

  TEST_CASE("cii") {
    const fs::path small = scratch("small_sweep.yaml");
    std::ofstream(small) << "knee_bend: 1.5707963267948966\n"
                            "joint_angles: {l_hip_pitch: -0.785, r_hip_pitch: -0.785, l_ankle_pitch: -0.785, "
                            "r_ankle_pitch: -0.785}\nforward_points: 3\nlateral_points: 2\nsamples: 5\n";
    const fs::path out = scratch("cii_same");
    const Run same = run_cli("cii " + q(data_path("models/biped_rcj.yaml")) + " " +
                             q(data_path("models/biped_rcj.yaml")) + " -c " + q(small) + " -o " + q(out));
    CHECK(same.code == 0);
    CHECK(same.out.find("0.0%") != std::string::npos);
    CHECK(fs::exists(out / "cii_table.csv"));
    CHECK(fs::exists(out / "cii_report.yaml"));

    const fs::path single = scratch("cii_single");
    const Run one = run_cli("cii " + q(data_path("models/biped_rcj.yaml")) + " -c " + q(small) + " -o " + q(single));
    CHECK(one.code == 0);
    const std::string table = read_text(single / "cii_table.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 3 * 2 * 5);

    const fs::path far = scratch("far_sweep.yaml");
    std::ofstream(far) << "forward: [3.0, 4.0]\nforward_points: 2\nlateral_points: 2\nsamples: 4\n"
                          "ik: {max_iterations: 30}\n";
    const Run unreachable =
        run_cli("cii " + q(data_path("models/biped_rcj.yaml")) + " -c " + q(far) + " -o " + q(scratch("cii_far")));
    CHECK(unreachable.code == 4);
    CHECK(unreachable.out.find("IK") != std::string::npos);
  }
}
