#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "degctrl/config.hpp"
#include "degctrl/errors.hpp"
#include "degctrl/experiment.hpp"

using namespace degctrl;

namespace {

std::string base_config() {
    return R"(case = interior
seed = 42
domain = rectangle
rect_x0_length = -1
rect_x1_length = 1
rect_y0_length = -1
rect_y1_length = 1
mesh_h_target_length = 0.25
mesh_grading_exponent = 2
alpha = 1.0
omega_shape = ball
omega_center_x_length = 0.2
omega_center_y_length = 0.0
omega_radius_length = 0.1
omega0_shape = ball
omega0_center_x_length = 0.0
omega0_center_y_length = 0.0
omega0_radius_length = 0.5
eps_length = 0.05
eps0_length = 0.9
T_seconds = 0.2
dt_seconds = 0.02
)";
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("a complete config parses with the right values") {
    const ExperimentConfig cfg = parse_config_text(base_config());
    CHECK(cfg.case_name == "interior");
    CHECK(cfg.seed == 42);
    CHECK(cfg.alpha == 1.0);
    CHECK(cfg.mesh_grading_exponent == 2.0);
    CHECK(cfg.T_seconds == 0.2);
    CHECK(cfg.delta_or_default() == doctest::Approx(0.04));
    CHECK(std::holds_alternative<RectDomain>(cfg.domain));
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        parse_config_text(base_config() + "unknown_knob = 3\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unknown_knob") != std::string::npos);
    }
}

TEST_CASE("eps bound violations name the field") {
    std::string text = base_config();
    const auto pos = text.find("eps_length = 0.05");
    text.replace(pos, std::string("eps_length = 0.05").size(), "eps_length = 0.2");
    try {
        parse_config_text(text);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("eps_length") != std::string::npos);
    }
}

TEST_CASE("missing keys and malformed values are rejected") {
    CHECK_THROWS_AS(parse_config_text("case = interior\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(base_config() + "threads = 0\n"), ValidationError);
    std::string bad_dt = base_config();
    const auto pos = bad_dt.find("dt_seconds = 0.02");
    bad_dt.replace(pos, std::string("dt_seconds = 0.02").size(), "dt_seconds = 0.03");
    CHECK_THROWS_AS(parse_config_text(bad_dt), ValidationError);
    CHECK_THROWS_AS(parse_config_text(base_config() + "alpha = nope\n"), ValidationError);
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(parse_config_text(base_config() + "alpha = 1.5\n"), ValidationError);
}

TEST_CASE("reruns with one seed produce byte-identical csv bodies") {
    ExperimentConfig cfg = parse_config_text(base_config());
    const auto tmp = std::filesystem::temp_directory_path() / "degctrl_det_test";
    std::filesystem::remove_all(tmp);
    run_single_stage(cfg, "solve", tmp / "a");
    run_single_stage(cfg, "solve", tmp / "b");
    for (const char* name : {"norms.csv", "energy.csv", "trajectory.txt"}) {
        const std::string a = read_file(tmp / "a" / name);
        const std::string b = read_file(tmp / "b" / name);
        CHECK(!a.empty());
        CHECK(a == b);
    }
    std::filesystem::remove_all(tmp);
}

TEST_CASE("every numeric in produced csv files is finite") {
    ExperimentConfig cfg = parse_config_text(base_config());
    const auto tmp = std::filesystem::temp_directory_path() / "degctrl_finite_test";
    std::filesystem::remove_all(tmp);
    run_single_stage(cfg, "solve", tmp);
    std::istringstream body(read_file(tmp / "norms.csv"));
    std::string line;
    std::getline(body, line);  // header
    while (std::getline(body, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double v;
        while (row >> v) CHECK(std::isfinite(v));
    }
    std::filesystem::remove_all(tmp);
}

TEST_CASE("stage dispatch validates stage names") {
    ExperimentConfig cfg = parse_config_text(base_config());
    const auto tmp = std::filesystem::temp_directory_path() / "degctrl_stage_test";
    CHECK_THROWS_AS(run_single_stage(cfg, "nonsense", tmp), ValidationError);
    std::filesystem::remove_all(tmp);
}
