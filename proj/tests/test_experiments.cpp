#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "popgrad/experiments.hpp"

using namespace popgrad;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("popgrad_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("experiment registry and parameter validation") {
    const auto& names = experiment_names();
    CHECK(names.size() == 11);

    CHECK_THROWS(effective_params("no_such_experiment", {}));
    CHECK_THROWS(effective_params("basin", {{"not_a_param", 1.0}}));

    const auto defaults = effective_params("basin", {});
    CHECK(defaults.at("d") == 10.0);
    CHECK(defaults.at("epsilon") == 0.2);

    const auto overridden = effective_params("basin", {{"d", 5.0}});
    CHECK(overridden.at("d") == 5.0);
    CHECK(overridden.at("epsilon") == 0.2);  // untouched defaults survive

    ExperimentConfig bad;
    bad.experiment = "no_such_experiment";
    CHECK_THROWS(run(bad));
}

TEST_CASE("small verify_formula run passes and reports its config") {
    ExperimentConfig cfg;
    cfg.experiment = "verify_formula";
    cfg.seed = RngSeed{7, 0};
    cfg.output_dir = temp_dir("verify");
    cfg.params = {{"d", 20.0}, {"pairs", 4.0}, {"n_levels", 2.0}, {"n_base", 500.0}};
    const ExperimentReport rep = run(cfg);
    CHECK(rep.passed);
    CHECK(rep.experiment == "verify_formula");
    CHECK(fs::exists(rep.csv_path));
    CHECK(fs::exists(rep.report_path));
    // full effective config echoed, including an untouched default
    CHECK(rep.summary_json.find("\"pairs\"") != std::string::npos);
    const std::string csv = slurp(rep.csv_path);
    CHECK(csv.rfind("n,pair,theta,rel_err", 0) == 0);  // header row first
}

TEST_CASE("small scan_l12 run finds no counterexamples") {
    ExperimentConfig cfg;
    cfg.experiment = "scan_l12";
    cfg.output_dir = temp_dir("scan");
    cfg.params = {{"grid_phi", 25.0}, {"grid_theta12", 25.0}};
    const ExperimentReport rep = run(cfg);
    CHECK(rep.passed);
    CHECK(rep.summary_json.find("\"counterexamples\": 0") != std::string::npos);
}

TEST_CASE("small basin run converges from inside the sampling ball") {
    ExperimentConfig cfg;
    cfg.experiment = "basin";
    cfg.seed = RngSeed{8, 0};
    cfg.output_dir = temp_dir("basin");
    cfg.params = {{"d", 5.0}, {"trials", 100.0}};
    const ExperimentReport rep = run(cfg);
    CHECK(rep.passed);
}

TEST_CASE("rerunning an experiment with the same config is byte-identical") {
    ExperimentConfig cfg;
    cfg.experiment = "symmetric_field";
    cfg.output_dir = temp_dir("det_a");
    cfg.params = {{"grid", 8.0}};
    const ExperimentReport a = run(cfg);
    const std::string first_csv = slurp(a.csv_path);

    cfg.output_dir = temp_dir("det_b");
    const ExperimentReport b = run(cfg);
    // the report embeds wall time, so only the data file is byte-comparable
    CHECK(slurp(b.csv_path) == first_csv);
}

TEST_CASE("emit_vector_field writes the expected grid") {
    const std::string dir = temp_dir("field");
    const std::string path = dir + "/field.csv";
    const int grid = 10;
    CHECK_THROWS(emit_vector_field(2, 4, 1.25, path));
    CHECK_THROWS(emit_vector_field(2, grid, -1.0, path));
    const long rows = emit_vector_field(2, grid, 1.25, path);
    CHECK(rows == long(grid + 1) * (grid + 1) - 1);  // origin cell skipped

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "x,y,gx,gy");
    long seen = 0;
    bool optimum_zero = false;
    while (std::getline(in, line)) {
        ++seen;
        std::istringstream row(line);
        std::string x, y, gx, gy;
        REQUIRE(std::getline(row, x, ','));
        REQUIRE(std::getline(row, y, ','));
        REQUIRE(std::getline(row, gx, ','));
        REQUIRE(std::getline(row, gy, ','));
        if (std::stod(x) == 1.0 && std::stod(y) == 0.0) {
            optimum_zero = std::abs(std::stod(gx)) < 1e-12 && std::abs(std::stod(gy)) < 1e-12;
        }
    }
    CHECK(seen == rows);
    CHECK(optimum_zero);  // bound 1.25 with grid 10 puts (1, 0) on the lattice

    const std::string again = dir + "/field2.csv";
    emit_vector_field(2, grid, 1.25, again);
    CHECK(slurp(path) == slurp(again));
}
