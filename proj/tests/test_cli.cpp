// test_cli.cpp — in-process CLI runs: simulate, identify, sweep-noise, models, config handling

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oqsid/cli.hpp"

using namespace oqsid;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& suffix) {
        static int counter = 0;
        path = "cli_test_tmp_" + std::to_string(counter++) + suffix;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::vector<std::string>> split_csv(const std::string& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("simulate writes the documented CSV shape") {
    TempFile out(".csv");
    const int code = cli::run({"simulate", "--model", "energy_transfer", "--dt", "0.01",
                               "--tf", "60", "--out", out.path});
    REQUIRE(code == 0);
    const auto rows = split_csv(out.path);
    REQUIRE(rows.size() == 6002);            // header + 6001 samples
    REQUIRE(rows[0] == std::vector<std::string>{"t", "z1", "z2"});
    for (const auto& row : rows) REQUIRE(row.size() == 3);
    // first sample is x_a(0) = (1, 0)
    REQUIRE(std::stod(rows[1][0]) == 0.0);
    REQUIRE(std::stod(rows[1][1]) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::stod(rows[1][2]) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("simulate then identify round-trips through trace CSV") {
    TempFile traces(".csv");
    REQUIRE(cli::run({"simulate", "--model", "energy_transfer", "--dt", "0.05", "--tf", "60",
                      "--out", traces.path}) == 0);

    TempFile report(".json");
    TempFile sv(".csv");
    const int code =
        cli::run({"identify", "--model", "energy_transfer", "--traces", traces.path, "--mode",
                  "2", "--n-starts", "24", "--dump-sv", sv.path, "--out", report.path});
    REQUIRE(code == 0);

    std::ifstream is(report.path);
    const nlohmann::json j = nlohmann::json::parse(is);
    REQUIRE(j.at("no_solution").get<bool>() == false);
    REQUIRE(!j.at("solutions").empty());
    REQUIRE(j.at("config").at("model").get<std::string>() == "energy_transfer");
    REQUIRE(j.at("config").at("mode").get<int>() == 2);
    REQUIRE(j.at("config").at("traces").get<std::string>() == traces.path);

    const auto svrows = split_csv(sv.path);
    REQUIRE(svrows[0] == std::vector<std::string>{"index", "sigma"});
    REQUIRE(svrows.size() >= 6);  // at least the retained-order singular values
}

TEST_CASE("identify can simulate inline and echoes the simulation settings") {
    TempFile report(".json");
    const int code = cli::run({"identify", "--model", "energy_transfer", "--mode", "1", "--dt",
                               "0.05", "--tf", "60", "--n-starts", "16", "--out", report.path});
    REQUIRE(code == 0);
    std::ifstream is(report.path);
    const nlohmann::json j = nlohmann::json::parse(is);
    REQUIRE(j.at("config").at("dt").get<double>() == 0.05);
    REQUIRE(j.at("config").at("t_f").get<double>() == 60.0);
    REQUIRE(j.at("config").at("order_policy").get<std::string>() == "model");
}

TEST_CASE("config file supplies defaults and flags take precedence") {
    TempFile cfg(".json");
    {
        std::ofstream os(cfg.path);
        os << R"({"model": "energy_transfer", "dt": 0.05, "t_f": 30.0, "mode": 2,
                  "n_starts": 8})";
    }
    TempFile report(".json");
    // --tf overrides the config, dt/model/mode come from it
    const int code = cli::run({"identify", "--config", cfg.path, "--tf", "60", "--n-starts",
                               "16", "--out", report.path});
    REQUIRE(code == 0);
    std::ifstream is(report.path);
    const nlohmann::json j = nlohmann::json::parse(is);
    REQUIRE(j.at("config").at("model").get<std::string>() == "energy_transfer");
    REQUIRE(j.at("config").at("mode").get<int>() == 2);
    REQUIRE(j.at("config").at("dt").get<double>() == 0.05);
    REQUIRE(j.at("config").at("t_f").get<double>() == 60.0);   // flag wins
    REQUIRE(j.at("config").at("n_starts").get<int>() == 16);   // flag wins
}

TEST_CASE("sweep-noise writes the sweep CSV") {
    TempFile out(".csv");
    const int code = cli::run({"sweep-noise", "--model", "energy_transfer", "--sigmas", "0.0",
                               "--M", "2", "--dt", "0.05", "--tf", "60", "--mode", "3",
                               "--n-starts", "16", "--out", out.path});
    REQUIRE(code == 0);
    const auto rows = split_csv(out.path);
    REQUIRE(rows[0] == std::vector<std::string>{"sigma", "param", "mean_rel_err_pct",
                                                "stderr_pct", "n_failed"});
    REQUIRE(rows.size() == 8);  // header + one row per parameter
    REQUIRE(rows[1][1] == "omega_d");
}

TEST_CASE("models list prints every built-in id") {
    REQUIRE(cli::run({"models", "list"}) == 0);
}

TEST_CASE("verify-formulas passes") {
    REQUIRE(cli::run({"verify-formulas"}) == 0);
}

TEST_CASE("validation failures exit with code 2") {
    REQUIRE(cli::run({"simulate", "--model", "no_such_model", "--out", "-"}) == 2);
    REQUIRE(cli::run({"simulate", "--bogus-flag"}) == 2);
    REQUIRE(cli::run({"identify", "--model", "energy_transfer", "--mode", "9"}) == 2);
    REQUIRE(cli::run({}) == 2);
    // --model and --model-file are mutually exclusive
    REQUIRE(cli::run({"simulate", "--model", "energy_transfer", "--model-file", "x.json",
                      "--out", "-"}) == 2);
    // malformed theta list
    REQUIRE(cli::run({"simulate", "--model", "energy_transfer", "--theta", "1,2,oops",
                      "--out", "-"}) == 2);
}

TEST_CASE("identify with hopeless settings reports no solution with exit code 3") {
    // zero random starts leaves only the box-center start, which cannot converge
    TempFile report(".json");
    const int code =
        cli::run({"identify", "--model", "energy_transfer", "--mode", "1", "--dt", "0.05",
                  "--tf", "30", "--n-starts", "0", "--out", report.path});
    REQUIRE(code == 3);
    std::ifstream is(report.path);
    const nlohmann::json j = nlohmann::json::parse(is);
    REQUIRE(j.at("no_solution").get<bool>());
    REQUIRE(!j.at("diagnostics").get<std::string>().empty());
}

TEST_CASE("JSON model file drives the full pipeline") {
    TempFile model(".json");
    {
        std::ofstream os(model.path);
        os << R"({
            "name": "dephasing2_json",
            "n_qubits": 2,
            "parameters": ["omega1", "omega2", "delta1", "gamma1", "gamma2"],
            "hamiltonian": [
                {"pauli": "ZI", "param": "omega1", "scale": 0.5},
                {"pauli": "IZ", "param": "omega2", "scale": 0.5},
                {"pauli": "XX", "param": "delta1", "scale": 0.5},
                {"pauli": "YY", "param": "delta1", "scale": 0.5}
            ],
            "dissipators": [
                {"jump": "ZI", "param": "gamma1", "scale": 0.5},
                {"jump": "IZ", "param": "gamma2", "scale": 0.5}
            ],
            "observables": [{"label": "x1", "pauli": "XI"}],
            "initial_state": ["+", "0"],
            "theta_nominal": [1.1, 0.7, 0.4, 0.05, 0.08],
            "sign_ambiguous": [true, true, true, false, false]
        })";
    }
    TempFile out(".csv");
    REQUIRE(cli::run({"simulate", "--model-file", model.path, "--dt", "0.05", "--tf", "30",
                      "--out", out.path}) == 0);
    const auto rows = split_csv(out.path);
    REQUIRE(rows[0] == std::vector<std::string>{"t", "x1"});
    REQUIRE(rows.size() == 602);
}
