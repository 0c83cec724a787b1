// test_estimate.cpp — coefficient-matching residuals, multi-start identification, noise sweep

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oqsid/estimate.hpp"
#include "oqsid/models.hpp"

using namespace oqsid;

namespace {

TraceSet nominal_traces(const ParamModel& m, double dt, int n_steps) {
    const AffineLTI full = assemble_generator(m, m.theta_nominal, *m.algebra);
    const AffineLTI r = restrict(full, accessible_set(full));
    return simulate_traces(r, dt, n_steps);
}

} // namespace

TEST_CASE("relative_errors") {
    Eigen::VectorXd nom(3);
    nom << 2.0, -0.5, 0.0;

    SECTION("exact estimate gives zero") {
        const Eigen::VectorXd e = relative_errors(nom, nom);
        REQUIRE(e[0] == 0.0);
        REQUIRE(e[1] == 0.0);
        REQUIRE(std::isnan(e[2]));  // zero nominal is flagged, not divided
    }
    SECTION("uniform 10% overshoot") {
        const Eigen::VectorXd e = relative_errors(1.1 * nom, nom);
        REQUIRE(e[0] == Catch::Approx(10.0).margin(1e-12));
        REQUIRE(e[1] == Catch::Approx(10.0).margin(1e-12));
    }
    SECTION("sign-ambiguous entries are compared on absolute value") {
        Eigen::VectorXd hat = nom;
        hat[0] = -nom[0];
        const Eigen::VectorXd strict = relative_errors(hat, nom);
        REQUIRE(strict[0] == Catch::Approx(200.0).margin(1e-12));
        const Eigen::VectorXd loose = relative_errors(hat, nom, {true, false, false});
        REQUIRE(loose[0] == 0.0);
    }
    SECTION("length mismatch is rejected") {
        REQUIRE_THROWS_AS(relative_errors(Eigen::VectorXd::Zero(2), nom), validation_error);
    }
}

TEST_CASE("residual against a closed-form target") {
    const ParamModel m = builtin_model("energy_transfer");
    const Eigen::VectorXd th = m.theta_nominal;
    const RationalTF target = model_tf_oracle("energy_transfer", th, "z1");

    SECTION("nominal parameters solve the system") {
        REQUIRE(residual(m, th, target).norm() < 1e-9);
    }
    SECTION("the sign symmetry gives the identical residual") {
        Eigen::VectorXd flipped = th;
        flipped[0] = -flipped[0];
        flipped[1] = -flipped[1];
        const Eigen::VectorXd a = residual(m, th, target);
        const Eigen::VectorXd b = residual(m, flipped, target);
        REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("perturbed parameters do not") {
        REQUIRE(residual(m, 1.05 * th, target).norm() > 1e-3);
    }
    SECTION("residual length equals the parameter count") {
        REQUIRE(residual(m, th, target).size() == m.n_params());
        REQUIRE(residual(m, th, target, 0, ResidualSelection::All).size() == 10);
    }
    SECTION("unnormalized targets are rejected") {
        RationalTF raw = target;
        raw.normalized = false;
        REQUIRE_THROWS_AS(residual(m, th, raw), validation_error);
    }
}

TEST_CASE("coefficient selection order: simplest equations first") {
    // den_deg 5: (num s^3, den s^4), (num s^2, den s^3), ... numerator before
    // denominator at equal degree; degree-0 structural coefficients excluded
    const auto sel = detail::make_selection(5, 7, ResidualSelection::LowestDegreeFirst);
    REQUIRE(sel.size() == 7);
    REQUIRE((sel[0].is_num && sel[0].k == 3));
    REQUIRE((!sel[1].is_num && sel[1].k == 4));
    REQUIRE((sel[2].is_num && sel[2].k == 2));
    REQUIRE((!sel[3].is_num && sel[3].k == 3));
    REQUIRE((sel[4].is_num && sel[4].k == 1));
    REQUIRE((!sel[5].is_num && sel[5].k == 2));
    REQUIRE((sel[6].is_num && sel[6].k == 0));
    const auto all = detail::make_selection(5, 0, ResidualSelection::All);
    REQUIRE(all.size() == 10);
}

TEST_CASE("identify recovers the nominal class from noiseless mode-2 data") {
    const ParamModel m = builtin_model("energy_transfer");
    const TraceSet traces = nominal_traces(m, 0.05, 1200);

    EstimationConfig cfg;
    cfg.mode = 2;
    cfg.n_starts = 64;
    cfg.seed = 7;
    const EstimateReport rep = identify(m, traces, cfg);
    REQUIRE(!rep.no_solution);
    REQUIRE(rep.n_sigma == 5);
    REQUIRE(!rep.solutions.empty());

    // some solution class matches the nominal parameters to < 0.1% per parameter
    bool found = false;
    for (const auto& sol : rep.solutions) {
        const Eigen::VectorXd e = relative_errors(sol.theta, m.theta_nominal, m.sign_ambiguous);
        if (e.maxCoeff() < 0.1) {
            found = true;
            break;
        }
    }
    REQUIRE(found);

    // solutions are sorted by residual and deduplicated on |θ| classes
    for (std::size_t i = 1; i < rep.solutions.size(); ++i)
        REQUIRE(rep.solutions[i - 1].residual_norm <= rep.solutions[i].residual_norm);
    REQUIRE(rep.theta_names == m.theta_names);
    REQUIRE(rep.target_tf.normalized);
}

TEST_CASE("identify mode wiring and validation") {
    const ParamModel m = builtin_model("energy_transfer");
    const TraceSet traces = nominal_traces(m, 0.05, 600);

    EstimationConfig cfg;
    cfg.n_starts = 0;  // box-center start only; wiring is what is under test

    cfg.mode = 0;
    REQUIRE_THROWS_AS(identify(m, traces, cfg), validation_error);
    cfg.mode = 5;
    REQUIRE_THROWS_AS(identify(m, traces, cfg), validation_error);

    // single-channel traces cannot drive the stacked or z2 modes
    TraceSet one = traces;
    one.values = traces.values.row(0);
    one.labels = {"z1"};
    cfg.mode = 2;
    REQUIRE_THROWS_AS(identify(m, one, cfg), validation_error);
    cfg.mode = 3;
    REQUIRE_THROWS_AS(identify(m, one, cfg), validation_error);

    cfg.mode = 1;
    REQUIRE_NOTHROW(identify(m, one, cfg));

    // a bad start box shape is rejected
    cfg.start_box = Eigen::MatrixXd::Zero(3, 2);
    REQUIRE_THROWS_AS(identify(m, traces, cfg), validation_error);
}

TEST_CASE("identify is deterministic under a fixed seed") {
    const ParamModel m = builtin_model("energy_transfer");
    const TraceSet noisy = add_noise(nominal_traces(m, 0.05, 800), 0.01, 99);

    EstimationConfig cfg;
    cfg.mode = 1;
    cfg.n_starts = 12;
    cfg.seed = 5;
    const EstimateReport a = identify(m, noisy, cfg);
    const EstimateReport b = identify(m, noisy, cfg);
    REQUIRE(a.no_solution == b.no_solution);
    REQUIRE(a.solutions.size() == b.solutions.size());
    for (std::size_t i = 0; i < a.solutions.size(); ++i) {
        REQUIRE((a.solutions[i].theta - b.solutions[i].theta).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(a.solutions[i].residual_norm == b.solutions[i].residual_norm);
    }
}

TEST_CASE("unidentifiable raw-wrapper directions are reported") {
    const ParamModel m = builtin_model("energy_transfer_raw");
    const TraceSet traces = nominal_traces(m, 0.05, 1200);

    EstimationConfig cfg;
    cfg.mode = 3;
    cfg.n_starts = 16;
    cfg.seed = 3;
    const EstimateReport rep = identify(m, traces, cfg);
    REQUIRE(!rep.no_solution);
    // omega shifts and the gamma trade-off are invisible to the transfer function
    REQUIRE(rep.identifiability_notes.size() >= 2);
}

TEST_CASE("noise sweep at sigma = 0 recovers the nominal parameters") {
    const ParamModel m = builtin_model("energy_transfer");
    EstimationConfig cfg;
    cfg.mode = 3;
    cfg.n_starts = 24;
    cfg.dt = 0.05;
    cfg.t_f = 60.0;
    const auto rows = noise_sweep(m, m.theta_nominal, {0.0}, 3, cfg, 11);
    REQUIRE(rows.size() == static_cast<std::size_t>(m.n_params()));
    for (const auto& row : rows) {
        REQUIRE(row.sigma == 0.0);
        REQUIRE(row.n_failed == 0);
        REQUIRE(row.mean_rel_err_pct < 0.1);
    }
    // CSV schema
    std::stringstream ss;
    write_sweep_csv(rows, ss);
    std::string header;
    std::getline(ss, header);
    REQUIRE(header == "sigma,param,mean_rel_err_pct,stderr_pct,n_failed");
    REQUIRE_THROWS_AS(noise_sweep(m, m.theta_nominal, {0.0}, 0, cfg, 1), validation_error);
}

TEST_CASE("report JSON carries solutions, notes, and the target TF") {
    const ParamModel m = builtin_model("energy_transfer");
    const TraceSet traces = nominal_traces(m, 0.05, 800);
    EstimationConfig cfg;
    cfg.mode = 1;
    cfg.n_starts = 8;
    const EstimateReport rep = identify(m, traces, cfg);
    const nlohmann::json j = report_to_json(rep);
    REQUIRE(j.at("schema_version").get<int>() == 1);
    REQUIRE(j.at("no_solution").get<bool>() == rep.no_solution);
    REQUIRE(j.at("solutions").size() == rep.solutions.size());
    if (!rep.solutions.empty()) {
        REQUIRE(j["solutions"][0].contains("theta"));
        REQUIRE(j["solutions"][0].contains("residual_norm"));
        REQUIRE(j["solutions"][0].contains("sign_class"));
    }
    REQUIRE(j.contains("target_tf"));
    REQUIRE(j.contains("singular_values"));
}
