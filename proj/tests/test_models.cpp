// test_models.cpp — built-in model catalog, thermal occupation, JSON model definitions

#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include "oqsid/generator.hpp"
#include "oqsid/models.hpp"

using namespace oqsid;

TEST_CASE("bose_einstein occupation") {
    REQUIRE(bose_einstein(1.3, 1.04) == Catch::Approx(1.0 / std::expm1(1.25)).epsilon(1e-12));
    REQUIRE(bose_einstein(1.3, 1.04) == Catch::Approx(0.4016).epsilon(1e-3));
    // at omega = kT ln 2 the occupation is exactly 1
    REQUIRE(bose_einstein(std::log(2.0), 1.0) == Catch::Approx(1.0).epsilon(1e-12));
    // occupation vanishes in the cold limit
    REQUIRE(bose_einstein(1.0, 1e-3) < 1e-300);
    REQUIRE_THROWS_AS(bose_einstein(0.0, 1.0), validation_error);
    REQUIRE_THROWS_AS(bose_einstein(1.0, -0.5), validation_error);
}

TEST_CASE("built-in catalog is complete and self-consistent") {
    const auto ids = list_builtin_models();
    REQUIRE(ids.size() == 9);
    for (const auto& id : ids) {
        const ParamModel m = builtin_model(id);
        REQUIRE(m.name == id);
        REQUIRE(m.n_params() == static_cast<int>(m.sign_ambiguous.size()));
        REQUIRE(!m.convention_note.empty());
        REQUIRE(m.observables.size() == m.observable_labels.size());
        REQUIRE(m.theta_nominal.size() == m.n_params());
        // nominal must assemble without error and be admissible
        REQUIRE_NOTHROW(assemble_generator(m, m.theta_nominal, *m.algebra));
    }
    REQUIRE_THROWS_AS(builtin_model("no_such_model"), validation_error);
    REQUIRE_THROWS_AS(nominal_theta("no_such_model"), validation_error);
}

TEST_CASE("nominal parameter values") {
    {
        Eigen::VectorXd want(7);
        want << -1.1, 0.5, 0.0361, 0.022, -0.02, -0.0176, 0.065;
        REQUIRE((nominal_theta("energy_transfer") - want).cwiseAbs().maxCoeff() < 1e-15);
    }
    {
        Eigen::VectorXd want(9);
        want << 1.3, 2.4, 0.5, 0.03, 0.035, 0.00805, 0.02805, 0.0022, 0.0198;
        REQUIRE((nominal_theta("energy_transfer_raw") - want).cwiseAbs().maxCoeff() < 1e-15);
    }
    {
        Eigen::VectorXd want(5);
        want << 0.9, 1.4, 0.33, 0.07, 0.05;
        REQUIRE((nominal_theta("relaxation_chain_z") - want).cwiseAbs().maxCoeff() < 1e-15);
        REQUIRE((nominal_theta("relaxation_chain_x") - want).cwiseAbs().maxCoeff() < 1e-15);
    }
    {
        Eigen::VectorXd want(8);
        want << 1.1, 0.7, 1.7, 0.4, 0.6, 0.05, 0.08, 0.03;
        REQUIRE((nominal_theta("dephasing_chain3") - want).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("theta = 0 gives the trivial generator") {
    const ParamModel m = builtin_model("dephasing_chain2");
    const AffineLTI lti = assemble_generator(m, Eigen::VectorXd::Zero(m.n_params()), *m.algebra);
    REQUIRE(lti.A.cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(lti.b.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("consistency between the two energy-transfer parameterizations") {
    // the reduced model is the raw wrapper at omega2 = 0, gamma1 + gamma2 = gamma_s
    const ParamModel red = builtin_model("energy_transfer");
    const ParamModel raw = builtin_model("energy_transfer_raw");
    const Eigen::VectorXd th = red.theta_nominal;  // (w_d, d1, nu1, nu2, mu1, mu2, gs)
    Eigen::VectorXd traw(9);
    traw << th[0], 0.0, th[1], th[6], 0.0,
        (th[2] + th[4]) / 2.0, (th[2] - th[4]) / 2.0,   // g1+ = (nu1+mu1)/2, g1- = (nu1-mu1)/2
        (th[3] + th[5]) / 2.0, (th[3] - th[5]) / 2.0;
    const AffineLTI a = assemble_generator(red, th, *red.algebra);
    const AffineLTI b = assemble_generator(raw, traw, *raw.algebra);
    REQUIRE((a.A - b.A).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((a.b - b.b).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((a.x0 - b.x0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("JSON model round-trip against the built-in dephasing chain") {
    const nlohmann::json j = {
        {"name", "dephasing2_json"},
        {"n_qubits", 2},
        {"parameters", {"omega1", "omega2", "delta1", "gamma1", "gamma2"}},
        {"hamiltonian",
         {{{"pauli", "ZI"}, {"param", "omega1"}, {"scale", 0.5}},
          {{"pauli", "IZ"}, {"param", "omega2"}, {"scale", 0.5}},
          {{"pauli", "XX"}, {"param", "delta1"}, {"scale", 0.5}},
          {{"pauli", "YY"}, {"param", "delta1"}, {"scale", 0.5}}}},
        {"dissipators",
         {{{"jump", "ZI"}, {"param", "gamma1"}, {"scale", 0.5}},
          {{"jump", "IZ"}, {"param", "gamma2"}, {"scale", 0.5}}}},
        {"observables", {{{"label", "x1"}, {"pauli", "XI"}}}},
        {"initial_state", {"+", "0"}},
        {"theta_nominal", {1.1, 0.7, 0.4, 0.05, 0.08}},
        {"sign_ambiguous", {true, true, true, false, false}},
    };
    const ParamModel json_model = model_from_json(j);
    const ParamModel builtin = builtin_model("dephasing_chain2");
    REQUIRE(json_model.n_params() == 5);
    REQUIRE(json_model.sign_ambiguous == builtin.sign_ambiguous);

    auto gen = rng::derive_stream(42, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd th = builtin.random_admissible(gen);
        const AffineLTI a = assemble_generator(json_model, th, *json_model.algebra);
        const AffineLTI b = assemble_generator(builtin, th, *builtin.algebra);
        REQUIRE((a.A - b.A).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((a.b - b.b).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((a.c - b.c).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((a.x0 - b.x0).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("JSON model with ladder dissipators matches relaxation_chain_x") {
    const nlohmann::json j = {
        {"name", "relax_json"},
        {"n_qubits", 2},
        {"parameters", {"omega1", "omega2", "delta1", "g1m", "g2m"}},
        {"hamiltonian",
         {{{"pauli", "ZI"}, {"param", "omega1"}, {"scale", 0.5}},
          {{"pauli", "IZ"}, {"param", "omega2"}, {"scale", 0.5}},
          {{"pauli", "XX"}, {"param", "delta1"}, {"scale", 0.5}},
          {{"pauli", "YY"}, {"param", "delta1"}, {"scale", 0.5}}}},
        {"dissipators",
         {{{"ladder", "-"}, {"site", 1}, {"param", "g1m"}, {"scale", 2.0}},
          {{"ladder", "-"}, {"site", 2}, {"param", "g2m"}, {"scale", 2.0}}}},
        {"observables", {{{"label", "x1"}, {"pauli", "XI"}}}},
        {"initial_state", {"+", "0"}},
    };
    const ParamModel json_model = model_from_json(j);
    const ParamModel builtin = builtin_model("relaxation_chain_x");
    const Eigen::VectorXd th = builtin.theta_nominal;
    const AffineLTI a = assemble_generator(json_model, th, *json_model.algebra);
    const AffineLTI b = assemble_generator(builtin, th, *builtin.algebra);
    REQUIRE((a.A - b.A).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((a.b - b.b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("JSON model validation errors") {
    nlohmann::json base = {
        {"name", "m"},
        {"n_qubits", 1},
        {"parameters", {"w"}},
        {"hamiltonian", {{{"pauli", "Z"}, {"param", "w"}, {"scale", 0.5}}}},
        {"observables", {{{"label", "z"}, {"pauli", "Z"}}}},
        {"initial_state", {"0"}},
    };
    REQUIRE_NOTHROW(model_from_json(base));

    auto bad = base;
    bad["n_qubits"] = 5;
    REQUIRE_THROWS_AS(model_from_json(bad), validation_error);

    bad = base;
    bad["hamiltonian"][0]["param"] = "nope";
    REQUIRE_THROWS_AS(model_from_json(bad), validation_error);

    bad = base;
    bad["hamiltonian"][0]["pauli"] = "ZZ";  // wrong length for 1 qubit
    REQUIRE_THROWS_AS(model_from_json(bad), validation_error);

    bad = base;
    bad["dissipators"] = {{{"ladder", "-"}, {"site", 3}, {"param", "w"}}};
    REQUIRE_THROWS_AS(model_from_json(bad), validation_error);

    bad = base;
    bad["theta_nominal"] = {1.0, 2.0};  // length mismatch
    REQUIRE_THROWS_AS(model_from_json(bad), validation_error);

    bad = base;
    bad.erase("observables");
    REQUIRE_THROWS_AS(model_from_json(bad), validation_error);
}
