// models.hpp — Built-in Lindblad models, nominal parameters, and the JSON model loader

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oqsid/generator.hpp"
#include "oqsid/rng.hpp"

namespace oqsid {

namespace detail {

inline std::shared_ptr<const Algebra> cached_algebra(int n_qubits) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const Algebra>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n_qubits);
    if (it != cache.end()) return it->second;
    auto alg = make_algebra(n_qubits);
    cache[n_qubits] = alg;
    return alg;
}

inline Eigen::MatrixXcd op_on(int n, int site, const Eigen::Matrix2cd& op) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (int k = 0; k < n; ++k)
        out = kron(out, k == site ? Eigen::MatrixXcd(op)
                                  : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity()));
    return out;
}

inline Eigen::Matrix2cd sigma_z() { return pauli_1q(3); }
inline Eigen::Matrix2cd sigma_plus() {   // |0><1| (raising w.r.t. σz|0> = +|0>)
    return (Eigen::Matrix2cd() << 0, 1, 0, 0).finished();
}
inline Eigen::Matrix2cd sigma_minus() {
    return (Eigen::Matrix2cd() << 0, 0, 1, 0).finished();
}

// Spin-chain Hamiltonian: Σ ω_k/2 σz_k + Σ δ_k (σ+_k σ-_{k+1} + σ-_k σ+_{k+1})
inline Eigen::MatrixXcd chain_hamiltonian(int n, const Eigen::VectorXd& omega,
                                          const Eigen::VectorXd& delta) {
    const int N = 1 << n;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
    for (int k = 0; k < n; ++k) H += omega[k] / 2.0 * op_on(n, k, sigma_z());
    for (int k = 0; k + 1 < n; ++k)
        H += delta[k] * (op_on(n, k, sigma_plus()) * op_on(n, k + 1, sigma_minus()) +
                         op_on(n, k, sigma_minus()) * op_on(n, k + 1, sigma_plus()));
    return H;
}

inline Eigen::Vector2cd ket_1q(const std::string& tag) {
    const double r = 1.0 / std::sqrt(2.0);
    if (tag == "0") return Eigen::Vector2cd(1, 0);
    if (tag == "1") return Eigen::Vector2cd(0, 1);
    if (tag == "+") return Eigen::Vector2cd(r, r);
    if (tag == "-") return Eigen::Vector2cd(r, -r);
    if (tag == "+i") return Eigen::Vector2cd(r, cplx(0, 1) * r);
    if (tag == "-i") return Eigen::Vector2cd(r, cplx(0, -1) * r);
    throw validation_error("ket_1q: unknown state tag '" + tag + "'");
}

inline Eigen::MatrixXcd product_state(const std::vector<std::string>& kets) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
    for (const auto& tag : kets) {
        const Eigen::Vector2cd k = ket_1q(tag);
        Eigen::VectorXcd next(psi.size() * 2);
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            next[2 * i] = psi[i] * k[0];
            next[2 * i + 1] = psi[i] * k[1];
        }
        psi = next;
    }
    return psi * psi.adjoint();
}

} // namespace detail

// Bose–Einstein occupation n̄ = 1/(e^{ω/kT} − 1); ω, kT in the same units (MHz)
inline double bose_einstein(double omega, double kT) {
    if (omega <= 0.0 || kT <= 0.0)
        throw validation_error("bose_einstein: omega and kT must be positive");
    return 1.0 / std::expm1(omega / kT);
}

namespace detail {

using JumpList = std::vector<std::pair<Eigen::MatrixXcd, double>>;

inline ParamModel make_jump_model(
    std::string name, int n_qubits, std::vector<std::string> theta_names,
    std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)> hamiltonian,
    std::function<JumpList(const Eigen::VectorXd&)> jumps,
    std::vector<std::string> obs_labels, std::vector<std::string> obs_paulis,
    std::vector<std::string> initial_kets) {
    ParamModel m;
    m.name = std::move(name);
    m.n_qubits = n_qubits;
    m.theta_names = std::move(theta_names);
    m.algebra = cached_algebra(n_qubits);
    auto alg = m.algebra;
    m.ham_coeffs = [alg, hamiltonian](const Eigen::VectorXd& th) {
        return expand_operator(hamiltonian(th), alg->basis);
    };
    m.lindblad_matrix = [alg, jumps](const Eigen::VectorXd& th) {
        return lindblad_from_jumps(jumps(th), alg->basis);
    };
    m.observable_labels = std::move(obs_labels);
    for (const auto& p : obs_paulis) m.observables.push_back(pauli_string_matrix(p));
    m.rho0 = product_state(initial_kets);
    m.sign_ambiguous.assign(m.theta_names.size(), false);
    return m;
}

inline ParamModel energy_transfer_model() {
    // θ = (ω_d, δ1, ν1, ν2, μ1, μ2, γ_s); internal split ω1 = ω_d, ω2 = 0
    const int n = 2;
    auto H = [](const Eigen::VectorXd& th) {
        Eigen::VectorXd omega(2), delta(1);
        omega << th[0], 0.0;
        delta << th[1];
        return chain_hamiltonian(2, omega, delta);
    };
    auto jumps = [](const Eigen::VectorXd& th) {
        JumpList out;
        out.emplace_back(op_on(2, 0, sigma_z()), th[6] / 2.0);  // γ_s on qubit 1
        for (int k = 0; k < 2; ++k) {
            const double nu = th[2 + k], mu = th[4 + k];
            out.emplace_back(op_on(2, k, sigma_minus()), nu - mu / 2.0);
            out.emplace_back(op_on(2, k, sigma_plus()), nu + mu / 2.0);
        }
        return out;
    };
    ParamModel m = make_jump_model("energy_transfer", n,
                                   {"omega_d", "delta1", "nu1", "nu2", "mu1", "mu2", "gamma_s"},
                                   H, jumps, {"z1", "z2"}, {"ZI", "IZ"}, {"0", "+"});
    m.theta_nominal.resize(7);
    m.theta_nominal << -1.1, 0.5, 0.0361, 0.022, -0.02, -0.0176, 0.065;
    m.sign_ambiguous = {true, true, false, false, false, false, false};
    m.convention_note = "dephasing jump sigma_z^1 at rate gamma_s/2; thermal jumps sigma-+_k at "
                        "rates nu_k -+ mu_k/2";
    m.random_admissible = [](std::mt19937_64& gen) {
        Eigen::VectorXd th(7);
        th[0] = rng::uniform(gen, 0.5, 2.0) * (rng::uniform01(gen) < 0.5 ? -1.0 : 1.0);
        th[1] = rng::uniform(gen, 0.2, 1.0);
        th[2] = rng::uniform(gen, 0.02, 0.1);
        th[3] = rng::uniform(gen, 0.02, 0.1);
        th[4] = rng::uniform(gen, -0.8, 0.8) * th[2];
        th[5] = rng::uniform(gen, -0.8, 0.8) * th[3];
        th[6] = rng::uniform(gen, 0.02, 0.1);
        return th;
    };
    return m;
}

inline ParamModel energy_transfer_raw_model() {
    // θ = (ω1, ω2, δ1, γ1, γ2, g1+, g1−, g2+, g2−): physics-facing wrapper
    auto H = [](const Eigen::VectorXd& th) {
        Eigen::VectorXd omega(2), delta(1);
        omega << th[0], th[1];
        delta << th[2];
        return chain_hamiltonian(2, omega, delta);
    };
    auto jumps = [](const Eigen::VectorXd& th) {
        JumpList out;
        out.emplace_back(op_on(2, 0, sigma_z()), th[3] / 2.0);
        out.emplace_back(op_on(2, 1, sigma_z()), th[4] / 2.0);
        for (int k = 0; k < 2; ++k) {
            const double nu = th[5 + 2 * k] + th[6 + 2 * k];
            const double mu = th[5 + 2 * k] - th[6 + 2 * k];
            out.emplace_back(op_on(2, k, sigma_minus()), nu - mu / 2.0);
            out.emplace_back(op_on(2, k, sigma_plus()), nu + mu / 2.0);
        }
        return out;
    };
    ParamModel m = make_jump_model(
        "energy_transfer_raw", 2,
        {"omega1", "omega2", "delta1", "gamma1", "gamma2", "g1p", "g1m", "g2p", "g2m"}, H, jumps,
        {"z1", "z2"}, {"ZI", "IZ"}, {"0", "+"});
    m.theta_nominal.resize(9);
    m.theta_nominal << 1.3, 2.4, 0.5, 0.03, 0.035, 0.00805, 0.02805, 0.0022, 0.0198;
    m.sign_ambiguous = {true, true, true, false, false, false, false, false, false};
    m.convention_note = "per-qubit dephasing sigma_z^k at rate gamma_k/2; thermal jumps as in "
                        "energy_transfer with nu_k = g_k+ + g_k-, mu_k = g_k+ - g_k-";
    m.random_admissible = [](std::mt19937_64& gen) {
        Eigen::VectorXd th(9);
        th[0] = rng::uniform(gen, 0.5, 2.5);
        th[1] = rng::uniform(gen, 0.5, 2.5);
        th[2] = rng::uniform(gen, 0.2, 1.0);
        for (int i = 3; i < 5; ++i) th[i] = rng::uniform(gen, 0.01, 0.06);
        for (int i = 5; i < 9; ++i) th[i] = rng::uniform(gen, 0.005, 0.05);
        return th;
    };
    return m;
}

inline ParamModel closed_chain_model(int n) {
    std::vector<std::string> names;
    for (int k = 1; k <= n; ++k) names.push_back("omega" + std::to_string(k));
    for (int k = 1; k < n; ++k) names.push_back("delta" + std::to_string(k));
    auto H = [n](const Eigen::VectorXd& th) {
        return chain_hamiltonian(n, th.head(n), th.segment(n, n - 1));
    };
    auto jumps = [](const Eigen::VectorXd&) { return JumpList{}; };
    std::vector<std::string> kets(static_cast<std::size_t>(n), "0");
    kets[0] = "+";
    std::string obs(static_cast<std::size_t>(n), 'I');
    obs[0] = 'X';
    ParamModel m = make_jump_model("closed_chain" + std::to_string(n), n, names, H, jumps, {"x1"},
                                   {obs}, kets);
    m.theta_nominal.resize(2 * n - 1);
    const double omegas[4] = {1.1, 0.7, 1.7, 0.9};
    const double deltas[3] = {0.4, 0.6, 0.5};
    for (int k = 0; k < n; ++k) m.theta_nominal[k] = omegas[k];
    for (int k = 0; k < n - 1; ++k) m.theta_nominal[n + k] = deltas[k];
    m.sign_ambiguous.assign(static_cast<std::size_t>(2 * n - 1), true);
    m.convention_note = "closed system (G = 0)";
    m.random_admissible = [n](std::mt19937_64& gen) {
        Eigen::VectorXd th(2 * n - 1);
        for (int k = 0; k < n; ++k) th[k] = rng::uniform(gen, 0.5, 2.0);
        for (int k = n; k < 2 * n - 1; ++k) th[k] = rng::uniform(gen, 0.2, 1.0);
        return th;
    };
    return m;
}

inline ParamModel dephasing_chain_model(int n) {
    // θ = (ω_1..ω_n, δ_1..δ_{n−1}, γ_1..γ_n); jump σz_k at rate γ_k/2
    std::vector<std::string> names;
    for (int k = 1; k <= n; ++k) names.push_back("omega" + std::to_string(k));
    for (int k = 1; k < n; ++k) names.push_back("delta" + std::to_string(k));
    for (int k = 1; k <= n; ++k) names.push_back("gamma" + std::to_string(k));
    auto H = [n](const Eigen::VectorXd& th) {
        return chain_hamiltonian(n, th.head(n), th.segment(n, n - 1));
    };
    auto jumps = [n](const Eigen::VectorXd& th) {
        JumpList out;
        for (int k = 0; k < n; ++k)
            out.emplace_back(op_on(n, k, sigma_z()), th[2 * n - 1 + k] / 2.0);
        return out;
    };
    std::vector<std::string> kets(static_cast<std::size_t>(n), "0");
    kets[0] = "+";
    std::string obs(static_cast<std::size_t>(n), 'I');
    obs[0] = 'X';
    ParamModel m = make_jump_model("dephasing_chain" + std::to_string(n), n, names, H, jumps,
                                   {"x1"}, {obs}, kets);
    m.theta_nominal.resize(3 * n - 1);
    const double omegas[4] = {1.1, 0.7, 1.7, 0.9};
    const double deltas[3] = {0.4, 0.6, 0.5};
    const double gammas[4] = {0.05, 0.08, 0.03, 0.06};
    for (int k = 0; k < n; ++k) m.theta_nominal[k] = omegas[k];
    for (int k = 0; k < n - 1; ++k) m.theta_nominal[n + k] = deltas[k];
    for (int k = 0; k < n; ++k) m.theta_nominal[2 * n - 1 + k] = gammas[k];
    m.sign_ambiguous.assign(static_cast<std::size_t>(3 * n - 1), false);
    for (int k = 0; k < 2 * n - 1; ++k) m.sign_ambiguous[static_cast<std::size_t>(k)] = true;
    m.convention_note = "dephasing jump sigma_z^k at rate gamma_k/2 (so <sigma_x^k> decays at "
                        "rate gamma_k)";
    m.random_admissible = [n](std::mt19937_64& gen) {
        Eigen::VectorXd th(3 * n - 1);
        for (int k = 0; k < n; ++k) th[k] = rng::uniform(gen, 0.5, 2.0);
        for (int k = n; k < 2 * n - 1; ++k) th[k] = rng::uniform(gen, 0.2, 1.0);
        for (int k = 2 * n - 1; k < 3 * n - 1; ++k) th[k] = rng::uniform(gen, 0.02, 0.1);
        return th;
    };
    return m;
}

inline ParamModel relaxation_chain_model(bool x_measured) {
    // θ = (ω1, ω2, δ1, g1−, g2−)
    auto H = [](const Eigen::VectorXd& th) {
        Eigen::VectorXd omega(2), delta(1);
        omega << th[0], th[1];
        delta << th[2];
        return chain_hamiltonian(2, omega, delta);
    };
    std::function<JumpList(const Eigen::VectorXd&)> jumps;
    if (x_measured) {
        jumps = [](const Eigen::VectorXd& th) {
            JumpList out;
            out.emplace_back(op_on(2, 0, sigma_minus()), 2.0 * th[3]);
            out.emplace_back(op_on(2, 1, sigma_minus()), 2.0 * th[4]);
            return out;
        };
    } else {
        jumps = [](const Eigen::VectorXd& th) {
            JumpList out;
            for (int k = 0; k < 2; ++k) {
                out.emplace_back(op_on(2, k, sigma_minus()), 1.5 * th[3 + k]);
                out.emplace_back(op_on(2, k, sigma_plus()), 0.5 * th[3 + k]);
            }
            return out;
        };
    }
    ParamModel m = make_jump_model(x_measured ? "relaxation_chain_x" : "relaxation_chain_z", 2,
                                   {"omega1", "omega2", "delta1", "g1m", "g2m"}, H, jumps,
                                   {x_measured ? "x1" : "z1"}, {x_measured ? "XI" : "ZI"},
                                   {"+", "0"});
    m.theta_nominal.resize(5);
    m.theta_nominal << 0.9, 1.4, 0.33, 0.07, 0.05;
    m.sign_ambiguous = {true, true, true, false, false};
    m.convention_note = x_measured
                            ? "relaxation jump sigma-_k at rate 2 g_k-"
                            : "jumps sigma-_k at rate 1.5 g_k- and sigma+_k at rate 0.5 g_k-";
    m.random_admissible = [](std::mt19937_64& gen) {
        Eigen::VectorXd th(5);
        th[0] = rng::uniform(gen, 0.5, 2.0);
        th[1] = rng::uniform(gen, 0.5, 2.0);
        th[2] = rng::uniform(gen, 0.2, 1.0);
        th[3] = rng::uniform(gen, 0.02, 0.1);
        th[4] = rng::uniform(gen, 0.02, 0.1);
        return th;
    };
    return m;
}

} // namespace detail

inline std::vector<std::string> list_builtin_models() {
    return {"energy_transfer",  "energy_transfer_raw", "closed_chain2",      "closed_chain3",
            "dephasing_chain2", "dephasing_chain3",    "dephasing_chain4",   "relaxation_chain_x",
            "relaxation_chain_z"};
}

inline ParamModel builtin_model(const std::string& id) {
    if (id == "energy_transfer") return detail::energy_transfer_model();
    if (id == "energy_transfer_raw") return detail::energy_transfer_raw_model();
    if (id == "closed_chain2") return detail::closed_chain_model(2);
    if (id == "closed_chain3") return detail::closed_chain_model(3);
    if (id == "dephasing_chain2") return detail::dephasing_chain_model(2);
    if (id == "dephasing_chain3") return detail::dephasing_chain_model(3);
    if (id == "dephasing_chain4") return detail::dephasing_chain_model(4);
    if (id == "relaxation_chain_x") return detail::relaxation_chain_model(true);
    if (id == "relaxation_chain_z") return detail::relaxation_chain_model(false);
    throw validation_error("builtin_model: unknown model id '" + id + "'");
}

inline Eigen::VectorXd nominal_theta(const std::string& id) {
    const ParamModel m = builtin_model(id);
    if (m.theta_nominal.size() == 0)
        throw validation_error("nominal_theta: model '" + id + "' has no nominal");
    return m.theta_nominal;
}

// ---- JSON model definitions ------------------------------------------------
//
// Schema (see README):
// {
//   "name": "...", "n_qubits": 2, "parameters": ["omega1", ...],
//   "hamiltonian":  [{"pauli": "ZI", "param": "omega1", "scale": 0.5},
//                    {"pauli": "XX", "value": 0.3}, ...],
//   "dissipators":  [{"jump": "ZI", "param": "gamma1", "scale": 0.5},
//                    {"ladder": "-", "site": 1, "param": "g1"}, ...],
//   "observables":  [{"label": "z1", "pauli": "ZI"}, ...],
//   "initial_state": ["0", "+"],
//   "theta_nominal": [...],          // optional
//   "sign_ambiguous": [true, ...]    // optional
// }

inline ParamModel model_from_json(const nlohmann::json& j) {
    ParamModel m;
    try {
        m.name = j.at("name").get<std::string>();
        m.n_qubits = j.at("n_qubits").get<int>();
        if (m.n_qubits < 1 || m.n_qubits > 4)
            throw validation_error("model_from_json: n_qubits must be in [1,4]");
        m.theta_names = j.at("parameters").get<std::vector<std::string>>();

        auto param_index = [&](const nlohmann::json& term) -> int {
            if (!term.contains("param")) return -1;
            const std::string p = term["param"].get<std::string>();
            for (std::size_t i = 0; i < m.theta_names.size(); ++i)
                if (m.theta_names[i] == p) return static_cast<int>(i);
            throw validation_error("model_from_json: unknown parameter '" + p + "'");
        };

        struct Term {
            Eigen::MatrixXcd op;
            int param;     // -1 for a fixed value
            double scale;  // scale factor, or the fixed value itself
        };
        std::vector<Term> ham_terms;
        for (const auto& t : j.value("hamiltonian", nlohmann::json::array())) {
            Term term;
            term.op = pauli_string_matrix(t.at("pauli").get<std::string>());
            if (term.op.rows() != (1 << m.n_qubits))
                throw validation_error("model_from_json: hamiltonian pauli length mismatch");
            term.param = param_index(t);
            term.scale = term.param >= 0 ? t.value("scale", 1.0) : t.at("value").get<double>();
            ham_terms.push_back(term);
        }

        std::vector<Term> diss_terms;
        for (const auto& t : j.value("dissipators", nlohmann::json::array())) {
            Term term;
            if (t.contains("pauli") || t.contains("jump")) {
                term.op = pauli_string_matrix(
                    (t.contains("jump") ? t["jump"] : t["pauli"]).get<std::string>());
            } else {
                const std::string ladder = t.at("ladder").get<std::string>();
                const int site = t.at("site").get<int>();
                if (site < 1 || site > m.n_qubits)
                    throw validation_error("model_from_json: dissipator site out of range");
                term.op = detail::op_on(m.n_qubits, site - 1,
                                        ladder == "-" ? detail::sigma_minus()
                                                      : detail::sigma_plus());
            }
            if (term.op.rows() != (1 << m.n_qubits))
                throw validation_error("model_from_json: dissipator operator size mismatch");
            term.param = param_index(t);
            term.scale = term.param >= 0 ? t.value("scale", 1.0) : t.at("value").get<double>();
            diss_terms.push_back(term);
        }

        m.algebra = detail::cached_algebra(m.n_qubits);
        auto alg = m.algebra;
        const int N = 1 << m.n_qubits;
        m.ham_coeffs = [alg, ham_terms, N](const Eigen::VectorXd& th) {
            Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
            for (const auto& t : ham_terms)
                H += (t.param >= 0 ? th[t.param] * t.scale : t.scale) * t.op;
            return expand_operator(H, alg->basis);
        };
        m.lindblad_matrix = [alg, diss_terms](const Eigen::VectorXd& th) {
            detail::JumpList jumps;
            for (const auto& t : diss_terms)
                jumps.emplace_back(t.op, t.param >= 0 ? th[t.param] * t.scale : t.scale);
            return lindblad_from_jumps(jumps, alg->basis);
        };

        for (const auto& o : j.at("observables")) {
            m.observable_labels.push_back(o.at("label").get<std::string>());
            m.observables.push_back(pauli_string_matrix(o.at("pauli").get<std::string>()));
        }
        m.rho0 = detail::product_state(j.at("initial_state").get<std::vector<std::string>>());

        if (j.contains("theta_nominal")) {
            const auto v = j["theta_nominal"].get<std::vector<double>>();
            if (v.size() != m.theta_names.size())
                throw validation_error("model_from_json: theta_nominal length mismatch");
            m.theta_nominal = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                                static_cast<Eigen::Index>(v.size()));
        }
        m.sign_ambiguous = j.value("sign_ambiguous",
                                   std::vector<bool>(m.theta_names.size(), false));
        if (m.sign_ambiguous.size() != m.theta_names.size())
            throw validation_error("model_from_json: sign_ambiguous length mismatch");
        m.convention_note = "user-defined (JSON)";
        m.random_admissible = [np = m.n_params()](std::mt19937_64& gen) {
            Eigen::VectorXd th(np);
            for (int i = 0; i < np; ++i) th[i] = rng::uniform(gen, 0.1, 1.0);
            return th;
        };
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("model_from_json: ") + e.what());
    }
    return m;
}

} // namespace oqsid
