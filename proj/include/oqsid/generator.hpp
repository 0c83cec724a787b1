// generator.hpp — Compile a Lindblad model into the affine LTI system on the coherence vector

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "oqsid/errors.hpp"
#include "oqsid/su_algebra.hpp"

namespace oqsid {

// Basis + structure constants bundle; models share one per qubit count
struct Algebra {
    OperatorBasis basis;
    StructureTable table;
};

inline std::shared_ptr<const Algebra> make_algebra(int n_qubits) {
    auto alg = std::make_shared<Algebra>();
    alg->basis = pauli_basis(n_qubits);
    alg->table = structure_constants(alg->basis);
    return alg;
}

// Parameterized Lindblad model: θ → (Hamiltonian coefficients h, Lindblad matrix G),
// plus measurement and initial-state declarations
struct ParamModel {
    std::string name;
    int n_qubits{0};
    std::vector<std::string> theta_names;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> ham_coeffs;       // h(θ), length K
    std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)> lindblad_matrix; // G(θ), K×K
    std::vector<Eigen::MatrixXcd> observables;
    std::vector<std::string> observable_labels;
    Eigen::MatrixXcd rho0;
    Eigen::VectorXd theta_nominal;             // size 0 when no nominal is declared
    std::vector<bool> sign_ambiguous;          // per-parameter sign indeterminacy
    std::function<Eigen::VectorXd(std::mt19937_64&)> random_admissible;
    std::string convention_note;               // dissipator rate convention, for `models list`
    std::shared_ptr<const Algebra> algebra;

    int n_params() const { return static_cast<int>(theta_names.size()); }
};

// Real affine LTI  ẋ = A x + b,  y = c x ; restricted form carries raw
// Pauli-expectation units (x̃ = 2^{n/2} x_S, b̃ = 2^{n/2} b_S, c̃ = c_S/2^{n/2})
// so that printed-model comparisons and x_a(0) read directly
struct AffineLTI {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::MatrixXd c;   // p × K
    Eigen::VectorXd x0;
    std::vector<std::string> output_labels;
    std::vector<int> accessible_indices;  // populated on restricted systems
    bool restricted{false};
    int n_qubits{0};
};

// x_n = tr(F_n ρ) with density-matrix validation and Bloch-body norm check
inline Eigen::VectorXd coherence_vector(const Eigen::MatrixXcd& rho, const OperatorBasis& basis) {
    if (rho.rows() != basis.dim || rho.cols() != basis.dim)
        throw validation_error("coherence_vector: dimension mismatch");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw validation_error("coherence_vector: rho is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
        throw validation_error("coherence_vector: tr(rho) != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw validation_error("coherence_vector: rho is not positive semidefinite");
    Eigen::VectorXd x(basis.size());
    for (int n = 0; n < basis.size(); ++n) x[n] = (basis.elements[n] * rho).trace().real();
    const double bound = std::sqrt(double(basis.dim - 1) / basis.dim) + 1e-10;
    if (x.norm() > bound)
        throw consistency_error("coherence_vector: Bloch-body norm bound violated");
    return x;
}

// G = Σ_jumps Γ c c† with c_j = tr(F_j L); Hermitian PSD by construction for Γ ≥ 0
inline Eigen::MatrixXcd lindblad_from_jumps(
    const std::vector<std::pair<Eigen::MatrixXcd, double>>& jumps, const OperatorBasis& basis) {
    const int K = basis.size();
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(K, K);
    for (const auto& [L, rate] : jumps) {
        if (rate == 0.0) continue;
        Eigen::VectorXcd c(K);
        for (int j = 0; j < K; ++j) c[j] = (basis.elements[j] * L).trace();
        G += rate * c * c.adjoint();
    }
    return G;
}

// A_np = Q_np + R_np, b_n: real contractions of the structure tables with h and G:
//   Q_np = Σ_m h_m C_mnp
//   R_np = −½ Σ_{j,k,l} C_jnl [Re(g_jk) C_lkp + Im(g_jk) D_lkp]
//   b_n  = (1/N) Σ_{j,k} Im(g_jk) C_jkn
inline AffineLTI assemble_generator(const ParamModel& model, const Eigen::VectorXd& theta,
                                    const Algebra& algebra) {
    if (theta.size() != model.n_params())
        throw validation_error("assemble_generator: theta length mismatch");
    const OperatorBasis& basis = algebra.basis;
    const StructureTable& tab = algebra.table;
    if (basis.n_qubits != model.n_qubits)
        throw validation_error("assemble_generator: basis/model qubit mismatch");
    const int K = tab.K;

    const Eigen::VectorXd h = model.ham_coeffs(theta);
    if (h.size() != K) throw validation_error("assemble_generator: h length mismatch");
    const Eigen::MatrixXcd G = model.lindblad_matrix(theta);
    if (G.rows() != K || G.cols() != K)
        throw validation_error("assemble_generator: G dimension mismatch");
    if ((G - G.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw consistency_error("assemble_generator: G is not Hermitian");

    AffineLTI lti;
    lti.n_qubits = model.n_qubits;
    lti.A = Eigen::MatrixXd::Zero(K, K);
    lti.b = Eigen::VectorXd::Zero(K);

    for (int m = 0; m < K; ++m) {
        if (h[m] == 0.0) continue;
        for (int n = 0; n < K; ++n) {
            const auto& e = tab.at(m, n);
            if (e.l >= 0 && e.c != 0.0) lti.A(n, e.l) += h[m] * e.c;
        }
    }

    for (int j = 0; j < K; ++j) {
        for (int k = 0; k < K; ++k) {
            const cplx g = G(j, k);
            if (g == cplx(0, 0)) continue;
            for (int n = 0; n < K; ++n) {
                const auto& e1 = tab.at(j, n);
                if (e1.l < 0 || e1.c == 0.0) continue;
                const auto& e2 = tab.at(e1.l, k);
                if (e2.l < 0) continue;
                lti.A(n, e2.l) -= 0.5 * e1.c * (g.real() * e2.c + g.imag() * e2.d);
            }
            const auto& e = tab.at(j, k);
            if (e.l >= 0 && e.c != 0.0) lti.b[e.l] += g.imag() * e.c / basis.dim;
        }
    }

    lti.c.resize(static_cast<Eigen::Index>(model.observables.size()), K);
    for (std::size_t i = 0; i < model.observables.size(); ++i)
        lti.c.row(static_cast<Eigen::Index>(i)) = expand_operator(model.observables[i], basis);
    lti.output_labels = model.observable_labels;
    lti.x0 = coherence_vector(model.rho0, basis);
    return lti;
}

// Independent test oracle: A, b via the dense superoperator L(X) = -i[H,X] + Σ g_jk (F_j X F_k − ½{F_k F_j, X})
inline AffineLTI assemble_via_superop(const ParamModel& model, const Eigen::VectorXd& theta,
                                      const Algebra& algebra) {
    const OperatorBasis& basis = algebra.basis;
    const int K = basis.size();
    const int N = basis.dim;
    const Eigen::VectorXd h = model.ham_coeffs(theta);
    const Eigen::MatrixXcd G = model.lindblad_matrix(theta);

    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
    for (int m = 0; m < K; ++m)
        if (h[m] != 0.0) H += h[m] * basis.elements[m];

    auto apply_L = [&](const Eigen::MatrixXcd& X) {
        Eigen::MatrixXcd out = cplx(0, -1) * (H * X - X * H);
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k) {
                const cplx g = G(j, k);
                if (g == cplx(0, 0)) continue;
                const Eigen::MatrixXcd KJ = basis.elements[k] * basis.elements[j];
                out += g * (basis.elements[j] * X * basis.elements[k] -
                            0.5 * (KJ * X + X * KJ));
            }
        return out;
    };

    AffineLTI lti;
    lti.n_qubits = model.n_qubits;
    lti.A.resize(K, K);
    lti.b.resize(K);
    for (int p = 0; p < K; ++p) {
        const Eigen::MatrixXcd LFp = apply_L(basis.elements[p]);
        for (int n = 0; n < K; ++n) {
            const cplx v = (basis.elements[n] * LFp).trace();
            if (std::abs(v.imag()) > 1e-10)
                throw consistency_error("assemble_via_superop: imaginary residue in A");
            lti.A(n, p) = v.real();
        }
    }
    const Eigen::MatrixXcd LI = apply_L(Eigen::MatrixXcd::Identity(N, N));
    for (int n = 0; n < K; ++n) {
        const cplx v = (basis.elements[n] * LI).trace() / double(N);
        if (std::abs(v.imag()) > 1e-10)
            throw consistency_error("assemble_via_superop: imaginary residue in b");
        lti.b[n] = v.real();
    }
    lti.c.resize(static_cast<Eigen::Index>(model.observables.size()), K);
    for (std::size_t i = 0; i < model.observables.size(); ++i)
        lti.c.row(static_cast<Eigen::Index>(i)) = expand_operator(model.observables[i], basis);
    lti.output_labels = model.observable_labels;
    lti.x0 = coherence_vector(model.rho0, basis);
    return lti;
}

// Smallest index set containing every c-row support and closed under
// n ∈ S, |A_np| > tol  ⇒  p ∈ S; returned sorted
inline std::vector<int> accessible_set(const AffineLTI& lti, double tol = 1e-12) {
    const int K = static_cast<int>(lti.A.rows());
    std::set<int> S;
    std::vector<int> frontier;
    for (Eigen::Index i = 0; i < lti.c.rows(); ++i)
        for (int n = 0; n < K; ++n)
            if (std::abs(lti.c(i, n)) > tol && S.insert(n).second) frontier.push_back(n);
    while (!frontier.empty()) {
        const int n = frontier.back();
        frontier.pop_back();
        for (int p = 0; p < K; ++p) {
            const double a = std::abs(lti.A(n, p));
            if (a > tol) {
                if (a < 10 * tol)
                    std::cerr << "warning: accessible_set: near-degenerate coupling |A("
                              << n << "," << p << ")| = " << a << "\n";
                if (S.insert(p).second) frontier.push_back(p);
            }
        }
    }
    return std::vector<int>(S.begin(), S.end());
}

// Sub-block restriction in the given coordinate order, converted to raw
// Pauli-expectation units (outputs and transfer functions are unchanged)
inline AffineLTI restrict(const AffineLTI& lti, const std::vector<int>& indices,
                          double tol = 1e-12) {
    const int K = static_cast<int>(lti.A.rows());
    std::set<int> S(indices.begin(), indices.end());
    if (static_cast<int>(S.size()) != static_cast<int>(indices.size()))
        throw validation_error("restrict: duplicate indices");
    for (int n : indices) {
        if (n < 0 || n >= K) throw validation_error("restrict: index out of range");
        for (int p = 0; p < K; ++p)
            if (!S.count(p) && std::abs(lti.A(n, p)) > tol)
                throw validation_error("restrict: index set not closed under accessibility");
    }
    const int m = static_cast<int>(indices.size());
    const double scale = std::pow(2.0, lti.n_qubits / 2.0);
    AffineLTI out;
    out.n_qubits = lti.n_qubits;
    out.restricted = true;
    out.accessible_indices = indices;
    out.A.resize(m, m);
    out.b.resize(m);
    out.c.resize(lti.c.rows(), m);
    out.x0.resize(m);
    for (int i = 0; i < m; ++i) {
        out.b[i] = scale * lti.b[indices[i]];
        out.x0[i] = scale * lti.x0[indices[i]];
        for (int j = 0; j < m; ++j) out.A(i, j) = lti.A(indices[i], indices[j]);
        out.c.col(i) = lti.c.col(indices[i]) / scale;
    }
    out.output_labels = lti.output_labels;
    return out;
}

} // namespace oqsid
