// test_su_algebra.cpp — Basis construction, structure constants, operator expansion

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oqsid/su_algebra.hpp"

using namespace oqsid;

TEST_CASE("pauli_basis counts, order, and normalization") {
    const OperatorBasis b1 = pauli_basis(1);
    REQUIRE(b1.size() == 3);
    REQUIRE(b1.labels == std::vector<std::string>{"X", "Y", "Z"});

    const OperatorBasis b2 = pauli_basis(2);
    REQUIRE(b2.size() == 15);
    REQUIRE(b2.labels[0] == "IX");
    REQUIRE(b2.labels[14] == "ZZ");
    for (const auto& F : b2.elements) {
        REQUIRE(std::abs(F.trace()) < 1e-12);
        REQUIRE((F - F.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(std::abs((F * F).trace().real() - 1.0) < 1e-12);
    }

    REQUIRE_THROWS_AS(pauli_basis(0), capacity_error);
    REQUIRE_THROWS_AS(pauli_basis(5), capacity_error);
}

TEST_CASE("orthonormality Gram matrix is the identity (n = 3)") {
    const OperatorBasis b = pauli_basis(3);
    REQUIRE(b.size() == 63);
    for (int m = 0; m < b.size(); ++m)
        for (int n = m; n < b.size(); ++n) {
            const cplx ip = (b.elements[m].adjoint() * b.elements[n]).trace();
            REQUIRE(std::abs(ip - (m == n ? 1.0 : 0.0)) < 1e-12);
        }
}

TEST_CASE("single-qubit structure constants") {
    const OperatorBasis b = pauli_basis(1);
    const StructureTable t = structure_constants(b);
    const int x = 0, y = 1, z = 2;

    // C_xyz = -sqrt(2), the only nonzero C_xy.
    REQUIRE(t.at(x, y).l == z);
    REQUIRE(t.at(x, y).c == Catch::Approx(-std::sqrt(2.0)).margin(1e-12));
    REQUIRE(t.at(x, y).d == 0.0);

    // {F_x, F_x} is pure identity: no basis component at all
    REQUIRE(t.at(x, x).l == -1);

    REQUIRE(t.trace_term == Catch::Approx(-1.0));  // -2/N with N = 2
}

TEST_CASE("antisymmetry of C and symmetry of D") {
    const OperatorBasis b = pauli_basis(2);
    const StructureTable t = structure_constants(b);
    for (int j = 0; j < t.K; ++j)
        for (int k = 0; k < t.K; ++k) {
            const auto& e = t.at(j, k);
            const auto& f = t.at(k, j);
            REQUIRE(e.l == f.l);
            REQUIRE(e.c == Catch::Approx(-f.c).margin(1e-12));
            REQUIRE(e.d == Catch::Approx(f.d).margin(1e-12));
        }
}

TEST_CASE("commutator/anticommutator reconstruction on random pairs") {
    const OperatorBasis b = pauli_basis(3);
    const StructureTable t = structure_constants(b);
    std::mt19937_64 gen(42);
    std::uniform_int_distribution<int> pick(0, b.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        const int j = pick(gen), k = pick(gen);
        const Eigen::MatrixXcd comm =
            b.elements[j] * b.elements[k] - b.elements[k] * b.elements[j];
        const Eigen::MatrixXcd anti =
            b.elements[j] * b.elements[k] + b.elements[k] * b.elements[j];
        Eigen::MatrixXcd comm_rec = Eigen::MatrixXcd::Zero(b.dim, b.dim);
        Eigen::MatrixXcd anti_rec = Eigen::MatrixXcd::Zero(b.dim, b.dim);
        const auto& e = t.at(j, k);
        if (e.l >= 0) {
            comm_rec = cplx(0, -1) * e.c * b.elements[e.l];
            anti_rec = e.d * b.elements[e.l];
        }
        if (j == k)
            anti_rec += -t.trace_term * Eigen::MatrixXcd::Identity(b.dim, b.dim);
        REQUIRE((comm - comm_rec).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((anti - anti_rec).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("Jacobi identity on random triples") {
    const OperatorBasis b = pauli_basis(2);
    const StructureTable t = structure_constants(b);
    const int K = t.K;
    // dense C for the contraction check
    std::vector<Eigen::MatrixXd> C(static_cast<std::size_t>(K),
                                   Eigen::MatrixXd::Zero(K, K));  // C[l](j,k)
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) {
            const auto& e = t.at(j, k);
            if (e.l >= 0 && e.c != 0.0) C[static_cast<std::size_t>(e.l)](j, k) = e.c;
        }
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> pick(0, K - 1);
    for (int trial = 0; trial < 50; ++trial) {
        const int j = pick(gen), k = pick(gen), m = pick(gen);
        for (int p = 0; p < K; ++p) {
            double sum = 0.0;
            for (int l = 0; l < K; ++l)
                sum += C[static_cast<std::size_t>(l)](j, k) * C[static_cast<std::size_t>(p)](l, m) +
                       C[static_cast<std::size_t>(l)](k, m) * C[static_cast<std::size_t>(p)](l, j) +
                       C[static_cast<std::size_t>(l)](m, j) * C[static_cast<std::size_t>(p)](l, k);
            REQUIRE(std::abs(sum) < 1e-10);
        }
    }
}

TEST_CASE("expand_operator examples") {
    const OperatorBasis b = pauli_basis(2);

    // sigma_z on qubit 1 = ZI (unnormalized) has coefficient tr(ZI * ZI/2) = 2
    const Eigen::VectorXd o = expand_operator(pauli_string_matrix("ZI"), b);
    const int zi = basis_index(b, "ZI");
    for (int n = 0; n < b.size(); ++n)
        REQUIRE(o[n] == Catch::Approx(n == zi ? 2.0 : 0.0).margin(1e-12));

    // identity expands to zero
    const Eigen::VectorXd oi =
        expand_operator(Eigen::MatrixXcd::Identity(4, 4), b);
    REQUIRE(oi.cwiseAbs().maxCoeff() < 1e-12);

    // F_7 expands to e_7
    const Eigen::VectorXd o7 = expand_operator(b.elements[7], b);
    for (int n = 0; n < b.size(); ++n)
        REQUIRE(o7[n] == Catch::Approx(n == 7 ? 1.0 : 0.0).margin(1e-12));

    // reconstruction: sum o_n F_n equals the traceless part of a random Hermitian O
    std::mt19937_64 gen(3);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd R(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) R(i, j) = cplx(gauss(gen), gauss(gen));
    const Eigen::MatrixXcd O = R + R.adjoint();
    const Eigen::VectorXd co = expand_operator(O, b);
    Eigen::MatrixXcd rec = Eigen::MatrixXcd::Zero(4, 4);
    for (int n = 0; n < b.size(); ++n) rec += co[n] * b.elements[n];
    const Eigen::MatrixXcd traceless = O - O.trace() / 4.0 * Eigen::MatrixXcd::Identity(4, 4);
    REQUIRE((rec - traceless).cwiseAbs().maxCoeff() < 1e-12);

    // non-Hermitian input rejected
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(4, 4);
    bad(0, 1) = 1.0;
    REQUIRE_THROWS_AS(expand_operator(bad, b), validation_error);
}
