// su_algebra.hpp — Normalized Pauli-string operator basis and its structure constants

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oqsid/errors.hpp"

namespace oqsid {

using cplx = std::complex<double>;

// Ordered orthonormal basis {F_k} of traceless Hermitian operators for n qubits.
// F_k = (Pauli string)/2^{n/2}, lexicographic order I<X<Y<Z per site, identity excluded.
struct OperatorBasis {
    int n_qubits{0};
    int dim{0};                              // N = 2^n
    std::vector<Eigen::MatrixXcd> elements;  // 4^n - 1 matrices
    std::vector<std::string> labels;         // e.g. "ZI"

    int size() const { return static_cast<int>(elements.size()); }
};

// Commutator/anticommutator tables. In the Hermitian basis both are real:
//   [F_j, F_k]  = -i Σ_l C_jkl F_l          with  C_jkl = i tr(F_l [F_j, F_k])
//   {F_j, F_k}  = (2/N) δ_jk I + Σ_l D_jkl F_l   with  D_jkl = tr(F_l {F_j, F_k})
// A Pauli-string product has a single basis component, so each (j,k) pair stores
// exactly one target index l and its C/D values.
struct StructureTable {
    int n_qubits{0};
    int dim{0};        // N
    int K{0};          // basis size
    double trace_term{0.0};  // -2/N (identity coefficient of {iF_j, iF_k} at j == k)

    struct Entry {
        int l{-1};     // target index; -1 when the product is proportional to identity
        double c{0.0};
        double d{0.0};
    };
    std::vector<Entry> entries;  // K*K, flattened row-major over (j,k)

    const Entry& at(int j, int k) const { return entries[static_cast<std::size_t>(j) * K + k]; }
};

namespace detail {

inline const Eigen::Matrix2cd& pauli_1q(int digit) {
    static const Eigen::Matrix2cd mats[4] = {
        (Eigen::Matrix2cd() << 1, 0, 0, 1).finished(),
        (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(),
        (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (Eigen::Matrix2cd() << 1, 0, 0, -1).finished()};
    return mats[digit];
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Index of the Pauli string P_a P_b (phases dropped); digits base 4 per site.
// Single-site rule: equal digits multiply to I, I is neutral, distinct
// non-identity digits multiply to the third Pauli.
inline int pauli_digit_product(int a, int b) {
    if (a == b) return 0;
    if (a == 0) return b;
    if (b == 0) return a;
    return 6 - a - b;  // {1,2,3} \ {a,b}
}

// Basis codes are 1-based base-4 encodings (code = basis index + 1)
inline int pauli_code_product(int code_a, int code_b, int n_qubits) {
    int out = 0;
    int pow4 = 1;
    for (int site = 0; site < n_qubits; ++site) {
        out += pauli_digit_product(code_a % 4, code_b % 4) * pow4;
        code_a /= 4;
        code_b /= 4;
        pow4 *= 4;
    }
    return out;
}

} // namespace detail

// Dense matrix of a Pauli string given by its label, e.g. "XZ" (unnormalized)
inline Eigen::MatrixXcd pauli_string_matrix(const std::string& label) {
    static const std::string alphabet = "IXYZ";
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (char ch : label) {
        auto pos = alphabet.find(ch);
        if (pos == std::string::npos)
            throw validation_error("pauli_string_matrix: bad label character in '" + label + "'");
        out = detail::kron(out, detail::pauli_1q(static_cast<int>(pos)));
    }
    return out;
}

inline OperatorBasis pauli_basis(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 4)
        throw capacity_error("pauli_basis: n_qubits must be in [1,4], got " +
                             std::to_string(n_qubits));
    OperatorBasis basis;
    basis.n_qubits = n_qubits;
    basis.dim = 1 << n_qubits;
    const int count = (1 << (2 * n_qubits));  // 4^n
    const double norm = std::pow(2.0, n_qubits / 2.0);
    static const char* alphabet = "IXYZ";
    for (int code = 1; code < count; ++code) {
        std::string label(n_qubits, 'I');
        int c = code;
        for (int site = n_qubits - 1; site >= 0; --site) {
            label[site] = alphabet[c % 4];
            c /= 4;
        }
        basis.labels.push_back(label);
        basis.elements.push_back(pauli_string_matrix(label) / norm);
    }
    return basis;
}

// Basis index (0-based) of a Pauli-string label, or -1 for the identity string
inline int basis_index(const OperatorBasis& basis, const std::string& label) {
    static const std::string alphabet = "IXYZ";
    if (static_cast<int>(label.size()) != basis.n_qubits)
        throw validation_error("basis_index: label length mismatch");
    int code = 0;
    for (char ch : label) {
        auto pos = alphabet.find(ch);
        if (pos == std::string::npos) throw validation_error("basis_index: bad label");
        code = code * 4 + static_cast<int>(pos);
    }
    return code - 1;
}

inline StructureTable structure_constants(const OperatorBasis& basis) {
    StructureTable table;
    table.n_qubits = basis.n_qubits;
    table.dim = basis.dim;
    table.K = basis.size();
    table.trace_term = -2.0 / basis.dim;
    table.entries.resize(static_cast<std::size_t>(table.K) * table.K);

    const double tol = 1e-12;
    for (int j = 0; j < table.K; ++j) {
        for (int k = 0; k < table.K; ++k) {
            StructureTable::Entry e;
            const int prod_code = detail::pauli_code_product(j + 1, k + 1, basis.n_qubits);
            if (prod_code != 0) {
                e.l = prod_code - 1;
                const Eigen::MatrixXcd m = basis.elements[j] * basis.elements[k];
                // (F_j F_k)^† = F_k F_j, so commutator/anticommutator come from m and m†
                const cplx tc = cplx(0, 1) * (basis.elements[e.l] * (m - m.adjoint())).trace();
                const cplx td = (basis.elements[e.l] * (m + m.adjoint())).trace();
                if (std::abs(tc.imag()) > tol || std::abs(td.imag()) > tol)
                    throw consistency_error("structure_constants: non-real structure constant");
                e.c = std::abs(tc.real()) > tol ? tc.real() : 0.0;
                e.d = std::abs(td.real()) > tol ? td.real() : 0.0;
                if (e.c == 0.0 && e.d == 0.0) e.l = -1;
            }
            table.entries[static_cast<std::size_t>(j) * table.K + k] = e;
        }
    }
    return table;
}

// Coefficients o_n = tr(O F_n); Σ o_n F_n reconstructs the traceless part of O
inline Eigen::VectorXd expand_operator(const Eigen::MatrixXcd& O, const OperatorBasis& basis) {
    if (O.rows() != basis.dim || O.cols() != basis.dim)
        throw validation_error("expand_operator: dimension mismatch");
    if ((O - O.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw validation_error("expand_operator: operator is not Hermitian");
    Eigen::VectorXd out(basis.size());
    for (int n = 0; n < basis.size(); ++n) {
        const cplx v = (O * basis.elements[n]).trace();
        out[n] = v.real();
    }
    return out;
}

} // namespace oqsid
