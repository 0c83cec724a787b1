// era.hpp — Generalized Hankel matrices, ERA realization, and discrete→continuous conversion

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <lapacke.h>

#include "oqsid/dynamics.hpp"
#include "oqsid/errors.hpp"

namespace oqsid {

// Discrete-time realization (Â_d, ĉ, x̂(0)) and, after conversion, Â
struct Realization {
    Eigen::MatrixXd Ad_hat;
    Eigen::MatrixXd c_hat;   // p × n_Σ
    Eigen::VectorXd x0_hat;
    double dt{0.0};
    Eigen::MatrixXd A_hat;
    bool has_continuous{false};
    Eigen::VectorXd singular_values;  // full list from the SVD step
    int n_sigma{0};
};

// How many singular values to retain in the ERA step
struct OrderPolicy {
    enum class Kind { Threshold, Fixed, ModelOrder };
    Kind kind{Kind::Threshold};
    double eps{0.0};   // Threshold: relative to σ_max; 0 → machine-eps·max(rows,cols)
    int n_sigma{0};    // Fixed: retained order; ModelOrder is resolved to Fixed upstream

    static OrderPolicy threshold(double rel_eps = 0.0) {
        return {Kind::Threshold, rel_eps, 0};
    }
    static OrderPolicy fixed(int n) { return {Kind::Fixed, 0.0, n}; }
    static OrderPolicy model_order() { return {Kind::ModelOrder, 0.0, 0}; }
};

namespace detail {

struct ThinSVD {
    Eigen::MatrixXd U;   // m × min(m,n)
    Eigen::VectorXd S;
    Eigen::MatrixXd V;   // n × min(m,n)
};

// Economy SVD; LAPACK dgesdd for large problems, Eigen for small ones
inline ThinSVD thin_svd(const Eigen::MatrixXd& M) {
    const lapack_int m = static_cast<lapack_int>(M.rows());
    const lapack_int n = static_cast<lapack_int>(M.cols());
    const lapack_int k = std::min(m, n);
    ThinSVD out;
    if (k <= 64) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = svd.matrixU();
        out.S = svd.singularValues();
        out.V = svd.matrixV();
        return out;
    }
    Eigen::MatrixXd A = M;  // dgesdd overwrites its input
    out.U.resize(m, k);
    out.S.resize(k);
    Eigen::MatrixXd VT(k, n);
    const lapack_int info =
        LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, A.data(), m, out.S.data(), out.U.data(), m,
                       VT.data(), k);
    if (info != 0)
        throw consistency_error("thin_svd: dgesdd failed with info = " + std::to_string(info));
    out.V = VT.transpose();
    return out;
}

} // namespace detail

// Generalized Hankel matrix: block (i,l) = y(j_i + k + t_l), blocks are the
// p-vector samples stacked; default offsets j_i = i, t_l = l
inline Eigen::MatrixXd build_hankel(const TraceSet& traces, int r, int s, int k,
                                    std::vector<int> row_offsets = {},
                                    std::vector<int> col_offsets = {}) {
    if (r < 1 || s < 1) throw validation_error("build_hankel: r and s must be >= 1");
    if (row_offsets.empty())
        for (int i = 0; i < r; ++i) row_offsets.push_back(i);
    if (col_offsets.empty())
        for (int l = 0; l < s; ++l) col_offsets.push_back(l);
    if (static_cast<int>(row_offsets.size()) != r || static_cast<int>(col_offsets.size()) != s)
        throw validation_error("build_hankel: offset length mismatch");
    for (std::size_t i = 1; i < row_offsets.size(); ++i)
        if (row_offsets[i] <= row_offsets[i - 1])
            throw validation_error("build_hankel: row offsets must be strictly increasing");
    for (std::size_t l = 1; l < col_offsets.size(); ++l)
        if (col_offsets[l] <= col_offsets[l - 1])
            throw validation_error("build_hankel: col offsets must be strictly increasing");

    const int p = traces.n_outputs();
    const int max_index = row_offsets.back() + k + col_offsets.back();
    if (row_offsets.front() + k + col_offsets.front() < 0 || max_index > traces.n_steps)
        throw validation_error("build_hankel: sample index out of range (have " +
                               std::to_string(traces.n_steps + 1) + " samples, need index " +
                               std::to_string(max_index) + ")");

    Eigen::MatrixXd H(static_cast<Eigen::Index>(r) * p, s);
    for (int i = 0; i < r; ++i)
        for (int l = 0; l < s; ++l)
            H.block(static_cast<Eigen::Index>(i) * p, l, p, 1) =
                traces.values.col(row_offsets[i] + k + col_offsets[l]);
    return H;
}

// ERA Steps 2–3: SVD of H0, retain n_Σ singular values, and form
// Â_d = Σ^{−1/2} P₁ᵀ H(1) Q₁ Σ^{−1/2},  ĉ = E_pᵀ P₁ Σ^{1/2},  x̂(0) = Σ^{1/2} Q₁ᵀ e₁
inline Realization era_realize(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& H1, int p,
                               const OrderPolicy& policy) {
    if (H0.rows() != H1.rows() || H0.cols() != H1.cols())
        throw validation_error("era_realize: H0/H1 shape mismatch");
    if (p < 1 || H0.rows() % p != 0)
        throw validation_error("era_realize: row count not a multiple of p");
    if (policy.kind == OrderPolicy::Kind::ModelOrder)
        throw validation_error("era_realize: ModelOrder must be resolved to Fixed by the caller");

    const auto svd = detail::thin_svd(H0);
    const double smax = svd.S.size() > 0 ? svd.S[0] : 0.0;

    int n_sigma = 0;
    if (policy.kind == OrderPolicy::Kind::Fixed) {
        if (policy.n_sigma < 1 || policy.n_sigma > svd.S.size())
            throw validation_error("era_realize: fixed n_sigma out of range");
        n_sigma = policy.n_sigma;
        if (smax == 0.0 || svd.S[n_sigma - 1] <= 0.0)
            throw degenerate_signal_error("era_realize: signal rank below requested order");
    } else {
        double eps = policy.eps;
        if (eps <= 0.0)
            eps = std::numeric_limits<double>::epsilon() *
                  static_cast<double>(std::max(H0.rows(), H0.cols()));
        for (Eigen::Index i = 0; i < svd.S.size(); ++i)
            if (svd.S[i] > eps * smax) ++n_sigma;
        if (n_sigma == 0)
            throw degenerate_signal_error("era_realize: all-zero signal");
    }

    const Eigen::MatrixXd P1 = svd.U.leftCols(n_sigma);
    const Eigen::MatrixXd Q1 = svd.V.leftCols(n_sigma);
    const Eigen::VectorXd sqrtS = svd.S.head(n_sigma).cwiseSqrt();

    Realization real;
    real.singular_values = svd.S;
    real.n_sigma = n_sigma;
    // stream P1ᵀ H1 Q1 without materializing intermediates at full size
    const Eigen::MatrixXd PtH1Q = P1.transpose() * (H1 * Q1);
    real.Ad_hat = sqrtS.cwiseInverse().asDiagonal() * PtH1Q * sqrtS.cwiseInverse().asDiagonal();
    real.c_hat = P1.topRows(p) * sqrtS.asDiagonal();
    real.x0_hat = sqrtS.asDiagonal() * Q1.row(0).transpose();
    return real;
}

// Â = log(Â_d)/dt via the principal matrix logarithm
inline void to_continuous(Realization& real, double dt) {
    if (dt <= 0.0) throw validation_error("to_continuous: dt must be positive");
    const int n = static_cast<int>(real.Ad_hat.rows());
    Eigen::EigenSolver<Eigen::MatrixXd> es(real.Ad_hat);
    for (int i = 0; i < n; ++i) {
        const std::complex<double> ev = es.eigenvalues()[i];
        const double mag = std::abs(ev);
        if (mag < 1e-14 || (ev.real() <= 0.0 && std::abs(ev.imag()) <= 1e-12 * mag))
            throw branch_cut_error(
                "to_continuous: eigenvalue of Ad_hat on the closed negative real axis or at 0 "
                "(likely aliasing; reduce dt)");
    }
    real.A_hat = real.Ad_hat.log() / dt;
    const Eigen::MatrixXd roundtrip = (real.A_hat * dt).exp();
    if ((roundtrip - real.Ad_hat).norm() > 1e-9 * std::max(1.0, real.Ad_hat.norm()))
        throw consistency_error("to_continuous: exp(log) round-trip check failed");
    real.dt = dt;
    real.has_continuous = true;
}

// Diagnostic dump for --dump-sv
inline void write_singular_values_csv(const Eigen::VectorXd& sv, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw validation_error("write_singular_values_csv: cannot open '" + path + "'");
    os << "index,sigma\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < sv.size(); ++i) os << i + 1 << "," << sv[i] << "\n";
}

} // namespace oqsid
