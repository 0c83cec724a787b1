// xfer.hpp — Rational transfer functions: resolvent coefficients, normalization, closed-form oracles

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "oqsid/errors.hpp"

namespace oqsid {

// SISO rational function; coefficients in ascending powers of s.
// Oracle outputs may carry NaN entries for coefficients the source never printed.
struct RationalTF {
    Eigen::VectorXd num;
    Eigen::VectorXd den;
    bool normalized{false};

    int num_degree() const { return static_cast<int>(num.size()) - 1; }
    int den_degree() const { return static_cast<int>(den.size()) - 1; }
};

namespace poly {

// Drop (numerically) zero leading coefficients; vectors are ascending, so the
// leading coefficient is the back
inline Eigen::VectorXd trim(const Eigen::VectorXd& coeffs, double rel_tol = 1e-12) {
    if (coeffs.size() == 0) return Eigen::VectorXd::Zero(1);
    const double scale = coeffs.cwiseAbs().maxCoeff();
    if (scale == 0.0) return Eigen::VectorXd::Zero(1);
    Eigen::Index deg = coeffs.size() - 1;
    while (deg > 0 && std::abs(coeffs[deg]) <= rel_tol * scale) --deg;
    return coeffs.head(deg + 1);
}

// Roots via the companion matrix; input must be trimmed (nonzero leading coeff)
inline std::vector<std::complex<double>> roots(const Eigen::VectorXd& coeffs) {
    const Eigen::Index deg = coeffs.size() - 1;
    if (deg <= 0) return {};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
    comp.bottomLeftCorner(deg - 1, deg - 1).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(deg));
    for (Eigen::Index i = 0; i < deg; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

// Real ascending coefficients of lead·Π(s − r_i); roots must be (numerically)
// closed under conjugation
inline Eigen::VectorXd from_roots(const std::vector<std::complex<double>>& rs, double lead) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : rs) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = next;
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
    double maxabs = 0.0;
    for (const auto& v : c) maxabs = std::max(maxabs, std::abs(v));
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (std::abs(c[i].imag()) > 1e-6 * std::max(1.0, maxabs))
            throw consistency_error("poly::from_roots: imaginary residue after cancellation");
        out[static_cast<Eigen::Index>(i)] = lead * c[i].real();
    }
    return out;
}

} // namespace poly

namespace detail {

// Osborne balancing: diagonal similarity D with A ← D⁻¹AD equalizing row/column norms
inline void balance_system(Eigen::MatrixXd& A, Eigen::VectorXd& b, Eigen::RowVectorXd& c,
                           Eigen::VectorXd& x0) {
    const int K = static_cast<int>(A.rows());
    for (int sweep = 0; sweep < 8; ++sweep) {
        bool converged = true;
        for (int i = 0; i < K; ++i) {
            double rnorm = 0, cnorm = 0;
            for (int j = 0; j < K; ++j) {
                if (j == i) continue;
                rnorm += std::abs(A(i, j));
                cnorm += std::abs(A(j, i));
            }
            if (rnorm == 0 || cnorm == 0) continue;
            const double f = std::exp2(std::round(0.5 * std::log2(rnorm / cnorm)));
            if (f == 1.0) continue;
            converged = false;
            A.row(i) /= f;
            A.col(i) *= f;
            b[i] /= f;
            x0[i] /= f;
            c[i] *= f;
        }
        if (converged) break;
    }
}

struct FaddeevResult {
    Eigen::VectorXd den_desc;              // det(sI−A), descending, monic
    std::vector<Eigen::MatrixXd> adjugate; // B_k with B(s) = Σ B_k s^{K−1−k}
};

inline FaddeevResult faddeev_leverrier(const Eigen::MatrixXd& A) {
    const int K = static_cast<int>(A.rows());
    FaddeevResult out;
    out.den_desc.resize(K + 1);
    out.den_desc[0] = 1.0;
    Eigen::MatrixXd Bk = Eigen::MatrixXd::Identity(K, K);
    out.adjugate.push_back(Bk);
    for (int k = 1; k <= K; ++k) {
        const Eigen::MatrixXd M = A * Bk;
        const double ck = -M.trace() / k;
        out.den_desc[k] = ck;
        Bk = M + ck * Eigen::MatrixXd::Identity(K, K);
        if (k < K) out.adjugate.push_back(Bk);
    }
    // self-check: A·B_{K−1} + p₀·I = 0
    const double scale = std::max(1.0, A.norm());
    const Eigen::MatrixXd check =
        A * out.adjugate.back() + out.den_desc[K] * Eigen::MatrixXd::Identity(K, K);
    double bound = 1e-9 * scale;
    for (int k = 1; k < K; ++k) bound = std::max(bound, 1e-9 * std::pow(scale, k));
    if (check.cwiseAbs().maxCoeff() > bound)
        throw consistency_error(
            "faddeev_leverrier: adjugate self-check failed (ill-conditioned A; try balancing)");
    return out;
}

inline Eigen::VectorXd ascending(const Eigen::VectorXd& desc) {
    return desc.reverse();
}

} // namespace detail

// Laplace transform of the output of ẋ = Ax + b, y = c x:
//   b = 0: y(s) = c B(s) x0 / det(sI−A)
//   b ≠ 0: y(s) = [s·c B(s) x0 + c B(s) b] / [s·det(sI−A)]
inline RationalTF transfer_coeffs(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::RowVectorXd c_row,
                                  Eigen::VectorXd x0) {
    const int K = static_cast<int>(A.rows());
    if (A.cols() != K || c_row.size() != K || x0.size() != K)
        throw validation_error("transfer_coeffs: dimension mismatch");
    if (b.size() == 0) b = Eigen::VectorXd::Zero(K);
    if (b.size() != K) throw validation_error("transfer_coeffs: b length mismatch");

    // condition heuristic: balance when off-diagonal row/column norms are badly scaled
    double rmax = 0, rmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i) {
        const double r = A.row(i).cwiseAbs().sum() + A.col(i).cwiseAbs().sum();
        if (r > 0) {
            rmax = std::max(rmax, r);
            rmin = std::min(rmin, r);
        }
    }
    if (rmax > 1e6 * rmin) detail::balance_system(A, b, c_row, x0);

    const auto fl = detail::faddeev_leverrier(A);
    Eigen::VectorXd nx(K), nb(K);
    for (int k = 0; k < K; ++k) {
        nx[k] = c_row * fl.adjugate[static_cast<std::size_t>(k)] * x0;
        nb[k] = c_row * fl.adjugate[static_cast<std::size_t>(k)] * b;
    }
    RationalTF tf;
    if (b.norm() > 0.0) {
        Eigen::VectorXd num_desc = Eigen::VectorXd::Zero(K + 1);
        num_desc.head(K) = nx;  // s·Nx(s)
        num_desc.tail(K) += nb;
        Eigen::VectorXd den_desc = Eigen::VectorXd::Zero(K + 2);
        den_desc.head(K + 1) = fl.den_desc;  // s·det(sI−A)
        tf.num = detail::ascending(num_desc);
        tf.den = detail::ascending(den_desc);
    } else {
        tf.num = detail::ascending(nx);
        tf.den = detail::ascending(fl.den_desc);
    }
    return tf;
}

// Canonical Q(s)/P(s) of a closed (b = 0) system: P = det(sI−A), Q = c adj(sI−A) x0
// (the bordered-determinant form evaluated through the adjugate)
inline RationalTF canonical_qp(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& c_row,
                               const Eigen::VectorXd& x0) {
    return transfer_coeffs(A, Eigen::VectorXd(), c_row, x0);
}

// Monic denominator + root-pairing cancellation of num/den roots closer than
// cancel_tol (relative); deterministic root ordering
inline RationalTF normalize_tf(const RationalTF& tf, double cancel_tol = 1e-7) {
    Eigen::VectorXd num = poly::trim(tf.num);
    Eigen::VectorXd den = poly::trim(tf.den);
    if (den.cwiseAbs().maxCoeff() == 0.0)
        throw validation_error("normalize_tf: zero denominator");
    if (num.cwiseAbs().maxCoeff() == 0.0) {
        RationalTF out;
        out.num = Eigen::VectorXd::Zero(1);
        out.den = den / den[den.size() - 1];
        out.normalized = true;
        return out;
    }
    const double lead = num[num.size() - 1] / den[den.size() - 1];
    auto zeros = poly::roots(num);
    auto poles = poly::roots(den);
    std::vector<std::complex<double>> kept;
    for (const auto& z : zeros) {
        std::size_t best = poles.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < poles.size(); ++i) {
            const double d = std::abs(z - poles[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best < poles.size() && best_d <= cancel_tol * std::max(1.0, std::abs(z)))
            poles.erase(poles.begin() + static_cast<std::ptrdiff_t>(best));
        else
            kept.push_back(z);
    }
    if (poles.empty() && kept.empty() && std::abs(lead) == 0.0)
        throw validation_error("normalize_tf: zero denominator after cancellation");
    RationalTF out;
    out.num = poly::from_roots(kept, lead);
    out.den = poly::from_roots(poles, 1.0);
    out.normalized = true;
    return out;
}

// Cancel the globally closest num/den root pairs until the denominator reaches
// the declared degree; used on model-side TFs inside estimation residuals,
// where the reduced order is known a priori
inline RationalTF normalize_to_order(const RationalTF& tf, int den_degree) {
    Eigen::VectorXd num = poly::trim(tf.num);
    Eigen::VectorXd den = poly::trim(tf.den);
    if (den.cwiseAbs().maxCoeff() == 0.0)
        throw validation_error("normalize_to_order: zero denominator");
    if (num.cwiseAbs().maxCoeff() == 0.0)
        throw order_mismatch_error("normalize_to_order: zero numerator");
    const double lead = num[num.size() - 1] / den[den.size() - 1];
    auto zeros = poly::roots(num);
    auto poles = poly::roots(den);
    while (static_cast<int>(poles.size()) > den_degree) {
        if (zeros.empty())
            throw order_mismatch_error("normalize_to_order: cannot reach requested order");
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < zeros.size(); ++i)
            for (std::size_t j = 0; j < poles.size(); ++j) {
                const double d = std::abs(zeros[i] - poles[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        zeros.erase(zeros.begin() + static_cast<std::ptrdiff_t>(bi));
        poles.erase(poles.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    if (static_cast<int>(poles.size()) < den_degree)
        throw order_mismatch_error("normalize_to_order: denominator degree below requested order");
    RationalTF out;
    out.num = poly::from_roots(zeros, lead);
    out.den = poly::from_roots(poles, 1.0);
    out.normalized = true;
    return out;
}

// ---- closed-form coefficient oracles ----------------------------------------
// Hard-coded published coefficient lists; NaN marks coefficients that were
// never printed (covered by the numeric path only).

inline RationalTF model_tf_oracle(const std::string& model_id, const Eigen::VectorXd& th,
                                  const std::string& output_tag) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto make = [](std::initializer_list<double> num_desc, std::initializer_list<double> den_desc) {
        RationalTF tf;
        tf.num.resize(static_cast<Eigen::Index>(num_desc.size()));
        tf.den.resize(static_cast<Eigen::Index>(den_desc.size()));
        Eigen::Index i = tf.num.size();
        for (double v : num_desc) tf.num[--i] = v;
        i = tf.den.size();
        for (double v : den_desc) tf.den[--i] = v;
        tf.normalized = true;
        return tf;
    };

    if (model_id == "energy_transfer" || model_id == "energy_transfer_raw") {
        double wd, d1, nu1, nu2, mu1, mu2, gs;
        if (model_id == "energy_transfer") {
            if (th.size() != 7) throw validation_error("model_tf_oracle: theta size");
            wd = th[0]; d1 = th[1]; nu1 = th[2]; nu2 = th[3]; mu1 = th[4]; mu2 = th[5]; gs = th[6];
        } else {
            if (th.size() != 9) throw validation_error("model_tf_oracle: theta size");
            wd = th[0] - th[1]; d1 = th[2]; gs = th[3] + th[4];
            nu1 = th[5] + th[6]; mu1 = th[5] - th[6];
            nu2 = th[7] + th[8]; mu2 = th[7] - th[8];
        }
        const double p4 = 4 * nu1 + 4 * nu2 + 2 * gs;
        const double p3 = 4 * d1 * d1 + 5 * nu1 * nu1 + 14 * nu1 * nu2 + 6 * nu1 * gs +
                          5 * nu2 * nu2 + 6 * nu2 * gs + gs * gs + wd * wd;
        const double p2 = 8 * d1 * d1 * nu1 + 8 * d1 * d1 * nu2 + 4 * d1 * d1 * gs +
                          2 * std::pow(nu1, 3) + 14 * nu1 * nu1 * nu2 + 4 * nu1 * nu1 * gs +
                          14 * nu1 * nu2 * nu2 + 16 * nu1 * nu2 * gs + 2 * nu1 * gs * gs +
                          2 * nu1 * wd * wd + 2 * std::pow(nu2, 3) + 4 * nu2 * nu2 * gs +
                          2 * nu2 * gs * gs + 2 * nu2 * wd * wd;
        const double p1 = 4 * d1 * d1 * nu1 * nu1 + 8 * d1 * d1 * nu1 * nu2 +
                          4 * d1 * d1 * nu1 * gs + 4 * d1 * d1 * nu2 * nu2 +
                          4 * d1 * d1 * nu2 * gs + 4 * std::pow(nu1, 3) * nu2 +
                          8 * nu1 * nu1 * nu2 * nu2 + 8 * nu1 * nu1 * nu2 * gs +
                          4 * nu1 * std::pow(nu2, 3) + 8 * nu1 * nu2 * nu2 * gs +
                          4 * nu1 * nu2 * gs * gs + 4 * nu1 * nu2 * wd * wd;
        if (output_tag == "z1") {
            const double q3 = mu1 + 2 * nu1 + 4 * nu2 + 2 * gs;
            const double q2 = 2 * d1 * d1 + nu1 * nu1 + 6 * nu1 * nu2 + 2 * nu1 * gs +
                              2 * mu1 * nu1 + 5 * nu2 * nu2 + 6 * nu2 * gs + 4 * mu1 * nu2 +
                              gs * gs + 2 * mu1 * gs + wd * wd;
            const double q1 = 2 * d1 * d1 * mu1 + 2 * d1 * d1 * mu2 + 2 * d1 * d1 * nu1 +
                              2 * d1 * d1 * nu2 + 2 * d1 * d1 * gs + mu1 * nu1 * nu1 +
                              5 * mu1 * nu2 * nu2 + 4 * nu1 * nu2 * nu2 + 2 * nu1 * nu1 * nu2 +
                              mu1 * gs * gs + 2 * nu2 * gs * gs + 4 * nu2 * nu2 * gs +
                              mu1 * wd * wd + 2 * nu2 * wd * wd + 2 * std::pow(nu2, 3) +
                              6 * mu1 * nu1 * nu2 + 2 * mu1 * nu1 * gs + 6 * mu1 * nu2 * gs +
                              4 * nu1 * nu2 * gs;
            const double q0 = 2 * mu1 * std::pow(nu2, 3) + 2 * d1 * d1 * mu1 * gs +
                              2 * d1 * d1 * mu2 * gs + 4 * mu1 * nu1 * nu2 * nu2 +
                              2 * mu1 * nu1 * nu1 * nu2 + 2 * mu1 * nu2 * gs * gs +
                              4 * mu1 * nu2 * nu2 * gs + 2 * mu1 * nu2 * wd * wd +
                              2 * d1 * d1 * mu1 * nu1 + 2 * d1 * d1 * mu1 * nu2 +
                              2 * d1 * d1 * mu2 * nu1 + 2 * d1 * d1 * mu2 * nu2 +
                              4 * mu1 * nu1 * nu2 * gs;
            return make({1, q3, q2, q1, q0}, {1, p4, p3, p2, p1, 0});
        }
        if (output_tag == "z2") {
            const double r3 = mu2;
            const double r2 = 2 * d1 * d1 + 4 * mu2 * nu1 + 2 * mu2 * nu2 + 2 * mu2 * gs;
            const double r1 = 2 * d1 * d1 * mu1 + 2 * d1 * d1 * mu2 + 2 * d1 * d1 * nu1 +
                              2 * d1 * d1 * nu2 + 2 * d1 * d1 * gs + 5 * mu2 * nu1 * nu1 +
                              mu2 * nu2 * nu2 + mu2 * gs * gs + mu2 * wd * wd +
                              6 * mu2 * nu1 * nu2 + 6 * mu2 * nu1 * gs + 2 * mu2 * nu2 * gs;
            const double r0 = 2 * mu2 * std::pow(nu1, 3) + 2 * d1 * d1 * mu1 * gs +
                              2 * d1 * d1 * mu2 * gs + 2 * mu2 * nu1 * nu2 * nu2 +
                              4 * mu2 * nu1 * nu1 * nu2 + 2 * mu2 * nu1 * gs * gs +
                              4 * mu2 * nu1 * nu1 * gs + 2 * mu2 * nu1 * wd * wd +
                              2 * d1 * d1 * mu1 * nu1 + 2 * d1 * d1 * mu1 * nu2 +
                              2 * d1 * d1 * mu2 * nu1 + 2 * d1 * d1 * mu2 * nu2 +
                              4 * mu2 * nu1 * nu2 * gs;
            return make({r3, r2, r1, r0}, {1, p4, p3, p2, p1, 0});
        }
        throw validation_error("model_tf_oracle: unknown output tag '" + output_tag + "'");
    }

    if (model_id == "dephasing_chain3") {
        if (th.size() != 8 || output_tag != "x1")
            throw validation_error("model_tf_oracle: dephasing_chain3 expects 8 params, tag x1");
        const double w1 = th[0], w2 = th[1], w3 = th[2], d1 = th[3], d2 = th[4];
        const double g1 = th[5], g2 = th[6], g3 = th[7];
        const double p5 = 2 * (g1 + g2 + g3);
        const double p4 = 2 * d1 * d1 + 2 * d2 * d2 + g1 * g1 + 4 * g1 * g2 + g2 * g2 +
                          4 * (g1 + g2) * g3 + g3 * g3 + w1 * w1 + w2 * w2 + w3 * w3;
        const double p3 =
            2 * (g1 * g1 * g2 + g1 * g2 * g2 + g1 * g1 * g3 + 4 * g1 * g2 * g3 + g2 * g2 * g3 +
                 g1 * g3 * g3 + g2 * g3 * g3 + d2 * d2 * (2 * g1 + g2 + g3) +
                 d1 * d1 * (g1 + g2 + 2 * g3) + g2 * w1 * w1 + g3 * w1 * w1 + g1 * w2 * w2 +
                 g3 * w2 * w2 + (g1 + g2) * w3 * w3);
        const double p2 =
            std::pow(d1, 4) + std::pow(d2, 4) + g1 * g1 * g2 * g2 + 4 * g1 * g1 * g2 * g3 +
            4 * g1 * g2 * g2 * g3 + g1 * g1 * g3 * g3 + 4 * g1 * g2 * g3 * g3 +
            g2 * g2 * g3 * g3 + g2 * g2 * w1 * w1 + 4 * g2 * g3 * w1 * w1 + g3 * g3 * w1 * w1 +
            g1 * g1 * w2 * w2 + 4 * g1 * g3 * w2 * w2 + g3 * g3 * w2 * w2 + w1 * w1 * w2 * w2 +
            (g1 * g1 + 4 * g1 * g2 + g2 * g2 + w1 * w1 + w2 * w2) * w3 * w3 +
            2 * d2 * d2 * (g1 * g1 + g2 * g3 + 2 * g1 * (g2 + g3) + w1 * w1 - w2 * w3) +
            2 * d1 * d1 * (d2 * d2 + g1 * g2 + 2 * (g1 + g2) * g3 + g3 * g3 - w1 * w2 + w3 * w3);
        const double p1 =
            2 * (std::pow(d2, 4) * g1 + std::pow(d1, 4) * g3 +
                 g2 * g3 * (g1 * g2 * g3 + g1 * g1 * (g2 + g3) + (g2 + g3) * w1 * w1) +
                 g3 * (g1 * (g1 + g3) + w1 * w1) * w2 * w2 +
                 (g2 * (g1 * (g1 + g2) + w1 * w1) + g1 * w2 * w2) * w3 * w3 +
                 d1 * d1 * (d2 * d2 * (g1 + g3) + g3 * (2 * g1 * g2 + (g1 + g2) * g3 -
                                                        2 * w1 * w2) + (g1 + g2) * w3 * w3) +
                 d2 * d2 * (g1 * g1 * (g2 + g3) + (g2 + g3) * w1 * w1 +
                            2 * g1 * (g2 * g3 - w2 * w3)));
        // published p0 misplaces the δ2⁴(γ1²+ω1²) term inside the 2δ2²(·) factor;
        // the form below matches det(sI−A) identically
        const double p0 =
            (std::pow(d1, 4) + 2 * d1 * d1 * (g1 * g2 - w1 * w2) +
             (g1 * g1 + w1 * w1) * (g2 * g2 + w2 * w2)) * (g3 * g3 + w3 * w3) +
            2 * d2 * d2 * (d1 * d1 * (g1 * g3 + w1 * w3) +
                           (g1 * g1 + w1 * w1) * (g2 * g3 - w2 * w3)) +
            std::pow(d2, 4) * (g1 * g1 + w1 * w1);
        const double q4 = g1 + 2 * g2 + 2 * g3;
        const double q3 = d1 * d1 + 2 * d2 * d2 + g2 * g2 + 4 * g2 * g3 + g3 * g3 +
                          2 * g1 * (g2 + g3) + w2 * w2 + w3 * w3;
        const double q2 = 2 * d2 * d2 * (g1 + g2 + g3) + d1 * d1 * (g2 + 2 * g3) +
                          2 * g3 * (g2 * (g2 + g3) + w2 * w2) + 2 * g2 * w3 * w3 +
                          g1 * (g2 * g2 + 4 * g2 * g3 + g3 * g3 + w2 * w2 + w3 * w3);
        const double q1 = std::pow(d2, 4) + g2 * g3 * (g2 * g3 + 2 * g1 * (g2 + g3)) +
                          g3 * (2 * g1 + g3) * w2 * w2 +
                          (2 * g1 * g2 + g2 * g2 + w2 * w2) * w3 * w3 +
                          2 * d2 * d2 * (g2 * g3 + g1 * (g2 + g3) - w2 * w3) +
                          d1 * d1 * (d2 * d2 + 2 * g2 * g3 + g3 * g3 + w3 * w3);
        const double q0 = std::pow(d2, 4) * g1 +
                          d2 * d2 * (d1 * d1 * g3 + 2 * g1 * g2 * g3 - 2 * g1 * w2 * w3) +
                          (d1 * d1 * g2 + g1 * (g2 * g2 + w2 * w2)) * (g3 * g3 + w3 * w3);
        return make({1, q4, q3, q2, q1, q0}, {1, p5, p4, p3, p2, p1, p0});
    }

    if (model_id == "relaxation_chain_z") {
        if (th.size() != 5 || output_tag != "z1")
            throw validation_error("model_tf_oracle: relaxation_chain_z expects 5 params, tag z1");
        const double wd = th[0] - th[1], d1 = th[2], g1 = th[3], g2 = th[4];
        const double q3 = -g1;
        const double q2 = 2 * d1 * d1 - 2 * g1 * g1 - 4 * g1 * g2;
        const double q1 = -g1 * (g1 * g1 + 6 * g1 * g2 + 5 * g2 * g2 + wd * wd);
        const double q0 = -2 * d1 * d1 * (g1 + g2) * (g1 + g2) -
                          2 * g1 * g2 * ((g1 + g2) * (g1 + g2) + wd * wd);
        const double p4 = 4 * (g1 + g2);
        const double p3 = 4 * d1 * d1 + 5 * g1 * g1 + 14 * g1 * g2 + 5 * g2 * g2 + wd * wd;
        const double p2 =
            2 * (g1 + g2) * (4 * d1 * d1 + g1 * g1 + 6 * g1 * g2 + g2 * g2 + wd * wd);
        const double p1 = 4 * d1 * d1 * (g1 + g2) * (g1 + g2) +
                          4 * g1 * g2 * ((g1 + g2) * (g1 + g2) + wd * wd);
        return make({q3, q2, q1, q0}, {1, p4, p3, p2, p1, 0});
    }

    if (model_id == "relaxation_chain_x") {
        if (th.size() != 5 || output_tag != "x1")
            throw validation_error("model_tf_oracle: relaxation_chain_x expects 5 params, tag x1");
        const double w1 = th[0], w2 = th[1], d1 = th[2], g1 = th[3], g2 = th[4];
        const double q6 = 7 * g1 + 8 * g2;
        const double q5 = 26 * g2 * g2 + 48 * g2 * g1 + 3 * d1 * d1 + 2 * w2 * w2 +
                          19 * g1 * g1 + w1 * w1;
        const double q4 = 130 * g1 * g2 * g2 + 17 * d1 * d1 * g2 + 5 * w1 * w1 * g1 +
                          10 * w2 * w2 * g1 + 12 * w2 * w2 * g2 + 108 * g1 * g1 * g2 +
                          44 * std::pow(g2, 3) + 18 * d1 * d1 * g1 + 25 * std::pow(g1, 3) +
                          4 * w1 * w1 * g2;
        const double p7 = 8 * g1 + 8 * g2;
        const double p6 = 2 * w2 * w2 + 26 * g1 * g1 + 26 * g2 * g2 + 56 * g2 * g1 +
                          2 * w1 * w1 + 4 * d1 * d1;
        return make({1, q6, q5, q4, nan, nan, nan, nan},
                    {1, p7, p6, nan, nan, nan, nan, nan, nan});
    }

    throw validation_error("model_tf_oracle: unknown model id '" + model_id + "'");
}

// Largest coefficient deviation between two normalized TFs, relative to the
// overall coefficient scale of `ref`; NaN entries in `ref` (coefficients not
// printed in the reference) are skipped; degree mismatch → +inf
inline double tf_max_reldiff(const RationalTF& tf, const RationalTF& ref) {
    if (tf.num_degree() != ref.num_degree() || tf.den_degree() != ref.den_degree())
        return std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (const Eigen::VectorXd* v : {&ref.num, &ref.den})
        for (Eigen::Index k = 0; k < v->size(); ++k)
            if (!std::isnan((*v)[k])) scale = std::max(scale, std::abs((*v)[k]));
    if (scale == 0.0) scale = 1.0;
    double worst = 0.0;
    auto scan = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (Eigen::Index k = 0; k < b.size(); ++k) {
            if (std::isnan(b[k])) continue;
            worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
        }
    };
    scan(tf.num, ref.num);
    scan(tf.den, ref.den);
    return worst;
}

inline std::string tf_pretty(const RationalTF& tf) {
    auto fmt = [](const Eigen::VectorXd& c) {
        std::ostringstream os;
        bool first = true;
        for (Eigen::Index k = c.size() - 1; k >= 0; --k) {
            if (c[k] == 0.0 && c.size() > 1) continue;
            if (!first) os << (c[k] < 0 ? " - " : " + ");
            else if (c[k] < 0) os << "-";
            first = false;
            const double a = std::abs(c[k]);
            if (k == 0 || a != 1.0) os << a;
            if (k > 0) {
                if (a != 1.0) os << "*";
                os << "s";
                if (k > 1) os << "^" << k;
            }
        }
        if (first) os << "0";
        return os.str();
    };
    return "(" + fmt(tf.num) + ") / (" + fmt(tf.den) + ")";
}

inline nlohmann::json tf_to_json(const RationalTF& tf) {
    nlohmann::json j;
    j["num"] = std::vector<double>(tf.num.data(), tf.num.data() + tf.num.size());
    j["den"] = std::vector<double>(tf.den.data(), tf.den.data() + tf.den.size());
    return j;
}

} // namespace oqsid
