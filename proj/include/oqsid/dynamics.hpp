// dynamics.hpp — Sampled trace simulation, measurement noise, and the master-equation oracle

#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "oqsid/errors.hpp"
#include "oqsid/generator.hpp"
#include "oqsid/rng.hpp"

namespace oqsid {

// Sampled expectation-value traces; values is p × (n_steps + 1)
struct TraceSet {
    double dt{0.0};
    int n_steps{0};
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
    double noise_sigma{0.0};
    std::uint64_t seed{0};

    int n_outputs() const { return static_cast<int>(values.rows()); }
};

// Exact sampling of ẋ = Ax + b via one augmented matrix exponential
// exp([[A, b], [0, 0]] dt) applied to (x; 1); no ODE-stepping error
inline TraceSet simulate_traces(const AffineLTI& lti, double dt, int n_steps) {
    if (dt <= 0.0) throw validation_error("simulate_traces: dt must be positive");
    if (n_steps < 0) throw validation_error("simulate_traces: n_steps must be >= 0");
    const int K = static_cast<int>(lti.A.rows());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(K + 1, K + 1);
    aug.topLeftCorner(K, K) = lti.A * dt;
    aug.topRightCorner(K, 1) = lti.b * dt;
    const Eigen::MatrixXd E = aug.exp();
    if (!E.allFinite()) throw consistency_error("simulate_traces: non-finite matrix exponential");

    TraceSet traces;
    traces.dt = dt;
    traces.n_steps = n_steps;
    traces.labels = lti.output_labels;
    traces.values.resize(lti.c.rows(), n_steps + 1);
    Eigen::VectorXd z(K + 1);
    z.head(K) = lti.x0;
    z[K] = 1.0;
    for (int j = 0; j <= n_steps; ++j) {
        traces.values.col(j) = lti.c * z.head(K);
        if (j < n_steps) z = E * z;
    }
    if (!traces.values.allFinite())
        throw consistency_error("simulate_traces: non-finite trace values");
    return traces;
}

// z_i(j) = y_i(j) + ξ_i(j), ξ i.i.d. Normal(0, σ²); deterministic under fixed seed
inline TraceSet add_noise(const TraceSet& traces, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw validation_error("add_noise: sigma must be >= 0");
    TraceSet out = traces;
    out.noise_sigma = sigma;
    out.seed = seed;
    if (sigma == 0.0) return out;
    auto gen = rng::derive_stream(seed, 0);
    rng::Gaussian gauss;
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
        for (Eigen::Index j = 0; j < out.values.cols(); ++j)
            out.values(i, j) += sigma * gauss(gen);
    return out;
}

// Independent oracle: RK4 on the N×N density matrix at substep dt/20
inline TraceSet reference_master_equation(const ParamModel& model, const Eigen::VectorXd& theta,
                                          double dt, int n_steps) {
    if (dt <= 0.0) throw validation_error("reference_master_equation: dt must be positive");
    const Algebra& alg = *model.algebra;
    const OperatorBasis& basis = alg.basis;
    const int K = basis.size();
    const int N = basis.dim;

    const Eigen::VectorXd h = model.ham_coeffs(theta);
    const Eigen::MatrixXcd G = model.lindblad_matrix(theta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
    for (int m = 0; m < K; ++m)
        if (h[m] != 0.0) H += h[m] * basis.elements[m];

    // Nonzero G entries with precomputed F_k F_j products
    struct DissTerm {
        int j, k;
        cplx g;
        Eigen::MatrixXcd KJ;
    };
    std::vector<DissTerm> terms;
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k)
            if (G(j, k) != cplx(0, 0))
                terms.push_back({j, k, G(j, k), basis.elements[k] * basis.elements[j]});

    auto lindblad = [&](const Eigen::MatrixXcd& rho) {
        Eigen::MatrixXcd out = cplx(0, -1) * (H * rho - rho * H);
        for (const auto& t : terms)
            out += t.g * (basis.elements[t.j] * rho * basis.elements[t.k] -
                          0.5 * (t.KJ * rho + rho * t.KJ));
        return out;
    };

    TraceSet traces;
    traces.dt = dt;
    traces.n_steps = n_steps;
    traces.labels = model.observable_labels;
    traces.values.resize(static_cast<Eigen::Index>(model.observables.size()), n_steps + 1);

    Eigen::MatrixXcd rho = model.rho0;
    const int substeps = 20;
    const double hstep = dt / substeps;
    for (int j = 0; j <= n_steps; ++j) {
        if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
            throw consistency_error("reference_master_equation: trace drift exceeds 1e-8");
        for (std::size_t i = 0; i < model.observables.size(); ++i)
            traces.values(static_cast<Eigen::Index>(i), j) =
                (model.observables[i] * rho).trace().real();
        if (j == n_steps) break;
        for (int s = 0; s < substeps; ++s) {
            const Eigen::MatrixXcd k1 = lindblad(rho);
            const Eigen::MatrixXcd k2 = lindblad(rho + 0.5 * hstep * k1);
            const Eigen::MatrixXcd k3 = lindblad(rho + 0.5 * hstep * k2);
            const Eigen::MatrixXcd k4 = lindblad(rho + hstep * k3);
            rho += hstep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return traces;
}

// ---- trace CSV (header: t,<label1>,<label2>,...) ----------------------------

inline void write_trace_csv(const TraceSet& traces, std::ostream& os) {
    os << "t";
    for (const auto& l : traces.labels) os << "," << l;
    os << "\n";
    os.precision(17);
    for (int j = 0; j <= traces.n_steps; ++j) {
        os << j * traces.dt;
        for (Eigen::Index i = 0; i < traces.values.rows(); ++i)
            os << "," << traces.values(i, j);
        os << "\n";
    }
}

inline void write_trace_csv(const TraceSet& traces, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw validation_error("write_trace_csv: cannot open '" + path + "'");
    write_trace_csv(traces, os);
}

inline TraceSet read_trace_csv(std::istream& is) {
    TraceSet traces;
    std::string line;
    if (!std::getline(is, line))
        throw validation_error("read_trace_csv: empty input");
    std::stringstream hs(line);
    std::string cell;
    std::vector<std::string> header;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    if (header.size() < 2 || header[0] != "t")
        throw validation_error("read_trace_csv: header must be t,<label1>,...");
    traces.labels.assign(header.begin() + 1, header.end());

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (...) {
                throw validation_error("read_trace_csv: bad number at line " +
                                       std::to_string(lineno));
            }
        }
        if (row.size() != header.size())
            throw validation_error("read_trace_csv: wrong column count at line " +
                                   std::to_string(lineno));
        times.push_back(row[0]);
        rows.push_back(std::vector<double>(row.begin() + 1, row.end()));
    }
    if (times.size() < 2) throw validation_error("read_trace_csv: need at least two samples");
    traces.n_steps = static_cast<int>(times.size()) - 1;
    traces.dt = (times.back() - times.front()) / traces.n_steps;
    if (traces.dt <= 0) throw validation_error("read_trace_csv: non-increasing time column");
    traces.values.resize(static_cast<Eigen::Index>(traces.labels.size()),
                         static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < traces.labels.size(); ++i)
            traces.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[j][i];
    return traces;
}

inline TraceSet read_trace_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw validation_error("read_trace_csv: cannot open '" + path + "'");
    return read_trace_csv(is);
}

} // namespace oqsid
