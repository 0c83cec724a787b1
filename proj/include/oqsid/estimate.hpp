// estimate.hpp — Coefficient-matching residuals, multi-start LM identification, noise sweep

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "oqsid/dynamics.hpp"
#include "oqsid/era.hpp"
#include "oqsid/errors.hpp"
#include "oqsid/generator.hpp"
#include "oqsid/rng.hpp"
#include "oqsid/xfer.hpp"

namespace oqsid {

enum class ResidualSelection { LowestDegreeFirst, All };

struct EstimationConfig {
    int mode{1};                       // 1/2: single-trace z1/z2 targets; 3/4: stacked traces
    OrderPolicy order_policy{OrderPolicy::model_order()};
    int n_starts{64};
    Eigen::MatrixXd start_box;         // n_params × 2 (lo, hi); empty → derived from nominal
    ResidualSelection selection{ResidualSelection::LowestDegreeFirst};
    std::uint64_t seed{0};
    double cancel_tol{1e-7};
    double solution_tol{1e-6};         // relative to the target-coefficient norm
    int lm_max_iter{200};
    double dedup_tol{1e-4};
    // simulation settings (used by noise_sweep and CLI inline simulation)
    double dt{0.01};
    double t_f{60.0};
};

struct Solution {
    Eigen::VectorXd theta;             // converged parameter vector (one member of its class)
    double residual_norm{0.0};
    std::string sign_class;            // e.g. "(+-omega_d, +-delta1)"
    Eigen::VectorXd relative_errors_pct;  // empty when no nominal; NaN for zero nominals
};

struct EstimateReport {
    std::vector<Solution> solutions;   // sorted by residual norm
    std::vector<std::string> identifiability_notes;
    bool no_solution{false};
    std::string diagnostics;
    RationalTF target_tf;
    Eigen::VectorXd singular_values;
    int n_sigma{0};
    std::vector<std::string> theta_names;
    nlohmann::json config_echo;
};

// e_i = |theta_hat_i - theta_i| / |theta_i| × 100%; sign-ambiguous entries are
// compared on absolute values; zero nominal → NaN (undefined-error flag)
inline Eigen::VectorXd relative_errors(const Eigen::VectorXd& theta_hat,
                                       const Eigen::VectorXd& theta_nominal,
                                       const std::vector<bool>& sign_ambiguous = {}) {
    if (theta_hat.size() != theta_nominal.size())
        throw validation_error("relative_errors: length mismatch");
    Eigen::VectorXd out(theta_hat.size());
    for (Eigen::Index i = 0; i < theta_hat.size(); ++i) {
        const bool amb = i < static_cast<Eigen::Index>(sign_ambiguous.size()) &&
                         sign_ambiguous[static_cast<std::size_t>(i)];
        const double hat = amb ? std::abs(theta_hat[i]) : theta_hat[i];
        const double nom = amb ? std::abs(theta_nominal[i]) : theta_nominal[i];
        out[i] = nom == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                            : std::abs((hat - nom) / nom) * 100.0;
    }
    return out;
}

namespace detail {

// One selected coefficient of a degree-n rational function (monic denominator)
struct CoeffRef {
    bool is_num;
    int k;  // power of s
};

// "Simplest equations first": sort by total θ-degree (num coeff of s^k has
// degree n−1−k, den coeff degree n−k), ties numerator first; θ-degree-0
// coefficients (structural constants) are excluded
inline std::vector<CoeffRef> make_selection(int den_deg, int count, ResidualSelection kind) {
    std::vector<CoeffRef> out;
    if (kind == ResidualSelection::All) {
        for (int k = den_deg - 1; k >= 0; --k) out.push_back({true, k});
        for (int k = den_deg - 1; k >= 0; --k) out.push_back({false, k});
        return out;
    }
    for (int d = 1; d <= den_deg; ++d) {
        if (den_deg - 1 - d >= 0) out.push_back({true, den_deg - 1 - d});
        out.push_back({false, den_deg - d});
        if (count > 0 && static_cast<int>(out.size()) >= count) break;
    }
    if (count > 0 && static_cast<int>(out.size()) > count) out.resize(static_cast<std::size_t>(count));
    return out;
}

// Coefficients of a normalized TF at the selected slots; num is zero-padded to
// degree den_deg−1
inline Eigen::VectorXd selected_coeffs(const RationalTF& tf, int den_deg,
                                       const std::vector<CoeffRef>& sel) {
    if (tf.den_degree() != den_deg)
        throw order_mismatch_error("selected_coeffs: denominator degree " +
                                   std::to_string(tf.den_degree()) + ", expected " +
                                   std::to_string(den_deg) + " (wrong n_sigma?)");
    if (tf.num_degree() > den_deg - 1)
        throw order_mismatch_error("selected_coeffs: numerator degree too high");
    Eigen::VectorXd out(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t i = 0; i < sel.size(); ++i) {
        const auto& ref = sel[i];
        if (ref.is_num)
            out[static_cast<Eigen::Index>(i)] =
                ref.k < tf.num.size() ? tf.num[ref.k] : 0.0;
        else
            out[static_cast<Eigen::Index>(i)] = tf.den[ref.k];
    }
    return out;
}

// θ → normalized model transfer-function coefficients for one output channel,
// with the full→restricted pipeline cached and (when exact) an affine
// decomposition A(θ) = A0 + Σ θ_i A_i for fast repeated evaluation
class ModelTF {
public:
    ModelTF(const ParamModel& model, int output_index)
        : model_(&model), output_(output_index) {
        const Algebra& alg = *model.algebra;
        Eigen::VectorXd ref;
        if (model.theta_nominal.size() == model.n_params()) {
            ref = model.theta_nominal;
        } else {
            auto gen = rng::derive_stream(0x5eedu, 7);
            ref = model.random_admissible
                      ? model.random_admissible(gen)
                      : Eigen::VectorXd::Ones(model.n_params());
        }
        AffineLTI full = assemble_generator(model, ref, alg);
        indices_ = accessible_set(full);
        AffineLTI restr = restrict(full, indices_);
        K_ = static_cast<int>(restr.A.rows());
        c_row_ = restr.c.row(output_index);
        x0_ = restr.x0;

        // probe for exact linearity in θ
        const int np = model.n_params();
        auto eval = [&](const Eigen::VectorXd& th) {
            AffineLTI f = assemble_generator(model, th, alg);
            return restrict_unchecked(f);
        };
        auto [A_zero, b_zero] = eval(Eigen::VectorXd::Zero(np));
        A0_ = A_zero;
        b0_ = b_zero;
        Ai_.resize(static_cast<std::size_t>(np));
        bi_.resize(static_cast<std::size_t>(np));
        for (int i = 0; i < np; ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(np);
            e[i] = 1.0;
            auto [Ae, be] = eval(e);
            Ai_[static_cast<std::size_t>(i)] = Ae - A0_;
            bi_[static_cast<std::size_t>(i)] = be - b0_;
        }
        Eigen::MatrixXd Aref = A0_;
        Eigen::VectorXd bref = b0_;
        for (int i = 0; i < np; ++i) {
            Aref += ref[i] * Ai_[static_cast<std::size_t>(i)];
            bref += ref[i] * bi_[static_cast<std::size_t>(i)];
        }
        auto [Atrue, btrue] = std::pair<Eigen::MatrixXd, Eigen::VectorXd>{restr.A, restr.b};
        affine_ = (Aref - Atrue).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + Atrue.norm()) &&
                  (bref - btrue).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + btrue.norm());

        const RationalTF ref_tf =
            normalize_tf(transfer_coeffs(Atrue, btrue, c_row_, x0_), 1e-7);
        den_deg_ = ref_tf.den_degree();
    }

    int den_degree() const { return den_deg_; }
    const std::vector<int>& accessible() const { return indices_; }

    std::pair<Eigen::MatrixXd, Eigen::VectorXd> system(const Eigen::VectorXd& theta) const {
        if (affine_) {
            Eigen::MatrixXd A = A0_;
            Eigen::VectorXd b = b0_;
            for (int i = 0; i < theta.size(); ++i) {
                A += theta[i] * Ai_[static_cast<std::size_t>(i)];
                b += theta[i] * bi_[static_cast<std::size_t>(i)];
            }
            return {A, b};
        }
        AffineLTI full = assemble_generator(*model_, theta, *model_->algebra);
        return restrict_unchecked(full);
    }

    RationalTF normalized(const Eigen::VectorXd& theta) const {
        auto [A, b] = system(theta);
        return normalize_to_order(transfer_coeffs(A, b, c_row_, x0_), den_deg_);
    }

private:
    std::pair<Eigen::MatrixXd, Eigen::VectorXd> restrict_unchecked(const AffineLTI& full) const {
        const int m = static_cast<int>(indices_.size());
        const double scale = std::pow(2.0, full.n_qubits / 2.0);
        Eigen::MatrixXd A(m, m);
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) {
            b[i] = scale * full.b[indices_[i]];
            for (int j = 0; j < m; ++j) A(i, j) = full.A(indices_[i], indices_[j]);
        }
        return {A, b};
    }

    const ParamModel* model_;
    int output_;
    std::vector<int> indices_;
    int K_{0};
    Eigen::RowVectorXd c_row_;
    Eigen::VectorXd x0_;
    Eigen::MatrixXd A0_;
    Eigen::VectorXd b0_;
    std::vector<Eigen::MatrixXd> Ai_;
    std::vector<Eigen::VectorXd> bi_;
    bool affine_{false};
    int den_deg_{0};
};

struct LMResult {
    Eigen::VectorXd theta;
    double resnorm{std::numeric_limits<double>::infinity()};
    bool converged{false};
};

// Damped least squares with forward-difference Jacobian; only accepts
// residual-decreasing steps (monotone by construction)
inline LMResult levenberg_marquardt(
    const std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& theta0, double abs_tol, int max_iter) {
    LMResult out;
    out.theta = theta0;
    auto r0 = fn(theta0);
    if (!r0) return out;
    Eigen::VectorXd r = *r0;
    out.resnorm = r.norm();
    const int n = static_cast<int>(theta0.size());
    double lambda = 1e-3;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (out.resnorm <= abs_tol) {
            out.converged = true;
            return out;
        }
        Eigen::MatrixXd J(r.size(), n);
        bool jac_ok = true;
        for (int i = 0; i < n && jac_ok; ++i) {
            const double h = 1e-7 * std::max(1.0, std::abs(out.theta[i]));
            Eigen::VectorXd tp = out.theta;
            tp[i] += h;
            auto rp = fn(tp);
            if (!rp || rp->size() != r.size())
                jac_ok = false;
            else
                J.col(i) = (*rp - r) / h;
        }
        if (!jac_ok) break;
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Eigen::MatrixXd M = JtJ;
            for (int i = 0; i < n; ++i)
                M(i, i) += lambda * std::max(JtJ(i, i), 1e-12);
            const Eigen::VectorXd delta = M.ldlt().solve(-g);
            if (!delta.allFinite()) {
                lambda *= 4.0;
                continue;
            }
            const Eigen::VectorXd trial = out.theta + delta;
            auto rt = fn(trial);
            if (rt && rt->norm() < out.resnorm) {
                const double step = delta.norm();
                out.theta = trial;
                r = *rt;
                out.resnorm = r.norm();
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (step <= 1e-13 * (1.0 + out.theta.norm())) iter = max_iter;  // stagnated
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
        if (!stepped) break;
    }
    out.converged = out.resnorm <= abs_tol;
    return out;
}

inline int worker_count() {
    if (const char* env = std::getenv("OQSID_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace detail

// Residual of the coefficient-matching system at θ against a normalized target TF
inline Eigen::VectorXd residual(const ParamModel& model, const Eigen::VectorXd& theta,
                                const RationalTF& target, int output_index = 0,
                                ResidualSelection selection = ResidualSelection::LowestDegreeFirst) {
    if (!target.normalized) throw validation_error("residual: target must be normalized");
    detail::ModelTF ctx(model, output_index);
    const auto sel = detail::make_selection(ctx.den_degree(), model.n_params(), selection);
    const Eigen::VectorXd target_sel = detail::selected_coeffs(target, ctx.den_degree(), sel);
    const Eigen::VectorXd model_sel =
        detail::selected_coeffs(ctx.normalized(theta), ctx.den_degree(), sel);
    return model_sel - target_sel;
}

namespace detail {

inline Eigen::MatrixXd default_start_box(const ParamModel& model) {
    if (model.theta_nominal.size() != model.n_params())
        throw validation_error("identify: start_box required when the model has no nominal θ");
    Eigen::MatrixXd box(model.n_params(), 2);
    for (int i = 0; i < model.n_params(); ++i) {
        const double half = 2.0 * std::max(std::abs(model.theta_nominal[i]), 1.0);
        box(i, 0) = -half;
        box(i, 1) = half;
    }
    return box;
}

inline std::string sign_class_string(const ParamModel& model, const Eigen::VectorXd& theta) {
    std::string out;
    for (int i = 0; i < model.n_params(); ++i) {
        if (i < static_cast<int>(model.sign_ambiguous.size()) &&
            model.sign_ambiguous[static_cast<std::size_t>(i)] && theta[i] != 0.0) {
            if (!out.empty()) out += ", ";
            out += "+-" + model.theta_names[static_cast<std::size_t>(i)];
        }
    }
    return out.empty() ? "unique-sign" : out;
}

// Dedup key: sign-ambiguous coordinates compared on absolute value
inline Eigen::VectorXd dedup_key(const ParamModel& model, const Eigen::VectorXd& theta) {
    Eigen::VectorXd key = theta;
    for (int i = 0; i < model.n_params(); ++i)
        if (i < static_cast<int>(model.sign_ambiguous.size()) &&
            model.sign_ambiguous[static_cast<std::size_t>(i)])
            key[i] = std::abs(key[i]);
    return key;
}

inline std::vector<std::string> identifiability_notes(
    const ParamModel& model,
    const std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& theta) {
    std::vector<std::string> notes;
    auto r = fn(theta);
    if (!r) return notes;
    const int n = static_cast<int>(theta.size());
    Eigen::MatrixXd J(r->size(), n);
    for (int i = 0; i < n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(theta[i]));
        Eigen::VectorXd tp = theta;
        tp[i] += h;
        auto rp = fn(tp);
        if (!rp) return notes;
        J.col(i) = (*rp - *r) / h;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const double smax = svd.singularValues()[0];
    const Eigen::Index nsv = svd.singularValues().size();
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        const double sv = i < nsv ? svd.singularValues()[i] : 0.0;
        if (sv >= 1e-8 * smax) continue;
        std::ostringstream os;
        os << "unidentifiable direction (sv ratio " << (smax > 0 ? sv / smax : 0.0) << "): ";
        bool first = true;
        for (int p = 0; p < n; ++p) {
            const double w = svd.matrixV()(p, i);
            if (std::abs(w) < 0.2) continue;
            if (!first) os << (w < 0 ? " - " : " + ");
            else if (w < 0) os << "-";
            first = false;
            os << std::abs(w) << "*" << model.theta_names[static_cast<std::size_t>(p)];
        }
        notes.push_back(os.str());
    }
    return notes;
}

} // namespace detail

// Full identification pipeline: mode wiring → Hankel → ERA → continuous
// realization → normalized target TF → multi-start damped least squares
inline EstimateReport identify(const ParamModel& model, const TraceSet& traces,
                               const EstimationConfig& cfg) {
    if (cfg.mode < 1 || cfg.mode > 4) throw validation_error("identify: mode must be in 1..4");
    const int n_outputs = traces.n_outputs();
    const bool stacked = cfg.mode >= 3;
    const int target_output = (cfg.mode == 2 || cfg.mode == 4) ? 1 : 0;
    if (target_output >= n_outputs || (stacked && n_outputs < 2))
        throw validation_error("identify: mode " + std::to_string(cfg.mode) +
                               " needs more trace channels than provided");
    if (target_output >= static_cast<int>(model.observables.size()))
        throw validation_error("identify: model lacks the output required by this mode");

    TraceSet used = traces;
    int target_row = target_output;
    if (!stacked) {
        used.values = traces.values.row(target_output);
        used.labels = {traces.labels[static_cast<std::size_t>(target_output)]};
        target_row = 0;
    }

    detail::ModelTF ctx(model, target_output);
    const int den_deg = ctx.den_degree();
    OrderPolicy policy = cfg.order_policy;
    if (policy.kind == OrderPolicy::Kind::ModelOrder) policy = OrderPolicy::fixed(den_deg);

    const int r = used.n_steps / 2;
    const int s = used.n_steps / 2;
    const Eigen::MatrixXd H0 = build_hankel(used, r, s, 0);
    const Eigen::MatrixXd H1 = build_hankel(used, r, s, 1);
    Realization real = era_realize(H0, H1, used.n_outputs(), policy);
    to_continuous(real, used.dt);

    RationalTF target = transfer_coeffs(real.A_hat, Eigen::VectorXd(),
                                        real.c_hat.row(target_row), real.x0_hat);
    // realizations are minimal by construction: monic reduction only
    target.num = poly::trim(target.num);
    target.den = poly::trim(target.den);
    const double lead = target.den[target.den.size() - 1];
    target.num /= lead;
    target.den /= lead;
    target.normalized = true;

    EstimateReport report;
    report.target_tf = target;
    report.singular_values = real.singular_values;
    report.n_sigma = real.n_sigma;
    report.theta_names = model.theta_names;

    const auto sel = detail::make_selection(den_deg, model.n_params(), cfg.selection);
    const Eigen::VectorXd target_sel = detail::selected_coeffs(target, den_deg, sel);

    auto fn = [&](const Eigen::VectorXd& th) -> std::optional<Eigen::VectorXd> {
        try {
            return detail::selected_coeffs(ctx.normalized(th), den_deg, sel) - target_sel;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };

    const Eigen::MatrixXd box =
        cfg.start_box.size() > 0 ? cfg.start_box : detail::default_start_box(model);
    if (box.rows() != model.n_params() || box.cols() != 2)
        throw validation_error("identify: start_box must be n_params x 2");

    const double abs_tol = cfg.solution_tol * std::max(target_sel.norm(), 1e-12);
    auto gen = rng::derive_stream(cfg.seed, 0xA11CEull);

    double best_failed = std::numeric_limits<double>::infinity();
    for (int start = 0; start <= cfg.n_starts; ++start) {
        Eigen::VectorXd th0(model.n_params());
        if (start == 0) {
            for (int i = 0; i < model.n_params(); ++i) th0[i] = 0.5 * (box(i, 0) + box(i, 1));
        } else {
            for (int i = 0; i < model.n_params(); ++i)
                th0[i] = rng::uniform(gen, box(i, 0), box(i, 1));
        }
        const auto lm = detail::levenberg_marquardt(fn, th0, abs_tol, cfg.lm_max_iter);
        if (!lm.converged) {
            best_failed = std::min(best_failed, lm.resnorm);
            continue;
        }
        const Eigen::VectorXd key = detail::dedup_key(model, lm.theta);
        bool dup = false;
        for (auto& sol : report.solutions) {
            const Eigen::VectorXd other = detail::dedup_key(model, sol.theta);
            if ((key - other).norm() <= cfg.dedup_tol * (1.0 + other.norm())) {
                dup = true;
                if (lm.resnorm < sol.residual_norm) {
                    sol.theta = lm.theta;
                    sol.residual_norm = lm.resnorm;
                }
                break;
            }
        }
        if (!dup) {
            Solution sol;
            sol.theta = lm.theta;
            sol.residual_norm = lm.resnorm;
            sol.sign_class = detail::sign_class_string(model, lm.theta);
            report.solutions.push_back(std::move(sol));
        }
    }

    std::sort(report.solutions.begin(), report.solutions.end(),
              [](const Solution& a, const Solution& b) {
                  return a.residual_norm < b.residual_norm;
              });

    if (report.solutions.empty()) {
        report.no_solution = true;
        std::ostringstream os;
        os << "no start converged below tolerance " << abs_tol
           << "; best residual norm reached: " << best_failed;
        report.diagnostics = os.str();
        return report;
    }

    if (model.theta_nominal.size() == model.n_params())
        for (auto& sol : report.solutions)
            sol.relative_errors_pct =
                relative_errors(sol.theta, model.theta_nominal, model.sign_ambiguous);

    report.identifiability_notes =
        detail::identifiability_notes(model, fn, report.solutions.front().theta);
    return report;
}

// ---- Monte-Carlo noise sweep -------------------------------------------------

struct SweepRow {
    double sigma{0.0};
    std::string param;
    double mean_rel_err_pct{0.0};
    double stderr_pct{0.0};
    int n_failed{0};
};

inline std::vector<SweepRow> noise_sweep(const ParamModel& model,
                                         const Eigen::VectorXd& theta_nominal,
                                         const std::vector<double>& sigma_list, int M,
                                         const EstimationConfig& cfg, std::uint64_t seed) {
    if (M < 1) throw validation_error("noise_sweep: M must be >= 1");
    const Algebra& alg = *model.algebra;
    AffineLTI full = assemble_generator(model, theta_nominal, alg);
    AffineLTI restr = restrict(full, accessible_set(full));
    const int n_steps = static_cast<int>(std::llround(cfg.t_f / cfg.dt));
    const TraceSet clean = simulate_traces(restr, cfg.dt, n_steps);

    const int np = model.n_params();
    std::vector<SweepRow> rows;
    const int n_workers = detail::worker_count();

    for (std::size_t si = 0; si < sigma_list.size(); ++si) {
        const double sigma = sigma_list[si];
        std::vector<Eigen::VectorXd> errors(static_cast<std::size_t>(M));
        std::vector<char> ok(static_cast<std::size_t>(M), 0);

        auto run_instance = [&](int m) {
            const std::uint64_t inst = static_cast<std::uint64_t>(si) * M + m;
            const TraceSet noisy = add_noise(clean, sigma, rng::mix(seed, inst));
            EstimationConfig icfg = cfg;
            icfg.seed = rng::mix(seed, inst ^ 0x9e3779b97f4a7c15ULL);
            try {
                const EstimateReport rep = identify(model, noisy, icfg);
                if (rep.no_solution) return;
                // keep the solution with the least summed relative error
                double best_sum = std::numeric_limits<double>::infinity();
                Eigen::VectorXd best;
                for (const auto& sol : rep.solutions) {
                    const Eigen::VectorXd e =
                        relative_errors(sol.theta, theta_nominal, model.sign_ambiguous);
                    double sum = 0;
                    bool finite = true;
                    for (Eigen::Index i = 0; i < e.size(); ++i) {
                        if (std::isnan(e[i])) { finite = false; break; }
                        sum += e[i];
                    }
                    if (finite && sum < best_sum) {
                        best_sum = sum;
                        best = e;
                    }
                }
                if (best.size() == np) {
                    errors[static_cast<std::size_t>(m)] = best;
                    ok[static_cast<std::size_t>(m)] = 1;
                }
            } catch (const std::exception&) {
                // counted as a failed instance
            }
        };

        if (n_workers <= 1) {
            for (int m = 0; m < M; ++m) run_instance(m);
        } else {
            std::atomic<int> next{0};
            std::vector<std::thread> pool;
            for (int w = 0; w < n_workers; ++w)
                pool.emplace_back([&] {
                    for (int m = next.fetch_add(1); m < M; m = next.fetch_add(1)) run_instance(m);
                });
            for (auto& t : pool) t.join();
        }

        int n_ok = 0;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);
        for (int m = 0; m < M; ++m)
            if (ok[static_cast<std::size_t>(m)]) {
                mean += errors[static_cast<std::size_t>(m)];
                ++n_ok;
            }
        const int n_failed = M - n_ok;
        if (n_failed > 0)
            std::cerr << "noise_sweep: sigma = " << sigma << ": " << n_failed << "/" << M
                      << " instances produced no solution\n";
        if (n_ok > 0) mean /= n_ok;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(np);
        for (int m = 0; m < M; ++m)
            if (ok[static_cast<std::size_t>(m)])
                var += (errors[static_cast<std::size_t>(m)] - mean).cwiseAbs2();
        for (int i = 0; i < np; ++i) {
            SweepRow row;
            row.sigma = sigma;
            row.param = model.theta_names[static_cast<std::size_t>(i)];
            row.mean_rel_err_pct = n_ok > 0 ? mean[i] : std::numeric_limits<double>::quiet_NaN();
            row.stderr_pct = n_ok > 1 ? std::sqrt(var[i] / (n_ok - 1) / n_ok)
                                      : std::numeric_limits<double>::quiet_NaN();
            row.n_failed = n_failed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "sigma,param,mean_rel_err_pct,stderr_pct,n_failed\n";
    os.precision(10);
    for (const auto& r : rows)
        os << r.sigma << "," << r.param << "," << r.mean_rel_err_pct << "," << r.stderr_pct
           << "," << r.n_failed << "\n";
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw validation_error("write_sweep_csv: cannot open '" + path + "'");
    write_sweep_csv(rows, os);
}

// ---- report JSON -------------------------------------------------------------

inline nlohmann::json report_to_json(const EstimateReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["theta_names"] = report.theta_names;
    j["no_solution"] = report.no_solution;
    if (!report.diagnostics.empty()) j["diagnostics"] = report.diagnostics;
    j["n_sigma"] = report.n_sigma;
    j["singular_values"] = std::vector<double>(
        report.singular_values.data(),
        report.singular_values.data() + report.singular_values.size());
    j["target_tf"] = tf_to_json(report.target_tf);
    j["identifiability_notes"] = report.identifiability_notes;
    j["solutions"] = nlohmann::json::array();
    for (const auto& sol : report.solutions) {
        nlohmann::json js;
        js["theta"] = std::vector<double>(sol.theta.data(), sol.theta.data() + sol.theta.size());
        js["residual_norm"] = sol.residual_norm;
        js["sign_class"] = sol.sign_class;
        if (sol.relative_errors_pct.size() > 0) {
            std::vector<nlohmann::json> errs;
            for (Eigen::Index i = 0; i < sol.relative_errors_pct.size(); ++i) {
                const double e = sol.relative_errors_pct[i];
                errs.push_back(std::isnan(e) ? nlohmann::json(nullptr) : nlohmann::json(e));
            }
            js["relative_errors_pct"] = errs;
        }
        j["solutions"].push_back(js);
    }
    if (!report.config_echo.is_null()) j["config"] = report.config_echo;
    return j;
}

} // namespace oqsid
