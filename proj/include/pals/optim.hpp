#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pals/forward.hpp"
#include "pals/level_set.hpp"
#include "pals/model.hpp"

namespace pals {

enum class Scheme { LevenbergMarquardt, GradientDescent };
/// LM damping term: lambda * I, or lambda * diag(H) (Marquardt scaling).
enum class Damping { Identity, Diagonal };
enum class StopReason { Discrepancy, MaxIters, Stagnation };

inline const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::Discrepancy: return "discrepancy";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::Stagnation: return "stagnation";
    }
    return "?";
}

struct SolverConfig {
    Scheme scheme = Scheme::LevenbergMarquardt;
    Damping damping = Damping::Identity;
    /// Initial damping (LM) or step length (GD). Unset for LM means
    /// 1e-2 * trace(H0) / m with identity damping and 1e-2 with diagonal
    /// damping.
    std::optional<double> lambda0;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    int max_iters = 100;
    int max_retries = 12;
    /// Stop as soon as ||R|| <= discrepancy_target.
    double discrepancy_target = 0.0;
    double stagnation_tol = 1e-6;
    int stagnation_window = 5;
    double min_step = 1e-10;
    bool unknown_contrasts = false;
    /// Lower bound on |beta_j|; values closer to zero are clamped (sign kept).
    double beta_min = 0.0;

    void validate() const {
        if (lambda0 && !(*lambda0 > 0.0)) throw std::invalid_argument("solver: lambda0 must be positive");
        if (!(lambda_up > 1.0)) throw std::invalid_argument("solver: lambda_up must be > 1");
        if (!(lambda_down > 0.0 && lambda_down < 1.0)) throw std::invalid_argument("solver: lambda_down must be in (0,1)");
        if (max_iters < 0) throw std::invalid_argument("solver: max_iters must be >= 0");
        if (max_retries < 1) throw std::invalid_argument("solver: max_retries must be >= 1");
    }
};

struct IterationRecord {
    int iteration = 0;
    double cost = 0.0;
    double residual_norm = 0.0;
    double lambda = 0.0;
    int active_bumps = 0;
    double contrast_in = 0.0;
    double contrast_out = 0.0;
};

struct SolverState {
    PalsModel model;
    int iteration = 0;
    double cost = 0.0;
    double lambda = 0.0;
    std::vector<double> cost_history;
    std::vector<bool> active_mask;
    std::optional<StopReason> stop_reason;
    std::vector<IterationRecord> log;
};

/// Parameters that may move this iteration: every bump-bound parameter of
/// an active bump, then the contrasts when they are unknown.
inline std::vector<ParamIndex> active_parameters(const PalsModel& m, const std::vector<bool>& active,
                                                 bool with_contrasts) {
    std::vector<ParamIndex> out;
    const auto layout = parameter_layout(m.bump_count(), with_contrasts);
    for (const auto& p : layout)
        if (!p.bump_bound() || active[static_cast<std::size_t>(p.bump)]) out.push_back(p);
    return out;
}

/// J = S * P, P holding d p / d mu for the requested parameters.
template <class Scalar>
MatrixX<Scalar> assemble_jacobian(const PalsModel& m, const Grid2D& g, const SensitivityMatrix<Scalar>& S,
                                  const std::vector<ParamIndex>& params) {
    return S.times(property_jacobian(m, g, params));
}

/// g = Re(J^H r).
template <class Scalar>
Eigen::VectorXd gradient(const MatrixX<Scalar>& J, const VectorX<Scalar>& r) {
    return (J.adjoint() * r).real();
}

/// H = Re(J^H J).
template <class Scalar>
Eigen::MatrixXd gauss_newton_hessian(const MatrixX<Scalar>& J) {
    Eigen::MatrixXd H = (J.adjoint() * J).real();
    return 0.5 * (H + H.transpose());
}

/// Adds delta to the listed parameters, clamping |beta| >= beta_min.
inline PalsModel apply_update(const PalsModel& m, const std::vector<ParamIndex>& params, const Eigen::VectorXd& delta,
                              double beta_min) {
    PalsModel out = m;
    for (std::size_t k = 0; k < params.size(); ++k) {
        double v = get(m, params[k]) + delta[static_cast<Index>(k)];
        if (params[k].kind == ParamIndex::Kind::Dilation && std::abs(v) < beta_min)
            v = std::copysign(beta_min, v == 0.0 ? get(m, params[k]) : v);
        set(out, params[k], v);
    }
    return out;
}

/// Binds a forward model, its data and the level-set evaluation grid.
template <class Scalar>
class PalsProblem {
public:
    PalsProblem(const ForwardModel<Scalar>& fwd, VectorX<Scalar> data) : fwd_(&fwd), data_(std::move(data)) {
        if (data_.size() != fwd.data_size())
            throw std::invalid_argument("PalsProblem: data size does not match forward model");
    }

    const ForwardModel<Scalar>& forward() const { return *fwd_; }
    const Grid2D& grid() const { return fwd_->grid(); }
    const VectorX<Scalar>& data() const { return data_; }

    VectorX<Scalar> residual(const PalsModel& m) const { return fwd_->predict(property_map(m, grid())) - data_; }

    double cost(const PalsModel& m) const { return 0.5 * residual(m).squaredNorm(); }

    /// Cost of a trial model; physically invalid properties count as +inf.
    double trial_cost(const PalsModel& m) const {
        try {
            return cost(m);
        } catch (const InvalidProperty&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    struct Linear {
        VectorX<Scalar> residual;
        MatrixX<Scalar> jacobian;
    };

    Linear linearize(const PalsModel& m, const std::vector<ParamIndex>& params) const {
        auto lin = fwd_->linearize(property_map(m, grid()));
        return {lin.prediction - data_, assemble_jacobian(m, grid(), lin.sensitivity, params)};
    }

private:
    const ForwardModel<Scalar>* fwd_;
    VectorX<Scalar> data_;
};

struct StepResult {
    enum class Status { Accepted, NoStep, Exhausted };
    Status status = Status::NoStep;
    PalsModel model;
    Eigen::VectorXd delta;
    double cost = 0.0;
    double lambda = 0.0;
    int rejections = 0;
};

/// Diagonal of the LM damping term. Zero curvatures in the diagonal mode
/// are lifted to 1e-12 of the largest one so the system stays definite.
inline Eigen::MatrixXd damping_matrix(const Eigen::MatrixXd& H, Damping mode) {
    const Index n = H.rows();
    if (mode == Damping::Identity || n == 0) return Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd d = H.diagonal();
    const double floor = std::max(1e-12 * d.maxCoeff(), std::numeric_limits<double>::min());
    return d.cwiseMax(floor).asDiagonal();
}

/// Damped Gauss-Newton step: solve (H + lambda I) delta = -g, accept on cost
/// decrease (lambda *= lambda_down), otherwise lambda *= lambda_up and retry.
template <class Scalar>
StepResult lm_step(const PalsProblem<Scalar>& prob, const PalsModel& m, const std::vector<ParamIndex>& params,
                   const Eigen::VectorXd& g, const Eigen::MatrixXd& H, double cost, double lambda,
                   const SolverConfig& cfg) {
    StepResult res;
    res.model = m;
    res.cost = cost;
    res.lambda = lambda;
    res.delta = Eigen::VectorXd::Zero(g.size());
    if (g.size() == 0 || (g.array() == 0.0).all()) return res;

    const Eigen::MatrixXd D = damping_matrix(H, cfg.damping);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(H + lambda * D);
        if (llt.info() == Eigen::Success) {
            const Eigen::VectorXd delta = llt.solve(-g);
            PalsModel trial = apply_update(m, params, delta, cfg.beta_min);
            const double c = prob.trial_cost(trial);
            if (c < cost) {
                res.status = StepResult::Status::Accepted;
                res.model = std::move(trial);
                res.delta = delta;
                res.cost = c;
                res.lambda = lambda * cfg.lambda_down;
                return res;
            }
        }
        ++res.rejections;
        lambda *= cfg.lambda_up;
    }
    res.status = StepResult::Status::Exhausted;
    res.lambda = lambda;
    return res;
}

/// Steepest descent mu - step * g with step halving until the cost drops.
/// The accepted step is doubled for the next call.
template <class Scalar>
StepResult gd_step(const PalsProblem<Scalar>& prob, const PalsModel& m, const std::vector<ParamIndex>& params,
                   const Eigen::VectorXd& g, double cost, double step, const SolverConfig& cfg) {
    StepResult res;
    res.model = m;
    res.cost = cost;
    res.lambda = step;
    res.delta = Eigen::VectorXd::Zero(g.size());
    if (g.size() == 0 || (g.array() == 0.0).all()) return res;
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        const Eigen::VectorXd delta = -step * g;
        PalsModel trial = apply_update(m, params, delta, cfg.beta_min);
        const double c = prob.trial_cost(trial);
        if (c < cost) {
            res.status = StepResult::Status::Accepted;
            res.model = std::move(trial);
            res.delta = delta;
            res.cost = c;
            res.lambda = 2.0 * step;
            return res;
        }
        ++res.rejections;
        step *= 0.5;
    }
    res.status = StepResult::Status::Exhausted;
    res.lambda = step;
    return res;
}

/// Level-set evolution until the discrepancy principle, the iteration cap
/// or stagnation stops it. The observer sees the state after every
/// evaluated iterate.
template <class Scalar>
SolverState run(const SolverConfig& cfg, const PalsModel& model0, const PalsProblem<Scalar>& prob,
                const std::function<void(const SolverState&)>& observer = {}) {
    cfg.validate();
    model0.validate();
    SolverState st;
    st.model = model0;
    bool lambda_ready = false;
    int slow_steps = 0;

    for (;;) {
        st.active_mask = active_bumps(st.model, prob.grid());
        const auto params = active_parameters(st.model, st.active_mask, cfg.unknown_contrasts);
        const auto lin = prob.linearize(st.model, params);
        const double rnorm = lin.residual.norm();
        st.cost = 0.5 * rnorm * rnorm;
        st.cost_history.push_back(st.cost);

        const Eigen::VectorXd g = gradient<Scalar>(lin.jacobian, lin.residual);
        Eigen::MatrixXd H;
        if (cfg.scheme == Scheme::LevenbergMarquardt) H = gauss_newton_hessian<Scalar>(lin.jacobian);
        if (!lambda_ready) {
            if (cfg.lambda0) {
                st.lambda = *cfg.lambda0;
            } else if (cfg.scheme == Scheme::LevenbergMarquardt && cfg.damping == Damping::Diagonal) {
                st.lambda = 1e-2;
            } else if (cfg.scheme == Scheme::LevenbergMarquardt && H.size() > 0 && H.trace() > 0.0) {
                st.lambda = 1e-2 * H.trace() / static_cast<double>(H.rows());
            } else {
                st.lambda = 1e-2;
            }
            lambda_ready = true;
        }

        int n_active = 0;
        for (bool a : st.active_mask) n_active += a ? 1 : 0;
        st.log.push_back({st.iteration, st.cost, rnorm, st.lambda, n_active, st.model.contrast_in, st.model.contrast_out});
        if (observer) observer(st);

        if (rnorm <= cfg.discrepancy_target) {
            st.stop_reason = StopReason::Discrepancy;
            break;
        }
        if (st.iteration >= cfg.max_iters) {
            st.stop_reason = StopReason::MaxIters;
            break;
        }

        const StepResult step = cfg.scheme == Scheme::LevenbergMarquardt
                                    ? lm_step(prob, st.model, params, g, H, st.cost, st.lambda, cfg)
                                    : gd_step(prob, st.model, params, g, st.cost, st.lambda, cfg);
        if (step.status != StepResult::Status::Accepted) {
            st.lambda = step.lambda;
            st.stop_reason = StopReason::Stagnation;
            break;
        }
        const double rel = (st.cost - step.cost) / st.cost;
        slow_steps = rel < cfg.stagnation_tol ? slow_steps + 1 : 0;
        st.model = step.model;
        st.lambda = step.lambda;
        ++st.iteration;
        if (slow_steps >= cfg.stagnation_window || step.delta.norm() < cfg.min_step) {
            // Record the final iterate before stopping.
            st.active_mask = active_bumps(st.model, prob.grid());
            st.cost = step.cost;
            st.cost_history.push_back(st.cost);
            int n = 0;
            for (bool a : st.active_mask) n += a ? 1 : 0;
            st.log.push_back({st.iteration, st.cost, std::sqrt(2.0 * st.cost), st.lambda, n, st.model.contrast_in,
                              st.model.contrast_out});
            if (observer) observer(st);
            st.stop_reason = std::sqrt(2.0 * st.cost) <= cfg.discrepancy_target ? StopReason::Discrepancy
                                                                                  : StopReason::Stagnation;
            break;
        }
    }
    return st;
}

} // namespace pals
