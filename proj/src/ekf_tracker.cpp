#include "ristrack/ekf_tracker.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace ristrack {

namespace {

constexpr double kRegularization = 1e-12;
constexpr double kSingularRatio = 1e-15;

Eigen::Matrix2d symmetrized(const Eigen::Matrix2d& m) { return 0.5 * (m + m.transpose()); }

} // namespace

EkfConfig EkfConfig::from_mobility(const MobilityConfig& mob, double sigma2, ProcessNoiseMode mode)
{
    EkfConfig cfg;
    cfg.q_v = sigma2;
    if (mode == ProcessNoiseMode::Unsquared)
        cfg.q_u.diagonal() << mob.psi_s, mob.psi_r;
    else
        cfg.q_u.diagonal() << mob.psi_s * mob.psi_s / 3.0, mob.psi_r * mob.psi_r / 3.0;
    return cfg;
}

void EkfConfig::validate() const
{
    if (!(q_v >= 0.0))
        throw ConfigError("ekf: q_v must be >= 0");
    if ((q_u - q_u.transpose()).norm() > 1e-12 || q_u.trace() < 0.0 || q_u.determinant() < -1e-24)
        throw ConfigError("ekf: q_u must be symmetric positive semidefinite");
}

Eigen::Matrix2d jacobian_h(const HiddenState& x, const PhaseShifts& e, const ObservationModel& model)
{
    return model.jacobian(x, e);
}

EkfState ekf_predict(const EkfState& s, const EkfConfig& cfg)
{
    return {s.x_hat, symmetrized(s.m + cfg.q_u)};
}

EkfState ekf_correct(const EkfState& s, Complex y, const PhaseShifts& e, const EkfConfig& cfg,
                     const ObservationModel& model, EkfDiagnostics* diag)
{
    const Eigen::Matrix2d c = jacobian_h(s.x_hat, e, model);
    const Complex residual = y - model.mean(s.x_hat, e);
    const Eigen::Vector2d innovation(residual.real(), residual.imag());

    Eigen::Matrix2d cov = c * s.m * c.transpose() + 0.5 * cfg.q_v * Eigen::Matrix2d::Identity();
    const double scale = cov.norm();
    bool regularized = false;
    if (scale == 0.0 || std::abs(cov.determinant()) <= kSingularRatio * scale * scale) {
        cov += kRegularization * std::max(1.0, scale) * Eigen::Matrix2d::Identity();
        regularized = true;
    }

    const Eigen::Matrix2d gain = s.m * c.transpose() * cov.inverse();
    EkfState out;
    out.x_hat = HiddenState::from(s.x_hat.vec() + gain * innovation);
    out.m = symmetrized((Eigen::Matrix2d::Identity() - gain * c) * s.m);

    if (diag) {
        diag->innovation = std::abs(residual);
        diag->gain_norm = gain.norm();
        diag->regularized = regularized;
    }
    return out;
}

EkfStepResult ekf_step(const EkfState& s, Complex y, const PhaseShifts& e, const EkfConfig& cfg,
                       const ObservationModel& model)
{
    EkfStepResult r;
    r.state = ekf_correct(ekf_predict(s, cfg), y, e, cfg, model, &r.diag);
    r.estimate = r.state.x_hat;
    return r;
}

ExtendedKalmanFilter::ExtendedKalmanFilter(const EkfConfig& cfg, const HiddenState& x0) : cfg_(cfg), state_{x0, {}}
{
    cfg_.validate();
    state_.m.setZero();
}

HiddenState ExtendedKalmanFilter::step(Complex y, const PhaseShifts& e, const ObservationModel& model)
{
    EkfStepResult r = ekf_step(state_, y, e, cfg_, model);
    state_ = r.state;
    last_ = r.diag;
    return r.estimate;
}

} // namespace ristrack
