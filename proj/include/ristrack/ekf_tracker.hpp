#pragma once

#include <Eigen/Core>

#include "ristrack/channel.hpp"

namespace ristrack {

struct EkfState {
    HiddenState x_hat;
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero(); // MSE matrix
};

enum class ProcessNoiseMode {
    UniformVariance, // diag(psi_s^2, psi_r^2) / 3
    Unsquared     // diag(psi_s, psi_r), angle units unsquared
};

struct EkfConfig {
    Eigen::Matrix2d q_u = Eigen::Matrix2d::Zero();
    double q_v = 1.0; // complex measurement noise variance sigma^2

    static EkfConfig from_mobility(const MobilityConfig& mob, double sigma2,
                                   ProcessNoiseMode mode = ProcessNoiseMode::UniformVariance);
    void validate() const;
};

struct EkfDiagnostics {
    double innovation = 0.0; // |y - h(x_pred)|
    double gain_norm = 0.0;  // Frobenius norm of K
    bool regularized = false;
};

/// Jacobian of the stacked (Re, Im) observation with respect to (x_e, x_a).
Eigen::Matrix2d jacobian_h(const HiddenState& x, const PhaseShifts& e, const ObservationModel& model);

EkfState ekf_predict(const EkfState& s, const EkfConfig& cfg);

/// Kalman correction on the stacked real measurement with R = (q_v / 2) I.
/// An innovation covariance that is numerically singular gets 1e-12 (scaled by
/// its own norm when that exceeds one) added on the diagonal, and the event is
/// reported through `diag`.
EkfState ekf_correct(const EkfState& s, Complex y, const PhaseShifts& e, const EkfConfig& cfg,
                     const ObservationModel& model, EkfDiagnostics* diag = nullptr);

struct EkfStepResult {
    EkfState state;
    HiddenState estimate;
    EkfDiagnostics diag;
};

EkfStepResult ekf_step(const EkfState& s, Complex y, const PhaseShifts& e, const EkfConfig& cfg,
                       const ObservationModel& model);

class ExtendedKalmanFilter {
public:
    ExtendedKalmanFilter(const EkfConfig& cfg, const HiddenState& x0);

    HiddenState step(Complex y, const PhaseShifts& e, const ObservationModel& model);

    const EkfState& state() const { return state_; }
    const EkfDiagnostics& last() const { return last_; }

private:
    EkfConfig cfg_;
    EkfState state_;
    EkfDiagnostics last_;
};

} // namespace ristrack
