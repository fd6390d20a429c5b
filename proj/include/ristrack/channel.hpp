#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "ristrack/core_math.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

// Coordinate frame (all positions in meters):
//   * the RIS lies in the x-z plane with its boresight normal along +y;
//     grid row index m runs along +z (vertical), column index n along +x;
//   * the BS ULA is aligned with +x.
// For a unit direction u leaving the RIS, elevation = acos(u_z) is measured
// from the vertical array axis and azimuth = atan2(u_y, u_x) is measured in
// the horizontal plane from the horizontal array axis. With this choice
// cos(elevation) = u_z and sin(elevation)cos(azimuth) = u_x are exactly the
// direction cosines along the two array axes.

struct ArrayConfig {
    int n_rx = 16;
    int l = 8;
    double d_over_lambda = 0.5;
    double carrier_hz = 28e9;

    int ris_elements() const { return l * l; }
    double wavelength() const;
    void validate() const;
};

using Vec3 = Eigen::Vector3d;

struct Geometry {
    Vec3 bs{60.0, 40.0, 40.0};
    Vec3 ris{30.0, 0.0, 50.0};
    Vec3 ue{0.0, 20.0, 0.0};

    double ris_bs_distance() const { return (bs - ris).norm(); }
    double ue_ris_distance() const { return (ue - ris).norm(); }
    void validate() const;
};

struct TrueAngles {
    double theta = 0.0;     // AoA at the BS
    double theta_bar = 0.0; // combining angle at the BS
    double phi_e = 0.0;     // RIS -> BS elevation, static within a block
    double phi_a = 0.0;     // RIS -> BS azimuth, static within a block
    double psi_e = 0.0;     // UE -> RIS elevation at the current slot
    double psi_a = 0.0;     // UE -> RIS azimuth at the current slot
};

/// Cascaded direction-cosine differences; the tracked state.
struct HiddenState {
    static constexpr double kBound = 2.0;

    double x_e = 0.0;
    double x_a = 0.0;

    Eigen::Vector2d vec() const { return {x_e, x_a}; }
    static HiddenState from(const Eigen::Vector2d& v) { return {v(0), v(1)}; }

    bool in_bounds() const { return std::abs(x_e) <= kBound && std::abs(x_a) <= kBound; }

    friend bool operator==(const HiddenState&, const HiddenState&) = default;
};

/// RIS configuration: one unit-modulus coefficient per element, flat index m*L + n.
struct PhaseShifts {
    ComplexVec e;

    Eigen::Index size() const { return e.size(); }
    bool is_unit_modulus(double tol = 1e-12) const;
};

struct LinkBudget {
    Complex alpha{1.0, 0.0};
    double p_tx = 1.0;  // watts
    double sigma2 = 1.0; // noise variance, watts
    double s = 1.0;      // training symbol

    void validate() const;
};

struct MobilityConfig {
    double psi_s = 0.0; // max elevation step per slot, radians
    double psi_r = 0.0; // max azimuth step per slot, radians

    /// Step size above which the small-angle proposal supports lose accuracy.
    static constexpr double kSmallAngleLimit = 5.0 * std::numbers::pi / 180.0;

    bool small_angle_regime() const { return psi_s <= kSmallAngleLimit && psi_r <= kSmallAngleLimit; }
    void validate() const;
};

/// Product-distance power law standing in for a full path-loss model:
/// |alpha|^2 = C0 * (d_ris_bs * d_ue_ris / d0^2)^(-exponent), with C0 the
/// free-space gain (lambda / (4 pi d0))^2 at the reference distance d0.
struct PathLossModel {
    double ref_distance_m = 1.0;
    double exponent = 2.0;

    double reference_gain(const ArrayConfig& cfg) const;
};

// Entry k = exp(+j 2 pi (d/lambda) k cos_angle) / sqrt(n).
template <typename Real = double>
ComplexVecT<Real> ula_steering(Real cos_angle, int n, Real d_over_lambda)
{
    ComplexVecT<Real> out(n);
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(n));
    const Real k = Real(2) * std::numbers::pi_v<Real> * d_over_lambda * cos_angle;
    for (int i = 0; i < n; ++i)
        out(i) = std::polar(scale, k * static_cast<Real>(i));
    return out;
}

// One UPA axis factor: entry m = exp(-j 2 pi (d/lambda) m component).
template <typename Real = double>
ComplexVecT<Real> upa_axis(Real component, int l, Real d_over_lambda)
{
    ComplexVecT<Real> out(l);
    const Real k = -Real(2) * std::numbers::pi_v<Real> * d_over_lambda * component;
    for (int i = 0; i < l; ++i)
        out(i) = std::polar(Real(1), k * static_cast<Real>(i));
    return out;
}

/// Planar response: vertical factor (slow index) kron horizontal factor.
template <typename Real = double>
ComplexVecT<Real> upa_response(Real v_comp, Real h_comp, int l, Real d_over_lambda)
{
    return kron(upa_axis(v_comp, l, d_over_lambda), upa_axis(h_comp, l, d_over_lambda));
}

HiddenState cascaded_state(const TrueAngles& angles);

/// Closed form of alpha_out (.) conj(alpha_in): entry (m, n) is
/// exp(-j 2 pi (d/lambda) (m x_e + n x_a)).
ComplexVec cascaded_response(const HiddenState& x, int l, double d_over_lambda);

/// <cascaded_response(x), e>, evaluated separably in O(L^2) with 2L exponentials.
Complex ris_alignment(const HiddenState& x, const PhaseShifts& e, int l, double d_over_lambda);

/// The noiseless observation map h(x) = g * <alpha_RIS(x), e>, where
/// g = alpha * sqrt(p) * s * <w(theta_bar), alpha_RX(theta)> is fixed for a block.
class ObservationModel {
public:
    ObservationModel(const TrueAngles& angles, const LinkBudget& budget, const ArrayConfig& cfg);

    Complex prefactor() const { return prefactor_; }
    Complex bs_combining_gain() const { return bs_gain_; }
    int l() const { return l_; }
    double d_over_lambda() const { return d_over_lambda_; }
    double sigma2() const { return sigma2_; }

    Complex mean(const HiddenState& x, const PhaseShifts& e) const;

    /// d(Re h, Im h) / d(x_e, x_a); row 0 is the real part, row 1 the imaginary part.
    Eigen::Matrix2d jacobian(const HiddenState& x, const PhaseShifts& e) const;

private:
    void check(const PhaseShifts& e) const;

    Complex prefactor_;
    Complex bs_gain_;
    int l_;
    double d_over_lambda_;
    double sigma2_;
};

Complex observe_mean(const HiddenState& x, const PhaseShifts& e, const TrueAngles& angles, const LinkBudget& budget,
                     const ArrayConfig& cfg);

Complex observe(const HiddenState& x_true, const PhaseShifts& e, const TrueAngles& angles, const LinkBudget& budget,
                const ArrayConfig& cfg, SeededRng& rng);

/// Random-walk step of the UE-side angles. Draws the elevation increment
/// first, then the azimuth increment.
TrueAngles step_true_angles(const TrueAngles& angles, const MobilityConfig& mob, SeededRng& rng);

PhaseShifts beam_match_phases(const HiddenState& x_hat, int l, double d_over_lambda);

PhaseShifts random_phases(int l, SeededRng& rng);

/// Angles for the frame documented at the top of this header; theta_bar = theta.
TrueAngles angles_from_geometry(const Geometry& geo);

Complex channel_gain(const Geometry& geo, const ArrayConfig& cfg, const PathLossModel& model = {});

/// alpha_RX(theta) * <alpha_RIS(x), e>; excludes alpha and sqrt(p).
ComplexVec channel_matrix(const HiddenState& x, const PhaseShifts& e, const TrueAngles& angles,
                          const ArrayConfig& cfg);

} // namespace ristrack
