#include "ristrack/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ristrack {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kMinSeparation = 1e-9;

void require_same(Eigen::Index got, Eigen::Index want, const char* what)
{
    if (got != want)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                             std::to_string(got));
}

// exp(+j k i t) for i = 0..n-1
Eigen::VectorXcd conj_axis(double t, int n, double k)
{
    Eigen::VectorXcd out(n);
    for (int i = 0; i < n; ++i)
        out(i) = std::polar(1.0, k * t * static_cast<double>(i));
    return out;
}

} // namespace

double ArrayConfig::wavelength() const { return kSpeedOfLight / carrier_hz; }

void ArrayConfig::validate() const
{
    if (n_rx < 1)
        throw ConfigError("array: n_rx must be >= 1");
    if (l < 1)
        throw ConfigError("array: l must be >= 1");
    if (!(d_over_lambda > 0.0))
        throw ConfigError("array: d_over_lambda must be > 0");
    if (!(carrier_hz > 0.0))
        throw ConfigError("array: carrier_hz must be > 0");
}

void Geometry::validate() const
{
    if (ris_bs_distance() < kMinSeparation)
        throw GeometryError("geometry: RIS and BS positions coincide");
    if (ue_ris_distance() < kMinSeparation)
        throw GeometryError("geometry: RIS and UE positions coincide");
}

bool PhaseShifts::is_unit_modulus(double tol) const
{
    for (Eigen::Index i = 0; i < e.size(); ++i)
        if (std::abs(std::abs(e(i)) - 1.0) > tol)
            return false;
    return e.size() > 0;
}

void LinkBudget::validate() const
{
    if (!(p_tx > 0.0))
        throw ConfigError("link budget: p_tx must be > 0");
    if (!(sigma2 >= 0.0))
        throw ConfigError("link budget: sigma2 must be >= 0");
    if (s != 1.0)
        throw ConfigError("link budget: training symbol must be 1");
}

void MobilityConfig::validate() const
{
    if (!(psi_s >= 0.0) || !(psi_r >= 0.0))
        throw ConfigError("mobility: psi_s and psi_r must be >= 0");
}

double PathLossModel::reference_gain(const ArrayConfig& cfg) const
{
    const double ratio = cfg.wavelength() / (4.0 * std::numbers::pi * ref_distance_m);
    return ratio * ratio;
}

HiddenState cascaded_state(const TrueAngles& a)
{
    return {std::cos(a.phi_e) - std::cos(a.psi_e),
            std::sin(a.phi_e) * std::cos(a.phi_a) - std::sin(a.psi_e) * std::cos(a.psi_a)};
}

ComplexVec cascaded_response(const HiddenState& x, int l, double d_over_lambda)
{
    const double k = -2.0 * std::numbers::pi * d_over_lambda;
    ComplexVec out(static_cast<Eigen::Index>(l) * l);
    for (int m = 0; m < l; ++m)
        for (int n = 0; n < l; ++n)
            out(m * l + n) = std::polar(1.0, k * (m * x.x_e + n * x.x_a));
    return out;
}

Complex ris_alignment(const HiddenState& x, const PhaseShifts& e, int l, double d_over_lambda)
{
    require_same(e.size(), static_cast<Eigen::Index>(l) * l, "ris_alignment");
    const double k = 2.0 * std::numbers::pi * d_over_lambda;
    const Eigen::VectorXcd vert = conj_axis(x.x_e, l, k);
    const Eigen::VectorXcd horiz = conj_axis(x.x_a, l, k);
    Complex total{0.0, 0.0};
    for (int m = 0; m < l; ++m) {
        const Complex row = (horiz.array() * e.e.segment(m * l, l).array()).sum();
        total += vert(m) * row;
    }
    return total;
}

ObservationModel::ObservationModel(const TrueAngles& angles, const LinkBudget& budget, const ArrayConfig& cfg)
    : l_(cfg.l), d_over_lambda_(cfg.d_over_lambda), sigma2_(budget.sigma2)
{
    const ComplexVec w = ula_steering(std::cos(angles.theta_bar), cfg.n_rx, cfg.d_over_lambda);
    const ComplexVec rx = ula_steering(std::cos(angles.theta), cfg.n_rx, cfg.d_over_lambda);
    bs_gain_ = herm_inner(w, rx);
    prefactor_ = budget.alpha * std::sqrt(budget.p_tx) * budget.s * bs_gain_;
}

void ObservationModel::check(const PhaseShifts& e) const
{
    require_same(e.size(), static_cast<Eigen::Index>(l_) * l_, "observation model");
}

Complex ObservationModel::mean(const HiddenState& x, const PhaseShifts& e) const
{
    check(e);
    return prefactor_ * ris_alignment(x, e, l_, d_over_lambda_);
}

Eigen::Matrix2d ObservationModel::jacobian(const HiddenState& x, const PhaseShifts& e) const
{
    check(e);
    const double k = 2.0 * std::numbers::pi * d_over_lambda_;
    const Eigen::VectorXcd vert = conj_axis(x.x_e, l_, k);
    const Eigen::VectorXcd horiz = conj_axis(x.x_a, l_, k);
    Complex d_e{0.0, 0.0};
    Complex d_a{0.0, 0.0};
    for (int m = 0; m < l_; ++m) {
        for (int n = 0; n < l_; ++n) {
            const Complex term = vert(m) * horiz(n) * e.e(m * l_ + n);
            d_e += static_cast<double>(m) * term;
            d_a += static_cast<double>(n) * term;
        }
    }
    const Complex j_k = prefactor_ * Complex(0.0, k);
    d_e *= j_k;
    d_a *= j_k;
    Eigen::Matrix2d c;
    c << d_e.real(), d_a.real(), d_e.imag(), d_a.imag();
    return c;
}

Complex observe_mean(const HiddenState& x, const PhaseShifts& e, const TrueAngles& angles, const LinkBudget& budget,
                     const ArrayConfig& cfg)
{
    return ObservationModel(angles, budget, cfg).mean(x, e);
}

Complex observe(const HiddenState& x_true, const PhaseShifts& e, const TrueAngles& angles, const LinkBudget& budget,
                const ArrayConfig& cfg, SeededRng& rng)
{
    return observe_mean(x_true, e, angles, budget, cfg) + rng.cgauss(budget.sigma2);
}

TrueAngles step_true_angles(const TrueAngles& angles, const MobilityConfig& mob, SeededRng& rng)
{
    TrueAngles next = angles;
    next.psi_e += rng.uniform(-mob.psi_s, mob.psi_s);
    next.psi_a += rng.uniform(-mob.psi_r, mob.psi_r);
    return next;
}

PhaseShifts beam_match_phases(const HiddenState& x_hat, int l, double d_over_lambda)
{
    return {cascaded_response(x_hat, l, d_over_lambda)};
}

PhaseShifts random_phases(int l, SeededRng& rng)
{
    PhaseShifts out{ComplexVec(static_cast<Eigen::Index>(l) * l)};
    for (Eigen::Index i = 0; i < out.e.size(); ++i)
        out.e(i) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
    return out;
}

TrueAngles angles_from_geometry(const Geometry& geo)
{
    geo.validate();
    if ((geo.bs - geo.ue).norm() < kMinSeparation)
        throw GeometryError("geometry: BS and UE positions coincide");

    const Vec3 to_bs = (geo.bs - geo.ris).normalized();
    const Vec3 to_ue = (geo.ue - geo.ris).normalized();
    const Vec3 bs_to_ris = (geo.ris - geo.bs).normalized();

    TrueAngles a;
    a.theta = std::acos(std::clamp(bs_to_ris.x(), -1.0, 1.0));
    a.theta_bar = a.theta;
    a.phi_e = std::acos(std::clamp(to_bs.z(), -1.0, 1.0));
    a.phi_a = std::atan2(to_bs.y(), to_bs.x());
    a.psi_e = std::acos(std::clamp(to_ue.z(), -1.0, 1.0));
    a.psi_a = std::atan2(to_ue.y(), to_ue.x());
    return a;
}

Complex channel_gain(const Geometry& geo, const ArrayConfig& cfg, const PathLossModel& model)
{
    const double d1 = geo.ris_bs_distance();
    const double d2 = geo.ue_ris_distance();
    if (d1 < kMinSeparation || d2 < kMinSeparation)
        throw GeometryError("channel_gain: zero link distance");
    const double d0 = model.ref_distance_m;
    const double power = model.reference_gain(cfg) * std::pow(d1 * d2 / (d0 * d0), -model.exponent);
    return {std::sqrt(power), 0.0};
}

ComplexVec channel_matrix(const HiddenState& x, const PhaseShifts& e, const TrueAngles& angles, const ArrayConfig& cfg)
{
    return ula_steering(std::cos(angles.theta), cfg.n_rx, cfg.d_over_lambda) *
           ris_alignment(x, e, cfg.l, cfg.d_over_lambda);
}

} // namespace ristrack
