#include "ristrack/propcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

namespace {

// Sup distance between the empirical CDF of `x` and U(-half, half).
double ks_uniform(std::vector<double> x, double half)
{
    if (x.empty() || !(half > 0.0))
        return 0.0;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double cdf = std::clamp((x[i] + half) / (2.0 * half), 0.0, 1.0);
        worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - cdf), std::abs(static_cast<double>(i) / n - cdf)});
    }
    return worst;
}

} // namespace

PropcheckReport run_propcheck(double psi_s, double psi_r, long long samples, std::uint64_t seed)
{
    PropcheckReport r;
    r.psi_s = psi_s;
    r.psi_r = psi_r;
    r.samples = samples;
    if (samples <= 0)
        return r;

    const double support_e = psi_s;
    const double support_a = psi_s + psi_r + psi_s * psi_r;
    // Rounding slack for increments that sit exactly on the bound.
    const double slack = 1e-12;

    SeededRng rng(seed);
    const MobilityConfig mob{psi_s, psi_r};
    std::vector<double> de(static_cast<std::size_t>(samples));
    std::vector<double> da(static_cast<std::size_t>(samples));
    long long in_e = 0;
    long long in_a = 0;
    long long in_both = 0;
    for (long long i = 0; i < samples; ++i) {
        TrueAngles a;
        a.psi_e = rng.uniform(0.0, std::numbers::pi);
        a.psi_a = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const TrueAngles b = step_true_angles(a, mob, rng);
        const HiddenState x0 = cascaded_state(a);
        const HiddenState x1 = cascaded_state(b);
        const double dxe = x1.x_e - x0.x_e;
        const double dxa = x1.x_a - x0.x_a;
        de[static_cast<std::size_t>(i)] = dxe;
        da[static_cast<std::size_t>(i)] = dxa;
        const bool ok_e = std::abs(dxe) <= support_e + slack;
        const bool ok_a = std::abs(dxa) <= support_a + slack;
        in_e += ok_e;
        in_a += ok_a;
        in_both += ok_e && ok_a;
        if (support_e > 0.0)
            r.max_ratio_e = std::max(r.max_ratio_e, std::abs(dxe) / support_e);
        if (support_a > 0.0)
            r.max_ratio_a = std::max(r.max_ratio_a, std::abs(dxa) / support_a);
    }
    const double n = static_cast<double>(samples);
    r.coverage_e = static_cast<double>(in_e) / n;
    r.coverage_a = static_cast<double>(in_a) / n;
    r.coverage_joint = static_cast<double>(in_both) / n;
    r.ks_e = ks_uniform(std::move(de), support_e);
    r.ks_a = ks_uniform(std::move(da), support_a);
    return r;
}

std::string format_propcheck(const PropcheckReport& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "psi_s=%.4g deg psi_r=%.4g deg samples=%lld\n"
                  "  coverage x_e=%.6f x_a=%.6f joint=%.6f\n"
                  "  max |dx|/support x_e=%.6f x_a=%.6f\n"
                  "  KS distance to uniform proposal x_e=%.6f x_a=%.6f\n",
                  r.psi_s * 180.0 / std::numbers::pi, r.psi_r * 180.0 / std::numbers::pi, r.samples, r.coverage_e,
                  r.coverage_a, r.coverage_joint, r.max_ratio_e, r.max_ratio_a, r.ks_e, r.ks_a);
    return buf;
}

} // namespace ristrack
