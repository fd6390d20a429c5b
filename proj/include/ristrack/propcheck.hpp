#pragma once

#include <cstdint>
#include <string>

namespace ristrack {

/// Monte-Carlo check of the uniform proposal supports against exact
/// trigonometric hidden-state increments. UE angles are drawn with
/// elevation ~ U(0, pi) and azimuth ~ U(-pi, pi); increments follow the
/// mobility random walk.
struct PropcheckReport {
    double psi_s = 0.0;
    double psi_r = 0.0;
    long long samples = 0;
    double coverage_e = 0.0;     // fraction with |dx_e| <= psi_s
    double coverage_a = 0.0;     // fraction with |dx_a| <= psi_s + psi_r + psi_s psi_r
    double coverage_joint = 0.0; // both at once
    double ks_e = 0.0;           // Kolmogorov-Smirnov distance to the uniform proposal
    double ks_a = 0.0;
    double max_ratio_e = 0.0;    // max |dx_e| / support
    double max_ratio_a = 0.0;
};

PropcheckReport run_propcheck(double psi_s, double psi_r, long long samples, std::uint64_t seed);

std::string format_propcheck(const PropcheckReport& r);

} // namespace ristrack
