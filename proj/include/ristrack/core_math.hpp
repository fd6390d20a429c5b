#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Core>

#include "ristrack/errors.hpp"

namespace ristrack {

template <typename Real>
using ComplexVecT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using ComplexVec = ComplexVecT<double>;
using Complex = std::complex<double>;

namespace detail {
template <typename A, typename B>
void require_same_length(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* op)
{
    if (a.size() != b.size())
        throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
}
} // namespace detail

// Kronecker product of two column vectors. Entry i*len(b)+j is a[i]*b[j], so
// the first operand is the slow (outer) index.
template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
    Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> hadamard(const Eigen::MatrixBase<A>& a,
                                                              const Eigen::MatrixBase<B>& b)
{
    detail::require_same_length(a, b, "hadamard");
    return a.cwiseProduct(b);
}

/// sum_i conj(a_i) * b_i
template <typename A, typename B>
typename A::Scalar herm_inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
    detail::require_same_length(a, b, "herm_inner");
    return a.dot(b);
}

template <typename A>
bool all_finite(const Eigen::MatrixBase<A>& a)
{
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const auto& z = a(i);
        if (!std::isfinite(std::real(z)) || !std::isfinite(std::imag(z)))
            return false;
    }
    return true;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double deg_to_rad(double deg) { return deg * (3.14159265358979323846 / 180.0); }

} // namespace ristrack
