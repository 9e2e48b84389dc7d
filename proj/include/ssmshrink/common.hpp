#ifndef SSMSHRINK_COMMON_HPP
#define SSMSHRINK_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ssmshrink
{

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Signals are stored one sample per column: a d-dimensional signal of
/// length L is a d x L matrix.
using RealSignal = Eigen::MatrixXd;
using ComplexSignal = Eigen::MatrixXcd;

/// Eigenvalues must satisfy |lambda| <= 1 - kStabilityMargin.
inline constexpr double kStabilityMargin = 1e-6;

class ShapeError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class StabilityError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Number of time steps 0..L-1 of a finite horizon.
class Horizon
{
public:
    explicit Horizon(int steps) : steps_(steps)
    {
        if (steps < 1)
            throw DomainError("horizon must be >= 1, got " + std::to_string(steps));
    }

    int steps() const noexcept { return steps_; }
    double sqrt_steps() const noexcept { return std::sqrt(static_cast<double>(steps_)); }

private:
    int steps_;
};

/// z^k by repeated squaring; ipow(0, 0) == 1.
inline cplx ipow(cplx z, int k)
{
    cplx result{1.0, 0.0};
    while (k > 0)
    {
        if (k & 1)
            result *= z;
        z *= z;
        k >>= 1;
    }
    return result;
}

inline CVector elementwise_pow(const CVector& v, int k)
{
    CVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out(i) = ipow(v(i), k);
    return out;
}

inline bool is_stable(const CVector& lambda, double margin = kStabilityMargin)
{
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (!(std::abs(lambda(i)) <= 1.0 - margin))
            return false;
    return true;
}

} // namespace ssmshrink

#endif // SSMSHRINK_COMMON_HPP
