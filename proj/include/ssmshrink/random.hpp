#ifndef SSMSHRINK_RANDOM_HPP
#define SSMSHRINK_RANDOM_HPP

#include <cstdint>
#include <random>

#include "ssmshrink/common.hpp"

namespace ssmshrink
{

using Rng = std::mt19937_64;

/// (N(0,1) + i N(0,1)) / sqrt(2)
inline cplx standard_complex_normal(Rng& rng)
{
    std::normal_distribution<double> n01(0.0, 1.0);
    const double re = n01(rng);
    const double im = n01(rng);
    return {re / std::sqrt(2.0), im / std::sqrt(2.0)};
}

inline CMatrix complex_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0)
{
    CMatrix X(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            X(i, j) = scale * standard_complex_normal(rng);
    return X;
}

/// Uniform sample from the closed disk of the given radius.
inline cplx uniform_disk(Rng& rng, double radius)
{
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double r = radius * std::sqrt(u01(rng));
    const double theta = 2.0 * M_PI * u01(rng);
    return std::polar(r, theta);
}

inline CVector uniform_disk_vector(Rng& rng, Eigen::Index n, double radius)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = uniform_disk(rng, radius);
    return v;
}

} // namespace ssmshrink

#endif // SSMSHRINK_RANDOM_HPP
