#pragma once

// Reference formulas and hand-rolled generators shared by the tests.  Nothing
// here calls into the mass or density code.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "flatchain/foundation.hpp"

namespace oracle {

using flatchain::Matrix;
using flatchain::Vector;

inline double pnorm(const Vector& x, double p)
{
    if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)), p);
    return std::pow(s, 1.0 / p);
}

inline double facetNorm(const Matrix& facets, const Vector& x) { return (facets * x).maxCoeff(); }

/// Euclidean k-volume of the simplex with vertex columns, via the Gram determinant.
inline double euclideanVolume(const Matrix& v)
{
    const Eigen::Index k = v.cols() - 1;
    const Matrix e = v.rightCols(k).colwise() - v.col(0);
    double f = 1.0;
    for (Eigen::Index i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return std::sqrt(std::max(0.0, (e.transpose() * e).determinant())) / f;
}

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
    Vector point(int d, double a = 0.0, double b = 1.0)
    {
        Vector x(d);
        for (int i = 0; i < d; ++i) x(i) = uniform(a, b);
        return x;
    }
    Vector gaussian(int d)
    {
        std::normal_distribution<double> g;
        Vector x(d);
        for (int i = 0; i < d; ++i) x(i) = g(rng);
        return x;
    }
    /// k+1 points; rejects near-degenerate draws.
    Matrix simplex(int d, int k, double scale = 1.0)
    {
        for (;;) {
            Matrix v(d, k + 1);
            for (int j = 0; j <= k; ++j) v.col(j) = point(d, 0.0, scale);
            if (k == 0 || euclideanVolume(v) > 1e-3 * std::pow(scale, k)) return v;
        }
    }
    /// Centrally symmetric facet list: the coordinate facets plus `extra` random pairs.
    Matrix polytopeFacets(int d, int extra)
    {
        Matrix f(2 * (d + extra), d);
        for (int i = 0; i < d; ++i) {
            f.row(2 * i) = Vector::Unit(d, i).transpose() * uniform(0.5, 1.5);
            f.row(2 * i + 1) = -f.row(2 * i);
        }
        for (int i = 0; i < extra; ++i) {
            f.row(2 * (d + i)) = gaussian(d).transpose();
            f.row(2 * (d + i) + 1) = -f.row(2 * (d + i));
        }
        return f;
    }
};

} // namespace oracle
