#pragma once

// Independent oracles shared by the unit tests. Nothing here calls the
// library's own derivative or integration code.

#include "chaosmap/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace testing {

using chaosmap::Vector;

/// Five-point central-difference Jacobian of the raw right-hand side, with
/// step h_j = rel * max(|y_j|, floor_j).
inline Vector fd5_jacobian(const chaosmap::SystemDefinition& sys, double t, const Vector& y,
                           const Vector& p, double rel, const Vector& floor)
{
    const std::size_t n = sys.dim();
    Vector J(n * n), yy = y, f(n);
    auto eval = [&](const Vector& s) {
        sys.rhs(t, s, p, f);
        return f;
    };
    for (std::size_t j = 0; j < n; ++j) {
        const double h = rel * std::max(std::abs(y[j]), floor[j]);
        auto at = [&](double k) {
            yy = y;
            yy[j] += k * h;
            return eval(yy);
        };
        Vector fm2 = at(-2), fm1 = at(-1), fp1 = at(1), fp2 = at(2);
        for (std::size_t i = 0; i < n; ++i)
            J[i * n + j] = (fm2[i] - 8 * fm1[i] + 8 * fp1[i] - fp2[i]) / (12 * h);
    }
    return J;
}

/// Largest |A_ij - B_ij| / max_k |B_ik|: error relative to the size of each row.
inline double row_relative_error(const Vector& A, const Vector& B, std::size_t n)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double scale = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            scale = std::max(scale, std::abs(B[i * n + j]));
        if (scale == 0.0)
            scale = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(A[i * n + j] - B[i * n + j]) / scale);
    }
    return worst;
}

/// Plain explicit RK4 over [0, t_end] with n equal steps.
inline Vector rk4_reference(const std::function<Vector(double, const Vector&)>& f, Vector y,
                            double t_end, int n)
{
    const double h = t_end / n;
    for (int k = 0; k < n; ++k) {
        const double t = k * h;
        auto add = [](const Vector& a, const Vector& b, double s) {
            Vector r(a.size());
            for (std::size_t i = 0; i < a.size(); ++i)
                r[i] = a[i] + s * b[i];
            return r;
        };
        Vector k1 = f(t, y);
        Vector k2 = f(t + h / 2, add(y, k1, h / 2));
        Vector k3 = f(t + h / 2, add(y, k2, h / 2));
        Vector k4 = f(t + h, add(y, k3, h));
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return y;
}

/// Largest exponent from the separation growth of two nearby orbits, with the
/// partner pulled back to distance 1e-8 every 10 steps. Discards `transient`
/// time units first.
inline double two_trajectory_mle(const chaosmap::SystemDefinition& sys, const Vector& p, Vector y,
                                 double T, double dt, double transient)
{
    auto f = [&](double t, const Vector& s) {
        Vector out(s.size());
        sys.rhs(t, s, p, out);
        return out;
    };
    y = rk4_reference(f, y, transient, static_cast<int>(std::lround(transient / dt)));
    const double d0 = 1e-8;
    Vector z = y;
    z[0] += d0;
    const int every = 10;
    const int blocks = static_cast<int>(std::lround(T / (dt * every)));
    double sum = 0.0;
    for (int b = 0; b < blocks; ++b) {
        y = rk4_reference(f, y, dt * every, every);
        z = rk4_reference(f, z, dt * every, every);
        double d = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            d += (z[i] - y[i]) * (z[i] - y[i]);
        d = std::sqrt(d);
        sum += std::log(d / d0);
        for (std::size_t i = 0; i < y.size(); ++i)
            z[i] = y[i] + (z[i] - y[i]) * d0 / d;
    }
    return sum / (blocks * every * dt);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace testing
