#pragma once

#include "chaosmap/model.hpp"

#include <array>
#include <map>
#include <string>

namespace chaosmap {

// ---------------------------------------------------------------------------
// General quadratic flow in three variables.
//
// Each equation carries ten coefficients over the monomials
//   1, x, y, z, x^2, xy, xz, y^2, yz, z^2
// named a_e1, b_e1..b_e3, c_e1..c_e6 for e in {x, y, z}; the 30-vector is
// ordered x-equation first, then y, then z.
// ---------------------------------------------------------------------------

using Quadratic3Coeffs = std::array<double, 30>;

SystemPtr make_quadratic3(const Quadratic3Coeffs& coeffs);

/// Closed-form divergence of the quadratic flow at (x, y, z).
double quadratic3_divergence(std::span<const double> coeffs, double x, double y, double z);

// ---------------------------------------------------------------------------
// Forced double-Monod chemostat (dimensionless form):
//   x' = 1 + eps*sin(omega*tau) - x - A x y/(a + x)
//   y' = A x y/(a + x) - y - B y z/(b + y)
//   z' = B y z/(b + y) - z
// ---------------------------------------------------------------------------

struct KotParams {
    double A;
    double a;
    double B;
    double b;
    double omega;
};

/// Dimensionless parameters from the dimensional chemostat constants.
/// Requires every input > 0.
KotParams kot_nondimensionalize(double Y1, double mu1, double K1, double Y2, double mu2,
                                double K2, double Si, double D, double T_forcing);

SystemPtr make_kot_monod(double A, double a, double B, double b, double eps, double omega);

/// Default construction: chemostat constants with Si = 115 mg/l,
/// D = 0.1/h and 24 h forcing, plus eps = 0.6, x = 0.42, y = 0.4, z = 0.42.
SystemPtr make_kot_monod_default();

// ---------------------------------------------------------------------------
// Rhizosphere (PGPR) two-prey model with a daily light forcing W(t).
// ---------------------------------------------------------------------------

/// Truncated Fourier series of the 24 h square wave that is 1 on (0, 12]:
/// 1/2 + sum_{j=1..K} 2/((2j-1) pi) sin((2j-1) pi t / 12).
double fourier_square_wave(double t_hours, int terms);

/// Cross-feeding terms F[Z] = f_c Z/(Z + K_F), G[X] = g_c X/(X + K_G).
/// A zero coefficient switches the term off regardless of its constant.
struct InteractionSpec {
    double f_c = 0.0;
    double K_F = 0.0;
    double g_c = 0.0;
    double K_G = 0.0;
};

/// Parameter names make_pgpr requires in its table (no defaults exist).
const std::vector<std::string>& pgpr_required_params();

/// Rate-limited growth mu_m * S/(S + theta Ks) * P/(P + Kp) * N/(N + theta Kn).
double pgpr_growth(double mu_max, double S, double P, double N, double theta, double Ks,
                   double Kp, double Kn);

/// Builds the PGPR system. Every name in pgpr_required_params() must appear in
/// `param_table`; optional keys are W_amp (default 1) and W_offset (default 0),
/// plus initial states ic.X, ic.Z, ic.S, ic.P (default 0).
SystemPtr make_pgpr(const std::map<std::string, double>& param_table, int forcing_terms = 25,
                    const InteractionSpec& interaction = {});

// ---------------------------------------------------------------------------
// Two-prey, one-predator chemostat with nutrient (dimensional, days).
// ---------------------------------------------------------------------------

struct BecksParams {
    double mu_NR = 12.0;
    double mu_NC = 6.0;
    double mu_PR = 2.2;
    double mu_PC = 2.2;
    double K_NR = 8e-6;
    double K_NC = 8e-6;
    double K_PR = 1e-6;
    double K_PC = 1e-6;
    double Y_NR = 0.1;
    double Y_NC = 0.1;
    double Y_PR = 0.12;
    double Y_PC = 0.12;
    double delta_R = 0.5;
    double delta_C = 0.25;
    double delta_P = 0.08;
};

inline constexpr double kBecksDefaultD = 0.5;
inline constexpr double kBecksDefaultN0 = 1e-5;

SystemPtr make_becks_dim(const BecksParams& table = {}, double D = kBecksDefaultD,
                         double N0 = kBecksDefaultN0);

/// The eleven dimensionless groups plus the rescaled inflow nutrient.
struct BecksHatParams {
    double mu_NR;
    double mu_NC;
    double mu_PR;
    double mu_PC;
    double kappa;
    double delta_C;
    double delta_P;
    double delta;
    double eta1;
    double eta2;
    double eta3;
    double n0;
};

/// Rescaling R = K_PR r, C = K_PC c, P = K_PR Y_PR (delta_R + D)/mu_PR p,
/// N = K_NR n, t_dim = t/(delta_R + D). Note n0 = N0/K_NR.
BecksHatParams becks_rescale_params(const BecksParams& table, double D, double N0);

/// Maps a dimensional (R, C, P, N) state to rescaled (r, c, p, n).
Vector becks_state_to_rescaled(const BecksParams& table, double D, std::span<const double> RCPN);

SystemPtr make_becks_rescaled(const BecksHatParams& hat);

// ---------------------------------------------------------------------------
// Reference systems used by tests and validation runs.
// ---------------------------------------------------------------------------

/// Y' = diag(l1, l2) Y, defaults l1 = -1, l2 = -2.
SystemPtr make_linear_diag(double l1 = -1.0, double l2 = -2.0);

/// Lorenz flow, defaults sigma = 10, r = 28, b = 8/3.
SystemPtr make_lorenz(double sigma = 10.0, double r = 28.0, double b = 8.0 / 3.0);

/// Y' = k Y^2; from Y(0) = 1, k = 1 it blows up at t = 1.
SystemPtr make_square_blowup(double k = 1.0);

/// Y' = p - Y; the fixed point tracks p.
SystemPtr make_relaxation(double p = 0.5);

}  // namespace chaosmap
