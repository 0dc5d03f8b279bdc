#include "chaosmap/models.hpp"

#include "chaosmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace chaosmap {

namespace {

constexpr double kPi = std::numbers::pi;

ParamDescriptor dimensionless(std::string name, double value, std::string description)
{
    return {std::move(name), value, "dimensionless", std::move(description)};
}

}  // namespace

// --- quadratic3 -------------------------------------------------------------

SystemPtr make_quadratic3(const Quadratic3Coeffs& coeffs)
{
    for (double c : coeffs)
        require(std::isfinite(c), "quadratic3: non-finite coefficient");

    static const char* const kEq[3] = {"x", "y", "z"};
    static const char* const kMonomial[10] = {"1",  "x",  "y",  "z",  "x^2",
                                              "xy", "xz", "y^2", "yz", "z^2"};
    std::vector<ParamDescriptor> params;
    for (int e = 0; e < 3; ++e) {
        for (int k = 0; k < 10; ++k) {
            std::string name;
            if (k == 0)
                name = std::string("a_") + kEq[e] + "1";
            else if (k <= 3)
                name = std::string("b_") + kEq[e] + std::to_string(k);
            else
                name = std::string("c_") + kEq[e] + std::to_string(k - 3);
            params.push_back(dimensionless(
                name, coeffs[e * 10 + k],
                std::string("coefficient of ") + kMonomial[k] + " in d" + kEq[e] + "/dt"));
        }
    }

    auto rhs = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) {
        const double x = s[0], y = s[1], z = s[2];
        const double m[10] = {1.0, x, y, z, x * x, x * y, x * z, y * y, y * z, z * z};
        for (int e = 0; e < 3; ++e) {
            double acc = 0.0;
            for (int k = 0; k < 10; ++k)
                acc += p[e * 10 + k] * m[k];
            out[e] = acc;
        }
    };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) {
        const double x = s[0], y = s[1], z = s[2];
        for (int e = 0; e < 3; ++e) {
            const double* c = &p[e * 10];
            J[e * 3 + 0] = c[1] + 2 * c[4] * x + c[5] * y + c[6] * z;
            J[e * 3 + 1] = c[2] + c[5] * x + 2 * c[7] * y + c[8] * z;
            J[e * 3 + 2] = c[3] + c[6] * x + c[8] * y + 2 * c[9] * z;
        }
    };
    return std::make_shared<const SystemDefinition>("quadratic3",
                                                    std::vector<std::string>{"x", "y", "z"},
                                                    std::move(params), Vector{0.0, 0.0, 0.0},
                                                    false, rhs, jac);
}

double quadratic3_divergence(std::span<const double> c, double x, double y, double z)
{
    require(c.size() == 30, "quadratic3: expected 30 coefficients");
    // offsets: x-eq 0, y-eq 10, z-eq 20; b_e1..3 at 1..3, c_e1..6 at 4..9
    return c[1] + c[12] + c[23] + (2 * c[4] + c[15] + c[26]) * x +
           (c[5] + 2 * c[17] + c[28]) * y + (c[6] + c[18] + 2 * c[29]) * z;
}

// --- forced double Monod ------------------------------------------------------

KotParams kot_nondimensionalize(double Y1, double mu1, double K1, double Y2, double mu2,
                                double K2, double Si, double D, double T_forcing)
{
    for (double v : {Y1, mu1, K1, Y2, mu2, K2, Si, D, T_forcing})
        require(std::isfinite(v) && v > 0.0, "kot_nondimensionalize: inputs must be positive");
    return {mu1 / D, K1 / Si, mu2 / D, K2 / (Y1 * Si), 2.0 * kPi / (D * T_forcing)};
}

SystemPtr make_kot_monod(double A, double a, double B, double b, double eps, double omega)
{
    require(a > 0.0 && b > 0.0, "kot_monod: half-saturation constants must be positive");
    std::vector<ParamDescriptor> params{
        dimensionless("A", A, "prey max growth / dilution (mu1/D)"),
        dimensionless("a", a, "prey half-saturation / inflow substrate (K1/Si)"),
        dimensionless("B", B, "predator max growth / dilution (mu2/D)"),
        dimensionless("b", b, "predator half-saturation (K2/(Y1 Si))"),
        dimensionless("eps", eps, "forcing amplitude"),
        dimensionless("omega", omega, "forcing angular frequency (2 pi/(D T))"),
    };
    auto rhs = [](double t, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) {
        const double x = s[0], y = s[1], z = s[2];
        const double A = p[0], a = p[1], B = p[2], b = p[3], eps = p[4], omega = p[5];
        const double prey_uptake = A * x * y / (a + x);
        const double predation = B * y * z / (b + y);
        out[0] = 1.0 + eps * std::sin(omega * t) - x - prey_uptake;
        out[1] = prey_uptake - y - predation;
        out[2] = predation - z;
    };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) {
        const double x = s[0], y = s[1], z = s[2];
        const double A = p[0], a = p[1], B = p[2], b = p[3];
        const double ux = A * y * a / ((a + x) * (a + x));
        const double uy = A * x / (a + x);
        const double vy = B * z * b / ((b + y) * (b + y));
        const double vz = B * y / (b + y);
        J[0] = -1.0 - ux; J[1] = -uy;            J[2] = 0.0;
        J[3] = ux;        J[4] = uy - 1.0 - vy;  J[5] = -vz;
        J[6] = 0.0;       J[7] = vy;             J[8] = vz - 1.0;
    };
    return std::make_shared<const SystemDefinition>(
        "kot_monod", std::vector<std::string>{"x", "y", "z"}, std::move(params),
        Vector{0.42, 0.4, 0.42}, true, rhs, jac);
}

SystemPtr make_kot_monod_default()
{
    // Default constants: prey Y=0.4, mu=0.5/h, K=8 mg/l; predator Y=0.6, mu=0.2/h, K=9 mg/l.
    const KotParams k = kot_nondimensionalize(0.4, 0.5, 8.0, 0.6, 0.2, 9.0, 115.0, 0.1, 24.0);
    return make_kot_monod(k.A, k.a, k.B, k.b, 0.6, k.omega);
}

// --- PGPR ---------------------------------------------------------------------

double fourier_square_wave(double t_hours, int terms)
{
    require(terms >= 0, "fourier_square_wave: terms must be >= 0");
    double w = 0.5;
    for (int j = 1; j <= terms; ++j) {
        const double k = 2.0 * j - 1.0;
        w += 2.0 / (k * kPi) * std::sin(k * kPi * t_hours / 12.0);
    }
    return w;
}

double pgpr_growth(double mu_max, double S, double P, double N, double theta, double Ks,
                   double Kp, double Kn)
{
    return mu_max * S / (S + theta * Ks) * P / (P + Kp) * N / (N + theta * Kn);
}

const std::vector<std::string>& pgpr_required_params()
{
    static const std::vector<std::string> names{
        "mu_mX", "K_SX", "K_PX", "K_NX", "mu_mZ", "K_SZ", "K_PZ", "K_NZ",
        "theta", "N",    "alpha", "beta", "d1",  "d2",   "L",    "D_S",
        "S0",    "D_P",  "P0",   "Y_XS", "Y_ZS", "Y_XP", "Y_ZP"};
    return names;
}

namespace {

// Parameter vector layout for pgpr.
enum PgprIdx : std::size_t {
    kMuX, kKSX, kKPX, kKNX, kMuZ, kKSZ, kKPZ, kKNZ, kTheta, kN, kAlpha, kBeta, kD1, kD2,
    kL, kDS, kS0, kDP, kP0, kYXS, kYZS, kYXP, kYZP, kWAmp, kWOffset, kFc, kKF, kGc, kKG,
    kPgprCount
};

struct GrowthEval {
    double mu, dS, dP;
};

GrowthEval growth_with_partials(double mu_max, double S, double P, double N, double theta,
                                double Ks, double Kp, double Kn)
{
    const double sk = theta * Ks;
    const double s = S / (S + sk), ds = sk / ((S + sk) * (S + sk));
    const double q = P / (P + Kp), dq = Kp / ((P + Kp) * (P + Kp));
    const double nf = N / (N + theta * Kn);
    return {mu_max * s * q * nf, mu_max * ds * q * nf, mu_max * s * dq * nf};
}

// Saturating cross-feeding term and its derivative; zero coefficient disables it.
std::pair<double, double> saturating(double coeff, double v, double K)
{
    if (coeff == 0.0)
        return {0.0, 0.0};
    return {coeff * v / (v + K), coeff * K / ((v + K) * (v + K))};
}

}  // namespace

SystemPtr make_pgpr(const std::map<std::string, double>& table, int forcing_terms,
                    const InteractionSpec& interaction)
{
    require(forcing_terms >= 0, "pgpr: forcing_terms must be >= 0");
    static const std::map<std::string, std::string> kUnits{
        {"mu_mX", "1/h"}, {"mu_mZ", "1/h"}, {"d1", "1/h"}, {"d2", "1/h"},
        {"D_S", "1/h"},   {"D_P", "1/h"},   {"theta", "dimensionless"},
    };
    std::vector<ParamDescriptor> params;
    for (const auto& name : pgpr_required_params()) {
        auto it = table.find(name);
        require(it != table.end(), "pgpr: missing required parameter '" + name + "'");
        require(std::isfinite(it->second), "pgpr: non-finite parameter '" + name + "'");
        auto u = kUnits.find(name);
        params.push_back({name, it->second, u == kUnits.end() ? "unspecified" : u->second, ""});
    }
    auto optional = [&](const std::string& name, double fallback) {
        auto it = table.find(name);
        return it == table.end() ? fallback : it->second;
    };
    params.push_back(dimensionless("W_amp", optional("W_amp", 1.0), "light forcing amplitude"));
    params.push_back(dimensionless("W_offset", optional("W_offset", 0.0), "light forcing offset"));
    params.push_back(dimensionless("f_c", optional("f_c", interaction.f_c), "F[Z] coefficient"));
    params.push_back(dimensionless("K_F", optional("K_F", interaction.K_F), "F[Z] half-saturation"));
    params.push_back(dimensionless("g_c", optional("g_c", interaction.g_c), "G[X] coefficient"));
    params.push_back(dimensionless("K_G", optional("K_G", interaction.K_G), "G[X] half-saturation"));

    for (const char* k : {"K_SX", "K_PX", "K_NX", "K_SZ", "K_PZ", "K_NZ", "theta"})
        require(table.at(k) > 0.0, std::string("pgpr: '") + k + "' must be positive");
    for (const char* k : {"Y_XS", "Y_ZS", "Y_XP", "Y_ZP"})
        require(table.at(k) != 0.0, std::string("pgpr: yield '") + k + "' must be nonzero");
    require(params[kFc].default_value == 0.0 || params[kKF].default_value > 0.0,
            "pgpr: K_F must be positive when f_c is nonzero");
    require(params[kGc].default_value == 0.0 || params[kKG].default_value > 0.0,
            "pgpr: K_G must be positive when g_c is nonzero");

    static const std::set<std::string> kOptional{"W_amp", "W_offset", "f_c", "K_F", "g_c",
                                                 "K_G",   "ic.X",     "ic.Z", "ic.S", "ic.P"};
    const auto& required = pgpr_required_params();
    for (const auto& [key, value] : table)
        require(kOptional.contains(key) ||
                    std::find(required.begin(), required.end(), key) != required.end(),
                "pgpr: unknown parameter '" + key + "'");

    const Vector state{optional("ic.X", 0.0), optional("ic.Z", 0.0), optional("ic.S", 0.0),
                       optional("ic.P", 0.0)};

    auto rhs = [forcing_terms](double t, std::span<const double> s, std::span<const double> p,
                               std::span<double> out) {
        const double X = s[0], Z = s[1], S = s[2], P = s[3];
        const double muX = pgpr_growth(p[kMuX], S, P, p[kN], p[kTheta], p[kKSX], p[kKPX], p[kKNX]);
        const double muZ = pgpr_growth(p[kMuZ], S, P, p[kN], p[kTheta], p[kKSZ], p[kKPZ], p[kKNZ]);
        const double F = saturating(p[kFc], Z, p[kKF]).first;
        const double G = saturating(p[kGc], X, p[kKG]).first;
        const double W = p[kWAmp] * fourier_square_wave(t, forcing_terms) + p[kWOffset];
        out[0] = X * (muX + F - p[kAlpha] * X - p[kD1]);
        out[1] = Z * (muZ + G - p[kBeta] * Z - p[kD2]);
        out[2] = W + p[kL] - p[kDS] * (S - p[kS0]) - X * muX / p[kYXS] - Z * muZ / p[kYZS];
        out[3] = p[kDP] * (p[kP0] - P) - X * muX / p[kYXP] - Z * muZ / p[kYZP];
    };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) {
        const double X = s[0], Z = s[1], S = s[2], P = s[3];
        const auto gx = growth_with_partials(p[kMuX], S, P, p[kN], p[kTheta], p[kKSX], p[kKPX], p[kKNX]);
        const auto gz = growth_with_partials(p[kMuZ], S, P, p[kN], p[kTheta], p[kKSZ], p[kKPZ], p[kKNZ]);
        const auto [F, dF] = saturating(p[kFc], Z, p[kKF]);
        const auto [G, dG] = saturating(p[kGc], X, p[kKG]);

        J[0] = gx.mu + F - 2 * p[kAlpha] * X - p[kD1];
        J[1] = X * dF;
        J[2] = X * gx.dS;
        J[3] = X * gx.dP;

        J[4] = Z * dG;
        J[5] = gz.mu + G - 2 * p[kBeta] * Z - p[kD2];
        J[6] = Z * gz.dS;
        J[7] = Z * gz.dP;

        J[8] = -gx.mu / p[kYXS];
        J[9] = -gz.mu / p[kYZS];
        J[10] = -p[kDS] - X * gx.dS / p[kYXS] - Z * gz.dS / p[kYZS];
        J[11] = -X * gx.dP / p[kYXS] - Z * gz.dP / p[kYZS];

        J[12] = -gx.mu / p[kYXP];
        J[13] = -gz.mu / p[kYZP];
        J[14] = -X * gx.dS / p[kYXP] - Z * gz.dS / p[kYZP];
        J[15] = -p[kDP] - X * gx.dP / p[kYXP] - Z * gz.dP / p[kYZP];
    };
    return std::make_shared<const SystemDefinition>(
        "pgpr", std::vector<std::string>{"X", "Z", "S", "P"}, std::move(params), state, true,
        rhs, jac);
}

// --- Two-prey chemostat ----------------------------------------------------------

namespace {

enum BecksIdx : std::size_t {
    bMuNR, bMuNC, bMuPR, bMuPC, bKNR, bKNC, bKPR, bKPC, bYNR, bYNC, bYPR, bYPC,
    bDeltaR, bDeltaC, bDeltaP, bD, bN0
};

}  // namespace

SystemPtr make_becks_dim(const BecksParams& t, double D, double N0)
{
    for (double v : {t.K_NR, t.K_NC, t.K_PR, t.K_PC, t.Y_NR, t.Y_NC, t.Y_PR, t.Y_PC})
        require(v > 0.0, "becks_dim: half-saturation and yield constants must be positive");
    for (double v : {t.mu_NR, t.mu_NC, t.mu_PR, t.mu_PC, t.delta_R, t.delta_C, t.delta_P, D, N0})
        require(v > 0.0, "becks_dim: parameters must be positive");

    std::vector<ParamDescriptor> params{
        {"mu_NR", t.mu_NR, "1/day", "max growth of R on nutrient"},
        {"mu_NC", t.mu_NC, "1/day", "max growth of C on nutrient"},
        {"mu_PR", t.mu_PR, "1/day", "max growth of P on R"},
        {"mu_PC", t.mu_PC, "1/day", "max growth of P on C"},
        {"K_NR", t.K_NR, "gm/cc", "half-saturation of R on nutrient"},
        {"K_NC", t.K_NC, "gm/cc", "half-saturation of C on nutrient"},
        {"K_PR", t.K_PR, "gm/cc", "half-saturation of P on R"},
        {"K_PC", t.K_PC, "gm/cc", "half-saturation of P on C"},
        {"Y_NR", t.Y_NR, "gm R/gm N", "yield of R on nutrient"},
        {"Y_NC", t.Y_NC, "gm C/gm N", "yield of C on nutrient"},
        {"Y_PR", t.Y_PR, "gm P/gm R", "yield of P on R"},
        {"Y_PC", t.Y_PC, "gm P/gm C", "yield of P on C"},
        {"delta_R", t.delta_R, "1/day", "death rate of R"},
        {"delta_C", t.delta_C, "1/day", "death rate of C"},
        {"delta_P", t.delta_P, "1/day", "death rate of P"},
        {"D", D, "1/day", "dilution rate"},
        {"N0", N0, "gm/cc", "inflow nutrient concentration"},
    };

    auto rhs = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) {
        const double R = s[0], C = s[1], P = s[2], N = s[3];
        const double D = p[bD];
        const double hNR = N / (p[bKNR] + N), hNC = N / (p[bKNC] + N);
        const double hPR = R / (p[bKPR] + R), hPC = C / (p[bKPC] + C);
        out[0] = R * (p[bMuNR] * hNR - p[bDeltaR]) - p[bMuPR] / p[bYPR] * hPR * P - D * R;
        out[1] = C * (p[bMuNC] * hNC - p[bDeltaC]) - p[bMuPC] / p[bYPC] * hPC * P - D * C;
        out[2] = P * (p[bMuPR] * hPR + p[bMuPC] * hPC - p[bDeltaP]) - D * P;
        out[3] = D * p[bN0] - R * p[bMuNR] / p[bYNR] * hNR - C * p[bMuNC] / p[bYNC] * hNC - D * N;
    };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) {
        const double R = s[0], C = s[1], P = s[2], N = s[3];
        const double D = p[bD];
        const double hNR = N / (p[bKNR] + N), hNC = N / (p[bKNC] + N);
        const double hPR = R / (p[bKPR] + R), hPC = C / (p[bKPC] + C);
        const double dNR = p[bKNR] / ((p[bKNR] + N) * (p[bKNR] + N));
        const double dNC = p[bKNC] / ((p[bKNC] + N) * (p[bKNC] + N));
        const double dPR = p[bKPR] / ((p[bKPR] + R) * (p[bKPR] + R));
        const double dPC = p[bKPC] / ((p[bKPC] + C) * (p[bKPC] + C));
        const double gR = p[bMuPR] / p[bYPR], gC = p[bMuPC] / p[bYPC];
        const double uR = p[bMuNR] / p[bYNR], uC = p[bMuNC] / p[bYNC];

        J[0] = p[bMuNR] * hNR - p[bDeltaR] - D - gR * dPR * P;
        J[1] = 0.0;
        J[2] = -gR * hPR;
        J[3] = R * p[bMuNR] * dNR;

        J[4] = 0.0;
        J[5] = p[bMuNC] * hNC - p[bDeltaC] - D - gC * dPC * P;
        J[6] = -gC * hPC;
        J[7] = C * p[bMuNC] * dNC;

        J[8] = P * p[bMuPR] * dPR;
        J[9] = P * p[bMuPC] * dPC;
        J[10] = p[bMuPR] * hPR + p[bMuPC] * hPC - p[bDeltaP] - D;
        J[11] = 0.0;

        J[12] = -uR * hNR;
        J[13] = -uC * hNC;
        J[14] = 0.0;
        J[15] = -R * uR * dNR - C * uC * dNC - D;
    };
    return std::make_shared<const SystemDefinition>(
        "becks_dim", std::vector<std::string>{"R", "C", "P", "N"}, std::move(params),
        Vector{1e-6, 1e-6, 1e-6, N0}, false, rhs, jac);
}

BecksHatParams becks_rescale_params(const BecksParams& t, double D, double N0)
{
    const double s = t.delta_R + D;
    require(s > 0.0, "becks_rescale_params: delta_R + D must be positive");
    require(t.K_NR > 0.0 && t.K_PC > 0.0 && t.mu_PR > 0.0 && t.Y_PC > 0.0 && t.Y_NR > 0.0 &&
                t.Y_NC > 0.0,
            "becks_rescale_params: division by nonpositive constant");
    return {
        t.mu_NR / s,
        t.mu_NC / s,
        t.mu_PR / s,
        t.mu_PC / s,
        t.K_NC / t.K_NR,
        (t.delta_C + D) / s,
        (t.delta_P + D) / s,
        D / s,
        t.mu_PC * t.Y_PR * t.K_PR / (t.mu_PR * t.Y_PC * t.K_PC),
        t.mu_NR * t.K_PR / (t.Y_NR * t.K_NR * s),
        t.mu_NC * t.K_PC / (t.Y_NC * t.K_NR * s),
        N0 / t.K_NR,
    };
}

Vector becks_state_to_rescaled(const BecksParams& t, double D, std::span<const double> s)
{
    require(s.size() == 4, "becks_state_to_rescaled: expected (R, C, P, N)");
    const double p_scale = t.K_PR * t.Y_PR * (t.delta_R + D) / t.mu_PR;
    return {s[0] / t.K_PR, s[1] / t.K_PC, s[2] / p_scale, s[3] / t.K_NR};
}

namespace {

enum HatIdx : std::size_t {
    hMuNR, hMuNC, hMuPR, hMuPC, hKappa, hDeltaC, hDeltaP, hDelta, hEta1, hEta2, hEta3, hN0
};

}  // namespace

SystemPtr make_becks_rescaled(const BecksHatParams& h)
{
    require(h.kappa > 0.0, "becks_rescaled: kappa must be positive");
    std::vector<ParamDescriptor> params{
        dimensionless("mu_NR", h.mu_NR, "rescaled max growth of r"),
        dimensionless("mu_NC", h.mu_NC, "rescaled max growth of c"),
        dimensionless("mu_PR", h.mu_PR, "rescaled predator growth on r"),
        dimensionless("mu_PC", h.mu_PC, "rescaled predator growth on c"),
        dimensionless("kappa", h.kappa, "K_NC/K_NR"),
        dimensionless("delta_C", h.delta_C, "rescaled loss of c"),
        dimensionless("delta_P", h.delta_P, "rescaled loss of p"),
        dimensionless("delta", h.delta, "rescaled dilution"),
        dimensionless("eta1", h.eta1, "relative predation on c"),
        dimensionless("eta2", h.eta2, "nutrient uptake by r"),
        dimensionless("eta3", h.eta3, "nutrient uptake by c"),
        dimensionless("n0", h.n0, "rescaled inflow nutrient N0/K_NR"),
    };
    auto rhs = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) {
        const double r = s[0], c = s[1], pp = s[2], n = s[3];
        const double k = p[hKappa];
        const double gr = n * r / (n + 1.0), gc = n * c / (n + k);
        const double qr = r * pp / (r + 1.0), qc = c * pp / (c + 1.0);
        out[0] = p[hMuNR] * gr - qr - r;
        out[1] = p[hMuNC] * gc - p[hEta1] * qc - p[hDeltaC] * c;
        out[2] = p[hMuPR] * qr + p[hMuPC] * qc - p[hDeltaP] * pp;
        out[3] = p[hDelta] * (p[hN0] - n) - p[hEta2] * gr - p[hEta3] * gc;
    };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) {
        const double r = s[0], c = s[1], pp = s[2], n = s[3];
        const double k = p[hKappa];
        const double r1 = r + 1.0, c1 = c + 1.0, n1 = n + 1.0, nk = n + k;

        J[0] = p[hMuNR] * n / n1 - pp / (r1 * r1) - 1.0;
        J[1] = 0.0;
        J[2] = -r / r1;
        J[3] = p[hMuNR] * r / (n1 * n1);

        J[4] = 0.0;
        J[5] = p[hMuNC] * n / nk - p[hEta1] * pp / (c1 * c1) - p[hDeltaC];
        J[6] = -p[hEta1] * c / c1;
        J[7] = p[hMuNC] * c * k / (nk * nk);

        J[8] = p[hMuPR] * pp / (r1 * r1);
        J[9] = p[hMuPC] * pp / (c1 * c1);
        J[10] = p[hMuPR] * r / r1 + p[hMuPC] * c / c1 - p[hDeltaP];
        J[11] = 0.0;

        J[12] = -p[hEta2] * n / n1;
        J[13] = -p[hEta3] * n / nk;
        J[14] = 0.0;
        J[15] = -p[hDelta] - p[hEta2] * r / (n1 * n1) - p[hEta3] * c * k / (nk * nk);
    };
    return std::make_shared<const SystemDefinition>(
        "becks_rescaled", std::vector<std::string>{"r", "c", "p", "n"}, std::move(params),
        Vector{1.0, 1.0, 1.0, h.n0}, false, rhs, jac);
}

// --- reference systems ------------------------------------------------------------

SystemPtr make_linear_diag(double l1, double l2)
{
    std::vector<ParamDescriptor> params{dimensionless("l1", l1, "first rate"),
                                        dimensionless("l2", l2, "second rate")};
    auto rhs = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) {
        out[0] = p[0] * s[0];
        out[1] = p[1] * s[1];
    };
    auto jac = [](double, std::span<const double>, std::span<const double> p,
                  std::span<double> J) {
        J[0] = p[0]; J[1] = 0.0;
        J[2] = 0.0;  J[3] = p[1];
    };
    return std::make_shared<const SystemDefinition>(
        "linear_diag", std::vector<std::string>{"y1", "y2"}, std::move(params),
        Vector{1.0, 1.0}, false, rhs, jac);
}

SystemPtr make_lorenz(double sigma, double r, double b)
{
    std::vector<ParamDescriptor> params{dimensionless("sigma", sigma, "Prandtl number"),
                                        dimensionless("r", r, "Rayleigh number"),
                                        dimensionless("b", b, "aspect ratio")};
    auto rhs = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) {
        out[0] = p[0] * (s[1] - s[0]);
        out[1] = s[0] * (p[1] - s[2]) - s[1];
        out[2] = s[0] * s[1] - p[2] * s[2];
    };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) {
        J[0] = -p[0];        J[1] = p[0];  J[2] = 0.0;
        J[3] = p[1] - s[2];  J[4] = -1.0;  J[5] = -s[0];
        J[6] = s[1];         J[7] = s[0];  J[8] = -p[2];
    };
    return std::make_shared<const SystemDefinition>(
        "lorenz", std::vector<std::string>{"x", "y", "z"}, std::move(params),
        Vector{1.0, 1.0, 1.0}, false, rhs, jac);
}

SystemPtr make_square_blowup(double k)
{
    std::vector<ParamDescriptor> params{dimensionless("k", k, "growth coefficient")};
    auto rhs = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> out) { out[0] = p[0] * s[0] * s[0]; };
    auto jac = [](double, std::span<const double> s, std::span<const double> p,
                  std::span<double> J) { J[0] = 2.0 * p[0] * s[0]; };
    return std::make_shared<const SystemDefinition>("square_blowup",
                                                    std::vector<std::string>{"y"},
                                                    std::move(params), Vector{1.0}, false, rhs,
                                                    jac);
}

SystemPtr make_relaxation(double p)
{
    std::vector<ParamDescriptor> params{dimensionless("p", p, "fixed point")};
    auto rhs = [](double, std::span<const double> s, std::span<const double> q,
                  std::span<double> out) { out[0] = q[0] - s[0]; };
    auto jac = [](double, std::span<const double>, std::span<const double>,
                  std::span<double> J) { J[0] = -1.0; };
    return std::make_shared<const SystemDefinition>("relaxation", std::vector<std::string>{"y"},
                                                    std::move(params), Vector{0.0}, false, rhs,
                                                    jac);
}

}  // namespace chaosmap
