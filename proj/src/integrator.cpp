#include "chaosmap/integrator.hpp"

#include "chaosmap/errors.hpp"
#include "chaosmap/io.hpp"

#include <cmath>
#include <ostream>

namespace chaosmap {

void validate(const IntegrationConfig& cfg)
{
    require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "integration: dt must be positive");
    require(std::isfinite(cfg.t0), "integration: t0 must be finite");
    require(cfg.blowup_cap > 0.0, "integration: blowup_cap must be positive");
    require(cfg.record_stride >= 0, "integration: record_stride must be >= 0");
}

const char* to_string(Termination t) noexcept
{
    switch (t) {
    case Termination::completed: return "completed";
    case Termination::blowup: return "blowup";
    case Termination::nonfinite: return "nonfinite";
    }
    return "unknown";
}

std::size_t step_count(double t0, double t_end, double dt)
{
    const double n = std::ceil((t_end - t0) / dt - 1e-9);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

namespace {

/// One classical RK4 step over the packed vector `x`. The state occupies the
/// leading entries; the same elementwise arithmetic is used whether or not a
/// tangent block follows, so the fiducial orbit is identical in both paths.
template <class Deriv>
struct Rk4 {
    explicit Rk4(std::size_t size) : k1(size), k2(size), k3(size), k4(size), tmp(size) {}

    void step(const Deriv& f, double t, double h, Vector& x)
    {
        const std::size_t m = x.size();
        f(t, x, k1);
        for (std::size_t i = 0; i < m; ++i)
            tmp[i] = x[i] + 0.5 * h * k1[i];
        f(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < m; ++i)
            tmp[i] = x[i] + 0.5 * h * k2[i];
        f(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < m; ++i)
            tmp[i] = x[i] + h * k3[i];
        f(t + h, tmp, k4);
        for (std::size_t i = 0; i < m; ++i)
            x[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    Vector k1, k2, k3, k4, tmp;
};

Termination check_state(std::span<const double> y, double cap)
{
    for (double v : y)
        if (!std::isfinite(v))
            return Termination::nonfinite;
    for (double v : y)
        if (std::abs(v) > cap)
            return Termination::blowup;
    return Termination::completed;
}

}  // namespace

Trajectory integrate(const SystemDefinition& system, const SamplePoint& sample, double t_end,
                     const IntegrationConfig& cfg)
{
    validate(cfg);
    validate_point(system, sample);
    require(t_end > cfg.t0, "integrate: t_end must exceed t0");

    const std::size_t n = system.dim();
    const auto& p = sample.param_values;
    auto f = [&](double t, std::span<const double> x, std::span<double> dx) {
        system.rhs(t, x, p, dx);
    };
    Rk4<decltype(f)> rk(n);

    Trajectory traj;
    Vector y = sample.initial_state;
    const std::size_t steps = step_count(cfg.t0, t_end, cfg.dt);
    const auto stride = static_cast<std::size_t>(cfg.record_stride);
    if (stride > 0) {
        traj.times.push_back(cfg.t0);
        traj.states.push_back(y);
    }
    Vector prev(n);
    double t = cfg.t0;
    bool last_recorded = stride > 0;
    for (std::size_t k = 0; k < steps; ++k) {
        t = cfg.t0 + static_cast<double>(k) * cfg.dt;
        const double h = (k + 1 == steps) ? t_end - t : cfg.dt;
        prev = y;
        rk.step(f, t, h, y);
        const Termination st = check_state(y, cfg.blowup_cap);
        if (st != Termination::completed) {
            traj.terminated_early = true;
            traj.termination_reason = st;
            if (!last_recorded) {
                traj.times.push_back(t);
                traj.states.push_back(prev);
            }
            return traj;
        }
        t = (k + 1 == steps) ? t_end : cfg.t0 + static_cast<double>(k + 1) * cfg.dt;
        last_recorded = false;
        if (stride > 0 && ((k + 1) % stride == 0 || k + 1 == steps)) {
            traj.times.push_back(t);
            traj.states.push_back(y);
            last_recorded = true;
        }
    }
    if (stride == 0) {
        traj.times.push_back(t_end);
        traj.states.push_back(y);
    }
    return traj;
}

void orthonormalize_columns(std::span<double> v, std::size_t n, std::span<double> norms)
{
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t k = 0; k < c; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dot += v[i * n + c] * v[i * n + k];
            for (std::size_t i = 0; i < n; ++i)
                v[i * n + c] -= dot * v[i * n + k];
        }
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sq += v[i * n + c] * v[i * n + c];
        const double norm = std::sqrt(sq);
        norms[c] = norm;
        if (norm > 0.0 && std::isfinite(norm))
            for (std::size_t i = 0; i < n; ++i)
                v[i * n + c] /= norm;
    }
}

AugmentedResult integrate_augmented(const SystemDefinition& system, const SamplePoint& sample,
                                    double t_end, const IntegrationConfig& cfg,
                                    std::span<const double> tangent_init, int renorm_every,
                                    const RenormCallback& on_renorm)
{
    validate(cfg);
    validate_point(system, sample);
    const std::size_t n = system.dim();
    require(t_end > cfg.t0, "integrate_augmented: t_end must exceed t0");
    require(tangent_init.size() == n * n, "integrate_augmented: tangent must be n x n");
    require(renorm_every >= 1, "integrate_augmented: renorm_every must be >= 1");

    const auto& p = sample.param_values;
    Vector jac(n * n);
    // Packed layout: [state (n) | tangent (n*n, row-major)].
    auto f = [&](double t, std::span<const double> x, std::span<double> dx) {
        auto y = x.first(n);
        system.rhs(t, y, p, dx.first(n));
        system.jacobian(t, y, p, jac);
        const double* V = x.data() + n;
        double* dV = dx.data() + n;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < n; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += jac[i * n + j] * V[j * n + c];
                dV[i * n + c] = acc;
            }
    };
    Rk4<decltype(f)> rk(n + n * n);

    Vector x(n + n * n);
    std::copy(sample.initial_state.begin(), sample.initial_state.end(), x.begin());
    std::copy(tangent_init.begin(), tangent_init.end(), x.begin() + static_cast<std::ptrdiff_t>(n));

    AugmentedResult res;
    res.log_norm_sums.assign(n, 0.0);
    Vector norms(n);
    std::span<double> tangent(x.data() + n, n * n);

    auto finish = [&](Termination reason, double t) {
        res.final_state.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
        res.final_tangent.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
        res.t_reached = t;
        res.terminated_early = reason != Termination::completed;
        res.termination_reason = reason;
        return res;
    };

    const std::size_t steps = step_count(cfg.t0, t_end, cfg.dt);
    std::size_t since_renorm = 0;
    double t = cfg.t0;
    for (std::size_t k = 0; k < steps; ++k) {
        t = cfg.t0 + static_cast<double>(k) * cfg.dt;
        const double h = (k + 1 == steps) ? t_end - t : cfg.dt;
        rk.step(f, t, h, x);
        t = (k + 1 == steps) ? t_end : cfg.t0 + static_cast<double>(k + 1) * cfg.dt;

        Termination st = check_state(std::span<const double>(x).first(n), cfg.blowup_cap);
        if (st == Termination::completed)
            for (double v : tangent)
                if (!std::isfinite(v)) {
                    st = Termination::nonfinite;
                    break;
                }
        if (st != Termination::completed)
            return finish(st, t);

        if (++since_renorm == static_cast<std::size_t>(renorm_every) || k + 1 == steps) {
            orthonormalize_columns(tangent, n, norms);
            for (std::size_t i = 0; i < n; ++i) {
                if (!(norms[i] > 0.0) || !std::isfinite(norms[i]))
                    return finish(Termination::nonfinite, t);
                res.log_norm_sums[i] += std::log(norms[i]);
            }
            since_renorm = 0;
            if (on_renorm)
                on_renorm(k + 1, t, res.log_norm_sums);
        }
    }
    return finish(Termination::completed, t);
}

void write_trajectory_csv(std::ostream& out, const SystemDefinition& system,
                          const Trajectory& traj)
{
    out << 't';
    for (const auto& name : system.state_names())
        out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
        out << format_double(traj.times[r]);
        for (double v : traj.states[r])
            out << ',' << format_double(v);
        out << '\n';
    }
    if (traj.terminated_early)
        out << "# terminated_early," << to_string(traj.termination_reason) << '\n';
}

}  // namespace chaosmap
