#include "chaosmap/lyapunov.hpp"

#include "chaosmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace chaosmap {

void validate(const LyapunovConfig& cfg)
{
    validate(cfg.integration);
    require(std::isfinite(cfg.T0) && cfg.T0 > 0.0, "lyapunov: T0 must be positive");
    require(cfg.renorm_every >= 1, "lyapunov: renorm_every must be >= 1");
    require(cfg.max_doublings >= 1, "lyapunov: max_doublings must be >= 1");
    require(cfg.zero_band >= 0.0, "lyapunov: zero_band must be >= 0");
    require(cfg.transient_fraction >= 0.0, "lyapunov: transient_fraction must be >= 0");
}

SignPattern sign_pattern(std::span<const double> spectrum, double zero_band)
{
    SignPattern s;
    for (double l : spectrum) {
        if (l > zero_band)
            ++s.positive;
        else if (l < -zero_band)
            ++s.negative;
        else
            ++s.zero;
    }
    return s;
}

namespace {

Vector identity(std::size_t n)
{
    Vector m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        m[i * n + i] = 1.0;
    return m;
}

Vector sorted_rates(std::span<const double> sums, double horizon)
{
    Vector out(sums.size());
    std::transform(sums.begin(), sums.end(), out.begin(), [&](double s) { return s / horizon; });
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

/// Integrates the transient without tangent vectors; returns the advanced
/// sample and start time, or nullopt on blowup.
std::optional<std::pair<SamplePoint, double>> run_transient(const SystemDefinition& system,
                                                            const SamplePoint& sample,
                                                            double duration,
                                                            const IntegrationConfig& cfg)
{
    if (duration <= 0.0)
        return std::make_pair(sample, cfg.t0);
    IntegrationConfig c = cfg;
    c.record_stride = 0;
    const Trajectory tr = integrate(system, sample, cfg.t0 + duration, c);
    if (tr.terminated_early)
        return std::nullopt;
    SamplePoint advanced = sample;
    advanced.initial_state = tr.states.back();
    return std::make_pair(std::move(advanced), cfg.t0 + duration);
}

}  // namespace

std::optional<Vector> spectrum_fixed_T(const SystemDefinition& system, const SamplePoint& sample,
                                       double T, const IntegrationConfig& cfg, int renorm_every,
                                       double transient_fraction)
{
    require(std::isfinite(T) && T > 0.0, "spectrum_fixed_T: T must be positive");
    validate(cfg);
    validate_point(system, sample);
    const auto start = run_transient(system, sample, transient_fraction * T, cfg);
    if (!start)
        return std::nullopt;
    IntegrationConfig c = cfg;
    c.t0 = start->second;
    const std::size_t n = system.dim();
    const AugmentedResult r =
        integrate_augmented(system, start->first, c.t0 + T, c, identity(n), renorm_every);
    if (r.terminated_early)
        return std::nullopt;
    return sorted_rates(r.log_norm_sums, T);
}

LyapunovResult spectrum_with_doubling(const SystemDefinition& system, const SamplePoint& sample,
                                      const LyapunovConfig& cfg)
{
    validate(cfg);
    validate_point(system, sample);
    const std::size_t n = system.dim();

    LyapunovResult blown;
    blown.mle = std::numeric_limits<double>::quiet_NaN();
    blown.t_final = cfg.T0;

    auto start = run_transient(system, sample, cfg.transient_fraction * cfg.T0, cfg.integration);
    if (!start)
        return blown;

    SamplePoint current = std::move(start->first);
    IntegrationConfig c = cfg.integration;
    c.t0 = start->second;
    Vector tangent = identity(n);
    Vector sums(n, 0.0);

    double elapsed = 0.0;
    std::optional<SignPattern> previous;
    LyapunovResult out;
    for (int d = 0; d <= cfg.max_doublings; ++d) {
        const double horizon = cfg.T0 * std::ldexp(1.0, d);
        const AugmentedResult seg =
            integrate_augmented(system, current, c.t0 + (horizon - elapsed), c, tangent,
                                cfg.renorm_every);
        if (seg.terminated_early) {
            blown.t_final = horizon;
            blown.doublings = d;
            return blown;
        }
        for (std::size_t i = 0; i < n; ++i)
            sums[i] += seg.log_norm_sums[i];
        current.initial_state = seg.final_state;
        tangent = seg.final_tangent;
        c.t0 = seg.t_reached;
        elapsed = horizon;

        out.spectrum = sorted_rates(sums, horizon);
        out.mle = out.spectrum.front();
        out.t_final = horizon;
        out.doublings = d;
        out.signs = sign_pattern(out.spectrum, cfg.zero_band);
        if (previous && *previous == out.signs) {
            out.converged = true;
            return out;
        }
        previous = out.signs;
    }
    out.converged = false;
    return out;
}

const char* to_string(Classification c) noexcept
{
    switch (c) {
    case Classification::chaotic: return "chaotic";
    case Classification::non_chaotic: return "non_chaotic";
    case Classification::indeterminate: return "indeterminate";
    }
    return "unknown";
}

Classification classify(double divergence, const LyapunovResult& lr, double zero_band)
{
    if (!lr.converged)
        return Classification::indeterminate;
    if (divergence < 0.0 && lr.mle > zero_band)
        return Classification::chaotic;
    return Classification::non_chaotic;
}

nlohmann::json to_json(const LyapunovResult& lr)
{
    nlohmann::json j;
    j["spectrum"] = lr.spectrum;
    j["mle"] = std::isfinite(lr.mle) ? nlohmann::json(lr.mle) : nlohmann::json(nullptr);
    j["t_final"] = lr.t_final;
    j["doublings"] = lr.doublings;
    j["converged"] = lr.converged;
    j["sign_pattern"] = {lr.signs.positive, lr.signs.zero, lr.signs.negative};
    return j;
}

}  // namespace chaosmap
