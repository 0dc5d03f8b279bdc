#pragma once

#include "chaosmap/integrator.hpp"
#include "chaosmap/model.hpp"

#include "json.hpp"

#include <optional>

namespace chaosmap {

/// Settings for spectrum computations. `zero_band` is the half-width of the
/// interval around 0 inside which an exponent counts as zero when comparing
/// sign patterns and when deciding MLE > 0.
struct LyapunovConfig {
    IntegrationConfig integration{};
    double T0 = 100.0;
    int renorm_every = 10;
    int max_doublings = 6;
    double zero_band = 1e-3;
    double transient_fraction = 0.1;
};

void validate(const LyapunovConfig& cfg);

struct SignPattern {
    int positive = 0;
    int zero = 0;
    int negative = 0;

    bool operator==(const SignPattern&) const = default;
};

SignPattern sign_pattern(std::span<const double> spectrum, double zero_band);

struct LyapunovResult {
    Vector spectrum;  // descending
    double mle = 0.0; // spectrum[0], NaN after a blowup
    double t_final = 0.0;
    int doublings = 0;
    bool converged = false;
    SignPattern signs{};
};

/// Spectrum over the horizon T after discarding a transient of
/// transient_fraction * T, sorted descending. Returns nullopt when the orbit
/// blows up or goes non-finite.
std::optional<Vector> spectrum_fixed_T(const SystemDefinition& system, const SamplePoint& sample,
                                       double T, const IntegrationConfig& cfg, int renorm_every,
                                       double transient_fraction = 0.1);

/// Spectra over T0, 2 T0, 4 T0, ... until two consecutive horizons share a
/// sign pattern (converged), or max_doublings is exhausted.
///
/// One transient of transient_fraction * T0 is discarded, then a single
/// co-integration runs and the accumulated sums are read at each horizon,
/// so the spectrum at 2T extends the run that produced the spectrum at T.
LyapunovResult spectrum_with_doubling(const SystemDefinition& system, const SamplePoint& sample,
                                      const LyapunovConfig& cfg);

enum class Classification { chaotic, non_chaotic, indeterminate };

const char* to_string(Classification c) noexcept;

/// chaotic iff divergence < 0, converged and mle > zero_band; indeterminate
/// iff not converged; otherwise non_chaotic.
Classification classify(double divergence, const LyapunovResult& lr, double zero_band = 1e-3);

/// {spectrum, mle, t_final, doublings, converged}; NaN mle serializes as null.
nlohmann::json to_json(const LyapunovResult& lr);

}  // namespace chaosmap
