#pragma once

#include "chaosmap/model.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace chaosmap {

struct IntegrationConfig {
    double dt = 1e-2;
    double t0 = 0.0;
    double blowup_cap = 1e8;
    /// Record every `record_stride` steps (plus the start and end); 0 keeps
    /// only the final state.
    int record_stride = 0;
};

void validate(const IntegrationConfig& cfg);

enum class Termination { completed, blowup, nonfinite };

const char* to_string(Termination t) noexcept;

/// Recorded states of a fixed-step run. Every stored row is finite: when a
/// step trips the blowup cap or produces NaN/Inf the run stops and the
/// offending state is dropped.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    bool terminated_early = false;
    Termination termination_reason = Termination::completed;
};

/// Classical RK4 from cfg.t0 to t_end; the last step is shortened to land
/// exactly on t_end.
Trajectory integrate(const SystemDefinition& system, const SamplePoint& sample, double t_end,
                     const IntegrationConfig& cfg);

/// Number of RK4 steps taken over [t0, t_end] with step dt.
std::size_t step_count(double t0, double t_end, double dt);

/// Called after each Gram-Schmidt pass with the step index, time and the
/// accumulated log-norm sums. Must be reentrant.
using RenormCallback =
    std::function<void(std::size_t step, double t, std::span<const double> log_norm_sums)>;

struct AugmentedResult {
    Vector final_state;
    Vector final_tangent;  // n x n row-major; columns are the perturbation vectors
    Vector log_norm_sums;
    double t_reached = 0.0;
    bool terminated_early = false;
    Termination termination_reason = Termination::completed;
};

/// Co-integrates dY/dt = f(Y, t) and dV/dt = J(Y, t) V with a shared RK4 step.
/// Every `renorm_every` steps, and once more at t_end, the tangent columns are
/// orthonormalized by modified Gram-Schmidt and log(column norm) is added to
/// log_norm_sums[i].
AugmentedResult integrate_augmented(const SystemDefinition& system, const SamplePoint& sample,
                                    double t_end, const IntegrationConfig& cfg,
                                    std::span<const double> tangent_init, int renorm_every,
                                    const RenormCallback& on_renorm = {});

/// Modified Gram-Schmidt over the columns of an n x n row-major matrix.
/// Writes the pre-normalization norm of each column into `norms`.
void orthonormalize_columns(std::span<double> matrix, std::size_t n, std::span<double> norms);

/// Writes `t,<state names...>` followed by one row per recorded state; an
/// early-terminated run ends with `# terminated_early,<reason>`.
void write_trajectory_csv(std::ostream& out, const SystemDefinition& system,
                          const Trajectory& traj);

}  // namespace chaosmap
