#pragma once

#include "chaosmap/lyapunov.hpp"
#include "chaosmap/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stop_token>
#include <vector>

namespace chaosmap {

enum class AlphaSchedule { linear };

struct MHConfig {
    int steps = 1000;          // phase-2 walk length (and length of a plain mh_walk)
    double alpha_max = 20.0;
    AlphaSchedule alpha_schedule = AlphaSchedule::linear;
    double proposal_scale = 0.05; // Gaussian sigma as a fraction of each box width
    std::uint64_t seed = 0;
    int phase1_steps = 300;
};

void validate(const MHConfig& cfg);

/// alpha at step k (1-based) of a walk with `steps` steps: alpha_max * k / steps.
double alpha_at(const MHConfig& cfg, int k, int steps);

/// 1/(1 + exp(-alpha * L)), evaluated without overflow for any finite input.
double sigmoid(double L, double alpha);

/// MH target split into an expensive score (evaluated once per visited point
/// and cached for the walker's current position) and a cheap weight in [0, 1]
/// that depends on the current alpha. Non-finite scores and weights count as 0.
struct MHTarget {
    std::function<double(std::span<const double> coords)> score;
    std::function<double(double score, double alpha)> weight;
};

/// Target sigmoid(score, alpha).
MHTarget sigmoid_target(std::function<double(std::span<const double>)> score);

using HardConstraint = std::function<bool(std::span<const double> coords)>;

struct WalkDiagnostics {
    int steps = 0;
    int accepted = 0;
    int rejected_out_of_box = 0;
    int rejected_constraint = 0;
    int rejected_metropolis = 0;
    int score_evaluations = 0;
    double final_score = 0.0;
    double final_alpha = 0.0;
};

struct WalkResult {
    Vector position;
    WalkDiagnostics diagnostics;
};

/// Annealed Metropolis walk over `box` for `steps` steps. Starts at `start`
/// when given, else at a uniform point of the box. Proposals are s + N(0,
/// sigma_i^2) with sigma_i = proposal_scale * width_i; proposals outside the
/// box or failing `hard` are rejected in place; others are accepted with
/// probability min(1, w(s', alpha_k) / w(s, alpha_k)).
WalkResult mh_walk(const MHTarget& target, const SearchBox& box, const MHConfig& cfg, int steps,
                   std::mt19937_64& rng, const HardConstraint& hard = {},
                   std::optional<Vector> start = std::nullopt);

/// Convenience form seeded from cfg.seed running cfg.steps steps.
WalkResult mh_walk(const MHTarget& target, const SearchBox& box, const MHConfig& cfg,
                   const HardConstraint& hard = {});

enum class Phase { phase1_failed, phase2_failed, success };

const char* to_string(Phase p) noexcept;
Phase phase_from_string(std::string_view s);

struct SampleRecord {
    SamplePoint point;
    Vector coords;  // values of the box coordinates, in box order
    double divergence = 0.0;
    LyapunovResult lyapunov{};
    int accepted_steps = 0;
    Phase phase = Phase::phase1_failed;
    std::uint64_t seed = 0;
};

/// Two-phase sample: phase 1 walks cfg.phase1_steps on sigmoid(-D, alpha);
/// phase 2 starts from the phase-1 endpoint and walks cfg.steps on
/// sigmoid(MLE, alpha) with D < 0 as a hard constraint. Coordinates not in
/// the box stay at `base` (system defaults when omitted).
SampleRecord sample_chaotic_point(const SystemDefinition& system, const SearchBox& box,
                                  const MHConfig& cfg, const LyapunovConfig& lyap_cfg,
                                  const std::optional<SamplePoint>& base = std::nullopt);

using RecordCallback = std::function<void(std::size_t index, const SampleRecord& record)>;

/// k independent samples with per-run seed cfg.seed + index, spread over
/// `workers` threads. Output order and content do not depend on `workers`.
/// `on_record` may be called concurrently from worker threads. When `stop`
/// is requested, records already started finish (and are reported) and the
/// call throws Cancelled.
std::vector<SampleRecord> sample_batch(const SystemDefinition& system, const SearchBox& box,
                                       int k, const MHConfig& cfg, const LyapunovConfig& lyap_cfg,
                                       int workers,
                                       const std::optional<SamplePoint>& base = std::nullopt,
                                       const RecordCallback& on_record = {},
                                       std::stop_token stop = {});

}  // namespace chaosmap
