#include "chaosmap/sampler.hpp"

#include "chaosmap/errors.hpp"
#include "chaosmap/worker_pool.hpp"

#include <cmath>
#include <limits>

namespace chaosmap {

void validate(const MHConfig& cfg)
{
    require(cfg.steps >= 1, "mh: steps must be >= 1");
    require(cfg.phase1_steps >= 1, "mh: phase1_steps must be >= 1");
    require(std::isfinite(cfg.alpha_max) && cfg.alpha_max > 0.0, "mh: alpha_max must be positive");
    require(cfg.proposal_scale > 0.0 && cfg.proposal_scale <= 1.0,
            "mh: proposal_scale must lie in (0, 1]");
}

double alpha_at(const MHConfig& cfg, int k, int steps)
{
    switch (cfg.alpha_schedule) {
    case AlphaSchedule::linear:
        return cfg.alpha_max * static_cast<double>(k) / static_cast<double>(steps);
    }
    return cfg.alpha_max;
}

double sigmoid(double L, double alpha)
{
    const double x = alpha * L;
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

MHTarget sigmoid_target(std::function<double(std::span<const double>)> score)
{
    return {std::move(score), [](double s, double alpha) { return sigmoid(s, alpha); }};
}

namespace {

double safe_weight(const MHTarget& target, double score, double alpha)
{
    if (!std::isfinite(score))
        return 0.0;
    const double w = target.weight(score, alpha);
    return std::isfinite(w) && w > 0.0 ? w : 0.0;
}

}  // namespace

WalkResult mh_walk(const MHTarget& target, const SearchBox& box, const MHConfig& cfg, int steps,
                   std::mt19937_64& rng, const HardConstraint& hard, std::optional<Vector> start)
{
    validate(cfg);
    require(steps >= 1, "mh_walk: steps must be >= 1");
    require(!box.coords.empty(), "mh_walk: empty box");
    for (const auto& c : box.coords)
        require(c.lo < c.hi, "mh_walk: degenerate interval on '" + c.qualified_name() + "'");

    const std::size_t d = box.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vector s(d);
    if (start) {
        require(start->size() == d, "mh_walk: start has wrong dimension");
        s = *start;
    } else {
        for (std::size_t i = 0; i < d; ++i)
            s[i] = box.coords[i].lo + box.coords[i].width() * unit(rng);
    }

    WalkResult out;
    auto& diag = out.diagnostics;
    double score = target.score(s);
    ++diag.score_evaluations;

    Vector proposal(d);
    for (int k = 1; k <= steps; ++k) {
        const double alpha = alpha_at(cfg, k, steps);
        for (std::size_t i = 0; i < d; ++i)
            proposal[i] = s[i] + cfg.proposal_scale * box.coords[i].width() * gauss(rng);
        const double u = unit(rng);
        ++diag.steps;
        if (!box.contains(proposal)) {
            ++diag.rejected_out_of_box;
            continue;
        }
        if (hard && !hard(proposal)) {
            ++diag.rejected_constraint;
            continue;
        }
        const double proposal_score = target.score(proposal);
        ++diag.score_evaluations;
        const double w_cur = safe_weight(target, score, alpha);
        const double w_new = safe_weight(target, proposal_score, alpha);
        if (w_cur <= 0.0 || u < w_new / w_cur) {
            s = proposal;
            score = proposal_score;
            ++diag.accepted;
        } else {
            ++diag.rejected_metropolis;
        }
    }
    out.position = std::move(s);
    diag.final_score = score;
    diag.final_alpha = alpha_at(cfg, steps, steps);
    return out;
}

WalkResult mh_walk(const MHTarget& target, const SearchBox& box, const MHConfig& cfg,
                   const HardConstraint& hard)
{
    std::mt19937_64 rng(cfg.seed);
    return mh_walk(target, box, cfg, cfg.steps, rng, hard);
}

const char* to_string(Phase p) noexcept
{
    switch (p) {
    case Phase::phase1_failed: return "phase1_failed";
    case Phase::phase2_failed: return "phase2_failed";
    case Phase::success: return "success";
    }
    return "unknown";
}

Phase phase_from_string(std::string_view s)
{
    if (s == "phase1_failed")
        return Phase::phase1_failed;
    if (s == "phase2_failed")
        return Phase::phase2_failed;
    if (s == "success")
        return Phase::success;
    throw ContractError("unknown phase '" + std::string(s) + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double divergence_or_nan(const SystemDefinition& system, const SamplePoint& p)
{
    try {
        return divergence_at(system, p);
    } catch (const NumericalBlowup&) {
        return kNaN;
    }
}

}  // namespace

SampleRecord sample_chaotic_point(const SystemDefinition& system, const SearchBox& box,
                                  const MHConfig& cfg, const LyapunovConfig& lyap_cfg,
                                  const std::optional<SamplePoint>& base)
{
    validate(cfg);
    validate(lyap_cfg);
    validate_box(system, box);
    const SamplePoint origin = base ? *base : default_point(system);
    validate_point(system, origin);
    const auto index = resolve_box(system, box);

    auto at = [&](std::span<const double> coords) {
        SamplePoint p = origin;
        embed(p, index, coords);
        return p;
    };
    auto divergence_of = [&](std::span<const double> coords) {
        return divergence_or_nan(system, at(coords));
    };
    auto mle_of = [&](std::span<const double> coords) {
        const LyapunovResult lr = spectrum_with_doubling(system, at(coords), lyap_cfg);
        return lr.converged ? lr.mle : kNaN;
    };

    std::mt19937_64 rng(cfg.seed);
    SampleRecord rec;
    rec.seed = cfg.seed;

    // Phase 1: favor negative divergence.
    const MHTarget phase1 = sigmoid_target([&](std::span<const double> c) { return -divergence_of(c); });
    const WalkResult w1 = mh_walk(phase1, box, cfg, cfg.phase1_steps, rng);
    rec.accepted_steps = w1.diagnostics.accepted;
    rec.coords = w1.position;
    rec.point = at(w1.position);
    rec.divergence = divergence_of(w1.position);
    rec.lyapunov.mle = kNaN;
    if (!(rec.divergence < 0.0)) {
        rec.phase = Phase::phase1_failed;
        return rec;
    }

    // Phase 2: favor positive MLE without leaving D < 0.
    const MHTarget phase2 = sigmoid_target(mle_of);
    const HardConstraint inside = [&](std::span<const double> c) { return divergence_of(c) < 0.0; };
    const WalkResult w2 = mh_walk(phase2, box, cfg, cfg.steps, rng, inside, w1.position);
    rec.accepted_steps += w2.diagnostics.accepted;
    rec.coords = w2.position;
    rec.point = at(w2.position);
    rec.divergence = divergence_of(w2.position);
    rec.lyapunov = spectrum_with_doubling(system, rec.point, lyap_cfg);
    rec.phase = classify(rec.divergence, rec.lyapunov, lyap_cfg.zero_band) == Classification::chaotic
                    ? Phase::success
                    : Phase::phase2_failed;
    return rec;
}

std::vector<SampleRecord> sample_batch(const SystemDefinition& system, const SearchBox& box,
                                       int k, const MHConfig& cfg, const LyapunovConfig& lyap_cfg,
                                       int workers, const std::optional<SamplePoint>& base,
                                       const RecordCallback& on_record, std::stop_token stop)
{
    require(k >= 1, "sample_batch: k must be >= 1");
    require(workers >= 1, "sample_batch: workers must be >= 1");
    validate(cfg);
    validate(lyap_cfg);
    validate_box(system, box);

    std::vector<SampleRecord> out(static_cast<std::size_t>(k));
    parallel_for(static_cast<std::size_t>(k), workers, [&](std::size_t i) {
        if (stop.stop_requested())
            throw Cancelled("sample_batch: stop requested");
        MHConfig run = cfg;
        run.seed = cfg.seed + i;
        out[i] = sample_chaotic_point(system, box, run, lyap_cfg, base);
        if (on_record)
            on_record(i, out[i]);
    });
    return out;
}

}  // namespace chaosmap
