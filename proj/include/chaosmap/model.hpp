#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chaosmap {

using Vector = std::vector<double>;

/// Right-hand side f(t, y; p) written into `dydt`.
using RhsFn = std::function<void(double t, std::span<const double> y,
                                 std::span<const double> p, std::span<double> dydt)>;

/// Jacobian df_i/dy_j written row-major into `jac` (n*n entries).
using JacFn = std::function<void(double t, std::span<const double> y,
                                 std::span<const double> p, std::span<double> jac)>;

struct ParamDescriptor {
    std::string name;
    double default_value = 0.0;
    std::string units = "dimensionless";
    std::string description;
};

/// An immutable parameterized ODE system dY/dt = f(Y, t; p).
///
/// Instances are shared as `std::shared_ptr<const SystemDefinition>` and may be
/// evaluated concurrently; the stored callables must be pure.
class SystemDefinition {
public:
    SystemDefinition(std::string id, std::vector<std::string> state_names,
                     std::vector<ParamDescriptor> params, Vector default_state,
                     bool time_dependent, RhsFn rhs, JacFn jac = {});

    const std::string& id() const noexcept { return id_; }
    std::size_t dim() const noexcept { return state_names_.size(); }
    std::size_t param_count() const noexcept { return params_.size(); }
    const std::vector<std::string>& state_names() const noexcept { return state_names_; }
    const std::vector<ParamDescriptor>& params() const noexcept { return params_; }
    const Vector& default_state() const noexcept { return default_state_; }
    bool time_dependent() const noexcept { return time_dependent_; }
    bool has_analytic_jacobian() const noexcept { return static_cast<bool>(jac_); }

    std::optional<std::size_t> param_index(std::string_view name) const;
    std::optional<std::size_t> state_index(std::string_view name) const;
    Vector default_params() const;

    /// Unchecked evaluation used on integrator hot paths.
    void rhs(double t, std::span<const double> y, std::span<const double> p,
             std::span<double> dydt) const
    {
        rhs_(t, y, p, dydt);
    }

    /// Analytic Jacobian when supplied, else central differences with
    /// h_j = 1e-6 * max(1, |y_j|). Unchecked.
    void jacobian(double t, std::span<const double> y, std::span<const double> p,
                  std::span<double> jac) const;

    /// Central-difference Jacobian regardless of whether an analytic form exists.
    void fd_jacobian(double t, std::span<const double> y, std::span<const double> p,
                     std::span<double> jac) const;

private:
    std::string id_;
    std::vector<std::string> state_names_;
    std::vector<ParamDescriptor> params_;
    Vector default_state_;
    bool time_dependent_;
    RhsFn rhs_;
    JacFn jac_;
};

using SystemPtr = std::shared_ptr<const SystemDefinition>;

/// One element s of S = P x I.
struct SamplePoint {
    std::string system_id;
    Vector param_values;
    Vector initial_state;

    bool operator==(const SamplePoint&) const = default;
};

/// Sample point holding the system's default parameters and state.
SamplePoint default_point(const SystemDefinition& system);

/// Throws ContractError unless lengths match `system`.
void validate_point(const SystemDefinition& system, const SamplePoint& sample);

enum class CoordKind { parameter, initial_condition };

struct BoxCoord {
    std::string name;  // parameter name, or state name for initial conditions
    double lo = 0.0;
    double hi = 0.0;
    CoordKind kind = CoordKind::parameter;

    /// "name" for parameters, "ic.name" for initial conditions.
    std::string qualified_name() const;
    double width() const noexcept { return hi - lo; }
    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Rectangular region of S given by per-coordinate bounds.
struct SearchBox {
    std::vector<BoxCoord> coords;

    std::size_t size() const noexcept { return coords.size(); }
    bool contains(std::span<const double> values) const;
    /// Coordinate-wise containment of `inner` in `*this` (same coordinates, same order).
    bool contains_box(const SearchBox& inner) const;
};

/// Parses "name" / "ic.name" into a coordinate kind and bare name.
std::pair<CoordKind, std::string> parse_coord_name(std::string_view qualified);

/// Throws ContractError unless every coordinate has lo < hi, resolves against
/// `system`, and appears once.
void validate_box(const SystemDefinition& system, const SearchBox& box);

/// Resolved index of each box coordinate into the parameter or state vector.
struct CoordIndex {
    CoordKind kind;
    std::size_t index;
};
std::vector<CoordIndex> resolve_box(const SystemDefinition& system, const SearchBox& box);

/// Reads box coordinates out of a sample point.
Vector project(const SamplePoint& sample, std::span<const CoordIndex> index);

/// Writes box coordinate values into a sample point.
void embed(SamplePoint& sample, std::span<const CoordIndex> index, std::span<const double> values);

/// f(t, state; params). Checks lengths and finiteness; throws NumericalBlowup
/// on non-finite output.
Vector eval_rhs(const SystemDefinition& system, double t, std::span<const double> state,
                std::span<const double> params);

/// Row-major n*n Jacobian with the same checks as eval_rhs.
Vector eval_jacobian(const SystemDefinition& system, double t, std::span<const double> state,
                     std::span<const double> params);

/// Trace of the Jacobian at t = 0 and the sample's initial state.
double divergence_at(const SystemDefinition& system, const SamplePoint& sample);

}  // namespace chaosmap
