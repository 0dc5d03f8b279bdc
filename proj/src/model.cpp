#include "chaosmap/model.hpp"

#include "chaosmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace chaosmap {

SystemDefinition::SystemDefinition(std::string id, std::vector<std::string> state_names,
                                   std::vector<ParamDescriptor> params, Vector default_state,
                                   bool time_dependent, RhsFn rhs, JacFn jac)
    : id_(std::move(id)),
      state_names_(std::move(state_names)),
      params_(std::move(params)),
      default_state_(std::move(default_state)),
      time_dependent_(time_dependent),
      rhs_(std::move(rhs)),
      jac_(std::move(jac))
{
    require(!state_names_.empty(), "system '" + id_ + "': dimension must be >= 1");
    require(default_state_.size() == state_names_.size(),
            "system '" + id_ + "': default state length mismatch");
    require(static_cast<bool>(rhs_), "system '" + id_ + "': missing right-hand side");
    std::set<std::string> seen;
    for (const auto& p : params_)
        require(seen.insert(p.name).second,
                "system '" + id_ + "': duplicate parameter '" + p.name + "'");
    for (const auto& s : state_names_)
        require(seen.insert("ic." + s).second,
                "system '" + id_ + "': duplicate state '" + s + "'");
}

std::optional<std::size_t> SystemDefinition::param_index(std::string_view name) const
{
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name)
            return i;
    return std::nullopt;
}

std::optional<std::size_t> SystemDefinition::state_index(std::string_view name) const
{
    for (std::size_t i = 0; i < state_names_.size(); ++i)
        if (state_names_[i] == name)
            return i;
    return std::nullopt;
}

Vector SystemDefinition::default_params() const
{
    Vector p(params_.size());
    std::transform(params_.begin(), params_.end(), p.begin(),
                   [](const ParamDescriptor& d) { return d.default_value; });
    return p;
}

void SystemDefinition::jacobian(double t, std::span<const double> y,
                                std::span<const double> p, std::span<double> jac) const
{
    if (jac_)
        jac_(t, y, p, jac);
    else
        fd_jacobian(t, y, p, jac);
}

void SystemDefinition::fd_jacobian(double t, std::span<const double> y,
                                   std::span<const double> p, std::span<double> jac) const
{
    const std::size_t n = dim();
    Vector yy(y.begin(), y.end());
    Vector fp(n), fm(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(y[j]));
        yy[j] = y[j] + h;
        rhs_(t, yy, p, fp);
        yy[j] = y[j] - h;
        rhs_(t, yy, p, fm);
        yy[j] = y[j];
        for (std::size_t i = 0; i < n; ++i)
            jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * h);
    }
}

SamplePoint default_point(const SystemDefinition& system)
{
    return {system.id(), system.default_params(), system.default_state()};
}

void validate_point(const SystemDefinition& system, const SamplePoint& sample)
{
    require(sample.param_values.size() == system.param_count(),
            "sample has " + std::to_string(sample.param_values.size()) +
                " parameters, system '" + system.id() + "' expects " +
                std::to_string(system.param_count()));
    require(sample.initial_state.size() == system.dim(),
            "sample has " + std::to_string(sample.initial_state.size()) +
                " state values, system '" + system.id() + "' expects " +
                std::to_string(system.dim()));
}

std::string BoxCoord::qualified_name() const
{
    return kind == CoordKind::initial_condition ? "ic." + name : name;
}

bool SearchBox::contains(std::span<const double> values) const
{
    if (values.size() != coords.size())
        return false;
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (!coords[i].contains(values[i]))
            return false;
    return true;
}

bool SearchBox::contains_box(const SearchBox& inner) const
{
    if (inner.coords.size() != coords.size())
        return false;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const auto& o = coords[i];
        const auto& c = inner.coords[i];
        if (o.name != c.name || o.kind != c.kind || c.lo < o.lo || c.hi > o.hi)
            return false;
    }
    return true;
}

std::pair<CoordKind, std::string> parse_coord_name(std::string_view qualified)
{
    if (qualified.starts_with("ic."))
        return {CoordKind::initial_condition, std::string(qualified.substr(3))};
    return {CoordKind::parameter, std::string(qualified)};
}

std::vector<CoordIndex> resolve_box(const SystemDefinition& system, const SearchBox& box)
{
    std::vector<CoordIndex> out;
    out.reserve(box.coords.size());
    for (const auto& c : box.coords) {
        if (c.kind == CoordKind::parameter) {
            auto i = system.param_index(c.name);
            require(i.has_value(), "unknown parameter '" + c.name + "' for system '" +
                                       system.id() + "'");
            out.push_back({c.kind, *i});
        } else {
            auto i = system.state_index(c.name);
            require(i.has_value(), "unknown state '" + c.name + "' for system '" +
                                       system.id() + "'");
            out.push_back({c.kind, *i});
        }
    }
    return out;
}

void validate_box(const SystemDefinition& system, const SearchBox& box)
{
    require(!box.coords.empty(), "search box has no coordinates");
    std::set<std::string> seen;
    for (const auto& c : box.coords) {
        require(std::isfinite(c.lo) && std::isfinite(c.hi),
                "non-finite bound on '" + c.qualified_name() + "'");
        require(c.lo < c.hi, "empty interval on '" + c.qualified_name() + "'");
        require(seen.insert(c.qualified_name()).second,
                "duplicate box coordinate '" + c.qualified_name() + "'");
    }
    resolve_box(system, box);
}

Vector project(const SamplePoint& sample, std::span<const CoordIndex> index)
{
    Vector v(index.size());
    for (std::size_t i = 0; i < index.size(); ++i)
        v[i] = index[i].kind == CoordKind::parameter ? sample.param_values[index[i].index]
                                                     : sample.initial_state[index[i].index];
    return v;
}

void embed(SamplePoint& sample, std::span<const CoordIndex> index, std::span<const double> values)
{
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i].kind == CoordKind::parameter)
            sample.param_values[index[i].index] = values[i];
        else
            sample.initial_state[index[i].index] = values[i];
    }
}

namespace {

void check_inputs(const SystemDefinition& system, std::span<const double> state,
                  std::span<const double> params)
{
    require(state.size() == system.dim(), "state length mismatch for '" + system.id() + "'");
    require(params.size() == system.param_count(),
            "parameter length mismatch for '" + system.id() + "'");
    auto finite = [](double v) { return std::isfinite(v); };
    require(std::all_of(state.begin(), state.end(), finite), "non-finite state");
    require(std::all_of(params.begin(), params.end(), finite), "non-finite parameter");
}

void check_output(const SystemDefinition& system, const Vector& v, const char* what)
{
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }))
        throw NumericalBlowup(std::string("non-finite ") + what + " for system '" +
                              system.id() + "'");
}

}  // namespace

Vector eval_rhs(const SystemDefinition& system, double t, std::span<const double> state,
                std::span<const double> params)
{
    check_inputs(system, state, params);
    Vector out(system.dim());
    system.rhs(t, state, params, out);
    check_output(system, out, "right-hand side");
    return out;
}

Vector eval_jacobian(const SystemDefinition& system, double t, std::span<const double> state,
                     std::span<const double> params)
{
    check_inputs(system, state, params);
    const std::size_t n = system.dim();
    Vector out(n * n);
    system.jacobian(t, state, params, out);
    check_output(system, out, "Jacobian");
    return out;
}

double divergence_at(const SystemDefinition& system, const SamplePoint& sample)
{
    validate_point(system, sample);
    const Vector jac = eval_jacobian(system, 0.0, sample.initial_state, sample.param_values);
    const std::size_t n = system.dim();
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        trace += jac[i * n + i];
    return trace;
}

}  // namespace chaosmap
