#include "chaosmap/io.hpp"

#include "chaosmap/errors.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace chaosmap {

using nlohmann::json;

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_number(std::string_view text, std::string_view context)
{
    double v = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(begin, end, v);
    require(res.ec == std::errc() && res.ptr == end && !text.empty(),
            "cannot parse number '" + std::string(text) + "' in '" + std::string(context) + "'");
    return v;
}

}  // namespace

BoxCoord parse_box_arg(std::string_view arg)
{
    const auto eq = arg.find('=');
    require(eq != std::string_view::npos && eq > 0, "box spec '" + std::string(arg) + "' must look like name=lo:hi");
    const auto range = arg.substr(eq + 1);
    const auto colon = range.find(':');
    require(colon != std::string_view::npos, "box spec '" + std::string(arg) + "' must look like name=lo:hi");
    auto [kind, name] = parse_coord_name(arg.substr(0, eq));
    BoxCoord c{name, parse_number(range.substr(0, colon), arg),
               parse_number(range.substr(colon + 1), arg), kind};
    require(c.lo < c.hi, "box spec '" + std::string(arg) + "' needs lo < hi");
    return c;
}

std::pair<std::string, double> parse_assignment(std::string_view arg)
{
    const auto eq = arg.find('=');
    require(eq != std::string_view::npos && eq > 0, "expected name=value, got '" + std::string(arg) + "'");
    return {std::string(arg.substr(0, eq)), parse_number(arg.substr(eq + 1), arg)};
}

void apply_assignment(const SystemDefinition& system, SamplePoint& sample, std::string_view name,
                      double value)
{
    auto [kind, bare] = parse_coord_name(name);
    if (kind == CoordKind::parameter) {
        auto i = system.param_index(bare);
        require(i.has_value(), "unknown parameter '" + bare + "' for system '" + system.id() + "'");
        sample.param_values[*i] = value;
    } else {
        auto i = system.state_index(bare);
        require(i.has_value(), "unknown state '" + bare + "' for system '" + system.id() + "'");
        sample.initial_state[*i] = value;
    }
}

json to_json(const SearchBox& box)
{
    json out = json::array();
    for (const auto& c : box.coords)
        out.push_back({{"name", c.qualified_name()},
                       {"lo", c.lo},
                       {"hi", c.hi},
                       {"kind", c.kind == CoordKind::parameter ? "parameter" : "initial_condition"}});
    return out;
}

SearchBox box_from_json(const json& doc)
{
    SearchBox box;
    auto add = [&](const std::string& qualified, const json& lo, const json& hi) {
        require(lo.is_number() && hi.is_number(), "box bounds for '" + qualified + "' must be numbers");
        auto [kind, name] = parse_coord_name(qualified);
        box.coords.push_back({name, lo.get<double>(), hi.get<double>(), kind});
    };
    if (doc.is_array()) {
        for (const auto& c : doc) {
            require(c.is_object() && c.contains("name") && c["name"].is_string() && c.contains("lo") &&
                        c.contains("hi"),
                    "box entries need name, lo and hi");
            std::string name = c["name"].get<std::string>();
            if (c.contains("kind") && c["kind"] == "initial_condition" && !name.starts_with("ic."))
                name = "ic." + name;
            add(name, c["lo"], c["hi"]);
        }
    } else if (doc.is_object()) {
        for (const auto& [name, range] : doc.items()) {
            require(range.is_array() && range.size() == 2, "box entry '" + name + "' must be [lo, hi]");
            add(name, range[0], range[1]);
        }
    } else {
        throw ContractError("box must be an array or object");
    }
    return box;
}

namespace {

template <class T>
void read(const json& doc, const char* key, T& field)
{
    if (!doc.is_object() || !doc.contains(key) || doc[key].is_null())
        return;
    try {
        field = doc[key].get<T>();
    } catch (const json::exception&) {
        throw ContractError(std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace

json to_json(const MHConfig& c)
{
    return {{"steps", c.steps},
            {"alpha_max", c.alpha_max},
            {"alpha_schedule", "linear"},
            {"proposal_scale", c.proposal_scale},
            {"seed", c.seed},
            {"phase1_steps", c.phase1_steps}};
}

MHConfig mh_config_from_json(const json& doc, MHConfig c)
{
    require(doc.is_null() || doc.is_object(), "mh_config must be an object");
    read(doc, "steps", c.steps);
    read(doc, "alpha_max", c.alpha_max);
    read(doc, "proposal_scale", c.proposal_scale);
    read(doc, "seed", c.seed);
    read(doc, "phase1_steps", c.phase1_steps);
    if (doc.is_object() && doc.contains("alpha_schedule"))
        require(doc["alpha_schedule"] == "linear", "only the linear alpha schedule is supported");
    validate(c);
    return c;
}

json to_json(const IntegrationConfig& c)
{
    return {{"dt", c.dt}, {"t0", c.t0}, {"blowup_cap", c.blowup_cap}, {"record_stride", c.record_stride}};
}

IntegrationConfig integration_config_from_json(const json& doc, IntegrationConfig c)
{
    require(doc.is_null() || doc.is_object(), "integration config must be an object");
    read(doc, "dt", c.dt);
    read(doc, "t0", c.t0);
    read(doc, "blowup_cap", c.blowup_cap);
    read(doc, "record_stride", c.record_stride);
    validate(c);
    return c;
}

json to_json(const LyapunovConfig& c)
{
    json j = to_json(c.integration);
    j["T0"] = c.T0;
    j["renorm_every"] = c.renorm_every;
    j["max_doublings"] = c.max_doublings;
    j["zero_band"] = c.zero_band;
    j["transient_fraction"] = c.transient_fraction;
    return j;
}

LyapunovConfig lyapunov_config_from_json(const json& doc, LyapunovConfig c)
{
    require(doc.is_null() || doc.is_object(), "lyap_config must be an object");
    c.integration = integration_config_from_json(doc, c.integration);
    read(doc, "T0", c.T0);
    read(doc, "renorm_every", c.renorm_every);
    read(doc, "max_doublings", c.max_doublings);
    read(doc, "zero_band", c.zero_band);
    read(doc, "transient_fraction", c.transient_fraction);
    validate(c);
    return c;
}

json to_json(const SamplePoint& p)
{
    return {{"system_id", p.system_id}, {"param_values", p.param_values}, {"initial_state", p.initial_state}};
}

std::vector<std::string> sample_columns(const SearchBox& box)
{
    std::vector<std::string> cols;
    for (const auto& c : box.coords)
        cols.push_back(c.qualified_name());
    for (const char* c : {"divergence", "mle", "t_final", "converged", "phase", "seed"})
        cols.emplace_back(c);
    return cols;
}

std::string sample_csv_header(const SearchBox& box)
{
    std::string out;
    for (const auto& c : sample_columns(box)) {
        if (!out.empty())
            out += ',';
        out += c;
    }
    return out;
}

std::string sample_csv_row(const SampleRecord& rec)
{
    std::string out;
    for (double v : rec.coords) {
        out += format_double(v);
        out += ',';
    }
    out += format_double(rec.divergence);
    out += ',';
    out += format_double(rec.lyapunov.mle);
    out += ',';
    out += format_double(rec.lyapunov.t_final);
    out += ',';
    out += rec.lyapunov.converged ? "true" : "false";
    out += ',';
    out += to_string(rec.phase);
    out += ',';
    out += std::to_string(rec.seed);
    return out;
}

void write_samples_csv(std::ostream& out, const SearchBox& box,
                       const std::vector<SampleRecord>& records)
{
    out << sample_csv_header(box) << '\n';
    for (const auto& r : records)
        out << sample_csv_row(r) << '\n';
}

json sample_row_json(const SearchBox& box, const SampleRecord& rec)
{
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json row = json::object();
    for (std::size_t i = 0; i < box.coords.size(); ++i)
        row[box.coords[i].qualified_name()] = num(rec.coords[i]);
    row["divergence"] = num(rec.divergence);
    row["mle"] = num(rec.lyapunov.mle);
    row["t_final"] = num(rec.lyapunov.t_final);
    row["converged"] = rec.lyapunov.converged;
    row["phase"] = to_string(rec.phase);
    row["seed"] = rec.seed;
    return row;
}

}  // namespace chaosmap
