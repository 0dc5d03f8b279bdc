#include "chaosmap/catalog.hpp"

#include "chaosmap/errors.hpp"

#include <cmath>

namespace chaosmap {

using nlohmann::json;

Quadratic3Coeffs parse_quadratic3_coeffs(const json& doc)
{
    require(doc.is_array() && doc.size() == 30, "quadratic3 coefficients: expected an array of 30 reals");
    Quadratic3Coeffs c{};
    for (std::size_t i = 0; i < 30; ++i) {
        require(doc[i].is_number(), "quadratic3 coefficients: entry " + std::to_string(i) + " is not a number");
        c[i] = doc[i].get<double>();
        require(std::isfinite(c[i]), "quadratic3 coefficients: non-finite entry");
    }
    return c;
}

namespace {

double number_or(const json& config, const char* key, double fallback)
{
    if (!config.is_object() || !config.contains(key))
        return fallback;
    require(config[key].is_number(), std::string("config key '") + key + "' must be a number");
    return config[key].get<double>();
}

SystemPtr build_pgpr(const json& config)
{
    require(config.is_object() && config.contains("params") && config["params"].is_object(),
            "pgpr requires a config with a \"params\" object");
    std::map<std::string, double> table;
    for (const auto& [k, v] : config["params"].items()) {
        require(v.is_number(), "pgpr parameter '" + k + "' must be a number");
        table[k] = v.get<double>();
    }
    InteractionSpec inter;
    if (config.contains("interaction")) {
        const auto& i = config["interaction"];
        inter = {number_or(i, "f_c", 0.0), number_or(i, "K_F", 0.0), number_or(i, "g_c", 0.0),
                 number_or(i, "K_G", 0.0)};
    }
    const int terms = static_cast<int>(number_or(config, "forcing_terms", 25));
    return make_pgpr(table, terms, inter);
}

// Placeholder table used only to enumerate pgpr's parameter layout.
SystemPtr pgpr_layout()
{
    std::map<std::string, double> table;
    for (const auto& name : pgpr_required_params())
        table[name] = 1.0;
    return make_pgpr(table);
}

}  // namespace

const std::vector<CatalogEntry>& builtin_catalog()
{
    static const std::vector<CatalogEntry> entries{
        {"quadratic3", "general three-variable quadratic flow (30 coefficients)", false, false,
         [](const json& c) {
             Quadratic3Coeffs coeffs{};
             if (c.is_object() && c.contains("coeffs"))
                 coeffs = parse_quadratic3_coeffs(c["coeffs"]);
             return make_quadratic3(coeffs);
         }},
        {"kot_monod", "forced double-Monod chemostat, dimensionless", false, false,
         [](const json&) { return make_kot_monod_default(); }},
        {"pgpr", "rhizosphere PGPR model with daily light forcing (config required)", false, true,
         build_pgpr},
        {"becks_dim", "two-prey one-predator chemostat with nutrient, dimensional (days)", false,
         false,
         [](const json& c) {
             return make_becks_dim({}, number_or(c, "D", kBecksDefaultD),
                                   number_or(c, "N0", kBecksDefaultN0));
         }},
        {"becks_rescaled", "two-prey one-predator chemostat, rescaled", false, false,
         [](const json& c) {
             return make_becks_rescaled(becks_rescale_params(
                 {}, number_or(c, "D", kBecksDefaultD), number_or(c, "N0", kBecksDefaultN0)));
         }},
        {"linear_diag", "test system Y' = diag(l1, l2) Y", true, false,
         [](const json&) { return make_linear_diag(); }},
        {"lorenz", "test system: Lorenz flow", true, false,
         [](const json&) { return make_lorenz(); }},
        {"square_blowup", "test system Y' = k Y^2 (finite-time blowup)", true, false,
         [](const json&) { return make_square_blowup(); }},
        {"relaxation", "test system Y' = p - Y", true, false,
         [](const json&) { return make_relaxation(); }},
    };
    return entries;
}

SystemPtr make_system(std::string_view id, const json& config)
{
    for (const auto& e : builtin_catalog())
        if (e.id == id)
            return e.factory(config);
    throw NotFoundError("unknown system '" + std::string(id) + "'");
}

json catalog_json(bool include_hidden)
{
    json out = json::array();
    for (const auto& e : builtin_catalog()) {
        if (e.hidden && !include_hidden)
            continue;
        const SystemPtr sys = e.requires_config ? pgpr_layout() : e.factory(json::object());
        json params = json::array();
        for (const auto& p : sys->params()) {
            json d{{"name", p.name}, {"units", p.units}};
            d["default"] = e.requires_config ? json(nullptr) : json(p.default_value);
            if (!p.description.empty())
                d["description"] = p.description;
            params.push_back(std::move(d));
        }
        out.push_back({{"id", e.id},
                       {"dim", sys->dim()},
                       {"state_names", sys->state_names()},
                       {"default_state", e.requires_config ? json(nullptr) : json(sys->default_state())},
                       {"params", std::move(params)},
                       {"time_dependent", sys->time_dependent()},
                       {"description", e.description}});
    }
    return out;
}

}  // namespace chaosmap
