#pragma once

#include "chaosmap/model.hpp"
#include "chaosmap/models.hpp"

#include "json.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace chaosmap {

/// A registered system: its public description plus a factory taking an
/// optional JSON configuration.
///
/// Recognized configuration keys:
///   quadratic3     {"coeffs": [30 reals]}
///   pgpr           {"params": {name: value}, "forcing_terms": K,
///                   "interaction": {"f_c", "K_F", "g_c", "K_G"}}   (params required)
///   becks_dim      {"D": ..., "N0": ...}
///   becks_rescaled {"D": ..., "N0": ...}  (rescales the default constants)
struct CatalogEntry {
    std::string id;
    std::string description;
    bool hidden = false;          // reference systems for testing; omitted from listings
    bool requires_config = false; // no usable defaults without a config
    std::function<SystemPtr(const nlohmann::json& config)> factory;
};

const std::vector<CatalogEntry>& builtin_catalog();

/// Throws NotFoundError for unknown ids and ContractError for bad configs.
SystemPtr make_system(std::string_view id, const nlohmann::json& config = nlohmann::json::object());

/// Catalog document: [{id, dim, state_names, default_state, params: [{name,
/// default, units}], time_dependent, description}]. Systems that need a config
/// report null defaults.
nlohmann::json catalog_json(bool include_hidden = false);

/// Parses a JSON array of exactly 30 finite reals.
Quadratic3Coeffs parse_quadratic3_coeffs(const nlohmann::json& doc);

}  // namespace chaosmap
