#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "swcrt/power.hpp"

namespace swcrt::api {

// Request schema (all endpoints share the design/model fields):
//   J, m, n            balanced layout; or "design" (CSV text) or
//   design_rows + counts
//   beta (beta1), beta0, alpha, dof ("n-1" | "n-2" | "normal")
//   tau_w, tau_b       generative mode; or rho_w, rho_b for direct g-ICCs
//   p_a or lambda0, trend, c_star
//   methods            subset of ["wald", "sm", "tang"]
//   quad_order         nodes per quadrature panel
// plus "power" for /samplesize and "tau_w_values", "ratio_values" for
// /sensitivity.
using json = nlohmann::json;

PowerRequest parse_power_request(const json& body, bool need_n = true);

json power(const json& body);
json samplesize(const json& body);
json gicc(const json& body);
json sensitivity(const json& body);
json design_validate(const json& body);

json error_body(const std::string& code, const std::string& message,
                const std::string& field = {});

// Runs the named endpoint ("power", "samplesize", ...). Returns the HTTP
// status and the response body; validation failures map to 400.
std::pair<int, json> dispatch(const std::string& endpoint, const std::string& body);

}  // namespace swcrt::api
