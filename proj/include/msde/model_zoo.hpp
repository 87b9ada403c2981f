#pragma once

#include <map>
#include <string>
#include <vector>

#include "msde/model.hpp"

namespace msde {

using ParamMap = std::map<std::string, double>;

/// Construct a named model with analytic derivatives wired to the orders its
/// coefficients support, plus hyperdual evaluators for forward-AD mode.
/// Known names: ginzburg_landau, duffing_van_der_pol, lorenz, gbm, ou,
/// brownian, kinetic. Unknown names or invalid parameters throw ConfigError.
SdeModel model_zoo(const std::string& name, const ParamMap& params = {});

std::vector<std::string> model_zoo_names();

}  // namespace msde
