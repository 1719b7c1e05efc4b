#pragma once

// JSON form of measures:
//   {"type": "gaussian_mixture", "dim": 1, "components": [[w, mean, var], ...]}
//   {"type": "atomic", "dim": 1, "atoms": [[w, location], ...]}
//   {"type": "perturbed_1d", "alpha": 1, "lip": 1, "h_knots": [0],
//    "h_slopes": [-1, 1], "v_extra": [[knot, left, right, kink], ...]}
//   {"type": "counterexample", "psi": "linear", "coef": 1, "truncation": 60}
// Means and locations are numbers in 1D or arrays of length dim. Weights
// may be unnormalised.

#include <json.hpp>
#include <string>

#include "logheat/measures.hpp"

namespace logheat {

Measure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const Measure& m);
Measure load_measure(const std::string& path);

}  // namespace logheat
