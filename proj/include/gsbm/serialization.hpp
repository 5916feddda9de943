#pragma once

#include <json.hpp>

#include "gsbm/model.hpp"
#include "gsbm/prediction.hpp"

namespace gsbm {

// Spec objects use the keys {gamma, alpha1, alpha2, theta1, theta2,
// lambda, n}; SbmParams {n, n1, p1, p2, q, zero_diagonal, shift}. Parsing
// rejects unknown keys and missing required keys with ValidationError.

void to_json(nlohmann::json& j, const GsbmSpec& s);
void from_json(const nlohmann::json& j, GsbmSpec& s);

void to_json(nlohmann::json& j, const SbmParams& p);
void from_json(const nlohmann::json& j, SbmParams& p);

void to_json(nlohmann::json& j, const NoiseKind& k);

std::string to_string(ShiftKind s);
ShiftKind parse_shift(const std::string& s);

/// {l_plus, double_root_m1, double_root_mN, method, certified_window}
nlohmann::json edge_json(const EdgeResult& e);

/// {lambda, lambda_c, l_plus, z, gap, method, marginal}; z and gap are null
/// when subcritical.
nlohmann::json prediction_json(const OutlierPrediction& p);

}  // namespace gsbm
