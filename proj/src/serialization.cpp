#include "gsbm/serialization.hpp"

#include <set>

#include "gsbm/error.hpp"

namespace gsbm {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ValidationError(std::string("unknown key '") + key + "' in " + what);
  }
}

template <typename T>
T required(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "' in " + what);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("key '") + key + "' in " + what + " has the wrong type");
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void to_json(json& j, const GsbmSpec& s) {
  j = json{{"gamma", s.gamma},   {"alpha1", s.alpha1}, {"alpha2", s.alpha2}, {"theta1", s.theta1},
           {"theta2", s.theta2}, {"lambda", s.lambda}, {"n", s.n ? json(*s.n) : json(nullptr)}};
}

void from_json(const json& j, GsbmSpec& s) {
  constexpr const char* what = "spec";
  check_keys(j, {"gamma", "alpha1", "alpha2", "theta1", "theta2", "lambda", "n"}, what);
  s.gamma = required<double>(j, "gamma", what);
  s.alpha1 = required<double>(j, "alpha1", what);
  s.alpha2 = required<double>(j, "alpha2", what);
  s.theta1 = required<double>(j, "theta1", what);
  s.theta2 = required<double>(j, "theta2", what);
  s.lambda = required<double>(j, "lambda", what);
  if (j.contains("n") && !j.at("n").is_null()) {
    s.n = required<std::int64_t>(j, "n", what);
  } else {
    s.n.reset();
  }
}

std::string to_string(ShiftKind s) { return s == ShiftKind::HiddenCommunity ? "HiddenCommunity" : "Balanced"; }

ShiftKind parse_shift(const std::string& s) {
  if (s == "HiddenCommunity" || s == "hidden") return ShiftKind::HiddenCommunity;
  if (s == "Balanced" || s == "balanced" || s == "unbalanced") return ShiftKind::Balanced;
  throw ValidationError("unknown shift '" + s + "'");
}

void to_json(json& j, const SbmParams& p) {
  j = json{{"n", p.n},   {"n1", p.n1}, {"p1", p.p1},
           {"p2", p.p2}, {"q", p.q},   {"zero_diagonal", p.zero_diagonal},
           {"shift", to_string(p.shift)}};
}

void from_json(const json& j, SbmParams& p) {
  constexpr const char* what = "sbm params";
  check_keys(j, {"n", "n1", "p1", "p2", "q", "zero_diagonal", "shift"}, what);
  p.n = required<std::int64_t>(j, "n", what);
  p.n1 = required<std::int64_t>(j, "n1", what);
  p.p1 = required<double>(j, "p1", what);
  p.p2 = required<double>(j, "p2", what);
  p.q = required<double>(j, "q", what);
  p.zero_diagonal = j.contains("zero_diagonal") ? required<bool>(j, "zero_diagonal", what) : true;
  p.shift = parse_shift(required<std::string>(j, "shift", what));
}

void to_json(json& j, const NoiseKind& k) {
  switch (k.family) {
    case NoiseKind::Family::Gaussian:
      j = json{{"family", "gaussian"}};
      break;
    case NoiseKind::Family::Rademacher:
      j = json{{"family", "rademacher"}};
      break;
    case NoiseKind::Family::CenteredBernoulli:
      j = json{{"family", "bernoulli"}, {"q", k.q}, {"p1", k.p1}, {"p2", k.p2}};
      break;
  }
  j["zero_diagonal"] = k.resolved_zero_diagonal();
}

json edge_json(const EdgeResult& e) {
  return json{{"l_plus", e.l_plus},
              {"double_root_m1", e.double_root_m.first.real()},
              {"double_root_mN", e.double_root_m.second.real()},
              {"method", to_string(e.method)},
              {"certified_window", e.certified_window}};
}

json prediction_json(const OutlierPrediction& p) {
  return json{{"lambda", p.lambda}, {"lambda_c", p.lambda_c},       {"l_plus", p.l_plus},
              {"z", optional_number(p.z)}, {"gap", optional_number(p.gap)},
              {"method", to_string(p.method)}, {"marginal", p.marginal}};
}

}  // namespace gsbm
