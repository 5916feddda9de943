#include "gsbm/model.hpp"

#include <cmath>
#include <sstream>

#include "gsbm/error.hpp"

namespace gsbm {
namespace {

constexpr double kNormTolerance = 1e-12;

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

double implied_probability(double alpha, double q) {
  const double target = alpha * q * (1.0 - q);
  const double disc = 1.0 - 4.0 * target;
  if (!(disc > 0.0) || !(target > 0.0)) {
    std::ostringstream os;
    os << "implied Bernoulli probability for alpha=" << alpha << ", q=" << q
       << " does not lie in (0,1)";
    throw ValidationError(os.str());
  }
  return 0.5 * (1.0 - std::sqrt(disc));
}

}  // namespace

NoiseKind NoiseKind::bernoulli_implied(const GsbmSpec& spec, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("q must lie in (0,1)");
  return centered_bernoulli(q, implied_probability(spec.alpha1, q),
                            implied_probability(spec.alpha2, q));
}

GsbmSpec validate_spec(const GsbmSpec& spec) {
  if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) {
    throw ValidationError("gamma out of range: expected 0 < gamma < 1");
  }
  if (!(spec.alpha1 >= 0.0) || !(spec.alpha2 >= 0.0) || !std::isfinite(spec.alpha1) ||
      !std::isfinite(spec.alpha2)) {
    throw ValidationError("negative variance: alpha1 and alpha2 must be >= 0");
  }
  if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) {
    throw ValidationError("negative spike strength: lambda must be >= 0");
  }
  if (!std::isfinite(spec.theta1) || !std::isfinite(spec.theta2)) {
    throw ValidationError("theta values must be finite");
  }
  double norm = 0.0;
  if (spec.n) {
    const auto n = *spec.n;
    if (n < 4) throw ValidationError("dimension n must be at least 4");
    const auto n1 = std::llround(spec.gamma * static_cast<double>(n));
    if (n1 < 2 || n - n1 < 2) {
      throw ValidationError("block sizes must both be at least 2");
    }
    const double dn = static_cast<double>(n);
    norm = spec.gamma * dn * spec.theta1 * spec.theta1 +
           (1.0 - spec.gamma) * dn * spec.theta2 * spec.theta2;
  } else {
    norm = spec.gamma * spec.theta1 * spec.theta1 +
           (1.0 - spec.gamma) * spec.theta2 * spec.theta2;
  }
  if (std::abs(norm - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "normalization violated: ||u||^2 = " << norm;
    throw ValidationError(os.str());
  }
  return spec;
}

void validate_sbm(const SbmParams& p, bool check_shift) {
  if (p.n < 4) throw ValidationError("n must be at least 4");
  if (p.n1 < 2 || p.n1 > p.n - 2) throw ValidationError("n1 must satisfy 2 <= n1 <= n-2");
  if (!is_probability(p.p1) || !is_probability(p.p2) || !is_probability(p.q)) {
    throw ValidationError("p1, p2 and q must be probabilities in [0,1]");
  }
  if (!check_shift) return;
  switch (p.shift) {
    case ShiftKind::HiddenCommunity:
      if (p.p2 != p.q) {
        throw ValidationError("HiddenCommunity shift requires p2 == q");
      }
      break;
    case ShiftKind::Balanced:
      if (p.p1 != p.p2) throw ValidationError("Balanced shift requires p1 == p2");
      break;
  }
}

SbmConversion from_sbm(const SbmParams& p) {
  validate_sbm(p);
  if (!(p.q > 0.0 && p.q < 1.0)) {
    throw ValidationError("degenerate scale: q must lie strictly inside (0,1)");
  }
  const double n = static_cast<double>(p.n);
  const double qvar = p.q * (1.0 - p.q);
  SbmConversion out;
  out.scale = 1.0 / std::sqrt(n * qvar);

  GsbmSpec& s = out.spec;
  s.n = p.n;
  s.gamma = static_cast<double>(p.n1) / n;
  s.alpha1 = p.p1 * (1.0 - p.p1) / qvar;
  s.alpha2 = p.p2 * (1.0 - p.p2) / qvar;
  if (p.shift == ShiftKind::HiddenCommunity) {
    s.theta1 = 1.0 / std::sqrt(static_cast<double>(p.n1));
    s.theta2 = 0.0;
    s.lambda = static_cast<double>(p.n1) * (p.p1 - p.q) * out.scale;
    out.shift = {ShiftMatrixKind::E0, p.q};
  } else {
    s.theta1 = 1.0 / std::sqrt(n);
    s.theta2 = -s.theta1;
    s.lambda = n * (p.p1 - p.q) / 2.0 * out.scale;
    out.shift = {ShiftMatrixKind::E1, 0.5 * (p.p1 + p.q)};
  }
  if (s.lambda < 0.0) {
    throw ValidationError("planted probability below q gives a negative spike");
  }
  validate_spec(s);
  return out;
}

std::int64_t block_size(const GsbmSpec& spec) {
  if (!spec.n) throw ValidationError("spec has no dimension n");
  return std::llround(spec.gamma * static_cast<double>(*spec.n));
}

std::pair<double, double> spike_weights(const GsbmSpec& s) {
  const double scale = s.n ? static_cast<double>(*s.n) : 1.0;
  return {scale * s.gamma * s.theta1 * s.theta1,
          scale * (1.0 - s.gamma) * s.theta2 * s.theta2};
}

RealizedSpec realize(const GsbmSpec& spec, std::int64_t n) {
  if (n < 4) throw ValidationError("dimension n must be at least 4");
  RealizedSpec out{spec, std::nullopt};
  GsbmSpec& s = out.spec;
  const double dn = static_cast<double>(n);
  const double exact = spec.gamma * dn;
  const auto n1 = std::llround(exact);
  if (!spec.n) {
    s.theta1 = spec.theta1 / std::sqrt(dn);
    s.theta2 = spec.theta2 / std::sqrt(dn);
  } else if (*spec.n != n) {
    const double rescale = std::sqrt(static_cast<double>(*spec.n) / dn);
    s.theta1 *= rescale;
    s.theta2 *= rescale;
  }
  s.n = n;
  s.gamma = static_cast<double>(n1) / dn;
  const double norm = static_cast<double>(n1) * s.theta1 * s.theta1 +
                      static_cast<double>(n - n1) * s.theta2 * s.theta2;
  if (norm > 0.0) {
    const double fix = 1.0 / std::sqrt(norm);
    s.theta1 *= fix;
    s.theta2 *= fix;
  }
  if (std::abs(exact - static_cast<double>(n1)) > 1e-9) {
    std::ostringstream os;
    os << "gamma*n = " << exact << " is not an integer; rounded N1 to " << n1
       << " and renormalized theta";
    out.warning = os.str();
  }
  validate_spec(s);
  return out;
}

GsbmSpec homogeneous_spec(double gamma, double lambda, std::optional<std::int64_t> n) {
  GsbmSpec s;
  s.gamma = gamma;
  s.alpha1 = 1.0;
  s.alpha2 = 1.0;
  s.lambda = lambda;
  s.n = n;
  const double t = n ? 1.0 / std::sqrt(static_cast<double>(*n)) : 1.0;
  s.theta1 = t;
  s.theta2 = t;
  return s;
}

}  // namespace gsbm
