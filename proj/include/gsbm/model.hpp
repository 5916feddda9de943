#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace gsbm {

/// Limiting parameters of a two-block generalized stochastic block model
/// M = H + lambda * u u^T.
///
/// The planted set S is the index range [0, N1) with N1 = round(gamma * n).
/// The spike vector u is block constant: u_i = theta1 on S and theta2
/// elsewhere. When `n` is set the thetas are per-entry values and satisfy
/// gamma*n*theta1^2 + (1-gamma)*n*theta2^2 = 1. When `n` is empty the
/// factor 1/sqrt(N) is absorbed into the thetas, so that
/// gamma*theta1^2 + (1-gamma)*theta2^2 = 1.
struct GsbmSpec {
  double gamma = 0.5;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
  double lambda = 0.0;
  std::optional<std::int64_t> n;

  bool operator==(const GsbmSpec&) const = default;
};

enum class ShiftKind {
  HiddenCommunity,  ///< subtract q everywhere (requires p2 == q)
  Balanced,         ///< subtract (p + q)/2 everywhere (requires p1 == p2)
};

/// Raw Bernoulli block model: entries in the (1,1) block are Bernoulli(p1),
/// in the (2,2) block Bernoulli(p2), and Bernoulli(q) across blocks.
struct SbmParams {
  std::int64_t n = 0;
  std::int64_t n1 = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  double q = 0.0;
  bool zero_diagonal = true;
  ShiftKind shift = ShiftKind::HiddenCommunity;

  bool operator==(const SbmParams&) const = default;
};

/// Entry distribution of the noise matrix H. Every family is rescaled so
/// that E[H_ij^2] is alpha1/N, alpha2/N or 1/N according to the block.
struct NoiseKind {
  enum class Family { CenteredBernoulli, Gaussian, Rademacher };

  Family family = Family::Gaussian;
  // Block probabilities, used by CenteredBernoulli only.
  double q = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  // Empty means the family default: true for CenteredBernoulli, false
  // otherwise.
  std::optional<bool> zero_diagonal;

  static NoiseKind gaussian() { return {}; }
  static NoiseKind rademacher() {
    NoiseKind k;
    k.family = Family::Rademacher;
    return k;
  }
  static NoiseKind centered_bernoulli(double q, double p1, double p2) {
    NoiseKind k;
    k.family = Family::CenteredBernoulli;
    k.q = q;
    k.p1 = p1;
    k.p2 = p2;
    return k;
  }
  /// Bernoulli noise whose block probabilities are implied by the spec's
  /// variance ratios: p_i is the root <= 1/2 of p(1-p) = alpha_i q(1-q).
  /// Throws ValidationError when no such p lies in (0, 1).
  static NoiseKind bernoulli_implied(const GsbmSpec& spec, double q);

  bool resolved_zero_diagonal() const {
    return zero_diagonal.value_or(family == Family::CenteredBernoulli);
  }
};

enum class ShiftMatrixKind { E0, E1 };

/// The constant matrix subtracted from the adjacency matrix: every entry
/// equals `value`.
struct ShiftMatrix {
  ShiftMatrixKind kind = ShiftMatrixKind::E0;
  double value = 0.0;
};

struct SbmConversion {
  GsbmSpec spec;
  ShiftMatrix shift;
  double scale = 0.0;  ///< 1 / sqrt(N q (1 - q))
};

/// Returns `spec` unchanged if every invariant holds, otherwise throws
/// ValidationError naming the first violated invariant.
GsbmSpec validate_spec(const GsbmSpec& spec);

/// Checks sizes and probabilities; with `check_shift` also the pairing of
/// the shift kind with the probabilities.
void validate_sbm(const SbmParams& params, bool check_shift = true);

/// Shifted and rescaled form of a Bernoulli block model.
SbmConversion from_sbm(const SbmParams& params);

/// N1 = round(gamma * n). Requires spec.n.
std::int64_t block_size(const GsbmSpec& spec);

/// Weights (c1, c2) such that <u, D u> = c1*d1 + c2*d2 for any
/// block-constant diagonal D = diag(d1 on S, d2 off S). They sum to one
/// for a valid spec.
std::pair<double, double> spike_weights(const GsbmSpec& spec);

struct RealizedSpec {
  GsbmSpec spec;
  std::optional<std::string> warning;
};

/// Fixes the dimension of a spec. gamma*n is rounded to the nearest
/// integer N1, gamma is snapped to N1/n and the thetas are rescaled to keep
/// ||u|| = 1; a warning is attached when any snapping was needed. When the
/// input has no `n`, its thetas are read in the absorbed 1/sqrt(N) units.
RealizedSpec realize(const GsbmSpec& spec, std::int64_t n);

/// Balanced-block spec with alpha1 = alpha2 = 1 (pure semicircle noise)
/// and u = (1, ..., 1)/sqrt(N).
GsbmSpec homogeneous_spec(double gamma, double lambda,
                          std::optional<std::int64_t> n = std::nullopt);

}  // namespace gsbm
