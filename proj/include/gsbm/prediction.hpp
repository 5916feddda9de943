#pragma once

#include <optional>
#include <string>

#include "gsbm/model.hpp"
#include "gsbm/polynomial.hpp"

namespace gsbm {

enum class EdgeMethod { Discriminant, DensitySupportScan };

std::string to_string(EdgeMethod m);

struct EdgeResult {
  double l_plus = 0.0;
  /// (m1, mN) at the edge, where the quartic in m1 has its double root.
  std::pair<Complex, Complex> double_root_m;
  EdgeMethod method = EdgeMethod::Discriminant;
  double certified_window = 0.0;
};

/// Upper edge L+ of the limiting spectrum: the largest z at which the
/// physical real branch of the eliminated quartic meets another root.
/// `preferred` selects the first method tried; Discriminant falls back to
/// DensitySupportScan when it fails to bracket.
EdgeResult find_upper_edge(const GsbmSpec& spec,
                           EdgeMethod preferred = EdgeMethod::Discriminant);

struct OutlierPrediction {
  double lambda = 0.0;
  std::optional<double> z;  ///< limit of the top eigenvalue when supercritical
  double lambda_c = 0.0;
  std::optional<double> gap;  ///< z - L+
  double l_plus = 0.0;
  EdgeMethod method = EdgeMethod::Discriminant;
  bool marginal = false;
  std::string diagnostic;
};

/// Solves N(gamma m1 theta1^2 + (1-gamma) mN theta2^2) = -1/lambda for
/// real z above L+. The left side is increasing in z, so the root is
/// unique when it exists.
OutlierPrediction predict_outlier(const GsbmSpec& spec, double lambda);
OutlierPrediction predict_outlier(const GsbmSpec& spec, double lambda, const EdgeResult& edge);

/// Largest lambda for which no outlier separates from L+, by bisection.
double critical_lambda(const GsbmSpec& spec);
double critical_lambda(const GsbmSpec& spec, const EdgeResult& edge);

/// Closed-form lambda_c = -1 / (w1 m1* + w2 mN*) from the edge values.
double critical_lambda_closed_form(const GsbmSpec& spec, const EdgeResult& edge);

/// q + sqrt(q(1-q)) / (gamma sqrt(n))
double hidden_threshold(double q, double gamma, double n);
/// q + 2 sqrt(q(1-q)) / sqrt(n)
double unbalanced_threshold(double q, double n);
/// Limit of the top eigenvalue for the hidden community model with
/// p - q = w / sqrt(N); 2 at or below threshold.
double hidden_lambda1(double w, double q, double gamma);
/// Same for the unbalanced model.
double unbalanced_lambda1(double w, double q);

}  // namespace gsbm
