#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gsbm/model.hpp"
#include "gsbm/polynomial.hpp"
#include "gsbm/prediction.hpp"
#include "gsbm/sym_matrix.hpp"

namespace gsbm {

struct Eigensystem {
  std::vector<double> values;                ///< all eigenvalues, descending
  std::vector<std::vector<double>> vectors;  ///< unit eigenvectors of values[0..k)
};

/// Full spectrum of a dense symmetric matrix (Householder reduction to
/// tridiagonal form, implicit-shift QL) plus the `want_vectors` leading
/// eigenvectors by inverse iteration on the tridiagonal matrix.
Eigensystem eigen_symmetric(const SymMatrix& mat, std::size_t want_vectors = 0);

/// Spectral measure of `mat` seen from `u`: eigenvalues (descending) and
/// the weights <u, v_k>^2. Costs one reduction, no eigenvectors.
struct SpectralMeasure {
  std::vector<double> values;
  std::vector<double> weights;
};

SpectralMeasure spectral_measure(const SymMatrix& mat, std::span<const double> u);

/// <u, (H - z)^-1 u> = sum_k w_k / (mu_k - z). Real z must stay at least
/// 1e-6 away from every eigenvalue.
double resolvent_quadratic_form(const SpectralMeasure& measure, double z);
Complex resolvent_quadratic_form(const SpectralMeasure& measure, Complex z);
double resolvent_quadratic_form(const SymMatrix& h, std::span<const double> u, double z);

struct SpectralReport {
  std::vector<double> eigenvalues_m;
  std::optional<std::vector<double>> eigenvalues_h;
  std::optional<std::vector<double>> top_vector;
  double gap = 0.0;  ///< lambda_1 - lambda_2
  std::optional<OutlierPrediction> predicted;
};

SpectralReport make_report(const SymMatrix& m, const SymMatrix* h = nullptr,
                           bool want_top_vector = false);

struct InterlacingCheck {
  bool holds = false;
  double worst_margin = 0.0;  ///< smallest margin over the whole chain
};

/// mu_{k+1} <= lambda_{k+1} <= mu_k for every k (and lambda_n >= mu_n),
/// the rank-one interlacing of M = H + lambda u u^T with lambda >= 0.
InterlacingCheck check_interlacing(const SpectralReport& report, double slack = 1e-9);

struct SpikeBoundCheck {
  bool holds = false;
  double lower_margin = 0.0;  ///< lambda_1 - (lambda - mu_1)
  double upper_margin = 0.0;  ///< (lambda + mu_1) - lambda_1
};

/// lambda - mu_1 <= lambda_1 <= lambda + mu_1.
SpikeBoundCheck check_spike_bounds(const SpectralReport& report, double lambda,
                                   double slack = 1e-9);

struct LocalLawReport {
  Complex empirical;  ///< <u, G(z) u>
  Complex predicted;  ///< N1 theta1^2 m1 + (N - N1) theta2^2 mN
  double deviation = 0.0;
  double reference = 0.0;  ///< (1 + sqrt(rho)) / sqrt(N b) + 1 / (N b)
  double threshold = 0.0;  ///< N^0.1 * reference
  bool flagged = false;
};

/// Compares the quadratic form of the resolvent with its deterministic
/// approximation. Requires spec.n and Im z >= N^-0.9.
LocalLawReport check_local_law(const SymMatrix& h, const GsbmSpec& spec, std::span<const double> u,
                               Complex z);
LocalLawReport check_local_law(const SpectralMeasure& measure, const GsbmSpec& spec, Complex z);

struct Communities {
  std::vector<int> labels;  ///< +1 / -1
  double overlap = 0.0;
};

/// Labels from the top eigenvector of the shifted matrix: its sign pattern
/// when theta1 and theta2 have opposite signs, otherwise a two-means split
/// of its entries at the midpoint of the cluster means.
Communities detect_communities(const SymMatrix& m, const GsbmSpec& spec);
Communities detect_communities(std::span<const double> top_vector, const GsbmSpec& spec);

/// Cohen's kappa between labels and the planted partition (+1 on the
/// first N1 indices), maximized over a global label flip and clipped to
/// [0, 1].
double overlap(std::span<const int> labels, std::int64_t n1);

}  // namespace gsbm
