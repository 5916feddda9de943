#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "gsbm/model.hpp"
#include "gsbm/polynomial.hpp"
#include "gsbm/sym_matrix.hpp"

namespace gsbm {

/// Block-constant solution of the quadratic vector equation
/// -1/m_i = z + sum_j S_ij m_j at one spectral parameter.
struct QveSolution {
  Complex z;
  Complex m1;     ///< common value on the planted block
  Complex mN;     ///< common value on the complement
  Complex m_avg;  ///< gamma*m1 + (1-gamma)*mN, the Stieltjes transform of the limiting ESD
  double residual = 0.0;
  int iterations = 0;
};

struct QveOptions {
  double tol = 1e-10;
  double damping = 0.5;
  int max_iterations = 10000;
};

/// Solves the two-block system
///   -1 = z m1 + alpha1 gamma m1^2 + (1-gamma) m1 mN
///   -1 = z mN + gamma m1 mN + alpha2 (1-gamma) mN^2
/// by damped fixed-point iteration with guarded Newton acceleration.
///
/// For Im z > 0 the result is the unique solution with Im m1, Im mN > 0.
/// For real z the solution is continued from z + i*eta with
/// eta in {1e-2, 1e-4, 1e-6}, Richardson-extrapolated to eta = 0 and
/// polished; a NumericalError is thrown when z lies inside the support.
QveSolution solve_reduced(const GsbmSpec& spec, Complex z, const QveOptions& opts = {});

/// Same as above, starting the iteration from (m1, mN). Im z must be > 0.
QveSolution solve_reduced(const GsbmSpec& spec, Complex z, const QveOptions& opts,
                          std::pair<Complex, Complex> warm_start);

/// Independent algebraic route: picks the root of the eliminated quartic
/// whose pair (m1, mN) lies in the upper half-plane (Im z > 0), or the
/// physical real branch (real z above the spectrum).
QveSolution solve_reduced_algebraic(const GsbmSpec& spec, Complex z);

/// Solves the full N-dimensional equation for an arbitrary nonnegative
/// variance profile S. Requires Im z > 0.
std::vector<Complex> solve_full(const SymMatrix& profile, Complex z, const QveOptions& opts = {});

/// max_i |1 + m_i (z + (S m)_i)|
double full_residual(const SymMatrix& profile, Complex z, const std::vector<Complex>& m);

/// Limiting spectral density sampled as rho(x) = Im m_avg(x + i eta) / pi.
struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> rho;
  double eta = 1e-4;
};

DensityCurve density(const GsbmSpec& spec, double from, double to, std::size_t points = 600,
                     double eta = 1e-4, const QveOptions& opts = {});

/// CSV with header "x,rho".
void write_density_csv(const DensityCurve& curve, std::ostream& out, int precision = 17);

// ---------------------------------------------------------------------------
// Reduced-system algebra shared with the prediction module.

/// Coefficients of the reduced system written as
///   0 = 1 + z m1 + a m1^2 + b m1 mN
///   0 = 1 + z mN + c m1 mN + d mN^2
/// with a = alpha1*gamma, b = 1-gamma, c = gamma, d = alpha2*(1-gamma).
struct ReducedSystem {
  double a, b, c, d;

  static ReducedSystem from(const GsbmSpec& spec);

  template <typename T>
  std::array<T, 2> defect(T z, T m1, T mN) const {
    return {T(1.0) + z * m1 + a * m1 * m1 + b * m1 * mN,
            T(1.0) + z * mN + c * m1 * mN + d * mN * mN};
  }

  /// mN from the first equation for given m1 (m1 != 0).
  template <typename T>
  T partner(T z, T m1) const {
    return -(T(1.0) + z * m1 + a * m1 * m1) / (b * m1);
  }

  /// Ascending coefficients in m1 of the polynomial f(z, m1) obtained by
  /// eliminating mN: f = d P^2 - b P m1 (z + c m1) + b^2 m1^2 with
  /// P = 1 + z m1 + a m1^2.
  template <typename T>
  std::array<T, 5> quartic(T z) const {
    return {T(d),
            (2.0 * d - b) * z,
            d * (z * z + 2.0 * a) - b * (z * z + c) + b * b,
            (2.0 * a * d - b * (a + c)) * z,
            T(a * (a * d - b * c))};
  }

  /// d/dz of the quartic coefficients (real z).
  std::array<double, 5> quartic_dz(double z) const {
    return {0.0, 2.0 * d - b, 2.0 * (d - b) * z, 2.0 * a * d - b * (a + c), 0.0};
  }

  /// Perron root of diag(m1^2, mN^2) * [[a, b], [c, d]]. Below one on the
  /// physical branch outside the support, equal to one at a spectral edge.
  double stability_radius(double m1, double mN) const;
};

struct RealBranch {
  double m1;
  double mN;
  double stability;
};

/// Physical real solution for real z above the top of the support, chosen
/// among the real roots of the quartic as the one with m1, mN < 0 and
/// stability radius < 1. Empty when no such root exists (z inside or at
/// the edge of the support).
std::optional<RealBranch> physical_real_branch(const GsbmSpec& spec, double z);

}  // namespace gsbm
