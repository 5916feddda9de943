#pragma once

#include <complex>
#include <span>
#include <vector>

namespace gsbm {

using Complex = std::complex<double>;

/// Horner evaluation; coefficients are in ascending order (c[0] + c[1] x + ...).
template <typename T, typename Coeffs>
T poly_eval(const Coeffs& c, T x) {
  T acc{0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

/// Ascending coefficients of the derivative.
template <typename T>
std::vector<T> poly_derivative(std::span<const T> c) {
  if (c.size() <= 1) return {T{0.0}};
  std::vector<T> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

/// All complex roots of a polynomial (ascending coefficients) by
/// Aberth-Ehrlich simultaneous iteration with a Newton polish. Leading
/// coefficients below `drop_rel` times the largest magnitude are treated
/// as zero, so a nominal quartic with a vanishing leading term is solved
/// as a cubic.
std::vector<Complex> poly_roots(std::span<const Complex> c, double drop_rel = 1e-14);
std::vector<Complex> poly_roots(std::span<const double> c, double drop_rel = 1e-14);

}  // namespace gsbm
