#include "gsbm/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gsbm/error.hpp"

namespace gsbm {

std::vector<Complex> poly_roots(std::span<const double> coeffs, double drop_rel) {
  std::vector<Complex> c(coeffs.begin(), coeffs.end());
  return poly_roots(std::span<const Complex>(c), drop_rel);
}

std::vector<Complex> poly_roots(std::span<const Complex> coeffs, double drop_rel) {
  const Complex zero{0.0, 0.0};
  std::vector<Complex> c(coeffs.begin(), coeffs.end());
  double big = 0.0;
  for (const auto& v : c) big = std::max(big, std::abs(v));
  if (big == 0.0) throw NumericalError("poly_roots: zero polynomial");
  while (c.size() > 1 && std::abs(c.back()) <= drop_rel * big) c.pop_back();

  std::vector<Complex> roots;
  std::size_t lead_zeros = 0;
  while (lead_zeros + 1 < c.size() && c[lead_zeros] == zero) ++lead_zeros;
  roots.assign(lead_zeros, zero);
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lead_zeros));

  const std::size_t deg = c.size() - 1;
  if (deg == 0) return roots;
  if (deg == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }
  if (deg == 2) {
    const Complex disc = std::sqrt(c[1] * c[1] - 4.0 * c[2] * c[0]);
    // Pick the sign that adds magnitudes to avoid cancellation.
    const Complex s = std::real(std::conj(c[1]) * disc) >= 0.0 ? disc : -disc;
    const Complex qq = -0.5 * (c[1] + s);
    roots.push_back(qq / c[2]);
    roots.push_back(qq == zero ? zero : c[0] / qq);
    return roots;
  }

  const std::vector<Complex> dc = poly_derivative<Complex>(c);
  // Start on a circle whose radius is the geometric mean of the root moduli.
  const double radius = std::pow(std::abs(c[0] / c[deg]), 1.0 / static_cast<double>(deg));
  std::vector<Complex> z(deg);
  for (std::size_t k = 0; k < deg; ++k) {
    const double ang =
        2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(deg) + 0.4;
    z[k] = std::polar(radius > 0.0 ? radius : 1.0, ang);
  }

  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (std::size_t k = 0; k < deg; ++k) {
      const Complex p = poly_eval<Complex>(c, z[k]);
      if (p == zero) continue;
      const Complex ratio = p / poly_eval<Complex>(dc, z[k]);
      Complex repulse = zero;
      for (std::size_t j = 0; j < deg; ++j) {
        if (j != k) repulse += 1.0 / (z[k] - z[j]);
      }
      const Complex step = ratio / (1.0 - ratio * repulse);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
      z[k] -= step;
      worst = std::max(worst, std::abs(step) / std::max(1.0, std::abs(z[k])));
    }
    if (worst < 1e-16) break;
  }

  // Newton polish, keeping only steps that shrink the residual.
  for (auto& r : z) {
    for (int k = 0; k < 3; ++k) {
      const Complex p = poly_eval<Complex>(c, r);
      const Complex dp = poly_eval<Complex>(dc, r);
      if (dp == zero) break;
      const Complex cand = r - p / dp;
      if (std::abs(poly_eval<Complex>(c, cand)) < std::abs(p)) {
        r = cand;
      } else {
        break;
      }
    }
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

}  // namespace gsbm
