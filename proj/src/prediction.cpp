#include "gsbm/prediction.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gsbm/error.hpp"
#include "gsbm/qve.hpp"

namespace gsbm {
namespace {

constexpr double kScanEtaHi = 1e-6;
constexpr double kScanEtaLo = 1e-8;
constexpr double kDensityFloor = 1e-6;
constexpr double kMarginal = 1e-6;

double top_start(const ReducedSystem& rs) {
  const double rows = std::max(rs.a + rs.b, rs.c + rs.d);
  return 2.0 * std::sqrt(rows) + 1.0;
}

// Newton on f = 0, df/dm = 0 in (z, m1) from a point near the fold.
bool refine_fold(const ReducedSystem& rs, double& z, double& m) {
  double zz = z, mm = m;
  for (int it = 0; it < 40; ++it) {
    const auto c = rs.quartic(zz);
    const auto cz = rs.quartic_dz(zz);
    double f = 0, fm = 0, fz = 0, fmm = 0, fmz = 0;
    double pw = 1.0;  // mm^k
    for (int k = 0; k <= 4; ++k) {
      f += c[k] * pw;
      fz += cz[k] * pw;
      pw *= mm;
    }
    pw = 1.0;  // mm^(k-1)
    for (int k = 1; k <= 4; ++k) {
      fm += k * c[k] * pw;
      fmz += k * cz[k] * pw;
      pw *= mm;
    }
    pw = 1.0;  // mm^(k-2)
    for (int k = 2; k <= 4; ++k) {
      fmm += k * (k - 1) * c[k] * pw;
      pw *= mm;
    }
    const double det = fz * fmm - fm * fmz;
    if (det == 0.0 || !std::isfinite(det)) return false;
    const double dz = -(f * fmm - fm * fm) / det;
    const double dm = -(fz * fm - fmz * f) / det;
    zz += dz;
    mm += dm;
    if (!std::isfinite(zz) || !std::isfinite(mm)) return false;
    if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(zz)) &&
        std::abs(dm) <= 1e-15 * std::max(1.0, std::abs(mm))) {
      break;
    }
  }
  z = zz;
  m = mm;
  return true;
}

EdgeResult discriminant_edge(const GsbmSpec& spec) {
  const auto rs = ReducedSystem::from(spec);
  double hi = top_start(rs);
  for (int k = 0; k < 10 && !physical_real_branch(spec, hi); ++k) hi *= 2.0;
  if (!physical_real_branch(spec, hi)) {
    throw NumericalError("edge search: no physical real branch above the spectrum", 0.0);
  }
  const double step = 1e-3 * hi;
  const double floor = -hi;
  double lo = hi - step;
  while (physical_real_branch(spec, lo)) {
    hi = lo;
    lo -= step;
    if (lo < floor) throw NumericalError("edge search: physical branch never terminates", 0.0);
  }
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (physical_real_branch(spec, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const auto branch = physical_real_branch(spec, hi);
  EdgeResult out;
  out.method = EdgeMethod::Discriminant;
  out.certified_window = hi - lo;
  double z = hi;
  double m = branch->m1;
  if (refine_fold(rs, z, m) && std::abs(z - hi) <= 1e-6 && m < 0.0) {
    out.l_plus = z;
  } else {
    z = hi;
    m = branch->m1;
    out.l_plus = hi;
  }
  out.double_root_m = {Complex{m, 0.0}, Complex{rs.partner(z, m), 0.0}};
  return out;
}

double extrapolated_density(const GsbmSpec& spec, double x) {
  QveOptions o;
  o.tol = 1e-13;
  const auto hi = solve_reduced(spec, {x, kScanEtaHi}, o);
  const auto lo = solve_reduced(spec, {x, kScanEtaLo}, o, {hi.m1, hi.mN});
  const double r1 = hi.m_avg.imag() / std::numbers::pi;
  const double r2 = lo.m_avg.imag() / std::numbers::pi;
  return r2 - (r1 - r2) * kScanEtaLo / (kScanEtaHi - kScanEtaLo);
}

EdgeResult scan_edge(const GsbmSpec& spec) {
  const auto rs = ReducedSystem::from(spec);
  const double top = top_start(rs);
  const double step = 1e-3 * top;
  double hi = top;
  double lo = hi - step;
  while (extrapolated_density(spec, lo) <= kDensityFloor) {
    hi = lo;
    lo -= step;
    if (lo < -top) throw NumericalError("density scan found no support", 0.0);
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (extrapolated_density(spec, mid) > kDensityFloor) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  EdgeResult out;
  out.method = EdgeMethod::DensitySupportScan;
  out.l_plus = hi;
  out.certified_window = hi - lo;
  if (const auto br = physical_real_branch(spec, hi)) {
    out.double_root_m = {Complex{br->m1, 0.0}, Complex{br->mN, 0.0}};
  } else {
    const auto s = solve_reduced(spec, {hi, kScanEtaLo});
    out.double_root_m = {Complex{s.m1.real(), 0.0}, Complex{s.mN.real(), 0.0}};
  }
  return out;
}

// w1 m1 + w2 mN on the real axis above the edge.
double spike_transform(const GsbmSpec& spec, const EdgeResult& edge, double z) {
  const auto [w1, w2] = spike_weights(spec);
  if (const auto br = physical_real_branch(spec, z)) return w1 * br->m1 + w2 * br->mN;
  if (z - edge.l_plus < kMarginal) {
    return w1 * edge.double_root_m.first.real() + w2 * edge.double_root_m.second.real();
  }
  const auto s = solve_reduced(spec, {z, 0.0});
  return w1 * s.m1.real() + w2 * s.mN.real();
}

double edge_transform(const GsbmSpec& spec, const EdgeResult& edge) {
  const auto [w1, w2] = spike_weights(spec);
  return w1 * edge.double_root_m.first.real() + w2 * edge.double_root_m.second.real();
}

void require_probability(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("degenerate q: expected 0 < q < 1");
}

}  // namespace

std::string to_string(EdgeMethod m) {
  return m == EdgeMethod::Discriminant ? "Discriminant" : "DensitySupportScan";
}

EdgeResult find_upper_edge(const GsbmSpec& spec, EdgeMethod preferred) {
  validate_spec(spec);
  if (preferred == EdgeMethod::DensitySupportScan) return scan_edge(spec);
  try {
    return discriminant_edge(spec);
  } catch (const NumericalError&) {
    return scan_edge(spec);
  }
}

double critical_lambda_closed_form(const GsbmSpec& spec, const EdgeResult& edge) {
  const double a = edge_transform(spec, edge);
  if (!(a < 0.0)) return std::numeric_limits<double>::infinity();
  return -1.0 / a;
}

double critical_lambda(const GsbmSpec& spec) { return critical_lambda(spec, find_upper_edge(spec)); }

double critical_lambda(const GsbmSpec& spec, const EdgeResult& edge) {
  validate_spec(spec);
  const double a = edge_transform(spec, edge);
  // Supercritical iff the constraint is already violated at the edge,
  // since the spike transform only grows above it.
  const auto supercritical = [&](double lambda) { return a + 1.0 / lambda < 0.0; };
  double lo = 0.0;
  double hi = 1.0;
  while (!supercritical(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw NumericalError("critical lambda: no supercritical strength found", 0.0);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (supercritical(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OutlierPrediction predict_outlier(const GsbmSpec& spec, double lambda) {
  return predict_outlier(spec, lambda, find_upper_edge(spec));
}

OutlierPrediction predict_outlier(const GsbmSpec& spec, double lambda, const EdgeResult& edge) {
  validate_spec(spec);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("negative spike strength: lambda must be >= 0");
  }
  OutlierPrediction out;
  out.lambda = lambda;
  out.l_plus = edge.l_plus;
  out.method = edge.method;
  out.lambda_c = critical_lambda(spec, edge);
  if (lambda == 0.0) {
    out.diagnostic = "lambda = 0 is subcritical";
    return out;
  }
  const double target = 1.0 / lambda;
  if (edge_transform(spec, edge) + target >= 0.0) {
    out.diagnostic = "subcritical: constraint has no root above the edge";
    return out;
  }
  double lo = edge.l_plus + 1e-9;
  double hi = std::max(edge.l_plus + 100.0, 2.0 * lambda + 2.0);
  if (spike_transform(spec, edge, lo) + target >= 0.0) {
    out.marginal = true;
    out.diagnostic = "marginal: root within 1e-9 of the edge";
    return out;
  }
  if (spike_transform(spec, edge, hi) + target <= 0.0) {
    std::ostringstream os;
    os << "no sign change of the constraint on (" << lo << ", " << hi << "]";
    out.diagnostic = os.str();
    return out;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (spike_transform(spec, edge, mid) + target < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double z = 0.5 * (lo + hi);
  if (z - edge.l_plus < kMarginal) {
    out.marginal = true;
    out.diagnostic = "marginal: root within 1e-6 of the edge, reported subcritical";
    return out;
  }
  out.z = z;
  out.gap = z - edge.l_plus;
  return out;
}

double hidden_threshold(double q, double gamma, double n) {
  require_probability(q);
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma out of range: expected 0 < gamma <= 1");
  if (!(n > 0.0)) throw ValidationError("n must be positive");
  return q + std::sqrt(q * (1.0 - q)) / (gamma * std::sqrt(n));
}

double unbalanced_threshold(double q, double n) {
  require_probability(q);
  if (!(n > 0.0)) throw ValidationError("n must be positive");
  return q + 2.0 * std::sqrt(q * (1.0 - q)) / std::sqrt(n);
}

namespace {
double bbp_limit(double lambda) { return lambda > 1.0 ? lambda + 1.0 / lambda : 2.0; }
}  // namespace

double hidden_lambda1(double w, double q, double gamma) {
  require_probability(q);
  if (!(w > 0.0)) throw ValidationError("w must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma out of range: expected 0 < gamma <= 1");
  return bbp_limit(gamma * w / std::sqrt(q * (1.0 - q)));
}

double unbalanced_lambda1(double w, double q) {
  require_probability(q);
  if (!(w > 0.0)) throw ValidationError("w must be positive");
  return bbp_limit(w / (2.0 * std::sqrt(q * (1.0 - q))));
}

}  // namespace gsbm
