#include "gsbm/qve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gsbm/error.hpp"
#include "gsbm/format.hpp"

namespace gsbm {
namespace {

struct Pair {
  Complex m1;
  Complex mN;
};

bool in_upper(const Pair& p) { return p.m1.imag() > 0.0 && p.mN.imag() > 0.0; }

double defect_norm(const ReducedSystem& rs, Complex z, const Pair& p) {
  const auto f = rs.defect(z, p.m1, p.mN);
  return std::max(std::abs(f[0]), std::abs(f[1]));
}

Pair damped_step(const ReducedSystem& rs, Complex z, const Pair& p, double delta) {
  return {(1.0 - delta) * p.m1 - delta / (z + rs.a * p.m1 + rs.b * p.mN),
          (1.0 - delta) * p.mN - delta / (z + rs.c * p.m1 + rs.d * p.mN)};
}

// One Newton direction for the 2x2 system; false if the Jacobian is singular.
template <typename T>
bool newton_direction(const ReducedSystem& rs, T z, T m1, T mN, T& d1, T& dN) {
  const auto f = rs.defect(z, m1, mN);
  const T j11 = z + 2.0 * rs.a * m1 + rs.b * mN;
  const T j12 = rs.b * m1;
  const T j21 = rs.c * mN;
  const T j22 = z + rs.c * m1 + 2.0 * rs.d * mN;
  const T det = j11 * j22 - j12 * j21;
  if (std::abs(det) == 0.0) return false;
  d1 = -(j22 * f[0] - j12 * f[1]) / det;
  dN = -(-j21 * f[0] + j11 * f[1]) / det;
  return std::isfinite(std::abs(d1)) && std::isfinite(std::abs(dN));
}

// Damped fixed point, switching to guarded Newton once close. Every
// accepted iterate stays in the upper half-plane.
Pair iterate_upper(const ReducedSystem& rs, Complex z, Pair p, const QveOptions& o, int& iters,
                   double& res) {
  res = defect_norm(rs, z, p);
  for (int it = 0; it < o.max_iterations; ++it) {
    if (res <= o.tol) return p;
    ++iters;
    bool moved = false;
    if (res < 1e-2 || it >= 50) {
      Complex d1, dN;
      if (newton_direction(rs, z, p.m1, p.mN, d1, dN)) {
        double t = 1.0;
        for (int k = 0; k < 8 && !moved; ++k, t *= 0.5) {
          const Pair cand{p.m1 + t * d1, p.mN + t * dN};
          if (!in_upper(cand)) continue;
          const double r = defect_norm(rs, z, cand);
          if (r < res) {
            p = cand;
            res = r;
            moved = true;
          }
        }
      }
    }
    if (!moved) {
      p = damped_step(rs, z, p, o.damping);
      res = defect_norm(rs, z, p);
    }
  }
  if (res <= o.tol) return p;
  std::ostringstream os;
  os << "reduced QVE did not converge at z = (" << z.real() << ", " << z.imag() << ") after "
     << o.max_iterations << " iterations; last residual " << res;
  throw NumericalError(os.str(), res);
}

// Cold start: walk down from Im z = 1 so the fixed point starts where it
// contracts quickly, warm-starting each rung.
Pair cold_upper(const ReducedSystem& rs, Complex z, const QveOptions& o, int& iters,
                double& res) {
  std::vector<double> ladder;
  for (double eta = 1.0; eta > z.imag(); eta *= 0.1) ladder.push_back(eta);
  ladder.push_back(z.imag());
  Complex start_z{z.real(), ladder.front()};
  Pair p{-1.0 / start_z, -1.0 / start_z};
  for (double eta : ladder) p = iterate_upper(rs, {z.real(), eta}, p, o, iters, res);
  return p;
}

QveSolution make_solution(double gamma, Complex z, const Pair& p, double res, int iters) {
  return {z, p.m1, p.mN, gamma * p.m1 + (1.0 - gamma) * p.mN, res, iters};
}

double real_defect(const ReducedSystem& rs, double z, double m1, double mN) {
  const auto f = rs.defect(z, m1, mN);
  return std::max(std::abs(f[0]), std::abs(f[1]));
}

// Real Newton on the 2x2 system from a real starting point.
void polish_real(const ReducedSystem& rs, double z, double& m1, double& mN) {
  double res = real_defect(rs, z, m1, mN);
  for (int k = 0; k < 30 && res > 0.0; ++k) {
    double d1, dN;
    if (!newton_direction(rs, z, m1, mN, d1, dN)) return;
    const double r = real_defect(rs, z, m1 + d1, mN + dN);
    if (!(r < res)) return;
    m1 += d1;
    mN += dN;
    res = r;
  }
}

QveSolution solve_real(const GsbmSpec& spec, const ReducedSystem& rs, double x,
                       const QveOptions& o) {
  constexpr double etas[3] = {1e-2, 1e-4, 1e-6};
  Pair stage[3];
  int iters = 0;
  double res = 0.0;
  stage[0] = cold_upper(rs, {x, etas[0]}, o, iters, res);
  for (int s = 1; s < 3; ++s) stage[s] = iterate_upper(rs, {x, etas[s]}, stage[s - 1], o, iters, res);

  const auto avg_im = [&](const Pair& p) {
    return spec.gamma * p.m1.imag() + (1.0 - spec.gamma) * p.mN.imag();
  };
  const double coarse = avg_im(stage[1]);
  const double ratio = coarse > 0.0 ? avg_im(stage[2]) / coarse : 0.0;
  if (ratio > 0.1) {
    std::ostringstream os;
    os << "no real Herglotz continuation: z = " << x << " lies inside the support";
    throw NumericalError(os.str(), res);
  }

  // Outside the support m(x + i eta) = m(x) + O(eta) with purely imaginary
  // first-order term, so the real parts are even in eta to leading order.
  const double e2 = etas[1] * etas[1];
  const double e3 = etas[2] * etas[2];
  const auto extrapolate = [&](double r2, double r3) { return (e2 * r3 - e3 * r2) / (e2 - e3); };
  double m1 = extrapolate(stage[1].m1.real(), stage[2].m1.real());
  double mN = extrapolate(stage[1].mN.real(), stage[2].mN.real());

  double p1 = m1, pN = mN;
  polish_real(rs, x, p1, pN);
  if (rs.stability_radius(p1, pN) < 1.0 &&
      real_defect(rs, x, p1, pN) <= real_defect(rs, x, m1, mN)) {
    m1 = p1;
    mN = pN;
  }
  res = real_defect(rs, x, m1, mN);
  if (res > o.tol) {
    std::ostringstream os;
    os << "real-axis continuation at z = " << x << " left residual " << res;
    throw NumericalError(os.str(), res);
  }
  return make_solution(spec.gamma, {x, 0.0}, {m1, mN}, res, iters);
}

void require_upper(Complex z) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw ValidationError("spectral parameter must satisfy Im z > 0");
  }
}

}  // namespace

ReducedSystem ReducedSystem::from(const GsbmSpec& s) {
  return {s.alpha1 * s.gamma, 1.0 - s.gamma, s.gamma, s.alpha2 * (1.0 - s.gamma)};
}

double ReducedSystem::stability_radius(double m1, double mN) const {
  const double x = m1 * m1;
  const double y = mN * mN;
  const double tr = x * a + y * d;
  const double det = x * y * (a * d - b * c);
  return 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
}

QveSolution solve_reduced(const GsbmSpec& spec, Complex z, const QveOptions& opts) {
  validate_spec(spec);
  const auto rs = ReducedSystem::from(spec);
  if (z.imag() == 0.0) return solve_real(spec, rs, z.real(), opts);
  require_upper(z);
  int iters = 0;
  double res = 0.0;
  const Pair p = cold_upper(rs, z, opts, iters, res);
  return make_solution(spec.gamma, z, p, res, iters);
}

QveSolution solve_reduced(const GsbmSpec& spec, Complex z, const QveOptions& opts,
                          std::pair<Complex, Complex> warm_start) {
  validate_spec(spec);
  require_upper(z);
  const auto rs = ReducedSystem::from(spec);
  int iters = 0;
  double res = 0.0;
  Pair start{warm_start.first, warm_start.second};
  if (in_upper(start)) {
    try {
      const Pair p = iterate_upper(rs, z, start, opts, iters, res);
      return make_solution(spec.gamma, z, p, res, iters);
    } catch (const NumericalError&) {
    }
  }
  const Pair p = cold_upper(rs, z, opts, iters, res);
  return make_solution(spec.gamma, z, p, res, iters);
}

QveSolution solve_reduced_algebraic(const GsbmSpec& spec, Complex z) {
  validate_spec(spec);
  const auto rs = ReducedSystem::from(spec);
  if (z.imag() == 0.0) {
    const auto branch = physical_real_branch(spec, z.real());
    if (!branch) {
      std::ostringstream os;
      os << "no real Herglotz continuation: no physical real root at z = " << z.real();
      throw NumericalError(os.str(), 0.0);
    }
    const double res = real_defect(rs, z.real(), branch->m1, branch->mN);
    return make_solution(spec.gamma, z, {branch->m1, branch->mN}, res, 0);
  }
  require_upper(z);
  const auto coeffs = rs.quartic(z);
  bool found = false;
  Pair best{};
  double best_res = 0.0;
  for (const Complex& r : poly_roots(std::span<const Complex>(coeffs))) {
    if (r == Complex{}) continue;
    const Pair cand{r, rs.partner(z, r)};
    if (!in_upper(cand)) continue;
    const double res = defect_norm(rs, z, cand);
    if (!found || res < best_res) {
      best = cand;
      best_res = res;
      found = true;
    }
  }
  if (!found) throw NumericalError("no quartic root with both components in the upper half-plane", 0.0);
  for (int k = 0; k < 5; ++k) {
    Complex d1, dN;
    if (!newton_direction(rs, z, best.m1, best.mN, d1, dN)) break;
    const Pair cand{best.m1 + d1, best.mN + dN};
    const double res = defect_norm(rs, z, cand);
    if (!(res < best_res) || !in_upper(cand)) break;
    best = cand;
    best_res = res;
  }
  return make_solution(spec.gamma, z, best, best_res, 0);
}

std::optional<RealBranch> physical_real_branch(const GsbmSpec& spec, double z) {
  const auto rs = ReducedSystem::from(spec);
  const auto coeffs = rs.quartic(z);
  const std::vector<double> dcoef = poly_derivative<double>(coeffs);
  std::optional<RealBranch> best;
  for (const Complex& r : poly_roots(std::span<const double>(coeffs))) {
    if (std::abs(r.imag()) > 1e-7 * std::max(1.0, std::abs(r))) continue;
    double m1 = r.real();
    for (int k = 0; k < 3; ++k) {
      const double f = poly_eval(coeffs, m1);
      const double df = poly_eval(dcoef, m1);
      if (df == 0.0) break;
      const double cand = m1 - f / df;
      if (!(std::abs(poly_eval(coeffs, cand)) < std::abs(f))) break;
      m1 = cand;
    }
    if (!(m1 < 0.0)) continue;
    const double mN = rs.partner(z, m1);
    if (!(mN < 0.0)) continue;
    const double rho = rs.stability_radius(m1, mN);
    if (!(rho < 1.0)) continue;
    if (!best || rho < best->stability) best = RealBranch{m1, mN, rho};
  }
  return best;
}

double full_residual(const SymMatrix& profile, Complex z, const std::vector<Complex>& m) {
  const std::size_t n = profile.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Complex s{};
    const auto row = profile.row(i);
    for (std::size_t j = 0; j < n; ++j) s += row[j] * m[j];
    worst = std::max(worst, std::abs(1.0 + m[i] * (z + s)));
  }
  return worst;
}

std::vector<Complex> solve_full(const SymMatrix& profile, Complex z, const QveOptions& o) {
  require_upper(z);
  const auto n = static_cast<Eigen::Index>(profile.size());
  if (n == 0) throw ValidationError("empty variance profile");
  for (std::size_t i = 0; i < profile.size(); ++i) {
    for (std::size_t j = 0; j < profile.size(); ++j) {
      if (!(profile(i, j) >= 0.0) || !std::isfinite(profile(i, j))) {
        throw ValidationError("variance profile entries must be finite and nonnegative");
      }
    }
  }
  using MatC = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using VecC = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      s_real(profile.data().data(), n, n);
  const MatC s = s_real.cast<Complex>();

  const auto defect = [n](const VecC& m, const VecC& sm, Complex zz) {
    return (VecC::Ones(n) + m.cwiseProduct(VecC::Constant(n, zz) + sm)).eval();
  };
  const auto upper = [](const VecC& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (!(m[i].imag() > 0.0)) return false;
    return true;
  };

  std::vector<double> ladder;
  for (double eta = 1.0; eta > z.imag(); eta *= 0.1) ladder.push_back(eta);
  ladder.push_back(z.imag());

  VecC m = VecC::Constant(n, -1.0 / Complex{z.real(), ladder.front()});
  double res = 0.0;
  for (double eta : ladder) {
    const Complex zz{z.real(), eta};
    VecC sm = s * m;
    VecC f = defect(m, sm, zz);
    res = f.cwiseAbs().maxCoeff();
    int it = 0;
    for (; it < o.max_iterations && res > o.tol; ++it) {
      bool moved = false;
      if (res < 1e-2 || it >= 50) {
        MatC jac = m.asDiagonal() * s;
        jac.diagonal() += VecC::Constant(n, zz) + sm;
        const VecC step = -jac.partialPivLu().solve(f);
        double t = 1.0;
        for (int k = 0; k < 8 && !moved; ++k, t *= 0.5) {
          const VecC cand = m + t * step;
          if (!upper(cand)) continue;
          const VecC csm = s * cand;
          const VecC cf = defect(cand, csm, zz);
          const double r = cf.cwiseAbs().maxCoeff();
          if (r < res) {
            m = cand;
            sm = csm;
            f = cf;
            res = r;
            moved = true;
          }
        }
      }
      if (!moved) {
        const VecC inv = (VecC::Constant(n, zz) + sm).cwiseInverse();
        m = (1.0 - o.damping) * m - o.damping * inv;
        sm = s * m;
        f = defect(m, sm, zz);
        res = f.cwiseAbs().maxCoeff();
      }
    }
    if (res > o.tol) {
      std::ostringstream os;
      os << "full QVE did not converge at z = (" << zz.real() << ", " << zz.imag() << "); last residual "
         << res;
      throw NumericalError(os.str(), res);
    }
  }
  return {m.data(), m.data() + n};
}

DensityCurve density(const GsbmSpec& spec, double from, double to, std::size_t points, double eta,
                     const QveOptions& opts) {
  validate_spec(spec);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be positive");
  if (!std::isfinite(from) || !std::isfinite(to) || !(to > from)) {
    throw ValidationError("density grid requires finite from < to");
  }
  if (points < 2) throw ValidationError("density grid needs at least 2 points");
  DensityCurve out;
  out.eta = eta;
  out.grid.resize(points);
  out.rho.resize(points);
  const double h = (to - from) / static_cast<double>(points - 1);
  std::optional<std::pair<Complex, Complex>> warm;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = k + 1 == points ? to : from + h * static_cast<double>(k);
    const Complex z{x, eta};
    QveSolution sol;
    try {
      sol = warm ? solve_reduced(spec, z, opts, *warm) : solve_reduced(spec, z, opts);
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "density failed at grid point x = " << x << ": " << e.what();
      throw NumericalError(os.str(), e.last_residual());
    }
    warm = std::make_pair(sol.m1, sol.mN);
    out.grid[k] = x;
    out.rho[k] = std::max(0.0, sol.m_avg.imag() / std::numbers::pi);
  }
  return out;
}

void write_density_csv(const DensityCurve& curve, std::ostream& out, int precision) {
  out << "x,rho\n";
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    out << format_number(curve.grid[k], precision) << ',' << format_number(curve.rho[k], precision)
        << '\n';
  }
}

}  // namespace gsbm
