#include "gsbm/spectra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gsbm/error.hpp"
#include "gsbm/qve.hpp"

namespace gsbm {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Reduction {
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri;
  std::vector<double> diag;
  std::vector<double> sub;  // sub[k] = T(k+1, k)
};

Reduction reduce(const SymMatrix& mat) {
  if (!mat.all_finite()) throw ValidationError("matrix has non-finite entries");
  const auto n = static_cast<Eigen::Index>(mat.size());
  if (n == 0) throw ValidationError("empty matrix");
  const Eigen::Map<const RowMat> view(mat.data().data(), n, n);
  Reduction r{Eigen::Tridiagonalization<Eigen::MatrixXd>(Eigen::MatrixXd(view)), {}, {}};
  const Eigen::VectorXd d = r.tri.diagonal();
  const Eigen::VectorXd s = r.tri.subDiagonal();
  r.diag.assign(d.data(), d.data() + n);
  r.sub.assign(s.data(), s.data() + (n - 1));
  return r;
}

// Implicit-shift QL on a symmetric tridiagonal matrix. On exit `d` holds
// the eigenvalues (unordered). If `track` is non-empty it is rotated along
// with the eigenvector matrix, ending as track^T Z.
void tridiagonal_ql(std::vector<double>& d, std::vector<double> e, std::vector<double>& track) {
  const int n = static_cast<int>(d.size());
  e.resize(n, 0.0);
  e[n - 1] = 0.0;
  const bool with_track = !track.empty();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericalError("QL iteration failed to converge", std::abs(e[l]));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          e[i + 1] = (r = std::hypot(f, g));
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          d[i + 1] = g + (p = s * r);
          g = c * r - b;
          if (with_track) {
            f = track[i + 1];
            track[i + 1] = s * track[i] + c * f;
            track[i] = c * track[i] - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

std::vector<std::size_t> descending_order(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return idx;
}

// LU factorization with partial pivoting of T - sigma I (LAPACK dgttrf
// layout), used for inverse iteration.
struct TridiagonalLu {
  std::vector<double> dl, d, du, du2;
  std::vector<char> swapped;

  TridiagonalLu(const std::vector<double>& diag, const std::vector<double>& sub, double sigma,
                double tiny) {
    const std::size_t n = diag.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - sigma;
    dl = sub;
    du = sub;
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped.assign(n > 1 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
  }

  void solve(std::vector<double>& x) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= dl[i] * x[i];
    }
    x[n - 1] /= d[n - 1];
    if (n < 2) return;
    x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t k = n - 2; k-- > 0;) {
      x[k] = (x[k] - du[k] * x[k + 1] - du2[k] * x[k + 2]) / d[k];
    }
  }
};

double normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0)
    for (double& x : v) x /= s;
  return s;
}

// Eigenvectors of the tridiagonal matrix for `wanted` (descending)
// eigenvalues by inverse iteration; vectors in a cluster are kept
// orthogonal to each other.
std::vector<std::vector<double>> tridiagonal_vectors(const std::vector<double>& diag,
                                                     const std::vector<double>& sub,
                                                     const std::vector<double>& wanted) {
  const std::size_t n = diag.size();
  double tnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double row = std::abs(diag[i]) + (i > 0 ? std::abs(sub[i - 1]) : 0.0) +
                       (i + 1 < n ? std::abs(sub[i]) : 0.0);
    tnorm = std::max(tnorm, row);
  }
  if (tnorm == 0.0) tnorm = 1.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double pertol = 10.0 * eps * tnorm;
  const double ortol = 1e-3 * tnorm;

  std::vector<std::vector<double>> out;
  std::size_t cluster_start = 0;
  double prev_sigma = 0.0;
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    double sigma = wanted[k];
    if (k > 0) {
      if (wanted[k - 1] - wanted[k] > ortol) cluster_start = k;
      if (prev_sigma - sigma < pertol) sigma = prev_sigma - pertol;
    }
    prev_sigma = sigma;
    const TridiagonalLu lu(diag, sub, sigma, eps * tnorm);
    std::vector<double> y(n);
    // deterministic start vector with no special structure
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3 * static_cast<double>(k));
    }
    normalize(y);
    for (int it = 0; it < 5; ++it) {
      lu.solve(y);
      for (std::size_t j = cluster_start; j < k; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += out[j][i] * y[i];
        for (std::size_t i = 0; i < n; ++i) y[i] -= dot * out[j][i];
      }
      const double growth = normalize(y);
      if (growth * eps * tnorm > 1.0 && it >= 1) break;
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace

Eigensystem eigen_symmetric(const SymMatrix& mat, std::size_t want_vectors) {
  const std::size_t n = mat.size();
  if (want_vectors > n) throw ValidationError("more eigenvectors requested than the dimension");
  Reduction r = reduce(mat);
  std::vector<double> values = r.diag;
  std::vector<double> none;
  tridiagonal_ql(values, r.sub, none);
  std::sort(values.begin(), values.end(), std::greater<>());

  Eigensystem out;
  out.values = values;
  if (want_vectors == 0) return out;
  const std::vector<double> wanted(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(want_vectors));
  const auto ys = tridiagonal_vectors(r.diag, r.sub, wanted);
  const auto q = r.tri.matrixQ();
  for (const auto& y : ys) {
    const Eigen::VectorXd v = q * Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
    std::vector<double> vec(v.data(), v.data() + n);
    normalize(vec);
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

SpectralMeasure spectral_measure(const SymMatrix& mat, std::span<const double> u) {
  const std::size_t n = mat.size();
  if (u.size() != n) throw ValidationError("dimension mismatch between matrix and vector");
  Reduction r = reduce(mat);
  // Q^T u, the spike seen in the tridiagonal basis
  const Eigen::VectorXd proj =
      r.tri.matrixQ().transpose() * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(n));
  std::vector<double> track(proj.data(), proj.data() + n);
  std::vector<double> values = r.diag;
  tridiagonal_ql(values, r.sub, track);
  const auto order = descending_order(values);
  SpectralMeasure out;
  out.values.reserve(n);
  out.weights.reserve(n);
  for (std::size_t k : order) {
    out.values.push_back(values[k]);
    out.weights.push_back(track[k] * track[k]);
  }
  return out;
}

double resolvent_quadratic_form(const SpectralMeasure& measure, double z) {
  double sum = 0.0;
  for (std::size_t k = 0; k < measure.values.size(); ++k) {
    const double diff = measure.values[k] - z;
    if (std::abs(diff) < 1e-6) {
      std::ostringstream os;
      os << "z = " << z << " is within 1e-6 of the eigenvalue " << measure.values[k];
      throw ValidationError(os.str());
    }
    sum += measure.weights[k] / diff;
  }
  return sum;
}

Complex resolvent_quadratic_form(const SpectralMeasure& measure, Complex z) {
  if (z.imag() == 0.0) return resolvent_quadratic_form(measure, z.real());
  Complex sum{};
  for (std::size_t k = 0; k < measure.values.size(); ++k) sum += measure.weights[k] / (measure.values[k] - z);
  return sum;
}

double resolvent_quadratic_form(const SymMatrix& h, std::span<const double> u, double z) {
  return resolvent_quadratic_form(spectral_measure(h, u), z);
}

SpectralReport make_report(const SymMatrix& m, const SymMatrix* h, bool want_top_vector) {
  SpectralReport out;
  auto es = eigen_symmetric(m, want_top_vector ? 1 : 0);
  out.eigenvalues_m = std::move(es.values);
  if (want_top_vector) out.top_vector = std::move(es.vectors.front());
  out.gap = out.eigenvalues_m.size() > 1 ? out.eigenvalues_m[0] - out.eigenvalues_m[1] : 0.0;
  if (h) {
    if (h->size() != m.size()) throw ValidationError("dimension mismatch between M and H");
    out.eigenvalues_h = eigen_symmetric(*h).values;
  }
  return out;
}

InterlacingCheck check_interlacing(const SpectralReport& report, double slack) {
  if (!report.eigenvalues_h) throw ValidationError("interlacing check needs the spectrum of H");
  const auto& lam = report.eigenvalues_m;
  const auto& mu = *report.eigenvalues_h;
  if (lam.size() != mu.size() || lam.empty()) throw ValidationError("dimension mismatch between spectra");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lam.size(); ++k) {
    worst = std::min(worst, lam[k] - mu[k]);
    if (k > 0) worst = std::min(worst, mu[k - 1] - lam[k]);
  }
  return {worst >= -slack, worst};
}

SpikeBoundCheck check_spike_bounds(const SpectralReport& report, double lambda, double slack) {
  if (!report.eigenvalues_h) throw ValidationError("spike bounds need the spectrum of H");
  const double l1 = report.eigenvalues_m.front();
  const double mu1 = report.eigenvalues_h->front();
  SpikeBoundCheck out;
  out.lower_margin = l1 - (lambda - mu1);
  out.upper_margin = (lambda + mu1) - l1;
  out.holds = out.lower_margin >= -slack && out.upper_margin >= -slack;
  return out;
}

LocalLawReport check_local_law(const SymMatrix& h, const GsbmSpec& spec, std::span<const double> u,
                               Complex z) {
  return check_local_law(spectral_measure(h, u), spec, z);
}

LocalLawReport check_local_law(const SpectralMeasure& measure, const GsbmSpec& spec, Complex z) {
  validate_spec(spec);
  if (!spec.n) throw ValidationError("local law check needs a spec with dimension n");
  const double n = static_cast<double>(*spec.n);
  if (measure.values.size() != static_cast<std::size_t>(*spec.n)) {
    throw ValidationError("dimension mismatch between spectrum and spec");
  }
  const double b = z.imag();
  if (!(b >= std::pow(n, -0.9))) throw ValidationError("local law check needs Im z >= N^-0.9");
  const auto sol = solve_reduced(spec, z);
  const auto [w1, w2] = spike_weights(spec);
  LocalLawReport out;
  out.empirical = resolvent_quadratic_form(measure, z);
  out.predicted = w1 * sol.m1 + w2 * sol.mN;
  out.deviation = std::abs(out.empirical - out.predicted);
  const double rho = std::max(0.0, sol.m_avg.imag() / std::numbers::pi);
  out.reference = (1.0 + std::sqrt(rho)) / std::sqrt(n * b) + 1.0 / (n * b);
  out.threshold = std::pow(n, 0.1) * out.reference;
  out.flagged = out.deviation > out.threshold;
  return out;
}

double overlap(std::span<const int> labels, std::int64_t n1) {
  const std::size_t n = labels.size();
  if (n1 <= 0 || static_cast<std::size_t>(n1) >= n) throw ValidationError("planted block must be a proper subset");
  std::size_t agree = 0, est_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int truth = static_cast<std::int64_t>(i) < n1 ? 1 : -1;
    if (labels[i] == truth) ++agree;
    if (labels[i] > 0) ++est_pos;
  }
  const double dn = static_cast<double>(n);
  const double t_pos = static_cast<double>(n1) / dn;
  const double e_pos = static_cast<double>(est_pos) / dn;
  const auto kappa = [](double observed, double chance) {
    return chance >= 1.0 ? 0.0 : (observed - chance) / (1.0 - chance);
  };
  const double a = static_cast<double>(agree) / dn;
  const double k1 = kappa(a, e_pos * t_pos + (1.0 - e_pos) * (1.0 - t_pos));
  const double k2 = kappa(1.0 - a, (1.0 - e_pos) * t_pos + e_pos * (1.0 - t_pos));
  return std::clamp(std::max(k1, k2), 0.0, 1.0);
}

Communities detect_communities(std::span<const double> v, const GsbmSpec& spec) {
  validate_spec(spec);
  if (!spec.n || v.size() != static_cast<std::size_t>(*spec.n)) {
    throw ValidationError("eigenvector length must match spec.n");
  }
  const std::size_t n = v.size();
  Communities out;
  out.labels.resize(n);
  if (spec.theta1 * spec.theta2 < 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = v[i] < 0.0 ? -1 : 1;
  } else {
    // best two-means split of the sorted entries
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    std::vector<double> prefix(n + 1, 0.0), prefix2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      prefix[i + 1] = prefix[i] + s[i];
      prefix2[i + 1] = prefix2[i] + s[i] * s[i];
    }
    double best = std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double nl = static_cast<double>(k), nr = static_cast<double>(n - k);
      const double ml = prefix[k] / nl, mr = (prefix[n] - prefix[k]) / nr;
      const double sse = (prefix2[k] - nl * ml * ml) + (prefix2[n] - prefix2[k] - nr * mr * mr);
      if (sse < best) {
        best = sse;
        threshold = 0.5 * (ml + mr);
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = v[i] > threshold ? 1 : -1;
  }
  out.overlap = overlap(out.labels, block_size(spec));
  return out;
}

Communities detect_communities(const SymMatrix& m, const GsbmSpec& spec) {
  const auto es = eigen_symmetric(m, 1);
  return detect_communities(es.vectors.front(), spec);
}

}  // namespace gsbm
