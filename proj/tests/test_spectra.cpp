#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "gsbm/error.hpp"
#include "gsbm/sampler.hpp"
#include "gsbm/spectra.hpp"

using namespace gsbm;

namespace {

SymMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  return SymMatrix::from_upper(n, [&](std::size_t, std::size_t) { return g(gen); });
}

double residual(const SymMatrix& m, double lambda, const std::vector<double>& v) {
  const auto mv = m.multiply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (mv[i] - lambda * v[i]) * (mv[i] - lambda * v[i]);
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Q diag(values) Q^T with a random orthogonal Q.
SymMatrix with_spectrum(const std::vector<double>& values, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(values.size());
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(gen);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  const Eigen::MatrixXd m =
      q * Eigen::Map<const Eigen::VectorXd>(values.data(), n).asDiagonal() * q.transpose();
  return SymMatrix::from_upper(values.size(), [&](std::size_t i, std::size_t j) {
    return 0.5 * (m(i, j) + m(j, i));
  });
}

GsbmSpec spec_for(std::int64_t n, double lambda) {
  GsbmSpec s;
  s.gamma = 0.3;
  s.alpha1 = 2.0;
  s.alpha2 = 1.0;
  s.n = n;
  s.theta1 = 1.0 / std::sqrt(0.3 * n);
  s.theta2 = 0.0;
  s.lambda = lambda;
  return s;
}

}  // namespace

TEST_CASE("small spectra") {
  SymMatrix id(2);
  id.set(0, 0, 1.0);
  id.set(1, 1, 1.0);
  const auto a = eigen_symmetric(id);
  CHECK(a.values == std::vector<double>{1.0, 1.0});

  SymMatrix d(3);
  d.set(0, 0, 3.0);
  d.set(1, 1, 1.0);
  d.set(2, 2, 2.0);
  const auto b = eigen_symmetric(d, 3);
  REQUIRE(b.values.size() == 3);
  CHECK(b.values[0] == doctest::Approx(3.0));
  CHECK(b.values[1] == doctest::Approx(2.0));
  CHECK(b.values[2] == doctest::Approx(1.0));
  CHECK(std::abs(b.vectors[0][0]) == doctest::Approx(1.0));
  CHECK(std::abs(b.vectors[1][2]) == doctest::Approx(1.0));

  SymMatrix one(1, 4.5);
  CHECK(eigen_symmetric(one, 1).values[0] == 4.5);
}

TEST_CASE("eigenvalues agree with a reference solver") {
  const auto m = random_symmetric(200, 3);
  const auto ours = eigen_symmetric(m);
  Eigen::MatrixXd dense(200, 200);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) dense(i, j) = m(i, j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(dense, Eigen::EigenvaluesOnly);
  for (int k = 0; k < 200; ++k) CHECK(ours.values[k] == doctest::Approx(ref.eigenvalues()[199 - k]).epsilon(1e-10));
  for (std::size_t k = 1; k < ours.values.size(); ++k) CHECK(ours.values[k - 1] >= ours.values[k]);
  double tr = 0.0;
  for (double v : ours.values) tr += v;
  CHECK(std::abs(tr - m.trace()) <= 1e-8 * 200.0);
}

TEST_CASE("eigenpairs are backward stable and orthonormal") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = random_symmetric(150, seed);
    const auto es = eigen_symmetric(m, 6);
    const double norm = m.frobenius_norm();
    for (std::size_t k = 0; k < 6; ++k) {
      CHECK(residual(m, es.values[k], es.vectors[k]) <= 1e-10 * norm);
      CHECK(dot(es.vectors[k], es.vectors[k]) == doctest::Approx(1.0).epsilon(1e-10));
      for (std::size_t j = 0; j < k; ++j) CHECK(std::abs(dot(es.vectors[k], es.vectors[j])) < 1e-8);
    }
  }
}

TEST_CASE("clustered and repeated eigenvalues") {
  std::vector<double> values{5.0, 5.0, 5.0, 5.0 - 1e-12, 4.0, 1.0, 0.0, -2.0, -2.0, 3.0};
  const auto m = with_spectrum(values, 11);
  const auto es = eigen_symmetric(m, 5);
  CHECK(es.values[0] == doctest::Approx(5.0).epsilon(1e-12));
  const double norm = m.frobenius_norm();
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(residual(m, es.values[k], es.vectors[k]) <= 1e-10 * norm);
    for (std::size_t j = 0; j < k; ++j) CHECK(std::abs(dot(es.vectors[k], es.vectors[j])) < 1e-8);
  }
}

TEST_CASE("non-finite input is rejected") {
  SymMatrix m(3);
  m.set(0, 1, std::nan(""));
  CHECK_THROWS_AS(eigen_symmetric(m), ValidationError);
}

TEST_CASE("spectral weights and the resolvent quadratic form") {
  const auto h = random_symmetric(80, 9);
  std::vector<double> u(80);
  for (std::size_t i = 0; i < 80; ++i) u[i] = std::cos(0.1 * i);
  const double unorm = dot(u, u);
  const auto meas = spectral_measure(h, u);
  double total = 0.0;
  for (double w : meas.weights) total += w;
  CHECK(total == doctest::Approx(unorm).epsilon(1e-12));

  // oracle: direct linear solve of (H - z) x = u
  Eigen::MatrixXd dense(80, 80);
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j) dense(i, j) = h(i, j);
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), 80);
  for (double z : {meas.values.front() + 0.5, -30.0, 0.5 * (meas.values[3] + meas.values[4])}) {
    const Eigen::VectorXd x = (dense - z * Eigen::MatrixXd::Identity(80, 80)).partialPivLu().solve(uv);
    CHECK(resolvent_quadratic_form(meas, z) == doctest::Approx(uv.dot(x)).epsilon(1e-9));
  }
  const Complex zc{0.3, 0.2};
  const Eigen::MatrixXcd dc = dense.cast<Complex>() - zc * Eigen::MatrixXcd::Identity(80, 80);
  const Eigen::VectorXcd xc = dc.partialPivLu().solve(uv.cast<Complex>());
  CHECK(std::abs(resolvent_quadratic_form(meas, zc) - uv.cast<Complex>().dot(xc)) < 1e-10);

  CHECK_THROWS_AS(resolvent_quadratic_form(meas, meas.values[2] + 1e-9), ValidationError);
}

TEST_CASE("resolvent of the zero matrix") {
  std::vector<double> u(10, 1.0 / std::sqrt(10.0));
  CHECK(resolvent_quadratic_form(SymMatrix(10), u, -2.0) == doctest::Approx(0.5));
}

TEST_CASE("interlacing and spike bounds") {
  const auto spec0 = spec_for(60, 0.0);
  const auto s0 = sample_gsbm(spec0, NoiseKind::gaussian(), {1, 0});
  const auto r0 = make_report(s0.m, &s0.h);
  const auto c0 = check_interlacing(r0);
  CHECK(c0.holds);
  CHECK(c0.worst_margin == 0.0);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = spec_for(50, 0.5 + 0.05 * static_cast<double>(seed));
    const auto s = sample_gsbm(spec, NoiseKind::gaussian(), {seed, 7});
    const auto r = make_report(s.m, &s.h);
    CHECK(check_interlacing(r).holds);
    CHECK(check_spike_bounds(r, spec.lambda).holds);
    CHECK(r.gap == r.eigenvalues_m[0] - r.eigenvalues_m[1]);
  }
  SpectralReport bad;
  bad.eigenvalues_m = {1.0, 0.0};
  CHECK_THROWS_AS(check_interlacing(bad), ValidationError);
  bad.eigenvalues_h = std::vector<double>{1.0};
  CHECK_THROWS_AS(check_interlacing(bad), ValidationError);
}

TEST_CASE("top eigenvalue is nondecreasing in lambda for fixed noise") {
  double prev = -1e9;
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    const auto s = sample_gsbm(spec_for(300, lambda), NoiseKind::gaussian(), {4, 0});
    const double l1 = eigen_symmetric(s.m).values[0];
    CHECK(l1 >= prev);
    prev = l1;
  }
}

TEST_CASE("local law in the far field") {
  const auto spec = spec_for(400, 0.0);
  const auto s = sample_gsbm(spec, NoiseKind::gaussian(), {2, 0});
  const auto rep = check_local_law(s.h, spec, s.u, {0.0, 10.0});
  CHECK(rep.deviation < 1e-2);
  CHECK_FALSE(rep.flagged);
  CHECK_THROWS_AS(check_local_law(s.h, spec, s.u, {0.0, 1e-4}), ValidationError);
}

TEST_CASE("overlap statistic") {
  std::vector<int> perfect{1, 1, -1, -1, -1};
  CHECK(overlap(perfect, 2) == doctest::Approx(1.0));
  std::vector<int> flipped{-1, -1, 1, 1, 1};
  CHECK(overlap(flipped, 2) == doctest::Approx(1.0));
  std::vector<int> constant{1, 1, 1, 1, 1};
  CHECK(overlap(constant, 2) == 0.0);
  std::vector<int> half{1, -1, 1, -1};  // agreement at chance level
  CHECK(overlap(half, 2) == doctest::Approx(0.0));
}

TEST_CASE("noiseless spike recovers the partition") {
  const auto conv = from_sbm({200, 50, 0.3, 0.3, 0.2, true, ShiftKind::Balanced});
  const auto u = spike_vector(conv.spec);
  const auto m = SymMatrix(200).plus_rank_one(conv.spec.lambda, u);
  const auto c = detect_communities(m, conv.spec);
  CHECK(c.overlap == doctest::Approx(1.0));

  const auto hid = from_sbm({200, 50, 0.3, 0.2, 0.2, true, ShiftKind::HiddenCommunity});
  const auto mh = SymMatrix(200).plus_rank_one(hid.spec.lambda, spike_vector(hid.spec));
  CHECK(detect_communities(mh, hid.spec).overlap == doctest::Approx(1.0));
}

TEST_CASE("no spike gives chance-level overlap") {
  const auto conv = from_sbm({1000, 250, 0.2, 0.2, 0.2, true, ShiftKind::HiddenCommunity});
  const auto kind = NoiseKind::centered_bernoulli(0.2, 0.2, 0.2);
  double total = 0.0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto s = sample_gsbm(conv.spec, kind, {77, t});
    total += detect_communities(s.m, conv.spec).overlap;
  }
  CHECK(total / 20.0 < 0.1);
}
