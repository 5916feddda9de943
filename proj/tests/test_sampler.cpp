#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "gsbm/error.hpp"
#include "gsbm/sampler.hpp"

using namespace gsbm;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double fourth = 0.0;
  std::size_t count = 0;
};

// Off-diagonal upper-triangle moments of one block of a matrix.
Moments block_moments(const SymMatrix& m, std::size_t n1, int block) {
  double s = 0, s2 = 0, s4 = 0;
  std::size_t cnt = 0;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool a = i < n1, b = j < n1;
      const int blk = (a && b) ? 0 : (!a && !b) ? 1 : 2;
      if (blk != block) continue;
      const double v = m(i, j);
      s += v;
      s2 += v * v;
      s4 += v * v * v * v;
      ++cnt;
    }
  }
  Moments out;
  out.count = cnt;
  out.mean = s / cnt;
  out.var = s2 / cnt - out.mean * out.mean;
  out.fourth = s4 / cnt;
  return out;
}

GsbmSpec two_block_spec(std::int64_t n) {
  GsbmSpec s;
  s.gamma = 0.3;
  s.alpha1 = 2.0;
  s.alpha2 = 0.5;
  s.n = n;
  s.theta1 = 1.0 / std::sqrt(0.3 * n);
  s.theta2 = 0.0;
  s.lambda = 1.5;
  return s;
}

}  // namespace

TEST_CASE("degenerate adjacency probabilities") {
  SbmParams ones{20, 5, 1.0, 1.0, 1.0, false, ShiftKind::HiddenCommunity};
  const auto a = sample_sbm_adjacency(ones, {1, 0});
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) CHECK(a(i, j) == 1.0);

  SbmParams zeros{20, 5, 0.0, 0.0, 0.0, true, ShiftKind::HiddenCommunity};
  const auto z = sample_sbm_adjacency(zeros, {1, 0});
  CHECK(z == SymMatrix(20));
}

TEST_CASE("adjacency block mean obeys the law of large numbers") {
  SbmParams p{2500, 625, 0.25, 0.2, 0.2, true, ShiftKind::HiddenCommunity};
  const auto a = sample_sbm_adjacency(p, {42, 0});
  const auto m = block_moments(a, 625, 0);
  CHECK(std::abs(m.mean - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / m.count));
  for (std::size_t i = 0; i < 2500; i += 97) CHECK(a(i, i) == 0.0);
}

TEST_CASE("sampling is deterministic and symmetric") {
  const auto spec = two_block_spec(300);
  const auto a = sample_gsbm(spec, NoiseKind::gaussian(), {7, 3});
  const auto b = sample_gsbm(spec, NoiseKind::gaussian(), {7, 3});
  const auto c = sample_gsbm(spec, NoiseKind::gaussian(), {7, 4});
  CHECK(a.m == b.m);
  CHECK_FALSE(a.m == c.m);
  CHECK(a.m.exactly_symmetric());
  CHECK(a.m.all_finite());
}

TEST_CASE("lambda = 0 gives M = H") {
  auto spec = two_block_spec(100);
  spec.lambda = 0.0;
  const auto s = sample_gsbm(spec, NoiseKind::rademacher(), {1, 1});
  CHECK(s.m == s.h);
}

TEST_CASE("M = H + lambda u u^T exactly") {
  const auto spec = two_block_spec(120);
  const auto s = sample_gsbm(spec, NoiseKind::gaussian(), {5, 0});
  for (std::size_t i = 0; i < 120; i += 7)
    for (std::size_t j = 0; j < 120; j += 5)
      CHECK(s.m(i, j) == s.h(i, j) + spec.lambda * s.u[i] * s.u[j]);
  double norm = 0;
  for (double v : s.u) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("block variance profile within five standard errors") {
  const std::int64_t n = 600;
  const auto spec = two_block_spec(n);
  const double dn = static_cast<double>(n);
  const double targets[3] = {spec.alpha1 / dn, spec.alpha2 / dn, 1.0 / dn};
  for (const auto& kind : {NoiseKind::gaussian(), NoiseKind::rademacher()}) {
    const auto s = sample_gsbm(spec, kind, {11, 0});
    const auto n1 = static_cast<std::size_t>(block_size(spec));
    for (int blk = 0; blk < 3; ++blk) {
      const auto m = block_moments(s.h, n1, blk);
      REQUIRE(m.count >= 1000);
      // standard error of the sample second moment
      const double se = std::sqrt(std::max(0.0, m.fourth - targets[blk] * targets[blk]) / m.count);
      CHECK(std::abs(m.var + m.mean * m.mean - targets[blk]) <= 5.0 * se + 1e-12 * targets[blk]);
      // fourth moment bounded on the N^-2 scale
      CHECK(m.fourth * dn * dn < 10.0 * (1.0 + spec.alpha1 * spec.alpha1));
    }
  }
}

TEST_CASE("Gaussian homogeneous noise has entry variance 1/N") {
  const auto spec = homogeneous_spec(0.5, 0.0, 400);
  const auto s = sample_gsbm(spec, NoiseKind::gaussian(), {3, 0});
  double s2 = 0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < 400; ++i)
    for (std::size_t j = i + 1; j < 400; ++j, ++cnt) s2 += s.h(i, j) * s.h(i, j);
  const double var = s2 / cnt;
  CHECK(std::abs(var * 400.0 - 1.0) < 5.0 * std::sqrt(2.0 / cnt));
  // the Gaussian default keeps the diagonal
  CHECK(s.h(0, 0) != 0.0);
}

TEST_CASE("Bernoulli noise matches the shifted adjacency construction") {
  SbmParams p{400, 100, 0.25, 0.2, 0.2, true, ShiftKind::HiddenCommunity};
  const auto conv = from_sbm(p);
  const auto kind = NoiseKind::centered_bernoulli(0.2, 0.25, 0.2);
  const SampleSeed seed{99, 2};
  const auto g = sample_gsbm(conv.spec, kind, seed);
  const auto shifted = shift_and_rescale(sample_sbm_adjacency(p, seed), p);
  for (std::size_t i = 0; i < 400; ++i) {
    for (std::size_t j = i + 1; j < 400; ++j) {
      CHECK(g.m(i, j) == doctest::Approx(shifted(i, j)).epsilon(1e-12));
    }
  }
  // Both paths agree in the first two moments of every block.
  for (int blk = 0; blk < 3; ++blk) {
    const auto a = block_moments(g.m, 100, blk);
    const auto b = block_moments(shifted, 100, blk);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-9));
    CHECK(a.var == doctest::Approx(b.var).epsilon(1e-9));
  }
}

TEST_CASE("Bernoulli noise rejects inconsistent probabilities") {
  const auto spec = two_block_spec(100);
  CHECK_THROWS_AS(sample_gsbm(spec, NoiseKind::centered_bernoulli(0.2, 0.25, 0.2), {1, 0}),
                  ValidationError);
  CHECK_THROWS_AS(sample_gsbm(spec, NoiseKind::centered_bernoulli(0.0, 0.25, 0.2), {1, 0}),
                  ValidationError);
}

TEST_CASE("shift_and_rescale arithmetic") {
  SbmParams p{25, 5, 0.2, 0.2, 0.2, false, ShiftKind::HiddenCommunity};
  const auto shifted = shift_and_rescale(SymMatrix(25, 1.0), p);
  for (std::size_t i = 0; i < 25; ++i) CHECK(shifted(i, 3) == doctest::Approx(0.4).epsilon(1e-15));
  const auto zero = shift_and_rescale(SymMatrix(25, 0.2), p);
  CHECK(zero.frobenius_norm() == 0.0);
  p.q = 1.0;
  CHECK_THROWS_AS(shift_and_rescale(SymMatrix(25, 1.0), p), ValidationError);
}

TEST_CASE("binary and csv export") {
  const auto s = sample_gsbm(two_block_spec(40), NoiseKind::gaussian(), {1, 0});
  std::stringstream buf;
  write_binary(s.m, buf);
  CHECK(buf.str().size() == 8 + 8 * 40 * 41 / 2);
  CHECK(read_binary(buf) == s.m);

  const auto path = std::filesystem::temp_directory_path() / "gsbm_test_matrix.bin";
  write_binary_file(s.m, path);
  CHECK(read_binary_file(path) == s.m);
  std::filesystem::remove(path);

  std::stringstream bad("\x05\x00");
  CHECK_THROWS(read_binary(bad));
  CHECK_THROWS_AS(read_binary_file("/nonexistent/dir/m.bin"), IoError);

  std::stringstream csv;
  write_csv(SymMatrix(2, 0.5), csv);
  CHECK(csv.str() == "0.5,0.5\n0.5,0.5\n");
}

TEST_CASE("variance profile matches the block rule") {
  const auto spec = two_block_spec(10);
  const auto s = variance_profile(spec);
  CHECK(s(0, 0) == doctest::Approx(0.2));
  CHECK(s(0, 9) == doctest::Approx(0.1));
  CHECK(s(9, 9) == doctest::Approx(0.05));
}
