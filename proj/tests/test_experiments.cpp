#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "doctest.h"
#include "gsbm/error.hpp"
#include "gsbm/experiments.hpp"

using namespace gsbm;
namespace fs = std::filesystem;

namespace {

ExperimentConfig hidden_config(std::int64_t n, std::vector<double> values, int trials) {
  SbmParams base{n, n / 4, 0.2, 0.2, 0.2, true, ShiftKind::HiddenCommunity};
  ExperimentConfig c;
  c.base = base;
  c.variable = SweepVariable::W;
  c.sweep_values = std::move(values);
  c.trials_per_point = trials;
  c.master_seed = 17;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gsbm_test_" + name);
  fs::remove_all(dir);
  return dir;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("histogram bins") {
  const std::vector<double> v{-1.0, 0.0, 0.5, 2.0};
  const auto h = make_histogram(v, 100);
  CHECK(h.counts.size() == 100);
  CHECK(h.bin_edges.size() == 101);
  CHECK(h.bin_edges.front() == doctest::Approx(-1.1));
  CHECK(h.bin_edges.back() == doctest::Approx(2.1));
  std::int64_t total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == h.n_total);
  CHECK(h.n_total == 4);
  for (std::size_t k = 1; k < h.bin_edges.size(); ++k) CHECK(h.bin_edges[k] > h.bin_edges[k - 1]);

  const auto one = make_histogram({3.0, 3.0}, 1);
  CHECK(one.counts[0] == 2);
  CHECK_THROWS_AS(make_histogram({}, 10), ValidationError);
  CHECK_THROWS_AS(make_histogram(v, 0), ValidationError);
}

TEST_CASE("config validation") {
  auto c = hidden_config(100, {1.0}, 1);
  c.trials_per_point = 0;
  CHECK_THROWS_AS(validate_config(c), ValidationError);
  c = hidden_config(100, {1.0, std::nan("")}, 1);
  CHECK_THROWS_AS(validate_config(c), ValidationError);
  c = hidden_config(100, {}, 1);
  CHECK_THROWS_AS(run_transition_sweep(c), ValidationError);
  c = hidden_config(100, {1.0}, 1);
  c.variable = SweepVariable::Lambda;
  CHECK_THROWS_AS(validate_config(c), ValidationError);

  GsbmSpec spec;
  spec.gamma = 0.5;
  spec.theta1 = spec.theta2 = 1.0;
  c.base = spec;
  CHECK_THROWS_AS(validate_config(c), ValidationError);  // no n
  CHECK(parse_sweep_variable("p") == SweepVariable::P);
  CHECK_THROWS_AS(parse_sweep_variable("x"), ValidationError);
}

TEST_CASE("sweep values map onto planted probabilities") {
  auto c = hidden_config(400, {2.0}, 1);
  auto inst = instance_for(c, 2.0);
  REQUIRE(inst.sbm);
  CHECK(inst.sbm->p1 == doctest::Approx(0.3));
  CHECK(inst.sbm->p2 == 0.2);

  c.variable = SweepVariable::P;
  std::get<SbmParams>(c.base).shift = ShiftKind::Balanced;
  inst = instance_for(c, 0.25);
  CHECK(inst.sbm->p1 == 0.25);
  CHECK(inst.sbm->p2 == 0.25);
}

TEST_CASE("sweep table shape, aggregates and determinism") {
  auto c = hidden_config(150, {0.5, 2.0, 4.0}, 3);
  const auto a = run_transition_sweep(c);
  REQUIRE(a.rows.size() == 9);
  REQUIRE(a.points.size() == 3);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].point == i / 3);
    CHECK(a.rows[i].trial == i % 3);
    CHECK_FALSE(a.rows[i].error);
    CHECK(a.rows[i].gap == a.rows[i].lambda1 - a.rows[i].lambda2);
    CHECK(a.rows[i].overlap >= 0.0);
    CHECK(a.rows[i].overlap <= 1.0);
  }
  // recompute the aggregates directly from the rows
  for (std::size_t p = 0; p < 3; ++p) {
    double s = 0.0, o = 0.0;
    for (std::size_t t = 0; t < 3; ++t) {
      s += a.rows[3 * p + t].gap;
      o += a.rows[3 * p + t].overlap;
    }
    const double mean = s / 3.0;
    double ss = 0.0;
    for (std::size_t t = 0; t < 3; ++t) ss += std::pow(a.rows[3 * p + t].gap - mean, 2);
    CHECK(std::abs(a.points[p].mean_gap - mean) < 1e-12);
    CHECK(std::abs(a.points[p].mean_overlap - o / 3.0) < 1e-12);
    REQUIRE(a.points[p].sd_gap);
    CHECK(std::abs(*a.points[p].sd_gap - std::sqrt(ss / 2.0)) < 1e-12);
  }
  CHECK_FALSE(a.points[0].predicted_z);
  CHECK(a.points[2].predicted_z);

  c.jobs = 3;
  const auto b = run_transition_sweep(c);
  REQUIRE(b.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(same_bits(a.rows[i].lambda1, b.rows[i].lambda1));
    CHECK(same_bits(a.rows[i].gap, b.rows[i].gap));
    CHECK(same_bits(a.rows[i].overlap, b.rows[i].overlap));
  }
  c.master_seed = 18;
  const auto d = run_transition_sweep(c);
  CHECK_FALSE(same_bits(a.rows[0].lambda1, d.rows[0].lambda1));
}

TEST_CASE("failed points are recorded and the sweep continues") {
  // w = 100 puts p above one at n = 100
  auto c = hidden_config(100, {1.0, 100.0}, 2);
  const auto t = run_transition_sweep(c);
  REQUIRE(t.rows.size() == 4);
  CHECK_FALSE(t.rows[0].error);
  CHECK_FALSE(t.rows[1].error);
  CHECK(t.rows[2].error);
  CHECK(t.rows[3].error);
  CHECK(std::isnan(t.rows[2].gap));
  CHECK(t.points[0].successes == 2);
  CHECK(t.points[1].successes == 0);
}

TEST_CASE("spec base sweeps lambda") {
  GsbmSpec spec;
  spec.gamma = 0.5;
  spec.alpha1 = spec.alpha2 = 1.0;
  spec.n = 120;
  spec.theta1 = spec.theta2 = 1.0 / std::sqrt(120.0);
  ExperimentConfig c;
  c.base = spec;
  c.variable = SweepVariable::Lambda;
  c.sweep_values = {0.0, 4.0};
  c.trials_per_point = 2;
  const auto t = run_transition_sweep(c);
  CHECK(t.points[1].predicted_z);
  CHECK(*t.points[1].predicted_z == doctest::Approx(4.25));
  CHECK(t.points[1].mean_gap > t.points[0].mean_gap);
}

TEST_CASE("sweep report files") {
  auto c = hidden_config(120, {0.5, 3.0}, 2);
  c.outputs = scratch("sweep");
  const auto t = run_transition_sweep(c);
  emit_report(t, c);
  const auto csv = slurp(c.outputs / "sweep.csv");
  CHECK(csv.rfind("w,trial,lambda1,lambda2,gap,overlap,predicted_z\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const auto j = nlohmann::json::parse(slurp(c.outputs / "summary.json"));
  CHECK(j.contains("config_echo"));
  CHECK(j.contains("lambda_c"));
  CHECK(j.contains("l_plus"));
  REQUIRE(j["per_point"].size() == 2);
  for (const auto& p : j["per_point"]) {
    for (const char* key : {"w", "mean_gap", "sd_gap", "mean_overlap", "predicted_z"}) CHECK(p.contains(key));
  }
  CHECK(j["per_point"][0]["predicted_z"].is_null());
  CHECK(j["per_point"][1]["mean_gap"].get<double>() == t.points[1].mean_gap);

  // rerun, elsewhere and with more workers: byte-identical files
  auto c2 = c;
  c2.outputs = scratch("sweep_again");
  c2.jobs = 2;
  emit_report(run_transition_sweep(c2), c2);
  CHECK(slurp(c.outputs / "sweep.csv") == slurp(c2.outputs / "sweep.csv"));
  CHECK(slurp(c.outputs / "summary.json") == slurp(c2.outputs / "summary.json"));
  for (const auto& entry : fs::directory_iterator(c.outputs)) {
    CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("histogram report files") {
  auto c = hidden_config(200, {3.0}, 1);
  c.outputs = scratch("hist");
  const auto r = run_histogram(c);
  CHECK(r.histogram.n_total == 200);
  CHECK(r.report.predicted);
  CHECK(r.report.eigenvalues_m.size() == 200);
  emit_report(r, c);
  const auto csv = slurp(c.outputs / "hist.csv");
  CHECK(csv.rfind("bin_left,bin_right,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
  const auto eig = slurp(c.outputs / "eigenvalues.csv");
  CHECK(std::count(eig.begin(), eig.end(), '\n') == 201);
  const auto j = nlohmann::json::parse(slurp(c.outputs / "summary.json"));
  CHECK(j["l_plus"].get<double>() == r.edge.l_plus);
  CHECK(j["lambda_c"].get<double>() == r.report.predicted->lambda_c);

  c.sweep_values = {1.0, 2.0};
  CHECK_THROWS_AS(run_histogram(c), ValidationError);
}

TEST_CASE("unwritable output directory surfaces the path") {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  auto c = hidden_config(60, {1.0}, 1);
  c.outputs = dir / "file" / "sub";
  const auto t = run_transition_sweep(c);
  try {
    emit_report(t, c);
    FAIL("expected an IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("sub") != std::string::npos);
  }
}
