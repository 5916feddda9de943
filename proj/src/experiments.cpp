#include "gsbm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "gsbm/error.hpp"
#include "gsbm/format.hpp"
#include "gsbm/sampler.hpp"
#include "gsbm/serialization.hpp"

namespace gsbm {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string num(const std::optional<double>& v, int precision) {
  return v ? format_number(*v, precision) : std::string("nan");
}

json config_echo(const ExperimentConfig& c) {
  // jobs and the output path never change the results, so they stay out
  // of the echo and reruns elsewhere produce identical files.
  json j;
  if (const auto* p = std::get_if<SbmParams>(&c.base)) {
    j["base"] = {{"sbm", *p}};
  } else {
    const auto& s = std::get<GsbmSpec>(c.base);
    j["base"] = {{"spec", s}};
    j["noise"] = c.noise;
  }
  j["variable"] = to_string(c.variable);
  j["sweep_values"] = c.sweep_values;
  j["trials_per_point"] = c.trials_per_point;
  j["master_seed"] = c.master_seed;
  j["bins"] = c.bins;
  return j;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::uint64_t stream_for(std::size_t point, std::size_t trial) {
  return (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint64_t>(trial);
}

}  // namespace

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::W: return "w";
    case SweepVariable::P: return "p";
    case SweepVariable::Lambda: return "lambda";
  }
  return "w";
}

SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "w") return SweepVariable::W;
  if (s == "p") return SweepVariable::P;
  if (s == "lambda") return SweepVariable::Lambda;
  throw ValidationError("unknown sweep variable '" + s + "' (expected w, p or lambda)");
}

void validate_config(const ExperimentConfig& c) {
  if (c.trials_per_point < 1) throw ValidationError("trials_per_point must be at least 1");
  if (c.bins < 1) throw ValidationError("bins must be at least 1");
  if (c.jobs < 1) throw ValidationError("jobs must be at least 1");
  for (double v : c.sweep_values) {
    if (!std::isfinite(v)) throw ValidationError("sweep values must be finite");
  }
  const bool sbm = std::holds_alternative<SbmParams>(c.base);
  if (sbm && c.variable == SweepVariable::Lambda) {
    throw ValidationError("a lambda sweep needs a spec base, not SBM parameters");
  }
  if (!sbm) {
    if (c.variable != SweepVariable::Lambda) {
      throw ValidationError("a spec base can only sweep lambda");
    }
    if (!std::get<GsbmSpec>(c.base).n) throw ValidationError("spec base needs a dimension n");
  }
}

PointInstance instance_for(const ExperimentConfig& c, double value) {
  PointInstance inst;
  if (const auto* base = std::get_if<SbmParams>(&c.base)) {
    SbmParams p = *base;
    const double planted =
        c.variable == SweepVariable::W ? p.q + value / std::sqrt(static_cast<double>(p.n)) : value;
    p.p1 = planted;
    if (p.shift == ShiftKind::Balanced) {
      p.p2 = planted;
    } else {
      p.p2 = p.q;
    }
    inst.spec = from_sbm(p).spec;
    inst.sbm = p;
  } else {
    GsbmSpec s = std::get<GsbmSpec>(c.base);
    s.lambda = value;
    inst.spec = validate_spec(s);
  }
  return inst;
}

SymMatrix sample_point(const ExperimentConfig& c, const PointInstance& inst, std::size_t point,
                       std::size_t trial) {
  const SampleSeed seed{c.master_seed, stream_for(point, trial)};
  if (inst.sbm) return shift_and_rescale(sample_sbm_adjacency(*inst.sbm, seed), *inst.sbm);
  return sample_gsbm(inst.spec, c.noise, seed).m;
}

HistogramData make_histogram(const std::vector<double>& values, int bins) {
  if (values.empty()) throw ValidationError("histogram of an empty spectrum");
  if (bins < 1) throw ValidationError("bins must be at least 1");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 0.1;
  const double hi = *mx + 0.1;
  const double width = (hi - lo) / bins;
  HistogramData h;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k < bins; ++k) h.bin_edges[k] = lo + k * width;
  h.bin_edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto k = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    k = std::clamp<std::ptrdiff_t>(k, 0, bins - 1);
    // floating point can put v just outside its computed bin
    while (k > 0 && v < h.bin_edges[k]) --k;
    while (k + 1 < bins && v >= h.bin_edges[k + 1]) ++k;
    ++h.counts[k];
  }
  h.n_total = static_cast<std::int64_t>(values.size());
  return h;
}

HistogramResult run_histogram(const ExperimentConfig& config) {
  validate_config(config);
  if (config.sweep_values.size() > 1) {
    throw ValidationError("a histogram takes a single sweep value");
  }
  PointInstance inst;
  if (config.sweep_values.empty()) {
    if (const auto* p = std::get_if<SbmParams>(&config.base)) {
      inst.spec = from_sbm(*p).spec;
      inst.sbm = *p;
    } else {
      inst.spec = validate_spec(std::get<GsbmSpec>(config.base));
    }
  } else {
    inst = instance_for(config, config.sweep_values.front());
  }
  HistogramResult out;
  out.spec = inst.spec;
  out.edge = find_upper_edge(inst.spec);
  const auto m = sample_point(config, inst, 0, 0);
  out.report = make_report(m);
  out.report.predicted = predict_outlier(inst.spec, inst.spec.lambda, out.edge);
  out.histogram = make_histogram(out.report.eigenvalues_m, config.bins);
  return out;
}

std::vector<PointSummary> aggregate(const std::vector<TransitionRow>& rows,
                                    const std::vector<PointSummary>& predictions) {
  std::vector<PointSummary> out = predictions;
  std::vector<std::vector<const TransitionRow*>> by_point(out.size());
  for (const auto& r : rows) {
    if (r.point >= out.size()) throw ValidationError("row refers to an unknown sweep point");
    if (!r.error) by_point[r.point].push_back(&r);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& s = out[i];
    const auto& ok = by_point[i];
    s.successes = ok.size();
    if (ok.empty()) {
      s.mean_gap = s.mean_overlap = std::nan("");
      s.sd_gap.reset();
      continue;
    }
    double g = 0.0, o = 0.0;
    for (const auto* r : ok) {
      g += r->gap;
      o += r->overlap;
    }
    s.mean_gap = g / static_cast<double>(ok.size());
    s.mean_overlap = o / static_cast<double>(ok.size());
    if (ok.size() >= 2) {
      double ss = 0.0;
      for (const auto* r : ok) ss += (r->gap - s.mean_gap) * (r->gap - s.mean_gap);
      s.sd_gap = std::sqrt(ss / static_cast<double>(ok.size() - 1));
    } else {
      s.sd_gap.reset();
    }
  }
  return out;
}

TransitionTable run_transition_sweep(const ExperimentConfig& config) {
  validate_config(config);
  if (config.sweep_values.empty()) throw ValidationError("sweep values must be nonempty");
  const std::size_t npoints = config.sweep_values.size();
  const auto trials = static_cast<std::size_t>(config.trials_per_point);

  // Instances and predictions are cheap next to the eigensolves; a point
  // whose parameters are invalid fails all of its rows.
  std::vector<std::optional<PointInstance>> instances(npoints);
  std::vector<std::string> point_errors(npoints);
  std::vector<PointSummary> predictions(npoints);
  for (std::size_t i = 0; i < npoints; ++i) {
    auto& ps = predictions[i];
    ps.sweep_value = config.sweep_values[i];
    ps.mean_gap = ps.mean_overlap = ps.lambda_c = ps.l_plus = ps.lambda = std::nan("");
    try {
      instances[i] = instance_for(config, ps.sweep_value);
      const auto& spec = instances[i]->spec;
      const auto pred = predict_outlier(spec, spec.lambda);
      ps.lambda = spec.lambda;
      ps.lambda_c = pred.lambda_c;
      ps.l_plus = pred.l_plus;
      ps.predicted_z = pred.z;
      ps.predicted_gap = pred.gap;
    } catch (const Error& e) {
      instances[i].reset();
      point_errors[i] = e.what();
    }
  }

  TransitionTable table;
  table.rows.resize(npoints * trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < table.rows.size(); idx = next++) {
      const std::size_t point = idx / trials;
      auto& row = table.rows[idx];
      row.point = point;
      row.trial = idx % trials;
      row.sweep_value = config.sweep_values[point];
      row.predicted_z = predictions[point].predicted_z;
      row.predicted_gap = predictions[point].predicted_gap;
      if (!instances[point]) {
        row.error = point_errors[point];
      } else {
        try {
          const auto m = sample_point(config, *instances[point], point, row.trial);
          const auto rep = make_report(m, nullptr, true);
          row.lambda1 = rep.eigenvalues_m.at(0);
          row.lambda2 = rep.eigenvalues_m.size() > 1 ? rep.eigenvalues_m[1] : rep.eigenvalues_m[0];
          row.gap = row.lambda1 - row.lambda2;
          row.overlap = detect_communities(*rep.top_vector, instances[point]->spec).overlap;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      if (row.error) {
        row.lambda1 = row.lambda2 = row.gap = row.overlap = std::nan("");
      }
    }
  };
  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), table.rows.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  table.points = aggregate(table.rows, predictions);
  return table;
}

void emit_report(const HistogramResult& r, const ExperimentConfig& config, int precision) {
  ensure_directory(config.outputs);
  const auto& h = r.histogram;
  std::ostringstream hist;
  hist << "bin_left,bin_right,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    hist << format_number(h.bin_edges[k], precision) << ',' << format_number(h.bin_edges[k + 1], precision)
         << ',' << h.counts[k] << '\n';
  }
  std::ostringstream eig;
  eig << "eigenvalue\n";
  for (double v : r.report.eigenvalues_m) eig << format_number(v, precision) << '\n';

  json summary;
  summary["config_echo"] = config_echo(config);
  summary["spec"] = r.spec;
  summary["lambda_c"] = r.report.predicted->lambda_c;
  summary["l_plus"] = r.edge.l_plus;
  summary["edge"] = edge_json(r.edge);
  summary["prediction"] = prediction_json(*r.report.predicted);
  summary["lambda1"] = r.report.eigenvalues_m.front();
  summary["gap"] = r.report.gap;
  summary["n_total"] = h.n_total;
  std::int64_t above = 0;
  for (double v : r.report.eigenvalues_m) above += v > r.edge.l_plus;
  summary["count_above_l_plus"] = above;

  write_file_atomic(config.outputs / "hist.csv", hist.str());
  write_file_atomic(config.outputs / "eigenvalues.csv", eig.str());
  write_file_atomic(config.outputs / "summary.json", summary.dump(2) + "\n");
}

void emit_report(const TransitionTable& table, const ExperimentConfig& config, int precision) {
  ensure_directory(config.outputs);
  std::ostringstream csv;
  csv << "w,trial,lambda1,lambda2,gap,overlap,predicted_z\n";
  for (const auto& row : table.rows) {
    csv << format_number(row.sweep_value, precision) << ',' << row.trial << ','
        << format_number(row.lambda1, precision) << ',' << format_number(row.lambda2, precision) << ','
        << format_number(row.gap, precision) << ',' << format_number(row.overlap, precision) << ','
        << num(row.predicted_z, precision) << '\n';
  }

  json summary;
  summary["config_echo"] = config_echo(config);
  const auto& first = table.points.front();
  summary["lambda_c"] = first.lambda_c;
  summary["l_plus"] = first.l_plus;
  json per_point = json::array();
  for (const auto& p : table.points) {
    per_point.push_back({{"w", p.sweep_value},
                         {"mean_gap", p.mean_gap},
                         {"sd_gap", optional_number(p.sd_gap)},
                         {"mean_overlap", p.mean_overlap},
                         {"predicted_z", optional_number(p.predicted_z)},
                         {"predicted_gap", optional_number(p.predicted_gap)},
                         {"lambda", p.lambda},
                         {"lambda_c", p.lambda_c},
                         {"l_plus", p.l_plus},
                         {"successes", p.successes}});
  }
  summary["per_point"] = per_point;
  json failures = json::array();
  for (const auto& row : table.rows) {
    if (row.error) failures.push_back({{"w", row.sweep_value}, {"trial", row.trial}, {"message", *row.error}});
  }
  summary["failures"] = failures;

  write_file_atomic(config.outputs / "sweep.csv", csv.str());
  write_file_atomic(config.outputs / "summary.json", summary.dump(2) + "\n");
}

}  // namespace gsbm
