#include "gsbm/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "gsbm/error.hpp"
#include "gsbm/experiments.hpp"
#include "gsbm/format.hpp"
#include "gsbm/prediction.hpp"
#include "gsbm/qve.hpp"
#include "gsbm/sampler.hpp"
#include "gsbm/serialization.hpp"
#include "gsbm/spectra.hpp"

namespace gsbm {
namespace {

using nlohmann::json;

struct Options {
  // common
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  int precision = 0;
  int jobs = 1;

  // spec
  double gamma = 0.5;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
  double lambda = 0.0;
  std::optional<std::int64_t> n;

  // block model
  std::string model = "spec";
  double q = 0.2;
  std::optional<double> p;
  std::optional<double> w;
  std::optional<std::int64_t> n1;

  // noise
  std::string noise = "gaussian";
  std::optional<double> noise_q;

  // density
  double from = -3.0;
  double to = 3.0;
  std::size_t points = 600;
  double eta = 1e-4;
  int max_iterations = 10000;

  // edge
  std::string method = "discriminant";

  // experiments
  std::vector<double> values;
  std::string variable = "w";
  int trials = 1;
  int bins = 100;

  // check
  std::optional<double> z_re;
  std::optional<double> z_im;
};

struct Parsed {
  std::unique_ptr<CLI::App> app;
  CLI::App* sample = nullptr;
  CLI::App* density = nullptr;
  CLI::App* edge = nullptr;
  CLI::App* predict = nullptr;
  CLI::App* threshold_hidden = nullptr;
  CLI::App* threshold_unbalanced = nullptr;
  CLI::App* histogram = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* check = nullptr;
};

void add_common(CLI::App* sub, Options& o, bool allow_bin = false) {
  sub->add_option("--seed", o.seed, "Master seed (default: $GSBM_SEED, else 0)");
  sub->add_option("--out", o.out, "Output file, or output directory for histogram and sweep");
  std::vector<std::string> formats{"csv", "json"};
  if (allow_bin) formats.push_back("bin");
  sub->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
  sub->add_option("--precision", o.precision,
                  "Significant digits of numeric output; 0 prints the shortest exact form")
      ->check(CLI::Range(0, 17))
      ->capture_default_str();
}

void add_spec(CLI::App* sub, Options& o) {
  sub->add_option("--gamma", o.gamma, "Fraction of indices in the planted block")->capture_default_str();
  sub->add_option("--alpha1", o.alpha1, "Variance ratio inside the planted block")->capture_default_str();
  sub->add_option("--alpha2", o.alpha2, "Variance ratio inside the complement")->capture_default_str();
  sub->add_option("--theta1", o.theta1, "Spike entry on the planted block, in units of 1/sqrt(N)")
      ->capture_default_str();
  sub->add_option("--theta2", o.theta2, "Spike entry off the planted block, in units of 1/sqrt(N)")
      ->capture_default_str();
  sub->add_option("--lambda", o.lambda, "Spike strength")->capture_default_str();
  sub->add_option("--n", o.n, "Matrix dimension");
}

void add_model(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "spec, or a Bernoulli block model (hidden, unbalanced)")
      ->check(CLI::IsMember({"spec", "hidden", "unbalanced"}))
      ->capture_default_str();
  sub->add_option("--q", o.q, "Background edge probability")->capture_default_str();
  sub->add_option("--p", o.p, "Planted edge probability");
  sub->add_option("--w", o.w, "Planted probability as q + w/sqrt(n)")->excludes("--p");
  sub->add_option("--n1", o.n1, "Planted block size (default round(gamma n))");
}

void add_noise(CLI::App* sub, Options& o) {
  sub->add_option("--noise", o.noise, "Noise family for --model spec")
      ->check(CLI::IsMember({"gaussian", "rademacher", "bernoulli"}))
      ->capture_default_str();
  sub->add_option("--noise-q", o.noise_q, "Background probability of bernoulli noise");
}

Parsed make_app(Options& o) {
  Parsed p;
  p.app = std::make_unique<CLI::App>("Spectral toolkit for generalized stochastic block models", "gsbm");
  auto& app = *p.app;
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  p.sample = app.add_subcommand("sample", "Sample the shifted matrix M");
  add_common(p.sample, o, true);
  add_spec(p.sample, o);
  add_model(p.sample, o);
  add_noise(p.sample, o);

  p.density = app.add_subcommand("density", "Limiting spectral density on a grid");
  add_common(p.density, o);
  add_spec(p.density, o);
  p.density->add_option("--from", o.from, "Left end of the grid")->capture_default_str();
  p.density->add_option("--to", o.to, "Right end of the grid")->capture_default_str();
  p.density->add_option("--points", o.points, "Grid size")->capture_default_str();
  p.density->add_option("--eta", o.eta, "Imaginary part of the spectral parameter")->capture_default_str();
  p.density->add_option("--max-iterations", o.max_iterations, "Iteration cap of the equation solver")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  p.edge = app.add_subcommand("edge", "Upper edge L+ of the limiting spectrum");
  add_common(p.edge, o);
  add_spec(p.edge, o);
  p.edge->add_option("--method", o.method, "Preferred edge method")
      ->check(CLI::IsMember({"discriminant", "scan"}))
      ->capture_default_str();

  p.predict = app.add_subcommand("predict", "Predicted outlier location and critical lambda");
  add_common(p.predict, o);
  add_spec(p.predict, o);
  add_model(p.predict, o);

  auto* threshold = app.add_subcommand("threshold", "Detection thresholds of the Bernoulli models");
  threshold->require_subcommand(1);
  p.threshold_hidden = threshold->add_subcommand("hidden", "q + sqrt(q(1-q)) / (gamma sqrt(n))");
  p.threshold_unbalanced = threshold->add_subcommand("unbalanced", "q + 2 sqrt(q(1-q)) / sqrt(n)");
  for (auto* sub : {p.threshold_hidden, p.threshold_unbalanced}) {
    add_common(sub, o);
    sub->add_option("--q", o.q, "Background edge probability")->required();
    sub->add_option("--n", o.n, "Matrix dimension")->required();
  }
  p.threshold_hidden->add_option("--gamma", o.gamma, "Fraction of indices in the hidden block")->required();

  p.histogram = app.add_subcommand("histogram", "Eigenvalue histogram of one sampled matrix");
  add_common(p.histogram, o);
  add_spec(p.histogram, o);
  add_model(p.histogram, o);
  add_noise(p.histogram, o);
  p.histogram->add_option("--bins", o.bins, "Number of bins")->capture_default_str();

  p.sweep = app.add_subcommand("sweep", "Monte Carlo transition sweep");
  add_common(p.sweep, o);
  add_spec(p.sweep, o);
  add_model(p.sweep, o);
  add_noise(p.sweep, o);
  p.sweep->add_option("--values", o.values, "Comma separated sweep values")->delimiter(',')->required();
  p.sweep->add_option("--variable", o.variable, "Meaning of the sweep values")
      ->check(CLI::IsMember({"w", "p", "lambda"}))
      ->capture_default_str();
  p.sweep->add_option("--trials", o.trials, "Trials per sweep value")->capture_default_str();
  p.sweep->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();

  p.check = app.add_subcommand("check", "Invariant diagnostics on a sampled instance");
  add_common(p.check, o);
  add_spec(p.check, o);
  add_model(p.check, o);
  add_noise(p.check, o);
  p.check->add_option("--z-re", o.z_re, "Real part of the local law point");
  p.check->add_option("--z-im", o.z_im, "Imaginary part of the local law point");
  return p;
}

// --- option interpretation -------------------------------------------------

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("GSBM_SEED")) {
    try {
      std::size_t used = 0;
      const std::string s(env);
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError(std::string("GSBM_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

GsbmSpec raw_spec(const Options& o) {
  GsbmSpec s;
  s.gamma = o.gamma;
  s.alpha1 = o.alpha1;
  s.alpha2 = o.alpha2;
  s.theta1 = o.theta1;
  s.theta2 = o.theta2;
  s.lambda = o.lambda;
  return s;
}

/// Spec in absorbed units, or realized at --n when given. Any snapping
/// warning goes to `err`.
GsbmSpec spec_from(const Options& o, std::ostream& err, bool need_n = false) {
  const GsbmSpec s = validate_spec(raw_spec(o));
  if (!o.n) {
    if (need_n) throw ValidationError("--n is required");
    return s;
  }
  auto r = realize(s, *o.n);
  if (r.warning) err << json{{"warning", *r.warning}}.dump() << '\n';
  return r.spec;
}

SbmParams sbm_from(const Options& o) {
  if (!o.n) throw ValidationError("--n is required for a block model");
  SbmParams p;
  p.n = *o.n;
  if (p.n < 1) throw ValidationError("--n must be positive");
  p.n1 = o.n1 ? *o.n1 : std::llround(o.gamma * static_cast<double>(p.n));
  p.q = o.q;
  p.shift = o.model == "hidden" ? ShiftKind::HiddenCommunity : ShiftKind::Balanced;
  double planted = p.q;
  if (o.p) planted = *o.p;
  if (o.w) planted = p.q + *o.w / std::sqrt(static_cast<double>(p.n));
  p.p1 = planted;
  p.p2 = p.shift == ShiftKind::Balanced ? planted : p.q;
  return p;
}

NoiseKind noise_from(const Options& o, const GsbmSpec& spec) {
  if (o.noise == "rademacher") return NoiseKind::rademacher();
  if (o.noise == "bernoulli") {
    if (!o.noise_q) throw ValidationError("--noise bernoulli needs --noise-q");
    return NoiseKind::bernoulli_implied(spec, *o.noise_q);
  }
  return NoiseKind::gaussian();
}

/// Rounds every float in `j` to `precision` significant digits.
void round_json(json& j, int precision) {
  if (precision <= 0) return;
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v)) j = std::stod(format_number(v, precision));
  } else if (j.is_structured()) {
    for (auto& item : j) round_json(item, precision);
  }
}

class Output {
 public:
  Output(const Options& o, std::ostream& out) : path_(o.out), out_(out) {}

  std::ostream& stream() { return path_.empty() ? out_ : buffer_; }

  void finish() {
    if (!path_.empty()) write_file_atomic(path_, buffer_.str());
  }

 private:
  std::string path_;
  std::ostream& out_;
  std::ostringstream buffer_;
};

void emit_json(json j, const Options& o, std::ostream& out) {
  round_json(j, o.precision);
  Output dst(o, out);
  dst.stream() << j.dump() << '\n';
  dst.finish();
}

/// One header line plus one row of values.
void emit_row(const std::vector<std::pair<std::string, std::string>>& cells, const Options& o,
              std::ostream& out) {
  Output dst(o, out);
  auto& s = dst.stream();
  for (std::size_t i = 0; i < cells.size(); ++i) s << (i ? "," : "") << cells[i].first;
  s << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) s << (i ? "," : "") << cells[i].second;
  s << '\n';
  dst.finish();
}

std::string opt_num(const std::optional<double>& v, int precision) {
  return v ? format_number(*v, precision) : std::string();
}

// --- subcommands -------------------------------------------------------------

struct Instance {
  GsbmSpec spec;
  SymMatrix m;
  SymMatrix h;
  std::vector<double> u;
};

Instance sample_instance(const Options& o, std::ostream& err) {
  const SampleSeed seed{resolve_seed(o), 0};
  Instance inst;
  if (o.model == "spec") {
    inst.spec = spec_from(o, err, true);
    auto s = sample_gsbm(inst.spec, noise_from(o, inst.spec), seed);
    inst.m = std::move(s.m);
    inst.h = std::move(s.h);
    inst.u = std::move(s.u);
  } else {
    const auto params = sbm_from(o);
    inst.spec = from_sbm(params).spec;
    inst.m = shift_and_rescale(sample_sbm_adjacency(params, seed), params);
    inst.u = spike_vector(inst.spec);
    inst.h = inst.m.plus_rank_one(-inst.spec.lambda, inst.u);
  }
  return inst;
}

void cmd_sample(const Options& o, std::ostream& out, std::ostream& err) {
  const auto inst = sample_instance(o, err);
  const std::size_t n = inst.m.size();
  if (o.format == "bin") {
    if (o.out.empty()) throw ValidationError("--format bin needs --out");
    const auto data = inst.m.data();
    write_file_atomic(o.out, std::string_view(reinterpret_cast<const char*>(data.data()),
                                              data.size() * sizeof(double)));
    return;
  }
  if (o.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = inst.m.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    emit_json({{"spec", inst.spec}, {"n", n}, {"m", rows}}, o, out);
    return;
  }
  Output dst(o, out);
  auto& s = dst.stream();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = inst.m.row(i);
    for (std::size_t j = 0; j < n; ++j) s << (j ? "," : "") << format_number(r[j], o.precision);
    s << '\n';
  }
  dst.finish();
}

void cmd_density(const Options& o, std::ostream& out, std::ostream& err) {
  const auto spec = spec_from(o, err);
  QveOptions opts;
  opts.max_iterations = o.max_iterations;
  const auto curve = density(spec, o.from, o.to, o.points, o.eta, opts);
  if (o.format == "json") {
    emit_json({{"x", curve.grid}, {"rho", curve.rho}, {"eta", curve.eta}}, o, out);
    return;
  }
  Output dst(o, out);
  write_density_csv(curve, dst.stream(), o.precision);
  dst.finish();
}

void cmd_edge(const Options& o, std::ostream& out, std::ostream& err) {
  const auto spec = spec_from(o, err);
  const auto e = find_upper_edge(spec, o.method == "scan" ? EdgeMethod::DensitySupportScan
                                                          : EdgeMethod::Discriminant);
  if (o.format == "json") {
    emit_json(edge_json(e), o, out);
    return;
  }
  const int pr = o.precision;
  emit_row({{"l_plus", format_number(e.l_plus, pr)},
            {"double_root_m1", format_number(e.double_root_m.first.real(), pr)},
            {"double_root_mN", format_number(e.double_root_m.second.real(), pr)},
            {"method", to_string(e.method)},
            {"certified_window", format_number(e.certified_window, pr)}},
           o, out);
}

void cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  const auto spec = o.model == "spec" ? spec_from(o, err) : from_sbm(sbm_from(o)).spec;
  const auto pred = predict_outlier(spec, spec.lambda);
  if (!pred.diagnostic.empty()) err << json{{"warning", pred.diagnostic}}.dump() << '\n';
  if (o.format == "json") {
    emit_json(prediction_json(pred), o, out);
    return;
  }
  const int pr = o.precision;
  emit_row({{"lambda", format_number(pred.lambda, pr)},
            {"lambda_c", format_number(pred.lambda_c, pr)},
            {"l_plus", format_number(pred.l_plus, pr)},
            {"z", opt_num(pred.z, pr)},
            {"gap", opt_num(pred.gap, pr)},
            {"method", to_string(pred.method)},
            {"marginal", pred.marginal ? "true" : "false"}},
           o, out);
}

void cmd_threshold(const Options& o, bool hidden, std::ostream& out) {
  const double n = static_cast<double>(*o.n);
  const double v = hidden ? hidden_threshold(o.q, o.gamma, n) : unbalanced_threshold(o.q, n);
  if (o.format == "json") {
    emit_json({{"model", hidden ? "hidden" : "unbalanced"}, {"threshold", v}}, o, out);
    return;
  }
  Output dst(o, out);
  dst.stream() << format_number(v, o.precision) << '\n';
  dst.finish();
}

ExperimentConfig experiment_from(const Options& o, std::ostream& err, bool sweep) {
  ExperimentConfig c;
  c.master_seed = resolve_seed(o);
  c.outputs = o.out.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out);
  c.jobs = o.jobs;
  c.bins = o.bins;
  c.trials_per_point = o.trials;
  if (o.model == "spec") {
    const auto spec = spec_from(o, err, true);
    c.base = spec;
    c.noise = noise_from(o, spec);
    c.variable = SweepVariable::Lambda;
    if (sweep && o.variable != "lambda") {
      throw ValidationError("--model spec sweeps lambda; pass --variable lambda");
    }
  } else {
    c.base = sbm_from(o);
    c.variable = parse_sweep_variable(o.variable);
  }
  if (sweep) c.sweep_values = o.values;
  return c;
}

void cmd_histogram(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = experiment_from(o, err, false);
  const auto r = run_histogram(config);
  emit_report(r, config, o.precision > 0 ? o.precision : 17);
  if (o.format == "json") {
    std::ifstream in(config.outputs / "summary.json");
    out << json::parse(in).dump() << '\n';
  } else {
    out << (config.outputs / "hist.csv").string() << '\n';
  }
}

void cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = experiment_from(o, err, true);
  const auto table = run_transition_sweep(config);
  for (const auto& row : table.rows) {
    if (row.error) {
      err << json{{"warning", "trial failed"}, {"w", row.sweep_value}, {"trial", row.trial},
                  {"message", *row.error}}
                 .dump()
          << '\n';
    }
  }
  emit_report(table, config, o.precision > 0 ? o.precision : 17);
  if (o.format == "json") {
    std::ifstream in(config.outputs / "summary.json");
    out << json::parse(in).dump() << '\n';
  } else {
    out << (config.outputs / "sweep.csv").string() << '\n';
  }
}

json local_law_json(const LocalLawReport& r, Complex z) {
  return {{"z_re", z.real()},
          {"z_im", z.imag()},
          {"empirical_re", r.empirical.real()},
          {"empirical_im", r.empirical.imag()},
          {"predicted_re", r.predicted.real()},
          {"predicted_im", r.predicted.imag()},
          {"deviation", r.deviation},
          {"threshold", r.threshold},
          {"flagged", r.flagged}};
}

void cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  const auto inst = sample_instance(o, err);
  const auto report = make_report(inst.m, &inst.h, true);
  const auto inter = check_interlacing(report);
  const auto spike = check_spike_bounds(report, inst.spec.lambda);

  const auto mv = inst.m.multiply(*report.top_vector);
  double res = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) {
    const double d = mv[i] - report.eigenvalues_m[0] * (*report.top_vector)[i];
    res += d * d;
  }
  res = std::sqrt(res);
  const double norm = inst.m.frobenius_norm();

  std::vector<Complex> zs;
  const double n = static_cast<double>(inst.m.size());
  if (o.z_re || o.z_im) {
    zs.emplace_back(o.z_re.value_or(1.0), o.z_im.value_or(0.1));
  } else {
    const double lp = find_upper_edge(inst.spec).l_plus;
    zs = {Complex{1.0, 0.1}, Complex{lp + 0.3, 1.0 / std::sqrt(n)}};
  }
  const auto measure = spectral_measure(inst.h, inst.u);
  json laws = json::array();
  bool all = inter.holds && spike.holds && res <= 1e-10 * norm;
  for (const auto z : zs) {
    const auto law = check_local_law(measure, inst.spec, z);
    all = all && !law.flagged;
    laws.push_back(local_law_json(law, z));
  }
  json j{{"spec", inst.spec},
         {"interlacing", {{"holds", inter.holds}, {"worst_margin", inter.worst_margin}}},
         {"spike_bounds",
          {{"holds", spike.holds}, {"lower_margin", spike.lower_margin}, {"upper_margin", spike.upper_margin}}},
         {"eigen_residual", {{"residual", res}, {"norm", norm}, {"holds", res <= 1e-10 * norm}}},
         {"local_law", laws},
         {"all_hold", all}};
  if (o.format == "json") {
    emit_json(j, o, out);
    return;
  }
  const int pr = o.precision;
  std::vector<std::pair<std::string, std::string>> cells{
      {"interlacing", inter.holds ? "true" : "false"},
      {"interlacing_margin", format_number(inter.worst_margin, pr)},
      {"spike_bounds", spike.holds ? "true" : "false"},
      {"eigen_residual", format_number(res, pr)}};
  for (std::size_t k = 0; k < laws.size(); ++k) {
    const auto idx = std::to_string(k + 1);
    cells.emplace_back("local_law_deviation_" + idx, format_number(laws[k]["deviation"].get<double>(), pr));
    cells.emplace_back("local_law_flagged_" + idx, laws[k]["flagged"].get<bool>() ? "true" : "false");
  }
  cells.emplace_back("all_hold", all ? "true" : "false");
  emit_row(cells, o, out);
}

void report_error(std::ostream& err, int code, const std::string& message) {
  err << json{{"code", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

std::string cli_help_all() {
  std::ostringstream out, err;
  run_cli({"--help-all"}, out, err);
  return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  auto p = make_app(o);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    p.app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << p.app->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << p.app->help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, 1, e.what());
    return 1;
  }
  try {
    if (p.sample->parsed()) cmd_sample(o, out, err);
    else if (p.density->parsed()) cmd_density(o, out, err);
    else if (p.edge->parsed()) cmd_edge(o, out, err);
    else if (p.predict->parsed()) cmd_predict(o, out, err);
    else if (p.threshold_hidden->parsed()) cmd_threshold(o, true, out);
    else if (p.threshold_unbalanced->parsed()) cmd_threshold(o, false, out);
    else if (p.histogram->parsed()) cmd_histogram(o, out, err);
    else if (p.sweep->parsed()) cmd_sweep(o, out, err);
    else if (p.check->parsed()) cmd_check(o, out, err);
  } catch (const ValidationError& e) {
    report_error(err, 1, e.what());
    return 1;
  } catch (const NumericalError& e) {
    report_error(err, 2, e.what());
    return 2;
  } catch (const IoError& e) {
    report_error(err, 3, e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, 3, e.what());
    return 3;
  } catch (const std::exception& e) {
    report_error(err, 2, e.what());
    return 2;
  }
  return 0;
}

}  // namespace gsbm
