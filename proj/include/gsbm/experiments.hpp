#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gsbm/model.hpp"
#include "gsbm/prediction.hpp"
#include "gsbm/spectra.hpp"

namespace gsbm {

/// What a sweep value means.
///  - W: planted probability q + w / sqrt(N) (SbmParams base only)
///  - P: planted probability p itself (SbmParams base only)
///  - Lambda: spike strength (GsbmSpec base only)
/// For a HiddenCommunity base the value sets p1; for Balanced it sets p1
/// and p2.
enum class SweepVariable { W, P, Lambda };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& s);

struct ExperimentConfig {
  std::variant<SbmParams, GsbmSpec> base;
  SweepVariable variable = SweepVariable::W;
  std::vector<double> sweep_values;
  int trials_per_point = 1;
  /// Only read for a GsbmSpec base; an SbmParams base always samples the
  /// Bernoulli adjacency matrix and shifts it.
  NoiseKind noise;
  std::uint64_t master_seed = 0;
  std::filesystem::path outputs;
  int jobs = 1;
  int bins = 100;
};

/// Throws ValidationError for an empty or non-finite sweep, trials < 1,
/// bins < 1, or a sweep variable that does not fit the base.
void validate_config(const ExperimentConfig& config);

/// One sampled instance of a sweep point.
struct PointInstance {
  GsbmSpec spec;
  std::optional<SbmParams> sbm;
};

PointInstance instance_for(const ExperimentConfig& config, double sweep_value);

/// Draws the shifted matrix M for (point, trial). The RNG stream depends
/// only on the indices, never on scheduling.
SymMatrix sample_point(const ExperimentConfig& config, const PointInstance& inst,
                       std::size_t point, std::size_t trial);

struct HistogramData {
  std::vector<double> bin_edges;
  std::vector<std::int64_t> counts;
  std::int64_t n_total = 0;
};

/// `bins` equal-width bins on [min - 0.1, max + 0.1].
HistogramData make_histogram(const std::vector<double>& values, int bins);

struct HistogramResult {
  HistogramData histogram;
  SpectralReport report;
  GsbmSpec spec;
  EdgeResult edge;
};

/// Samples one matrix (point 0, trial 0). The config must hold at most one
/// sweep value; with none the base is used as is.
HistogramResult run_histogram(const ExperimentConfig& config);

struct TransitionRow {
  std::size_t point = 0;
  double sweep_value = 0.0;
  std::size_t trial = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  double overlap = 0.0;
  std::optional<double> predicted_z;
  std::optional<double> predicted_gap;
  std::optional<std::string> error;  ///< set when the trial failed
};

struct PointSummary {
  double sweep_value = 0.0;
  std::size_t successes = 0;
  double mean_gap = 0.0;
  std::optional<double> sd_gap;  ///< sample sd, needs two successes
  double mean_overlap = 0.0;
  std::optional<double> predicted_z;
  std::optional<double> predicted_gap;
  double lambda = 0.0;
  double lambda_c = 0.0;
  double l_plus = 0.0;
};

struct TransitionTable {
  std::vector<TransitionRow> rows;  ///< point-major, trial-minor
  std::vector<PointSummary> points;
};

/// Mean and sample sd per sweep value, from successful rows only.
std::vector<PointSummary> aggregate(const std::vector<TransitionRow>& rows,
                                    const std::vector<PointSummary>& predictions);

TransitionTable run_transition_sweep(const ExperimentConfig& config);

/// Writes hist.csv, eigenvalues.csv and summary.json into config.outputs.
void emit_report(const HistogramResult& result, const ExperimentConfig& config,
                 int precision = 17);
/// Writes sweep.csv and summary.json into config.outputs.
void emit_report(const TransitionTable& table, const ExperimentConfig& config,
                 int precision = 17);

}  // namespace gsbm
