#pragma once

#include <vector>

#include "gsbm/model.hpp"
#include "gsbm/rng.hpp"
#include "gsbm/sym_matrix.hpp"

namespace gsbm {

/// One finite-N realization M = H + lambda u u^T.
struct GsbmSample {
  SymMatrix m;
  SymMatrix h;
  std::vector<double> u;
};

/// Raw 0/1 adjacency matrix of a Bernoulli block model. Block membership
/// is decided by index: i < n1 is in the planted community.
SymMatrix sample_sbm_adjacency(const SbmParams& params, SampleSeed seed);

/// Block-constant unit vector: theta1 on [0, N1), theta2 afterwards.
std::vector<double> spike_vector(const GsbmSpec& spec);

/// Samples the noise with the block variance profile of `spec` and adds
/// the rank-one spike. Requires spec.n.
GsbmSample sample_gsbm(const GsbmSpec& spec, const NoiseKind& kind, SampleSeed seed);

/// scale * (adj - E) where E is E0 (all entries q) for HiddenCommunity or
/// E1 (all entries (p1 + q)/2) for Balanced.
SymMatrix shift_and_rescale(const SymMatrix& adj, const SbmParams& params);

/// Exact second-moment profile S_ij = E[H_ij^2] of a spec, including the
/// diagonal under the block rule.
SymMatrix variance_profile(const GsbmSpec& spec);

}  // namespace gsbm
