#include "gsbm/sampler.hpp"

#include <cmath>
#include <sstream>

#include "gsbm/error.hpp"

namespace gsbm {
namespace {

// Block index: 0 for (S,S), 1 for (S^c,S^c), 2 across.
inline int block_of(std::size_t i, std::size_t j, std::size_t n1) {
  const bool a = i < n1;
  const bool b = j < n1;
  if (a && b) return 0;
  if (!a && !b) return 1;
  return 2;
}

void check_bernoulli_noise(const GsbmSpec& spec, const NoiseKind& kind) {
  auto open_unit = [](double p) { return p > 0.0 && p < 1.0; };
  if (!open_unit(kind.q) || !open_unit(kind.p1) || !open_unit(kind.p2)) {
    throw ValidationError("CenteredBernoulli noise requires block probabilities in (0,1)");
  }
  const double qvar = kind.q * (1.0 - kind.q);
  const double a1 = kind.p1 * (1.0 - kind.p1) / qvar;
  const double a2 = kind.p2 * (1.0 - kind.p2) / qvar;
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, y); };
  if (!close(a1, spec.alpha1) || !close(a2, spec.alpha2)) {
    std::ostringstream os;
    os << "CenteredBernoulli probabilities imply alpha=(" << a1 << ", " << a2
       << ") but the spec has (" << spec.alpha1 << ", " << spec.alpha2 << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

SymMatrix sample_sbm_adjacency(const SbmParams& params, SampleSeed seed) {
  validate_sbm(params, /*check_shift=*/false);
  const auto n = static_cast<std::size_t>(params.n);
  const auto n1 = static_cast<std::size_t>(params.n1);
  const double prob[3] = {params.p1, params.p2, params.q};
  const CounterRng rng(seed);
  return SymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) {
    if (i == j && params.zero_diagonal) return 0.0;
    return rng.bernoulli(prob[block_of(i, j, n1)], i, j) ? 1.0 : 0.0;
  });
}

std::vector<double> spike_vector(const GsbmSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.n.value_or(0));
  const auto n1 = static_cast<std::size_t>(block_size(spec));
  std::vector<double> u(n, spec.theta2);
  for (std::size_t i = 0; i < n1; ++i) u[i] = spec.theta1;
  return u;
}

SymMatrix variance_profile(const GsbmSpec& spec) {
  validate_spec(spec);
  const auto n = static_cast<std::size_t>(*spec.n);
  const auto n1 = static_cast<std::size_t>(block_size(spec));
  const double dn = static_cast<double>(n);
  const double var[3] = {spec.alpha1 / dn, spec.alpha2 / dn, 1.0 / dn};
  return SymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) { return var[block_of(i, j, n1)]; });
}

GsbmSample sample_gsbm(const GsbmSpec& spec, const NoiseKind& kind, SampleSeed seed) {
  validate_spec(spec);
  if (!spec.n) throw ValidationError("sampling requires a spec with dimension n");
  const auto n = static_cast<std::size_t>(*spec.n);
  const auto n1 = static_cast<std::size_t>(block_size(spec));
  const double dn = static_cast<double>(n);
  const bool zero_diag = kind.resolved_zero_diagonal();
  const CounterRng rng(seed);

  GsbmSample out;
  switch (kind.family) {
    case NoiseKind::Family::Gaussian:
    case NoiseKind::Family::Rademacher: {
      const double sd[3] = {std::sqrt(spec.alpha1 / dn), std::sqrt(spec.alpha2 / dn),
                            std::sqrt(1.0 / dn)};
      const bool gauss = kind.family == NoiseKind::Family::Gaussian;
      out.h = SymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) {
        if (i == j && zero_diag) return 0.0;
        const double x = gauss ? rng.normal(i, j) : rng.rademacher(i, j);
        return sd[block_of(i, j, n1)] * x;
      });
      break;
    }
    case NoiseKind::Family::CenteredBernoulli: {
      check_bernoulli_noise(spec, kind);
      const double scale = 1.0 / std::sqrt(dn * kind.q * (1.0 - kind.q));
      const double prob[3] = {kind.p1, kind.p2, kind.q};
      out.h = SymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) {
        if (i == j && zero_diag) return 0.0;
        const double p = prob[block_of(i, j, n1)];
        return ((rng.bernoulli(p, i, j) ? 1.0 : 0.0) - p) * scale;
      });
      break;
    }
  }
  out.u = spike_vector(spec);
  out.m = spec.lambda == 0.0 ? out.h : out.h.plus_rank_one(spec.lambda, out.u);
  return out;
}

SymMatrix shift_and_rescale(const SymMatrix& adj, const SbmParams& params) {
  if (!(params.q > 0.0 && params.q < 1.0)) {
    throw ValidationError("degenerate scale: q must lie strictly inside (0,1)");
  }
  if (adj.size() != static_cast<std::size_t>(params.n)) {
    throw ValidationError("adjacency dimension does not match params.n");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.n) * params.q * (1.0 - params.q));
  const double shift =
      params.shift == ShiftKind::HiddenCommunity ? params.q : 0.5 * (params.p1 + params.q);
  return SymMatrix::from_upper(adj.size(),
                               [&](std::size_t i, std::size_t j) { return scale * (adj(i, j) - shift); });
}

}  // namespace gsbm
