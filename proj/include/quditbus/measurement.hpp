#pragma once

// Measurements on qubus modes: vacuum / not-vacuum discrimination (a photon
// number non-resolving herald) and the full photon-number QND projection,
// plus seeded sampling over the resulting branch set.  All probabilities
// come from Gram-matrix norms of the projected states, so non-orthogonal
// coherent branches are handled exactly and never by summing |coeff|^2.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "quditbus/hybrid_state.hpp"

namespace quditbus {

// Unresolved probability allowed beyond the QND enumeration cutoff before a
// branch set is considered unsafe to sample.
inline constexpr double default_tail_tolerance = 1e-9;

struct TailMassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// <n|beta> = e^{-|beta|^2/2} beta^n / sqrt(n!), evaluated in log space so
// labels with |beta| ~ 1e1..1e4 and photon numbers in the hundreds neither
// overflow beta^n nor underflow prematurely.
inline cx coherent_number_amplitude(int n, cx beta) {
  if (n < 0)
    throw std::invalid_argument("coherent_number_amplitude: negative n");
  if (beta == cx{0.0, 0.0}) return n == 0 ? cx{1.0, 0.0} : cx{0.0, 0.0};
  const double a = std::abs(beta);
  const double logmag =
      -0.5 * a * a + n * std::log(a) - 0.5 * std::lgamma(n + 1.0);
  return std::polar(std::exp(logmag), n * std::arg(beta));
}

// SplitMix64 mix of a base seed and a stream index.  Trajectory workers get
// one derived seed per trial, so results are reproducible no matter how the
// trials are distributed or ordered.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct MeasurementBranch {
  int outcome = 0;
  double probability = 0.0;
  // Normalized whenever probability > 0; branches whose amplitude vanishes
  // keep the raw (possibly empty) projection.
  HybridState post_state;
};

struct BranchSet {
  std::vector<MeasurementBranch> branches;
  double tail_mass = 0.0;
  double tail_tolerance = default_tail_tolerance;
  bool tail_warning = false;
};

namespace detail {

// Projects one bus mode onto |n> and removes it.  May return an empty state
// when every projected coefficient underflows to zero.
inline HybridState project_mode_number(const HybridState& s, int mode, int n) {
  std::vector<HybridTerm> out;
  out.reserve(s.term_count());
  for (const auto& t : s.terms()) {
    const cx amp = coherent_number_amplitude(n, t.bus[mode]);
    if (amp == cx{0.0, 0.0}) continue;
    HybridTerm p = t;
    p.coeff *= amp;
    p.bus.erase(p.bus.begin() + mode);
    out.push_back(std::move(p));
  }
  return HybridState(std::move(out), s.merge_tolerance());
}

inline double branch_probability(const HybridState& projected) {
  if (projected.empty()) return 0.0;
  return std::min(norm_squared(projected), 1.0);
}

// Draws an index with probability proportional to its weight, consuming one
// engine value.  The uniform variate is built directly from the engine word
// so the draw is identical across standard library implementations.
inline std::size_t sample_weighted(const std::vector<double>& weights,
                                   std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = (rng() >> 11) * 0x1.0p-53 * total;
  if (!(total > 0.0))
    throw std::runtime_error("sample_weighted: all weights vanish");
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last;
}

}  // namespace detail

// Vacuum herald on one bus mode.  Outcome 0 (no click) projects onto |0> and
// removes the mode; outcome 1 (click) is the renormalized remainder
// (1 - |0><0|)|psi>, which keeps the mode for diagnostics.
inline BranchSet pnnd_herald(const HybridState& state, int mode) {
  if (state.empty()) throw std::invalid_argument("pnnd_herald: empty state");
  if (mode < 0 || mode >= state.bus_modes())
    throw std::out_of_range("pnnd_herald: bus mode out of range");
  detail::require_normalized(state, "pnnd_herald");

  HybridState success = detail::project_mode_number(state, mode, 0);
  const double p0 = detail::branch_probability(success);

  // Remainder: original terms minus the vacuum component re-inserted with
  // label 0 on the measured mode.  Terms already in vacuum cancel exactly.
  std::vector<HybridTerm> rem = state.terms();
  for (const auto& t : state.terms()) {
    const cx amp = coherent_number_amplitude(0, t.bus[mode]);
    if (amp == cx{0.0, 0.0}) continue;
    HybridTerm p = t;
    p.coeff *= -amp;  // amp = <0|beta_t>, real positive
    p.bus[mode] = cx{0.0, 0.0};
    rem.push_back(std::move(p));
  }
  HybridState failure(std::move(rem), state.merge_tolerance());
  const double p1 = std::max(0.0, 1.0 - p0);

  BranchSet out;
  out.branches.push_back(
      {0, p0, p0 > 0.0 ? normalize(success) : std::move(success)});
  out.branches.push_back(
      {1, p1, (p1 > 0.0 && !failure.empty()) ? normalize(failure)
                                             : std::move(failure)});
  out.tail_mass = 0.0;
  out.tail_warning = false;
  return out;
}

// Default QND enumeration cutoff: generous Poisson coverage of the largest
// label on the measured mode, so the unresolved tail sits far below the
// tolerance for any input the protocols produce.
inline int default_qnd_nmax(const HybridState& state, int mode) {
  double bmax = 0.0;
  for (const auto& t : state.terms())
    bmax = std::max(bmax, std::abs(t.bus[mode]));
  return static_cast<int>(std::ceil(bmax * bmax + 8.0 * bmax + 10.0));
}

// Photon-number QND projection |n><n| on one bus mode, enumerating outcomes
// n = 0..n_max (n_max < 0 selects the default cutoff).  The measured mode is
// removed from every branch.  Exceeding the tail tolerance only raises the
// warning flag here; sampling from such a set is the hard error.
inline BranchSet qnd_project(const HybridState& state, int mode,
                             int n_max = -1,
                             double tail_tolerance = default_tail_tolerance) {
  if (state.empty()) throw std::invalid_argument("qnd_project: empty state");
  if (mode < 0 || mode >= state.bus_modes())
    throw std::out_of_range("qnd_project: bus mode out of range");
  if (!(tail_tolerance >= 0.0))
    throw std::invalid_argument("qnd_project: tail tolerance must be >= 0");
  detail::require_normalized(state, "qnd_project");
  if (n_max < 0) n_max = default_qnd_nmax(state, mode);

  BranchSet out;
  out.tail_tolerance = tail_tolerance;
  out.branches.reserve(n_max + 1);
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    HybridState projected = detail::project_mode_number(state, mode, n);
    const double p = detail::branch_probability(projected);
    total += p;
    out.branches.push_back(
        {n, p, p > 0.0 ? normalize(projected) : std::move(projected)});
  }
  out.tail_mass = std::max(0.0, 1.0 - total);
  out.tail_warning = out.tail_mass > tail_tolerance;
  return out;
}

// Draws one branch with probability proportional to its weight.  The draw
// consumes exactly one engine value, so trajectories are reproducible from
// the seed alone.  Refuses branch sets whose unresolved tail exceeds the
// tolerance: sampling would silently misweight the truncated outcomes.
inline const MeasurementBranch& sample_branch(const BranchSet& set,
                                              std::mt19937_64& rng) {
  if (set.branches.empty())
    throw std::invalid_argument("sample_branch: no branches");
  if (set.tail_mass > set.tail_tolerance)
    throw TailMassError("sample_branch: unresolved tail mass " +
                        std::to_string(set.tail_mass) + " exceeds tolerance");
  std::vector<double> weights;
  weights.reserve(set.branches.size());
  for (const auto& b : set.branches) weights.push_back(b.probability);
  return set.branches[detail::sample_weighted(weights, rng)];
}

}  // namespace quditbus
