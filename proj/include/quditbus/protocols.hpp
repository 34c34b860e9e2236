#pragma once

// End-to-end generation pipelines.  The heralded scheme couples two
// independent polarization qudits to a pair of qubus beams, interferes the
// beams and heralds on the dark port; success projects onto the diagonal
// Sum_i a_i b_i |i>|i>.  The cascade scheme replaces the herald with a QND
// photon count and reprocesses every nonzero outcome through a second
// module under classical feedforward, so some entangled output is produced
// for every measurement record.  A loss report reruns the herald over all
// photon-loss patterns of given weight on the inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quditbus/elements.hpp"
#include "quditbus/measurement.hpp"

namespace quditbus {

struct QuditSpec {
  int dim = 2;
  std::vector<cx> coeffs;

  QuditSpec(int dim_, std::vector<cx> coeffs_)
      : dim(dim_), coeffs(std::move(coeffs_)) {
    if (dim < 2) throw std::invalid_argument("QuditSpec: dim must be >= 2");
    if (static_cast<int>(coeffs.size()) != dim)
      throw std::invalid_argument("QuditSpec: expected dim coefficients");
    double s = 0.0;
    for (cx c : coeffs) {
      if (!detail::finite(c))
        throw std::invalid_argument("QuditSpec: non-finite coefficient");
      s += std::norm(c);
    }
    if (std::abs(s - 1.0) > 1e-10)
      throw std::invalid_argument("QuditSpec: coefficients not normalized");
  }

  static QuditSpec maximal(int dim) {
    if (dim < 2) throw std::invalid_argument("QuditSpec: dim must be >= 2");
    return QuditSpec(dim,
                     std::vector<cx>(dim, cx{1.0 / std::sqrt(double(dim)), 0.0}));
  }

  // Rescales arbitrary coefficients to unit norm first.
  static QuditSpec normalized(std::vector<cx> coeffs) {
    double s = 0.0;
    for (cx c : coeffs) s += std::norm(c);
    if (s <= 0.0)
      throw std::invalid_argument("QuditSpec: cannot normalize zero vector");
    const double inv = 1.0 / std::sqrt(s);
    for (cx& c : coeffs) c *= inv;
    const int dim = static_cast<int>(coeffs.size());
    return QuditSpec(dim, std::move(coeffs));
  }
};

enum class RunMode { enumerate, trajectory };

struct ProtocolParams {
  cx alpha{0.0, 0.0};
  XpmTheta theta{};
  int n_max = -1;  // QND enumeration cutoff; < 0 selects the default
  RunMode mode = RunMode::enumerate;
  std::uint64_t rng_seed = 0;
  long long trials = 10000;
  double tail_tolerance = default_tail_tolerance;
  // Cascade branch records below this probability are dropped and their mass
  // reported as discarded; 0 keeps every nonzero branch.
  double branch_floor = 1e-12;
  // The two-stage cascade is specified for qutrits; this flag lets the same
  // circuit run on higher dimensions (structurally well defined, but phase
  // corrections are derived only for dim 3).
  bool experimental_qudit_cascade = false;
};

// Feedforward operation applied to a branch, recorded so a consumer can
// replay or undo it.
struct Correction {
  enum class Kind { bit_flip_b, photon_phase_a, photon_phase_b };
  Kind kind = Kind::bit_flip_b;
  double angle = 0.0;  // radians, relevant for the photon_phase kinds
};

inline std::string to_string(const Correction& c) {
  if (c.kind == Correction::Kind::bit_flip_b) return "bit_flip(b)";
  const char* target = c.kind == Correction::Kind::photon_phase_a ? "a" : "b";
  // Angles are multiples of pi/2 whenever they come from parity feedforward.
  const double q = c.angle / (std::numbers::pi / 2.0);
  const double qr = std::round(q);
  char buf[64];
  if (std::abs(q - qr) < 1e-12 && std::abs(qr) <= 8.0) {
    static const char* names[] = {"-2pi", "-3pi/2", "-pi", "-pi/2", "0",
                                  "pi/2", "pi",     "3pi/2", "2pi"};
    const int k = static_cast<int>(qr);
    if (k >= -4 && k <= 4) {
      std::snprintf(buf, sizeof buf, "photon_phase(%s,%s)", target,
                    names[k + 4]);
      return buf;
    }
  }
  std::snprintf(buf, sizeof buf, "photon_phase(%s,%.17g)", target, c.angle);
  return buf;
}

struct BranchRecord {
  std::string label;
  std::vector<int> outcomes;
  double probability = 0.0;      // exact enumerated probability
  long long sampled_count = -1;  // trajectory hit count, -1 otherwise
  HybridState state;             // corrections already applied
  std::vector<Correction> corrections;
};

struct ProtocolResult {
  std::vector<BranchRecord> branches;
  double total_probability = 0.0;  // sum over emitted branches
  double tail_mass = 0.0;          // unresolved QND mass, probability-weighted
  bool tail_warning = false;
  double discarded_mass = 0.0;     // enumerated mass below the branch floor
  long long trials = 0;            // > 0 for trajectory results
  long long unrecorded_samples = 0;

  // Herald diagnostics; NaN when not applicable.
  double ideal_success_probability = std::numeric_limits<double>::quiet_NaN();
  double error_probability_computed = std::numeric_limits<double>::quiet_NaN();
  // Closed-form misherald estimate using e^{-|beta|^2} vacuum weights on the
  // dark-port labels; agrees with the computed value to roundoff.
  double error_probability_closed_form =
      std::numeric_limits<double>::quiet_NaN();
  // Variant of the same sum with e^{-|beta|^2/2} weights, reported for
  // comparison only.
  double error_probability_reference =
      std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_params(const ProtocolParams& params, const char* who) {
  if (!finite(params.alpha) || std::abs(params.alpha) <= 0.0)
    throw std::invalid_argument(std::string(who) +
                                ": alpha must be finite and nonzero");
  if (params.mode == RunMode::trajectory && params.trials < 1)
    throw std::invalid_argument(std::string(who) +
                                ": trajectory mode needs trials >= 1");
  if (!(params.branch_floor >= 0.0))
    throw std::invalid_argument(std::string(who) +
                                ": branch floor must be >= 0");
}

// Two-qudit product state with no bus modes attached yet.
inline HybridState bare_product(const QuditSpec& a, const QuditSpec& b) {
  std::vector<HybridTerm> terms;
  terms.reserve(a.dim * b.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < b.dim; ++j) {
      const cx c = a.coeffs[i] * b.coeffs[j];
      if (c == cx{0.0, 0.0}) continue;
      terms.push_back({c, QuditKet(a.dim, i), QuditKet(b.dim, j), {}});
    }
  return HybridState(std::move(terms));
}

inline HybridState attach_bus(const HybridState& s, const BusLabel& bus) {
  if (s.bus_modes() != 0)
    throw std::invalid_argument("attach_bus: state already carries bus modes");
  auto terms = s.terms();
  for (auto& t : terms) t.bus = bus;
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Couple, interfere, herald: the generation module.  Mode 0 is the dark
// port; diagonal ket pairs leave it in exact vacuum.
inline BranchSet run_herald_pipeline(const HybridState& input, XpmTheta theta) {
  HybridState s = xpm_couple(input, CouplingPlan::module_plan(), theta);
  s = beamsplitter_5050(s, 0, 1);
  return pnnd_herald(s, 0);
}

// The cascade's modified module: coupling, compensation -(dim-1)theta on
// both beams, interference.  Afterwards mode 0 carries i sqrt2 alpha
// sin(D theta) and mode 1 carries sqrt2 alpha cos(D theta), D = index
// difference of the term's kets, so equal indices dark mode 0 exactly.
inline HybridState modified_module(const HybridState& input, XpmTheta theta,
                                   int dim) {
  HybridState s = xpm_couple(input, CouplingPlan::module_plan(), theta);
  const double comp = -(dim - 1) * theta.radians;
  s = phase_shift(s, 0, comp);
  s = phase_shift(s, 1, comp);
  return beamsplitter_5050(s, 0, 1);
}

// Splits the surviving bus mode against vacuum into two equal labels
// (beta/sqrt2, beta/sqrt2), recycling it as the ancilla pair for the next
// module.  Per-term labels may differ; the split preserves each exactly.
inline HybridState recycle_bus(const HybridState& s) {
  return beamsplitter_5050(append_vacuum_mode(s), 0, 1);
}

// Phase corrections for the second-stage branches of the qutrit cascade,
// derived from the outcome parities rather than hardcoded per case.
//
// Relative to the |0>|1> component, the uncorrected branch carries spurious
// phases (units of pi): |1>|2>: p, |1>|0>: q, |2>|1>: p + q, with
// p = n mod 2 and q = n' mod 2.  photon_phase(a, pa) and photon_phase(b, pb)
// add pa*ja + pb*jb to ket (ja, jb); solving
//   pa + pb = -p pi,   pa - pb = -q pi   (mod 2pi)
// equalizes all four components up to a global phase.
inline std::vector<Correction> middle_corrections(int n, int nprime) {
  const int p = n % 2;
  const int q = nprime % 2;
  const double pa = -(p + q) * (std::numbers::pi / 2.0);
  const double pb = (q - p) * (std::numbers::pi / 2.0);
  std::vector<Correction> out;
  if (pa != 0.0) out.push_back({Correction::Kind::photon_phase_a, pa});
  if (pb != 0.0) out.push_back({Correction::Kind::photon_phase_b, pb});
  return out;
}

// The outer branch only supports kets |0>|0> and |2>|2>; its spurious
// e^{i n pi} on the latter is cancelled by a parity phase on qudit a.
inline std::vector<Correction> outer_corrections(int n) {
  if (n % 2 == 0) return {};
  return {{Correction::Kind::photon_phase_a, -std::numbers::pi / 2.0}};
}

inline HybridState apply_corrections(HybridState s,
                                     const std::vector<Correction>& cs) {
  for (const auto& c : cs) {
    switch (c.kind) {
      case Correction::Kind::bit_flip_b:
        s = bit_flip(s, Qudit::b);
        break;
      case Correction::Kind::photon_phase_a:
        s = photon_phase(s, Qudit::a, c.angle);
        break;
      case Correction::Kind::photon_phase_b:
        s = photon_phase(s, Qudit::b, c.angle);
        break;
    }
  }
  return s;
}

}  // namespace detail

// Bus-free target of the heralded success branch: normalize(Sum a_i b_i |ii>).
inline HybridState ideal_herald_target(const QuditSpec& a, const QuditSpec& b) {
  if (a.dim != b.dim)
    throw std::invalid_argument("ideal_herald_target: dimensions differ");
  std::vector<HybridTerm> terms;
  for (int i = 0; i < a.dim; ++i) {
    const cx c = a.coeffs[i] * b.coeffs[i];
    if (c == cx{0.0, 0.0}) continue;
    terms.push_back({c, QuditKet(a.dim, i), QuditKet(b.dim, i), {}});
  }
  if (terms.empty())
    throw std::runtime_error(
        "ideal_herald_target: all diagonal products vanish");
  return normalize(HybridState(std::move(terms)));
}

// Bus-free post-correction targets of the three qutrit cascade families.
// Returns nothing when the family's coefficients all vanish for this input
// or when the family is undefined for the dimension.
inline std::optional<HybridState> cascade_branch_target(
    const QuditSpec& a, const QuditSpec& b, const std::string& label) {
  if (a.dim != b.dim)
    throw std::invalid_argument("cascade_branch_target: dimensions differ");
  std::vector<HybridTerm> terms;
  auto add = [&](int i, int j) {
    const cx c = a.coeffs[i] * b.coeffs[j];
    if (c != cx{0.0, 0.0})
      terms.push_back({c, QuditKet(a.dim, i), QuditKet(b.dim, j), {}});
  };
  if (label == "diagonal") {
    for (int i = 0; i < a.dim; ++i) add(i, i);
  } else if (a.dim != 3) {
    return std::nullopt;
  } else if (label == "outer") {
    add(0, 2);
    add(2, 0);
  } else if (label == "middle") {
    add(0, 1);
    add(1, 0);
    add(1, 2);
    add(2, 1);
  } else {
    throw std::invalid_argument("cascade_branch_target: unknown label");
  }
  if (terms.empty()) return std::nullopt;
  // Outer and middle targets are expressed in the post-bit-flip frame the
  // cascade leaves the qudits in.
  HybridState t(std::move(terms));
  if (label != "diagonal") t = bit_flip(t, Qudit::b);
  return normalize(t);
}

inline ProtocolResult generate_entangled(const QuditSpec& a, const QuditSpec& b,
                                         const ProtocolParams& params) {
  if (a.dim != b.dim)
    throw std::invalid_argument("generate_entangled: dimensions differ");
  detail::check_params(params, "generate_entangled");

  const HybridState input = detail::attach_bus(
      detail::bare_product(a, b), BusLabel{params.alpha, params.alpha});
  BranchSet herald = detail::run_herald_pipeline(input, params.theta);
  MeasurementBranch& succ = herald.branches[0];
  MeasurementBranch& fail = herald.branches[1];

  ProtocolResult out;
  out.branches.push_back(
      {"success", {0}, succ.probability, -1, std::move(succ.post_state), {}});
  out.branches.push_back(
      {"failure", {1}, fail.probability, -1, std::move(fail.post_state), {}});
  out.total_probability = out.branches[0].probability +
                          out.branches[1].probability;

  double ideal = 0.0;
  for (int i = 0; i < a.dim; ++i)
    ideal += std::norm(a.coeffs[i] * b.coeffs[i]);
  out.ideal_success_probability = ideal;
  out.error_probability_computed =
      std::max(0.0, out.branches[0].probability - ideal);

  // Dark-port label for ket pair (i, j) rebuilt analytically:
  // alpha (e^{i theta (i + n-1-j)} - e^{i theta (n-1-i+j)}) / sqrt2.
  double closed = 0.0, reference = 0.0;
  const int n = a.dim;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = std::norm(a.coeffs[i] * b.coeffs[j]);
      if (w == 0.0) continue;
      const cx dark = params.alpha *
                      (std::polar(1.0, params.theta.radians * (i + n - 1 - j)) -
                       std::polar(1.0, params.theta.radians * (n - 1 - i + j))) *
                      (std::numbers::sqrt2 / 2.0);
      const double vac = std::abs(coherent_overlap(cx{0.0, 0.0}, dark));
      closed += w * vac * vac;
      reference += w * vac;
    }
  out.error_probability_closed_form = closed;
  out.error_probability_reference = reference;

  if (params.mode == RunMode::trajectory) {
    out.trials = params.trials;
    std::vector<double> weights = {out.branches[0].probability,
                                   out.branches[1].probability};
    std::vector<long long> counts(2, 0);
    for (long long t = 0; t < params.trials; ++t) {
      std::mt19937_64 rng(derive_seed(params.rng_seed, t));
      ++counts[detail::sample_weighted(weights, rng)];
    }
    out.branches[0].sampled_count = counts[0];
    out.branches[1].sampled_count = counts[1];
  }
  return out;
}

inline ProtocolResult cascade(const QuditSpec& a, const QuditSpec& b,
                              const ProtocolParams& params) {
  if (a.dim != b.dim)
    throw std::invalid_argument("cascade: dimensions differ");
  if (a.dim != 3 && !params.experimental_qudit_cascade)
    throw std::invalid_argument(
        "cascade: specified for dim 3; set experimental_qudit_cascade to run "
        "higher dimensions");
  detail::check_params(params, "cascade");
  const int dim = a.dim;
  const bool qutrit = dim == 3;

  const HybridState input = detail::attach_bus(
      detail::bare_product(a, b), BusLabel{params.alpha, params.alpha});
  const HybridState s1 = detail::modified_module(input, params.theta, dim);
  BranchSet set1 =
      qnd_project(s1, 0, params.n_max, params.tail_tolerance);
  const bool sampling = params.mode == RunMode::trajectory;
  if (sampling && set1.tail_warning)
    throw TailMassError("cascade: stage-1 tail mass exceeds tolerance");

  ProtocolResult out;
  out.tail_mass = set1.tail_mass;
  out.tail_warning = set1.tail_warning;

  // Sampling tables kept per stage-1 outcome for trajectory mode.
  std::vector<double> stage1_weights;
  std::map<int, std::vector<double>> stage2_tables;
  std::map<std::pair<int, int>, std::size_t> record_index;

  auto emit = [&](BranchRecord&& rec) {
    record_index[{rec.outcomes[0],
                  rec.outcomes.size() > 1 ? rec.outcomes[1] : -1}] =
        out.branches.size();
    out.total_probability += rec.probability;
    out.branches.push_back(std::move(rec));
  };

  for (auto& b1 : set1.branches) {
    stage1_weights.push_back(b1.probability);
    if (b1.probability <= 0.0) continue;
    const int n = b1.outcome;

    if (n == 0) {
      if (b1.probability < params.branch_floor) {
        out.discarded_mass += b1.probability;
        continue;
      }
      emit({"diagonal", {0}, b1.probability, -1, std::move(b1.post_state), {}});
      continue;
    }

    if (b1.probability < params.branch_floor) {
      // Every joint (n, n') probability sits below the floor too.
      out.discarded_mass += b1.probability;
      continue;
    }

    HybridState flipped = bit_flip(b1.post_state, Qudit::b);
    HybridState s2 = detail::modified_module(detail::recycle_bus(flipped),
                                             params.theta, dim);
    BranchSet set2 =
        qnd_project(s2, 0, params.n_max, params.tail_tolerance);
    if (sampling && set2.tail_warning)
      throw TailMassError("cascade: stage-2 tail mass exceeds tolerance");
    out.tail_mass += b1.probability * set2.tail_mass;
    out.tail_warning = out.tail_warning || set2.tail_warning;

    if (sampling) {
      std::vector<double> w;
      w.reserve(set2.branches.size());
      for (const auto& b2 : set2.branches) w.push_back(b2.probability);
      stage2_tables[n] = std::move(w);
    }

    for (auto& b2 : set2.branches) {
      if (b2.probability <= 0.0) continue;
      const int nprime = b2.outcome;
      const double joint = b1.probability * b2.probability;
      if (joint < params.branch_floor) {
        out.discarded_mass += joint;
        continue;
      }
      std::vector<Correction> corr = {{Correction::Kind::bit_flip_b, 0.0}};
      std::string label;
      if (nprime == 0) {
        label = "outer";
        if (qutrit) {
          auto oc = detail::outer_corrections(n);
          corr.insert(corr.end(), oc.begin(), oc.end());
        }
      } else {
        label = "middle";
        if (qutrit) {
          auto mc = detail::middle_corrections(n, nprime);
          corr.insert(corr.end(), mc.begin(), mc.end());
        }
      }
      // The bit flip already acted inside the pipeline; only the phase
      // corrections still need applying here.
      HybridState state = detail::apply_corrections(
          b2.post_state, {corr.begin() + 1, corr.end()});
      emit({std::move(label),
            {n, nprime},
            joint,
            -1,
            std::move(state),
            std::move(corr)});
    }
  }

  if (params.mode == RunMode::trajectory) {
    out.trials = params.trials;
    for (auto& rec : out.branches) rec.sampled_count = 0;
    for (long long t = 0; t < params.trials; ++t) {
      std::mt19937_64 rng(derive_seed(params.rng_seed, t));
      const std::size_t i1 = detail::sample_weighted(stage1_weights, rng);
      const int n = set1.branches[i1].outcome;
      std::pair<int, int> key{n, -1};
      if (n != 0) {
        auto it = stage2_tables.find(n);
        if (it == stage2_tables.end()) {
          ++out.unrecorded_samples;
          continue;
        }
        const std::size_t i2 = detail::sample_weighted(it->second, rng);
        key = {n, static_cast<int>(i2)};
      }
      auto rit = record_index.find(key);
      if (rit == record_index.end())
        ++out.unrecorded_samples;
      else
        ++out.branches[rit->second].sampled_count;
    }
  }
  return out;
}

enum class Polarization { horizontal, vertical };

// Single-photon loss as an annihilation event on one polarization of one
// qudit: V-loss |j>_n -> sqrt(j) |j-1>_{n-1}, H-loss |j>_n ->
// sqrt(n-1-j) |j>_{n-1}.  The result is unnormalized; its squared norm is
// the relative weight of this loss branch.
inline HybridState apply_loss(const HybridState& s, Qudit which,
                              Polarization pol) {
  if (s.empty()) throw std::invalid_argument("apply_loss: empty state");
  std::vector<HybridTerm> terms;
  terms.reserve(s.term_count());
  for (const auto& t : s.terms()) {
    const QuditKet& k = (which == Qudit::a) ? t.ket_a : t.ket_b;
    int new_index = 0;
    double factor = 0.0;
    if (pol == Polarization::vertical) {
      if (k.index == 0) continue;
      factor = std::sqrt(double(k.index));
      new_index = k.index - 1;
    } else {
      if (k.index == k.dim - 1) continue;
      factor = std::sqrt(double(k.dim - 1 - k.index));
      new_index = k.index;
    }
    HybridTerm nt = t;
    nt.coeff *= factor;
    QuditKet& nk = (which == Qudit::a) ? nt.ket_a : nt.ket_b;
    nk = QuditKet(k.dim - 1, new_index);
    terms.push_back(std::move(nt));
  }
  if (terms.empty())
    throw std::runtime_error("apply_loss: state destroyed by loss");
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Number of spectrum entries treated as nonzero when quoting a Schmidt rank.
inline constexpr double schmidt_rank_threshold = 1e-8;

struct LossPattern {
  int v_losses_a = 0;
  int h_losses_a = 0;
  int v_losses_b = 0;
  int h_losses_b = 0;
};

struct LossRow {
  LossPattern pattern;
  bool destroyed = false;
  double branch_weight = 0.0;  // squared norm of the lossy input
  double herald_probability = 0.0;
  int schmidt_rank = 0;
  bool reaches_reduced_rank = false;  // rank == dim - m
  std::vector<double> spectrum;
};

struct LossReport {
  int m = 0;
  int reduced_dim = 0;
  std::vector<LossRow> rows;
};

// Applies every distinct pattern of m photon losses per qudit (loss events
// commute, so patterns are counted as V/H multisets) to the inputs, then
// reruns the herald pipeline on each surviving branch.  Ranks use
// entanglement_spectrum with the schmidt_rank_threshold cut.
inline LossReport loss_robustness_report(const QuditSpec& a, const QuditSpec& b,
                                         int m, const ProtocolParams& params) {
  if (a.dim != b.dim)
    throw std::invalid_argument("loss_robustness_report: dimensions differ");
  if (m < 0 || m >= a.dim - 1)
    throw std::invalid_argument(
        "loss_robustness_report: need 0 <= m < dim-1");
  detail::check_params(params, "loss_robustness_report");

  LossReport report;
  report.m = m;
  report.reduced_dim = a.dim - m;
  const HybridState base = detail::bare_product(a, b);

  for (int ka = 0; ka <= m; ++ka) {
    for (int kb = 0; kb <= m; ++kb) {
      LossRow row;
      row.pattern = {ka, m - ka, kb, m - kb};
      try {
        HybridState lossy = base;
        for (int i = 0; i < ka; ++i)
          lossy = apply_loss(lossy, Qudit::a, Polarization::vertical);
        for (int i = 0; i < m - ka; ++i)
          lossy = apply_loss(lossy, Qudit::a, Polarization::horizontal);
        for (int i = 0; i < kb; ++i)
          lossy = apply_loss(lossy, Qudit::b, Polarization::vertical);
        for (int i = 0; i < m - kb; ++i)
          lossy = apply_loss(lossy, Qudit::b, Polarization::horizontal);
        row.branch_weight = norm_squared(lossy);
        const HybridState in = detail::attach_bus(
            normalize(lossy), BusLabel{params.alpha, params.alpha});
        BranchSet herald = detail::run_herald_pipeline(in, params.theta);
        const auto& succ = herald.branches[0];
        row.herald_probability = succ.probability;
        if (succ.probability > 0.0) {
          row.spectrum = entanglement_spectrum(succ.post_state);
          for (double s : row.spectrum)
            if (s > schmidt_rank_threshold) ++row.schmidt_rank;
          if (row.schmidt_rank > report.reduced_dim)
            throw std::logic_error(
                "loss_robustness_report: rank exceeds reduced dimension");
          row.reaches_reduced_rank = row.schmidt_rank == report.reduced_dim;
        }
      } catch (const std::runtime_error&) {
        row.destroyed = true;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace quditbus
