#pragma once

// Dense truncated-Fock cross-check engine.  Everything the symbolic layer
// does with closed-form coherent labels is redone here by brute force on a
// truncated number-state tensor, giving an independent check of
// probabilities, amplitudes and overlaps.  Mode layout for an embedded
// two-qudit + bus state: [a_H, a_V, b_H, b_V, bus...].

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quditbus/protocols.hpp"

namespace quditbus::fock {

inline constexpr int mode_a_h = 0;
inline constexpr int mode_a_v = 1;
inline constexpr int mode_b_h = 2;
inline constexpr int mode_b_v = 3;
inline constexpr int first_bus_mode = 4;

inline constexpr double default_leakage_threshold = 1e-10;

class FockVector {
 public:
  FockVector() = default;

  explicit FockVector(std::vector<int> cutoffs) : cutoffs_(std::move(cutoffs)) {
    if (cutoffs_.empty())
      throw std::invalid_argument("FockVector: no modes");
    std::size_t n = 1;
    for (int c : cutoffs_) {
      if (c < 1) throw std::invalid_argument("FockVector: cutoff must be >= 1");
      if (n > (std::size_t{1} << 26) / static_cast<std::size_t>(c))
        throw std::invalid_argument("FockVector: basis too large");
      n *= static_cast<std::size_t>(c);
    }
    strides_.assign(cutoffs_.size(), 1);
    for (int m = static_cast<int>(cutoffs_.size()) - 2; m >= 0; --m)
      strides_[m] = strides_[m + 1] * static_cast<std::size_t>(cutoffs_[m + 1]);
    amp_.assign(n, cx{0.0, 0.0});
  }

  const std::vector<int>& cutoffs() const { return cutoffs_; }
  int modes() const { return static_cast<int>(cutoffs_.size()); }
  std::size_t size() const { return amp_.size(); }
  std::size_t stride(int mode) const { return strides_[mode]; }
  int level(std::size_t index, int mode) const {
    return static_cast<int>((index / strides_[mode]) %
                            static_cast<std::size_t>(cutoffs_[mode]));
  }

  std::vector<cx>& data() { return amp_; }
  const std::vector<cx>& data() const { return amp_; }

  cx& at(const std::vector<int>& levels) {
    return amp_[flat(levels)];
  }
  cx at(const std::vector<int>& levels) const { return amp_[flat(levels)]; }

 private:
  std::size_t flat(const std::vector<int>& levels) const {
    if (levels.size() != cutoffs_.size())
      throw std::invalid_argument("FockVector: level tuple arity mismatch");
    std::size_t idx = 0;
    for (std::size_t m = 0; m < levels.size(); ++m) {
      if (levels[m] < 0 || levels[m] >= cutoffs_[m])
        throw std::out_of_range("FockVector: level out of range");
      idx += static_cast<std::size_t>(levels[m]) * strides_[m];
    }
    return idx;
  }

  std::vector<int> cutoffs_;
  std::vector<std::size_t> strides_;
  std::vector<cx> amp_;
};

inline cx inner_product(const FockVector& u, const FockVector& v) {
  if (u.cutoffs() != v.cutoffs())
    throw std::invalid_argument("fock::inner_product: cutoff mismatch");
  cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i)
    acc += std::conj(u.data()[i]) * v.data()[i];
  return acc;
}

inline double norm(const FockVector& v) {
  double s = 0.0;
  for (cx a : v.data()) s += std::norm(a);
  return std::sqrt(s);
}

inline FockVector normalize(const FockVector& v) {
  const double n = norm(v);
  if (n == 0.0)
    throw std::runtime_error("fock::normalize: zero vector");
  FockVector out = v;
  for (cx& a : out.data()) a /= n;
  return out;
}

// Probability mass sitting at a mode's top level; nonzero mass there means
// the truncation is biting.
inline double top_level_mass(const FockVector& v, int mode) {
  if (mode < 0 || mode >= v.modes())
    throw std::out_of_range("fock::top_level_mass: mode out of range");
  const int top = v.cutoffs()[mode] - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.level(i, mode) == top) s += std::norm(v.data()[i]);
  return s;
}

// Expands a symbolic state into the dense basis.  Photonic cutoffs are exact
// (dim levels per polarization mode); every bus mode is truncated at
// bus_cutoff levels, and each coherent label must fit under the leakage
// threshold.
inline FockVector embed(const HybridState& state, int bus_cutoff,
                        double leakage_threshold = default_leakage_threshold) {
  if (state.empty()) throw std::invalid_argument("fock::embed: empty state");
  if (state.bus_modes() > 0 && bus_cutoff < 2)
    throw std::invalid_argument("fock::embed: bus cutoff must be >= 2");

  std::vector<int> cutoffs = {state.dim_a(), state.dim_a(), state.dim_b(),
                              state.dim_b()};
  for (int m = 0; m < state.bus_modes(); ++m) cutoffs.push_back(bus_cutoff);
  FockVector out(cutoffs);

  const int nbus = state.bus_modes();
  std::vector<std::vector<cx>> col(nbus);
  std::vector<int> levels(nbus, 0);
  for (const auto& t : state.terms()) {
    for (int m = 0; m < nbus; ++m) {
      col[m].resize(bus_cutoff);
      double mass = 0.0;
      for (int k = 0; k < bus_cutoff; ++k) {
        col[m][k] = coherent_number_amplitude(k, t.bus[m]);
        mass += std::norm(col[m][k]);
      }
      if (1.0 - mass > leakage_threshold)
        throw std::runtime_error(
            "fock::embed: coherent label leaks past the cutoff");
    }
    std::size_t base = 0;
    base += static_cast<std::size_t>(t.ket_a.horizontal()) * out.stride(mode_a_h);
    base += static_cast<std::size_t>(t.ket_a.vertical()) * out.stride(mode_a_v);
    base += static_cast<std::size_t>(t.ket_b.horizontal()) * out.stride(mode_b_h);
    base += static_cast<std::size_t>(t.ket_b.vertical()) * out.stride(mode_b_v);
    // Odometer over the bus level tuple.
    std::fill(levels.begin(), levels.end(), 0);
    while (true) {
      cx v = t.coeff;
      std::size_t idx = base;
      for (int m = 0; m < nbus; ++m) {
        v *= col[m][levels[m]];
        idx += static_cast<std::size_t>(levels[m]) *
               out.stride(first_bus_mode + m);
      }
      out.data()[idx] += v;
      int m = nbus - 1;
      for (; m >= 0; --m) {
        if (++levels[m] < bus_cutoff) break;
        levels[m] = 0;
      }
      if (m < 0) break;
    }
  }
  return out;
}

// Diagonal cross-Kerr unitary e^{i theta n_1 n_2} between two modes.
inline FockVector apply_cross_kerr(const FockVector& v, int mode1, int mode2,
                                   double theta) {
  if (mode1 < 0 || mode1 >= v.modes() || mode2 < 0 || mode2 >= v.modes())
    throw std::out_of_range("fock::apply_cross_kerr: mode out of range");
  if (mode1 == mode2)
    throw std::invalid_argument("fock::apply_cross_kerr: modes must differ");
  FockVector out = v;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int n1 = out.level(i, mode1);
    const int n2 = out.level(i, mode2);
    if (n1 != 0 && n2 != 0)
      out.data()[i] *= std::polar(1.0, theta * n1 * n2);
  }
  return out;
}

// Phase shifter e^{i phi n} on one mode.
inline FockVector apply_phase(const FockVector& v, int mode, double phi) {
  if (mode < 0 || mode >= v.modes())
    throw std::out_of_range("fock::apply_phase: mode out of range");
  FockVector out = v;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int n = out.level(i, mode);
    if (n != 0) out.data()[i] *= std::polar(1.0, phi * n);
  }
  return out;
}

namespace detail {

// Exactly unitary blocks of exp(phi (a1^dag a2 - a2^dag a1)) on each
// total-photon sector of the truncated two-mode space.  The generator K is
// real antisymmetric and tridiagonal in the sector basis |n1, s - n1>, so
// U_s comes from the eigendecomposition of the Hermitian iK.
inline std::vector<Eigen::MatrixXcd> bs_sector_blocks(int d1, int d2,
                                                      double phi) {
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(d1 + d2 - 1);
  for (int s = 0; s <= d1 + d2 - 2; ++s) {
    const int lo = std::max(0, s - (d2 - 1));
    const int hi = std::min(d1 - 1, s);
    const int len = hi - lo + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(len, len);
    for (int k = 0; k + 1 < len; ++k) {
      const int n1 = lo + k;
      const int n2 = s - n1;
      // K(k+1, k) = sqrt((n1+1) n2), K(k, k+1) = -K(k+1, k)
      const double g = std::sqrt(double(n1 + 1) * double(n2));
      h(k + 1, k) = cx{0.0, g};
      h(k, k + 1) = cx{0.0, -g};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("fock::bs_sector_blocks: eigensolver failed");
    Eigen::VectorXcd ph(len);
    for (int k = 0; k < len; ++k)
      ph(k) = std::polar(1.0, -phi * es.eigenvalues()(k));
    blocks.push_back(es.eigenvectors() * ph.asDiagonal() *
                     es.eigenvectors().adjoint());
  }
  return blocks;
}

}  // namespace detail

// Balanced beam splitter matching the symbolic convention: coherent labels
// transform as (b1, b2) -> ((b1 - b2)/sqrt2, (b1 + b2)/sqrt2), realized as
// exp(phi (a1^dag a2 - a2^dag a1)) with phi = -pi/4.  Errors out if the
// output leaves more than leakage_threshold at either mode's top level,
// since a beam splitter can climb past the truncation.
inline FockVector apply_bs(const FockVector& v, int mode1, int mode2,
                           double leakage_threshold = default_leakage_threshold) {
  if (mode1 < 0 || mode1 >= v.modes() || mode2 < 0 || mode2 >= v.modes())
    throw std::out_of_range("fock::apply_bs: mode out of range");
  if (mode1 == mode2)
    throw std::invalid_argument("fock::apply_bs: modes must differ");
  const int d1 = v.cutoffs()[mode1];
  const int d2 = v.cutoffs()[mode2];
  const auto blocks =
      detail::bs_sector_blocks(d1, d2, -std::numbers::pi / 4.0);

  FockVector out = v;
  const std::size_t s1 = v.stride(mode1);
  const std::size_t s2 = v.stride(mode2);
  Eigen::MatrixXcd plane(d1, d2);
  for (std::size_t base = 0; base < v.size(); ++base) {
    if (v.level(base, mode1) != 0 || v.level(base, mode2) != 0) continue;
    for (int n1 = 0; n1 < d1; ++n1)
      for (int n2 = 0; n2 < d2; ++n2)
        plane(n1, n2) =
            v.data()[base + std::size_t(n1) * s1 + std::size_t(n2) * s2];
    for (int s = 0; s <= d1 + d2 - 2; ++s) {
      const int lo = std::max(0, s - (d2 - 1));
      const int hi = std::min(d1 - 1, s);
      const int len = hi - lo + 1;
      Eigen::VectorXcd x(len);
      for (int k = 0; k < len; ++k) x(k) = plane(lo + k, s - lo - k);
      Eigen::VectorXcd y = blocks[s] * x;
      for (int k = 0; k < len; ++k) {
        const int n1 = lo + k;
        const int n2 = s - n1;
        out.data()[base + std::size_t(n1) * s1 + std::size_t(n2) * s2] = y(k);
      }
    }
  }
  if (top_level_mass(out, mode1) > leakage_threshold ||
      top_level_mass(out, mode2) > leakage_threshold)
    throw std::runtime_error("fock::apply_bs: leakage above threshold");
  return out;
}

// Polarization bit flip on a qudit: swaps the levels of its H and V modes.
inline FockVector apply_bit_flip(const FockVector& v, int mode_h, int mode_v) {
  if (mode_h < 0 || mode_h >= v.modes() || mode_v < 0 || mode_v >= v.modes())
    throw std::out_of_range("fock::apply_bit_flip: mode out of range");
  if (v.cutoffs()[mode_h] != v.cutoffs()[mode_v])
    throw std::invalid_argument("fock::apply_bit_flip: cutoff mismatch");
  FockVector out(v.cutoffs());
  const std::size_t sh = v.stride(mode_h);
  const std::size_t sv = v.stride(mode_v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int nh = v.level(i, mode_h);
    const int nv = v.level(i, mode_v);
    const std::size_t j = i - std::size_t(nh) * sh - std::size_t(nv) * sv +
                          std::size_t(nv) * sh + std::size_t(nh) * sv;
    out.data()[j] = v.data()[i];
  }
  return out;
}

// Projects one mode onto |n>, removing it.  Returns the outcome probability
// and the normalized reduced vector (zero vector when the probability is 0).
inline std::pair<double, FockVector> project_number(const FockVector& v,
                                                    int mode, int n) {
  if (mode < 0 || mode >= v.modes())
    throw std::out_of_range("fock::project_number: mode out of range");
  if (n < 0 || n >= v.cutoffs()[mode])
    throw std::out_of_range("fock::project_number: level out of range");
  std::vector<int> cutoffs = v.cutoffs();
  cutoffs.erase(cutoffs.begin() + mode);
  if (cutoffs.empty())
    throw std::invalid_argument("fock::project_number: cannot remove last mode");
  FockVector out(cutoffs);
  double p = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.level(i, mode) != n) continue;
    out.data()[j++] = v.data()[i];
    p += std::norm(v.data()[i]);
  }
  if (p > 0.0) {
    const double inv = 1.0 / std::sqrt(p);
    for (cx& a : out.data()) a *= inv;
  }
  return {std::min(p, 1.0), out};
}

// Adjoins a fresh mode in vacuum as the new last mode.
inline FockVector append_vacuum_mode(const FockVector& v, int cutoff) {
  std::vector<int> cutoffs = v.cutoffs();
  cutoffs.push_back(cutoff);
  FockVector out(cutoffs);
  for (std::size_t i = 0; i < v.size(); ++i)
    out.data()[i * static_cast<std::size_t>(cutoff)] = v.data()[i];
  return out;
}

// ---------------------------------------------------------------------------
// Cross-check harness: reruns the heralded module and both cascade stages on
// the dense side and lines the numbers up against the symbolic engine.

struct OracleRow {
  std::string quantity;
  double symbolic = 0.0;
  double oracle = 0.0;
  double deviation = 0.0;
};

struct OracleReport {
  std::vector<OracleRow> rows;
  double max_deviation = 0.0;
};

struct OracleOptions {
  int bus_cutoff = 40;
  // Outcomes 0..n_limit are compared at each QND stage.
  int n_limit = 24;
  // Fidelity rows only make sense where the branch carries real weight;
  // probability rows are always emitted.
  double probability_floor = 1e-6;
  double leakage_threshold = default_leakage_threshold;
};

namespace detail {

inline void add_row(OracleReport& rep, std::string quantity, double symbolic,
                    double oracle) {
  OracleRow row{std::move(quantity), symbolic, oracle,
                std::abs(symbolic - oracle)};
  rep.max_deviation = std::max(rep.max_deviation, row.deviation);
  rep.rows.push_back(std::move(row));
}

inline double embedded_fidelity(const HybridState& symbolic,
                                const FockVector& oracle,
                                const OracleOptions& opts) {
  const FockVector e =
      embed(symbolic, oracle.cutoffs().back(), opts.leakage_threshold);
  return std::min(std::norm(inner_product(e, oracle)), 1.0);
}

// One generation module's couplings: qudit a routes V to bus0 and H to bus1,
// qudit b the reverse, matching the symbolic plan.
inline FockVector couple_module(const FockVector& v, double theta, int bus0,
                                int bus1) {
  FockVector s = apply_cross_kerr(v, mode_a_v, bus0, theta);
  s = apply_cross_kerr(s, mode_a_h, bus1, theta);
  s = apply_cross_kerr(s, mode_b_v, bus1, theta);
  s = apply_cross_kerr(s, mode_b_h, bus0, theta);
  return s;
}

}  // namespace detail

inline OracleReport oracle_check(const QuditSpec& a, const QuditSpec& b,
                                 cx alpha, XpmTheta theta,
                                 const OracleOptions& opts = {}) {
  if (a.dim != b.dim)
    throw std::invalid_argument("oracle_check: dimensions differ");
  const int dim = a.dim;
  const double th = theta.radians;
  const int bus0 = first_bus_mode;
  const int bus1 = first_bus_mode + 1;
  OracleReport rep;

  const HybridState input = quditbus::detail::attach_bus(
      quditbus::detail::bare_product(a, b), BusLabel{alpha, alpha});
  const FockVector dense_input =
      embed(input, opts.bus_cutoff, opts.leakage_threshold);

  // Heralded module: couple, interfere, detect vacuum at the dark port.
  {
    ProtocolParams p;
    p.alpha = alpha;
    p.theta = theta;
    p.mode = RunMode::enumerate;
    const ProtocolResult sym = generate_entangled(a, b, p);
    const BranchRecord& succ = sym.branches[0];

    FockVector v = detail::couple_module(dense_input, th, bus0, bus1);
    v = apply_bs(v, bus0, bus1, opts.leakage_threshold);
    auto [pf, vf] = project_number(v, bus0, 0);
    detail::add_row(rep, "herald_success_probability", succ.probability, pf);
    if (succ.probability > opts.probability_floor)
      detail::add_row(rep, "herald_success_fidelity", 1.0,
                      detail::embedded_fidelity(succ.state, vf, opts));
  }

  // Cascade stage 1: modified module, then the photon-number QND.
  HybridState s1 = quditbus::detail::modified_module(input, theta, dim);
  BranchSet set1 = qnd_project(s1, 0, opts.n_limit, 1.0);

  FockVector w = detail::couple_module(dense_input, th, bus0, bus1);
  w = apply_phase(w, bus0, -(dim - 1) * th);
  w = apply_phase(w, bus1, -(dim - 1) * th);
  w = apply_bs(w, bus0, bus1, opts.leakage_threshold);

  int nstar = -1;
  double pstar = 0.0;
  for (int n = 0; n <= opts.n_limit; ++n) {
    auto [pn, vn] = project_number(w, bus0, n);
    const double psym = set1.branches[n].probability;
    detail::add_row(rep, "stage1_p[n=" + std::to_string(n) + "]", psym, pn);
    if (psym > opts.probability_floor)
      detail::add_row(
          rep, "stage1_fidelity[n=" + std::to_string(n) + "]", 1.0,
          detail::embedded_fidelity(set1.branches[n].post_state, vn, opts));
    if (n >= 1 && psym > pstar) {
      pstar = psym;
      nstar = n;
    }
  }
  if (nstar < 0) return rep;

  // Cascade stage 2 on the dominant n >= 1 branch: flip, recycle, rerun the
  // modified module, project again, then replay the phase corrections on
  // both sides (photon_phase acts as e^{i phi n} on the V mode).
  HybridState flipped = bit_flip(set1.branches[nstar].post_state, Qudit::b);
  HybridState s2 = quditbus::detail::modified_module(
      quditbus::detail::recycle_bus(flipped), theta, dim);
  BranchSet set2 = qnd_project(s2, 0, opts.n_limit, 1.0);

  auto [p1, v1] = project_number(w, bus0, nstar);
  FockVector u = apply_bit_flip(v1, mode_b_h, mode_b_v);
  u = append_vacuum_mode(u, opts.bus_cutoff);
  u = apply_bs(u, bus0, bus1, opts.leakage_threshold);
  u = detail::couple_module(u, th, bus0, bus1);
  u = apply_phase(u, bus0, -(dim - 1) * th);
  u = apply_phase(u, bus1, -(dim - 1) * th);
  u = apply_bs(u, bus0, bus1, opts.leakage_threshold);

  int npstar = -1;
  double qstar = -1.0;
  for (int np = 0; np <= opts.n_limit; ++np) {
    auto [qn, un] = project_number(u, bus0, np);
    const double qsym = set2.branches[np].probability;
    const std::string tag =
        "[n=" + std::to_string(nstar) + ",n'=" + std::to_string(np) + "]";
    detail::add_row(rep, "stage2_p" + tag, qsym, qn);
    if (qsym > qstar) {
      qstar = qsym;
      npstar = np;
    }
    if (qsym <= opts.probability_floor) continue;

    HybridState sym_state = set2.branches[np].post_state;
    FockVector orc_state = un;
    if (dim == 3) {
      const auto corr = np == 0
                            ? quditbus::detail::outer_corrections(nstar)
                            : quditbus::detail::middle_corrections(nstar, np);
      sym_state = quditbus::detail::apply_corrections(sym_state, corr);
      for (const auto& c : corr)
        orc_state = apply_phase(
            orc_state,
            c.kind == Correction::Kind::photon_phase_a ? mode_a_v : mode_b_v,
            c.angle);
    }
    detail::add_row(rep, "stage2_fidelity" + tag, 1.0,
                    detail::embedded_fidelity(sym_state, orc_state, opts));
  }

  // Joint probability of the dominant path as the cascade driver reports it
  // versus the product of the two dense-side conditionals.
  {
    ProtocolParams p;
    p.alpha = alpha;
    p.theta = theta;
    p.mode = RunMode::enumerate;
    p.n_max = opts.n_limit;
    p.tail_tolerance = 1.0;
    p.branch_floor = 0.0;
    p.experimental_qudit_cascade = dim != 3;
    const ProtocolResult casc = cascade(a, b, p);
    for (const auto& rec : casc.branches) {
      if (rec.outcomes.size() == 2 && rec.outcomes[0] == nstar &&
          rec.outcomes[1] == npstar) {
        auto [q, un] = project_number(u, bus0, npstar);
        detail::add_row(rep,
                        "cascade_joint_p[n=" + std::to_string(nstar) +
                            ",n'=" + std::to_string(npstar) + "]",
                        rec.probability, p1 * q);
        break;
      }
    }
  }
  return rep;
}

}  // namespace quditbus::fock
