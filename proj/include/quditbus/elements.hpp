#pragma once

// Circuit elements acting on HybridState: the cross-Kerr coupling between
// polarized photons and qubus modes, passive linear optics on the bus, and
// the single-qudit polarization operations used for feedforward.  Every
// element maps coherent labels to coherent labels in closed form, so the
// symbolic representation is closed under the whole circuit vocabulary and
// each element is exactly unitary term by term.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "quditbus/hybrid_state.hpp"

namespace quditbus {

// Cross-Kerr phase per photon: |n>|beta> -> |n>|beta e^{i n theta}>.
struct XpmTheta {
  double radians = 0.0;

  XpmTheta() = default;
  explicit XpmTheta(double r) : radians(r) {
    if (!std::isfinite(r))
      throw std::invalid_argument("XpmTheta: angle must be finite");
  }

  // The generation scheme assumes weak coupling; outside this window the
  // small-angle identities behind the protocol layer degrade.
  bool is_weak() const { return radians != 0.0 && std::abs(radians) <= 0.5; }
};

// Bus destinations for one qudit's photons, split by polarization.
struct PolarizationRouting {
  int bus_for_v = 0;
  int bus_for_h = 0;
};

// Which bus mode each polarization component dephases.  A qudit without a
// routing entry passes through uncoupled.
struct CouplingPlan {
  std::optional<PolarizationRouting> a;
  std::optional<PolarizationRouting> b;

  // Generation-module layout: qudit a couples V photons to bus 0 and H
  // photons to bus 1, qudit b the other way around.  A ket pair (j, k) in
  // dimension n then drives bus 0 by j + (n-1-k) photons and bus 1 by
  // (n-1-j) + k photons, so equal indices dephase both modes identically.
  static CouplingPlan module_plan() {
    return CouplingPlan{PolarizationRouting{0, 1}, PolarizationRouting{1, 0}};
  }
};

namespace detail {

inline void require_mode(const HybridState& s, int mode, const char* who) {
  if (mode < 0 || mode >= s.bus_modes())
    throw std::out_of_range(std::string(who) + ": bus mode out of range");
}

inline void require_routing(const HybridState& s, const PolarizationRouting& r,
                            const char* who) {
  if (r.bus_for_v < 0 || r.bus_for_v >= s.bus_modes() || r.bus_for_h < 0 ||
      r.bus_for_h >= s.bus_modes())
    throw std::out_of_range(std::string(who) + ": routing target out of range");
}

}  // namespace detail

// Applies the cross-Kerr interaction to every routed polarization component:
// each bus label picks up e^{i k theta} with k the total photon number
// steered onto that mode by the term's kets.
inline HybridState xpm_couple(const HybridState& s, const CouplingPlan& plan,
                              XpmTheta theta) {
  if (s.empty()) return s;
  if (plan.a) detail::require_routing(s, *plan.a, "xpm_couple");
  if (plan.b) detail::require_routing(s, *plan.b, "xpm_couple");
  auto terms = s.terms();
  std::vector<int> photons(s.bus_modes());
  for (auto& t : terms) {
    std::fill(photons.begin(), photons.end(), 0);
    if (plan.a) {
      photons[plan.a->bus_for_v] += t.ket_a.vertical();
      photons[plan.a->bus_for_h] += t.ket_a.horizontal();
    }
    if (plan.b) {
      photons[plan.b->bus_for_v] += t.ket_b.vertical();
      photons[plan.b->bus_for_h] += t.ket_b.horizontal();
    }
    for (int m = 0; m < s.bus_modes(); ++m)
      if (photons[m] != 0)
        t.bus[m] *= std::polar(1.0, photons[m] * theta.radians);
  }
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Deterministic phase shifter on one bus mode: beta -> beta e^{i phi}.
inline HybridState phase_shift(const HybridState& s, int mode, double phi) {
  if (s.empty()) return s;
  detail::require_mode(s, mode, "phase_shift");
  if (!std::isfinite(phi))
    throw std::invalid_argument("phase_shift: angle must be finite");
  if (phi == 0.0) return s;
  auto terms = s.terms();
  const cx rot = std::polar(1.0, phi);
  for (auto& t : terms) t.bus[mode] *= rot;
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Balanced beam splitter on two bus modes:
//   (b1, b2) -> ((b1 - b2)/sqrt2, (b1 + b2)/sqrt2).
// Equal labels leave the first output exactly in vacuum, which is what the
// herald measures.
inline HybridState beamsplitter_5050(const HybridState& s, int mode1,
                                     int mode2) {
  if (s.empty()) return s;
  detail::require_mode(s, mode1, "beamsplitter_5050");
  detail::require_mode(s, mode2, "beamsplitter_5050");
  if (mode1 == mode2)
    throw std::invalid_argument("beamsplitter_5050: modes must differ");
  constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  auto terms = s.terms();
  for (auto& t : terms) {
    const cx b1 = t.bus[mode1];
    const cx b2 = t.bus[mode2];
    t.bus[mode1] = (b1 - b2) * inv_sqrt2;
    t.bus[mode2] = (b1 + b2) * inv_sqrt2;
  }
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Polarization flip on one qudit: |j>_n -> |n-1-j>_n (every photon's H and V
// components swapped).  Involutive.
inline HybridState bit_flip(const HybridState& s, Qudit which) {
  if (s.empty()) return s;
  auto terms = s.terms();
  for (auto& t : terms) {
    QuditKet& k = (which == Qudit::a) ? t.ket_a : t.ket_b;
    k.index = k.dim - 1 - k.index;
  }
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Single-photon polarization phase diag(1, e^{i phi}) applied to all photons
// of one qudit; the term with V-count j acquires e^{i phi j}.  This is the
// feedforward correction primitive.
inline HybridState photon_phase(const HybridState& s, Qudit which, double phi) {
  if (s.empty()) return s;
  if (!std::isfinite(phi))
    throw std::invalid_argument("photon_phase: angle must be finite");
  if (phi == 0.0) return s;
  auto terms = s.terms();
  for (auto& t : terms) {
    const QuditKet& k = (which == Qudit::a) ? t.ket_a : t.ket_b;
    if (k.index != 0) t.coeff *= std::polar(1.0, phi * k.index);
  }
  return HybridState(std::move(terms), s.merge_tolerance());
}

// Adjoins a fresh bus mode in vacuum (label 0) as the new last mode.
inline HybridState append_vacuum_mode(const HybridState& s) {
  if (s.empty()) return s;
  auto terms = s.terms();
  for (auto& t : terms) t.bus.push_back(cx{0.0, 0.0});
  return HybridState(std::move(terms), s.merge_tolerance());
}

}  // namespace quditbus
