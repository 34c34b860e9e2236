#pragma once

// Sparse symbolic representation of two polarization qudits coupled to a
// register of coherent qubus modes.  A state is a finite superposition
//
//   |psi> = sum_t c_t |j_t>_a |k_t>_b |beta_t0> |beta_t1> ...
//
// where |j>_n is the (n-1)-photon polarization state with j vertical
// photons, and each bus mode carries an exact coherent label.  Labels are
// kept in closed form, so overlaps between non-orthogonal bus branches never
// require Fock truncation and the representation stays exact for qubus
// amplitudes anywhere from 0 to 1e4.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace quditbus {

using cx = std::complex<double>;

// Terms whose kets match and whose bus labels agree mode by mode within this
// absolute tolerance are merged into a single term.
inline constexpr double default_merge_tolerance = 1e-12;

// Gram forms of physical states are positive semidefinite; values below
// -gram_negativity_floor * trace signal a bug rather than roundoff.
inline constexpr double gram_negativity_floor = 1e-12;

// Normalization slack accepted by operations that require unit-norm input.
inline constexpr double norm_check_tolerance = 1e-8;

// <beta1|beta2> = exp(-|b1|^2/2 - |b2|^2/2 + conj(b1) b2).  Evaluated as
// exp(-|b1-b2|^2/2) * exp(i Im(conj(b1) b2)) so that the magnitude comes from
// the label difference alone and never cancels between huge exponents.
inline cx coherent_overlap(cx beta1, cx beta2) {
  const double mag = std::exp(-0.5 * std::norm(beta1 - beta2));
  const double phase = std::imag(std::conj(beta1) * beta2);
  return mag * cx{std::cos(phase), std::sin(phase)};
}

// |j>_n: n-1 photons, j of them vertically polarized (0 <= j <= n-1).
// dim == 1 is admitted so photon loss can deplete a qudit completely.
struct QuditKet {
  int dim = 2;
  int index = 0;

  QuditKet() = default;
  QuditKet(int dim_, int index_) : dim(dim_), index(index_) {
    if (dim < 1) throw std::invalid_argument("QuditKet: dim must be >= 1");
    if (index < 0 || index >= dim)
      throw std::out_of_range("QuditKet: index out of range");
  }

  int photons() const { return dim - 1; }
  int vertical() const { return index; }
  int horizontal() const { return dim - 1 - index; }

  friend bool operator==(const QuditKet&, const QuditKet&) = default;
};

enum class Qudit { a, b };

using BusLabel = std::vector<cx>;

struct HybridTerm {
  cx coeff{0.0, 0.0};
  QuditKet ket_a;
  QuditKet ket_b;
  BusLabel bus;
};

namespace detail {

inline bool labels_close(const BusLabel& x, const BusLabel& y, double tol) {
  for (std::size_t m = 0; m < x.size(); ++m)
    if (std::abs(x[m] - y[m]) > tol) return false;
  return true;
}

inline bool finite(cx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace detail

class HybridState {
 public:
  HybridState() = default;

  explicit HybridState(std::vector<HybridTerm> terms,
                       double merge_tolerance = default_merge_tolerance)
      : merge_tolerance_(merge_tolerance) {
    if (!(merge_tolerance >= 0.0))
      throw std::invalid_argument("HybridState: merge tolerance must be >= 0");
    if (terms.empty()) return;

    dim_a_ = terms.front().ket_a.dim;
    dim_b_ = terms.front().ket_b.dim;
    bus_modes_ = static_cast<int>(terms.front().bus.size());
    for (const auto& t : terms) {
      if (t.ket_a.dim != dim_a_ || t.ket_b.dim != dim_b_)
        throw std::invalid_argument("HybridState: mixed qudit dimensions");
      if (static_cast<int>(t.bus.size()) != bus_modes_)
        throw std::invalid_argument("HybridState: mixed bus mode counts");
      if (!detail::finite(t.coeff))
        throw std::invalid_argument("HybridState: non-finite coefficient");
      for (cx b : t.bus)
        if (!detail::finite(b))
          throw std::invalid_argument("HybridState: non-finite bus label");
    }

    // Stable first-occurrence merge; the first term of a cluster keeps its
    // bus label as the representative.
    for (auto& t : terms) {
      if (t.coeff == cx{0.0, 0.0}) continue;
      bool merged = false;
      for (auto& u : terms_) {
        if (u.ket_a == t.ket_a && u.ket_b == t.ket_b &&
            detail::labels_close(u.bus, t.bus, merge_tolerance_)) {
          u.coeff += t.coeff;
          merged = true;
          break;
        }
      }
      if (!merged) terms_.push_back(std::move(t));
    }
    std::erase_if(terms_,
                  [](const HybridTerm& t) { return t.coeff == cx{0.0, 0.0}; });
    if (terms_.empty()) {
      dim_a_ = dim_b_ = bus_modes_ = 0;
    }
  }

  const std::vector<HybridTerm>& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  double merge_tolerance() const { return merge_tolerance_; }
  int bus_modes() const { return bus_modes_; }
  int dim_a() const { return dim_a_; }
  int dim_b() const { return dim_b_; }

 private:
  std::vector<HybridTerm> terms_;
  double merge_tolerance_ = default_merge_tolerance;
  int bus_modes_ = 0;
  int dim_a_ = 0;
  int dim_b_ = 0;
};

// <x|y>.  Qudit kets are orthonormal, so only ket-matched term pairs
// contribute; bus modes contribute their exact coherent overlaps.
inline cx inner_product(const HybridState& x, const HybridState& y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("inner_product: empty state");
  if (x.dim_a() != y.dim_a() || x.dim_b() != y.dim_b())
    throw std::invalid_argument("inner_product: qudit dimensions differ");
  if (x.bus_modes() != y.bus_modes())
    throw std::invalid_argument("inner_product: bus mode counts differ");
  cx acc{0.0, 0.0};
  for (const auto& xt : x.terms()) {
    for (const auto& yt : y.terms()) {
      if (xt.ket_a != yt.ket_a || xt.ket_b != yt.ket_b) continue;
      cx v = std::conj(xt.coeff) * yt.coeff;
      for (int m = 0; m < x.bus_modes(); ++m)
        v *= coherent_overlap(xt.bus[m], yt.bus[m]);
      acc += v;
    }
  }
  return acc;
}

inline double norm_squared(const HybridState& x) {
  const cx g = inner_product(x, x);
  double trace = 0.0;
  for (const auto& t : x.terms()) trace += std::norm(t.coeff);
  if (g.real() < -gram_negativity_floor * std::max(trace, 1.0))
    throw std::logic_error("norm_squared: Gram form is negative");
  return std::max(g.real(), 0.0);
}

inline double norm(const HybridState& x) { return std::sqrt(norm_squared(x)); }

// Rescales coefficients to unit norm; term order, kets and labels unchanged.
inline HybridState normalize(const HybridState& x) {
  const double n = norm(x);
  if (n == 0.0) throw std::runtime_error("normalize: state has zero norm");
  auto terms = x.terms();
  for (auto& t : terms) t.coeff /= n;
  return HybridState(std::move(terms), x.merge_tolerance());
}

namespace detail {

inline void require_normalized(const HybridState& x, const char* who) {
  if (std::abs(norm(x) - 1.0) > norm_check_tolerance)
    throw std::invalid_argument(std::string(who) + ": state not normalized");
}

}  // namespace detail

// Fidelity |<x|y>|^2 between normalized pure states.  When exactly one
// argument carries no bus modes it is treated as a bare two-qudit target T
// and the result is the reduced-state fidelity <T| Tr_bus(|psi><psi|) |T>,
// which coincides with |<T|psi>|^2 whenever the bus factors out.
inline double fidelity(const HybridState& x, const HybridState& y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("fidelity: empty state");
  detail::require_normalized(x, "fidelity");
  detail::require_normalized(y, "fidelity");
  if (x.dim_a() != y.dim_a() || x.dim_b() != y.dim_b())
    throw std::invalid_argument("fidelity: qudit dimensions differ");

  if (x.bus_modes() == y.bus_modes()) {
    const double f = std::norm(inner_product(x, y));
    return std::min(f, 1.0);
  }

  const HybridState* target = nullptr;
  const HybridState* state = nullptr;
  if (x.bus_modes() == 0) {
    target = &x;
    state = &y;
  } else if (y.bus_modes() == 0) {
    target = &y;
    state = &x;
  } else {
    throw std::invalid_argument("fidelity: bus mode counts differ");
  }

  // a_i = <T| kets_i >
  std::vector<cx> a(state->term_count(), cx{0.0, 0.0});
  for (std::size_t i = 0; i < state->term_count(); ++i) {
    const auto& si = state->terms()[i];
    for (const auto& tt : target->terms())
      if (tt.ket_a == si.ket_a && tt.ket_b == si.ket_b)
        a[i] += std::conj(tt.coeff);
  }
  // F = sum_ij c_i conj(c_j) <B_j|B_i> a_i conj(a_j), a PSD form.
  cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < state->term_count(); ++i) {
    if (a[i] == cx{0.0, 0.0}) continue;
    for (std::size_t j = 0; j < state->term_count(); ++j) {
      if (a[j] == cx{0.0, 0.0}) continue;
      const auto& si = state->terms()[i];
      const auto& sj = state->terms()[j];
      cx v = si.coeff * std::conj(sj.coeff) * a[i] * std::conj(a[j]);
      for (int m = 0; m < state->bus_modes(); ++m)
        v *= coherent_overlap(sj.bus[m], si.bus[m]);
      acc += v;
    }
  }
  return std::clamp(acc.real(), 0.0, 1.0);
}

// Singular values of the qudit-qudit coefficient matrix, descending.  Only
// defined when the bus has factored out: either no modes remain, or every
// term carries the same labels (within the merge tolerance).
inline std::vector<double> schmidt_coefficients(const HybridState& x) {
  if (x.empty())
    throw std::invalid_argument("schmidt_coefficients: empty state");
  detail::require_normalized(x, "schmidt_coefficients");
  if (x.bus_modes() > 0) {
    const auto& ref = x.terms().front().bus;
    for (const auto& t : x.terms())
      if (!detail::labels_close(ref, t.bus, x.merge_tolerance()))
        throw std::runtime_error(
            "schmidt_coefficients: bus is not disentangled from the qudits");
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(x.dim_a(), x.dim_b());
  for (const auto& t : x.terms())
    m(t.ket_a.index, t.ket_b.index) += t.coeff;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

// Schmidt spectrum of the qudit-a / rest cut: square roots of the
// eigenvalues of Tr_{b,bus}(|psi><psi|), descending.  Unlike
// schmidt_coefficients this is defined for live bus modes, so it is the
// entanglement diagnostic reported for heralded branches.
inline std::vector<double> entanglement_spectrum(const HybridState& x) {
  if (x.empty())
    throw std::invalid_argument("entanglement_spectrum: empty state");
  detail::require_normalized(x, "entanglement_spectrum");
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(x.dim_a(), x.dim_a());
  for (const auto& ti : x.terms()) {
    for (const auto& tj : x.terms()) {
      if (ti.ket_b != tj.ket_b) continue;
      cx v = ti.coeff * std::conj(tj.coeff);
      for (int m = 0; m < x.bus_modes(); ++m)
        v *= coherent_overlap(tj.bus[m], ti.bus[m]);
      rho(ti.ket_a.index, tj.ket_a.index) += v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("entanglement_spectrum: eigensolver failed");
  std::vector<double> out;
  out.reserve(x.dim_a());
  for (int i = x.dim_a() - 1; i >= 0; --i) {
    const double ev = es.eigenvalues()(i);
    if (ev < -gram_negativity_floor)
      throw std::logic_error("entanglement_spectrum: negative eigenvalue");
    out.push_back(std::sqrt(std::max(ev, 0.0)));
  }
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

}  // namespace quditbus
