#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "quditbus/fock_oracle.hpp"
#include "test_support.hpp"

using namespace quditbus;
using Catch::Approx;

namespace {

// Truncated two-mode coherent product built column by column.
fock::FockVector coherent_pair(cx b1, cx b2, int cutoff) {
  fock::FockVector v({cutoff, cutoff});
  for (int i = 0; i < cutoff; ++i)
    for (int j = 0; j < cutoff; ++j)
      v.at({i, j}) =
          coherent_number_amplitude(i, b1) * coherent_number_amplitude(j, b2);
  return v;
}

double mode_occupation(const fock::FockVector& v, int mode, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.level(i, mode) == n) s += std::norm(v.data()[i]);
  return s;
}

const fock::OracleRow* find_row(const fock::OracleReport& rep,
                                const std::string& quantity) {
  for (const auto& row : rep.rows)
    if (row.quantity == quantity) return &row;
  return nullptr;
}

}  // namespace

TEST_CASE("dense vector bookkeeping") {
  fock::FockVector v({2, 3});
  CHECK(v.size() == 6);
  CHECK(v.stride(0) == 3);
  CHECK(v.stride(1) == 1);
  v.at({1, 2}) = cx{0.5, -0.5};
  CHECK(v.data()[5] == cx{0.5, -0.5});
  CHECK(v.level(5, 0) == 1);
  CHECK(v.level(5, 1) == 2);

  CHECK_THROWS_AS(v.at({1}), std::invalid_argument);
  CHECK_THROWS_AS(v.at({1, 3}), std::out_of_range);
  CHECK_THROWS_AS(fock::FockVector({0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(fock::FockVector({1 << 14, 1 << 14}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fock::FockVector(std::vector<int>{}),
                  std::invalid_argument);
}

TEST_CASE("embedding the symbolic state") {
  SECTION("polarization occupation of a basis term") {
    const HybridState s(
        {{cx{0.6, 0.8}, QuditKet(3, 0), QuditKet(3, 2), {}}});
    const fock::FockVector v = fock::embed(s, 2);
    CHECK(v.modes() == 4);
    // |0>_3 carries two H photons, |2>_3 two V photons
    CHECK(v.at({2, 0, 0, 2}) == cx{0.6, 0.8});
    CHECK(fock::norm(v) == Approx(1.0).margin(1e-12));
  }

  SECTION("a vacuum bus label occupies only level zero") {
    const HybridState s({{cx{1.0, 0.0}, QuditKet(2, 0), QuditKet(2, 0),
                          {cx{0.0, 0.0}}}});
    const fock::FockVector v = fock::embed(s, 8);
    CHECK(v.at({1, 0, 1, 0, 0}) == cx{1.0, 0.0});
    CHECK(mode_occupation(v, fock::first_bus_mode, 0) ==
          Approx(1.0).margin(1e-14));
  }

  SECTION("a coherent label expands to its number-basis column") {
    const cx beta{1.2, -0.3};
    const HybridState s({{cx{1.0, 0.0}, QuditKet(2, 0), QuditKet(2, 0),
                          {beta}}});
    const fock::FockVector v = fock::embed(s, 30);
    for (int k = 0; k < 6; ++k)
      CHECK(std::abs(v.at({1, 0, 1, 0, k}) -
                     coherent_number_amplitude(k, beta)) < 1e-12);
  }

  SECTION("labels leaking past the cutoff are refused") {
    const HybridState s({{cx{1.0, 0.0}, QuditKet(2, 0), QuditKet(2, 0),
                          {cx{3.0, 0.0}}}});
    CHECK_THROWS_WITH(fock::embed(s, 5),
                      Catch::Matchers::ContainsSubstring("leaks"));
  }

  SECTION("embedding preserves inner products") {
    auto g = testsup::rng(81);
    for (int rep = 0; rep < 100; ++rep) {
      const HybridState u = testsup::random_state(g, 3, 1, 5);
      const HybridState w = testsup::random_state(g, 3, 1, 5);
      const cx sym = inner_product(u, w);
      const cx dense =
          fock::inner_product(fock::embed(u, 40), fock::embed(w, 40));
      CHECK(std::abs(sym - dense) < 1e-8);
    }
  }
}

TEST_CASE("dense cross-Kerr phase") {
  const cx beta{1.4, 0.2};
  const double theta = 0.27;
  const int cutoff = 35;

  // (g0 |0> + g1 |1>) |beta>
  const cx g0{0.6, 0.0};
  const cx g1{0.0, 0.8};
  fock::FockVector v({2, cutoff});
  for (int k = 0; k < cutoff; ++k) {
    v.at({0, k}) = g0 * coherent_number_amplitude(k, beta);
    v.at({1, k}) = g1 * coherent_number_amplitude(k, beta);
  }

  const fock::FockVector out = fock::apply_cross_kerr(v, 0, 1, theta);

  SECTION("zero-photon amplitudes are untouched bitwise") {
    for (int k = 0; k < cutoff; ++k)
      CHECK(out.at({0, k}) == v.at({0, k}));
  }

  SECTION("the one-photon component rotates the label") {
    fock::FockVector target({2, cutoff});
    const cx rotated = beta * std::polar(1.0, theta);
    for (int k = 0; k < cutoff; ++k) {
      target.at({0, k}) = g0 * coherent_number_amplitude(k, beta);
      target.at({1, k}) = g1 * coherent_number_amplitude(k, rotated);
    }
    const double f = std::norm(
        fock::inner_product(fock::normalize(target), fock::normalize(out)));
    CHECK(f >= 1.0 - 1e-10);
  }

  SECTION("the map is unitary on the truncated space") {
    CHECK(std::abs(fock::norm(out) - fock::norm(v)) < 1e-12);
  }
}

TEST_CASE("dense beam splitter") {
  const int cutoff = 40;

  SECTION("equal inputs leave the first port dark") {
    const cx beta{1.5, 0.0};
    const fock::FockVector out =
        fock::apply_bs(coherent_pair(beta, beta, cutoff), 0, 1);
    CHECK(mode_occupation(out, 0, 0) >= 1.0 - 1e-10);
    // the bright port carries a Poisson comb at twice the intensity
    const double mean = 2.0 * std::norm(beta);
    for (int n = 0; n < 12; ++n)
      CHECK(mode_occupation(out, 1, n) ==
            Approx(testsup::poisson_pmf(n, mean)).margin(1e-10));
  }

  SECTION("one-sided input splits into the plus convention") {
    const cx beta{1.3, 0.4};
    const cx half = beta / std::numbers::sqrt2;
    const fock::FockVector out =
        fock::apply_bs(coherent_pair(beta, cx{0.0, 0.0}, cutoff), 0, 1);
    const fock::FockVector target = coherent_pair(half, half, cutoff);
    CHECK(std::norm(fock::inner_product(target, out)) >= 1.0 - 1e-10);
  }

  SECTION("the second input enters the difference port negated") {
    const cx beta{1.3, 0.4};
    const cx half = beta / std::numbers::sqrt2;
    const fock::FockVector out =
        fock::apply_bs(coherent_pair(cx{0.0, 0.0}, beta, cutoff), 0, 1);
    const fock::FockVector target = coherent_pair(-half, half, cutoff);
    CHECK(std::norm(fock::inner_product(target, out)) >= 1.0 - 1e-10);
  }

  SECTION("the map is unitary on the truncated space") {
    auto g = testsup::rng(83);
    fock::FockVector v({10, 10});
    for (auto& a : v.data()) a = testsup::random_amplitude(g, 1.0);
    v = fock::normalize(v);
    // a random vector fills the top sectors, so allow the climb explicitly
    const fock::FockVector out = fock::apply_bs(v, 0, 1, 1.0);
    CHECK(std::abs(fock::norm(out) - 1.0) < 1e-12);
  }

  SECTION("truncation climb is detected") {
    const cx beta{1.8, 0.0};
    CHECK_THROWS_WITH(fock::apply_bs(coherent_pair(beta, beta, 8), 0, 1),
                      Catch::Matchers::ContainsSubstring("leakage"));
  }
}

TEST_CASE("dense bit flip matches the symbolic one") {
  auto g = testsup::rng(85);
  for (int rep = 0; rep < 20; ++rep) {
    const HybridState s = testsup::random_state(g, 3, 1, 5);
    const fock::FockVector flipped_dense = fock::apply_bit_flip(
        fock::embed(s, 40), fock::mode_b_h, fock::mode_b_v);
    const fock::FockVector flipped_sym =
        fock::embed(bit_flip(s, Qudit::b), 40);
    CHECK(std::norm(fock::inner_product(flipped_sym, flipped_dense)) >=
          1.0 - 1e-12);
  }
}

TEST_CASE("dense number projection") {
  const cx beta{1.1, 0.8};
  const double mean = std::norm(beta);
  fock::FockVector v({2, 40});
  for (int k = 0; k < 40; ++k)
    v.at({1, k}) = coherent_number_amplitude(k, beta);

  for (int n = 0; n < 8; ++n) {
    auto [p, reduced] = fock::project_number(v, 1, n);
    CHECK(p == Approx(testsup::poisson_pmf(n, mean)).margin(1e-12));
    REQUIRE(reduced.modes() == 1);
    CHECK(std::abs(fock::norm(reduced) - 1.0) < 1e-12);
    // the reduced amplitude keeps the label's n-photon phase
    CHECK(std::abs(reduced.at({1}) - std::polar(1.0, n * std::arg(beta))) <
          1e-12);
  }

  fock::FockVector single({5});
  single.at({0}) = cx{1.0, 0.0};
  CHECK_THROWS_AS(fock::project_number(single, 0, 0), std::invalid_argument);
}

TEST_CASE("dense vacuum append") {
  auto g = testsup::rng(87);
  fock::FockVector v({3, 3});
  for (auto& a : v.data()) a = testsup::random_amplitude(g, 1.0);
  v = fock::normalize(v);
  const fock::FockVector out = fock::append_vacuum_mode(v, 6);
  CHECK(out.modes() == 3);
  CHECK(mode_occupation(out, 2, 0) == Approx(1.0).margin(1e-14));
  CHECK(std::abs(fock::norm(out) - 1.0) < 1e-12);
}

TEST_CASE("oracle agreement with the symbolic engine") {
  const QuditSpec q = QuditSpec::maximal(3);

  for (double theta : {0.1, 0.2}) {
    const fock::OracleReport rep =
        fock::oracle_check(q, q, cx{2.0, 0.0}, XpmTheta{theta});
    INFO("theta = " << theta << ", rows = " << rep.rows.size());
    CHECK(rep.max_deviation <= 1e-8);
    REQUIRE(rep.rows.size() > 20);
    CHECK(find_row(rep, "herald_success_probability") != nullptr);
    CHECK(find_row(rep, "herald_success_fidelity") != nullptr);
    CHECK(find_row(rep, "stage1_p[n=0]") != nullptr);
    bool has_stage2 = false, has_joint = false;
    for (const auto& row : rep.rows) {
      if (row.quantity.rfind("stage2_fidelity", 0) == 0) has_stage2 = true;
      if (row.quantity.rfind("cascade_joint_p", 0) == 0) has_joint = true;
    }
    CHECK(has_stage2);
    CHECK(has_joint);
  }
}

TEST_CASE("oracle truncation is converged") {
  const QuditSpec q = QuditSpec::maximal(3);
  fock::OracleOptions coarse;
  coarse.bus_cutoff = 30;
  fock::OracleOptions fine;
  fine.bus_cutoff = 40;
  const auto r30 = fock::oracle_check(q, q, cx{1.5, 0.0}, XpmTheta{0.2}, coarse);
  const auto r40 = fock::oracle_check(q, q, cx{1.5, 0.0}, XpmTheta{0.2}, fine);
  const auto* h30 = find_row(r30, "herald_success_probability");
  const auto* h40 = find_row(r40, "herald_success_probability");
  REQUIRE(h30 != nullptr);
  REQUIRE(h40 != nullptr);
  CHECK(std::abs(h30->oracle - h40->oracle) < 1e-9);
}
