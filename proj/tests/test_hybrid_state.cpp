#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "quditbus/elements.hpp"
#include "quditbus/hybrid_state.hpp"
#include "test_support.hpp"

using namespace quditbus;
using Catch::Approx;

namespace {

HybridTerm term(cx c, int dim, int ja, int jb, BusLabel bus) {
  return {c, QuditKet(dim, ja), QuditKet(dim, jb), std::move(bus)};
}

}  // namespace

TEST_CASE("coherent overlap closed form") {
  auto g = testsup::rng(11);

  SECTION("identical labels overlap to exactly one") {
    for (int i = 0; i < 50; ++i) {
      const cx b = testsup::random_amplitude(g, 3.0);
      CHECK(coherent_overlap(b, b) == cx{1.0, 0.0});
    }
  }

  SECTION("vacuum overlap is the Gaussian weight") {
    const cx b{1.25, -0.5};
    CHECK(std::abs(coherent_overlap(cx{0.0, 0.0}, b) -
                   std::exp(-std::norm(b) / 2.0)) < 1e-15);
  }

  SECTION("matches the truncated number-basis series") {
    const cx b1{1.5, 0.0};
    const cx b2 = 1.5 * std::polar(1.0, 0.1);
    const cx series = testsup::fock_series_overlap(b1, b2, 40);
    CHECK(std::abs(coherent_overlap(b1, b2) - series) < 1e-10);

    for (int i = 0; i < 30; ++i) {
      const cx u = testsup::random_amplitude(g, 2.0);
      const cx v = testsup::random_amplitude(g, 2.0);
      CHECK(std::abs(coherent_overlap(u, v) -
                     testsup::fock_series_overlap(u, v, 40)) < 1e-10);
    }
  }

  SECTION("conjugate symmetry and contractivity") {
    for (int i = 0; i < 1000; ++i) {
      const cx u = testsup::random_amplitude(g, 3.0);
      const cx v = testsup::random_amplitude(g, 3.0);
      const cx lhs = coherent_overlap(u, v);
      CHECK(std::abs(lhs - std::conj(coherent_overlap(v, u))) < 1e-15);
      CHECK(std::abs(lhs) <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("norm via the Gram matrix") {
  SECTION("single unit term has unit norm regardless of label") {
    const HybridState s({term({1.0, 0.0}, 3, 0, 2, {cx{1.7, -2.2}})});
    CHECK(norm(s) == Approx(1.0).margin(1e-15));
  }

  SECTION("well separated labels act orthogonal") {
    const double r = std::numbers::sqrt2 / 2.0;
    const HybridState s({term({r, 0.0}, 2, 0, 0, {cx{6.0, 0.0}}),
                         term({r, 0.0}, 2, 0, 0, {cx{-6.0, 0.0}})});
    // cross term exp(-2*36) is below double resolution
    CHECK(norm(s) == Approx(1.0).margin(1e-12));
  }

  SECTION("coupling a normalized product state preserves the norm") {
    const double c = 1.0 / std::sqrt(3.0);
    std::vector<HybridTerm> terms;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        terms.push_back(term({c * c, 0.0}, 3, i, j, {cx{2.0, 0.0}, cx{2.0, 0.0}}));
    const HybridState coupled =
        xpm_couple(HybridState(terms), CouplingPlan::module_plan(),
                   XpmTheta{0.3});
    CHECK(std::abs(norm(coupled) - 1.0) < 1e-12);
  }

  SECTION("empty state is rejected") {
    CHECK_THROWS_AS(norm(HybridState{}), std::invalid_argument);
  }
}

TEST_CASE("normalize") {
  SECTION("scalar rescale") {
    const HybridState s =
        normalize(HybridState({term({0.5, 0.0}, 2, 0, 1, {})}));
    CHECK(s.terms()[0].coeff == cx{1.0, 0.0});
  }

  SECTION("maximal diagonal products normalize to 1/sqrt(3)") {
    std::vector<HybridTerm> terms;
    for (int i = 0; i < 3; ++i)
      terms.push_back(term({1.0 / 3.0, 0.0}, 3, i, i, {}));
    const HybridState s = normalize(HybridState(terms));
    for (const auto& t : s.terms())
      CHECK(std::abs(t.coeff - cx{1.0 / std::sqrt(3.0), 0.0}) < 1e-15);
  }

  SECTION("generic diagonal state normalizes to a_i b_i / sqrt(sum)") {
    auto g = testsup::rng(7);
    std::vector<cx> a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a[i] = testsup::random_amplitude(g, 1.0);
      b[i] = testsup::random_amplitude(g, 1.0);
    }
    std::vector<HybridTerm> terms;
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      terms.push_back(term(a[i] * b[i], 3, i, i, {}));
      total += std::norm(a[i] * b[i]);
    }
    const HybridState s = normalize(HybridState(terms));
    CHECK(std::abs(norm(s) - 1.0) < 1e-12);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(s.terms()[i].coeff - a[i] * b[i] / std::sqrt(total)) <
            1e-12);
  }

  SECTION("cancelling terms leave an empty state") {
    std::vector<HybridTerm> ts = {term({1.0, 0.0}, 2, 0, 0, {}),
                                  term({-1.0, 0.0}, 2, 0, 0, {})};
    // equal kets and labels merge to an exact zero, leaving nothing
    const HybridState s(ts);
    CHECK(s.empty());
    CHECK_THROWS_AS(normalize(s), std::invalid_argument);
  }
}

TEST_CASE("fidelity") {
  auto g = testsup::rng(23);

  SECTION("self fidelity is one") {
    for (int i = 0; i < 20; ++i) {
      const HybridState s = testsup::random_state(g, 3, 2, 6);
      CHECK(fidelity(s, s) == Approx(1.0).margin(1e-12));
    }
  }

  SECTION("disjoint ket support gives exactly zero") {
    const HybridState s({term({1.0, 0.0}, 3, 0, 0, {cx{1.0, 0.5}})});
    const HybridState t({term({1.0, 0.0}, 3, 1, 2, {cx{1.0, 0.5}})});
    CHECK(fidelity(s, t) == 0.0);
  }

  SECTION("unnormalized input is rejected") {
    const HybridState bad({term({0.5, 0.0}, 2, 0, 0, {})});
    const HybridState ok({term({1.0, 0.0}, 2, 0, 0, {})});
    CHECK_THROWS_AS(fidelity(bad, ok), std::invalid_argument);
  }

  SECTION("bus-free target scores against the reduced state") {
    // |00>|label1> + |11>|label2> against |00>: the target picks up exactly
    // the |00> population because distinct kets never interfere.
    const double r = std::numbers::sqrt2 / 2.0;
    const HybridState s({term({r, 0.0}, 2, 0, 0, {cx{1.0, 0.0}}),
                         term({r, 0.0}, 2, 1, 1, {cx{-1.0, 2.0}})});
    const HybridState t({term({1.0, 0.0}, 2, 0, 0, {})});
    CHECK(fidelity(s, t) == Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("schmidt coefficients") {
  SECTION("product state") {
    const HybridState s({term({1.0, 0.0}, 3, 0, 0, {})});
    const auto sv = schmidt_coefficients(s);
    REQUIRE(sv.size() == 3);
    CHECK(sv[0] == Approx(1.0).margin(1e-12));
    CHECK(sv[1] == Approx(0.0).margin(1e-12));
    CHECK(sv[2] == Approx(0.0).margin(1e-12));
  }

  SECTION("maximal entangled qutrit") {
    std::vector<HybridTerm> terms;
    for (int i = 0; i < 3; ++i)
      terms.push_back(term({1.0 / std::sqrt(3.0), 0.0}, 3, i, i, {}));
    const auto sv = schmidt_coefficients(HybridState(terms));
    REQUIRE(sv.size() == 3);
    double sum = 0.0;
    for (double s : sv) {
      CHECK(s == Approx(1.0 / std::sqrt(3.0)).margin(1e-12));
      sum += s * s;
    }
    CHECK(sum == Approx(1.0).margin(1e-10));
  }

  SECTION("two-component state matches the closed-form 2x2 values") {
    const cx c3{0.6, 0.1};
    const cx c4{-0.3, 0.7};
    const double n = std::sqrt(std::norm(c3) + std::norm(c4));
    const HybridState s = normalize(
        HybridState({term(c3, 3, 0, 0, {}), term(c4, 3, 2, 2, {})}));
    auto sv = schmidt_coefficients(s);
    REQUIRE(sv.size() == 3);
    // diagonal coefficient matrix: singular values are the moduli
    CHECK(sv[0] == Approx(std::max(std::abs(c3), std::abs(c4)) / n).margin(1e-12));
    CHECK(sv[1] == Approx(std::min(std::abs(c3), std::abs(c4)) / n).margin(1e-12));
    CHECK(sv[2] == Approx(0.0).margin(1e-12));
  }

  SECTION("entangled bus labels are refused") {
    const double r = std::numbers::sqrt2 / 2.0;
    const HybridState s({term({r, 0.0}, 2, 0, 0, {cx{1.0, 0.0}}),
                         term({r, 0.0}, 2, 1, 1, {cx{2.0, 0.0}})});
    CHECK_THROWS_WITH(schmidt_coefficients(s),
                      Catch::Matchers::ContainsSubstring("disentangled"));
  }

  SECTION("identical bus labels are fine and match the bus-free result") {
    std::vector<HybridTerm> with, without;
    for (int i = 0; i < 3; ++i) {
      with.push_back(term({1.0 / std::sqrt(3.0), 0.0}, 3, i, i, {cx{1.0, 2.0}}));
      without.push_back(term({1.0 / std::sqrt(3.0), 0.0}, 3, i, i, {}));
    }
    const auto sv1 = schmidt_coefficients(HybridState(with));
    const auto sv2 = schmidt_coefficients(HybridState(without));
    REQUIRE(sv1.size() == sv2.size());
    for (std::size_t i = 0; i < sv1.size(); ++i)
      CHECK(sv1[i] == Approx(sv2[i]).margin(1e-12));
  }
}

TEST_CASE("entanglement spectrum generalizes the Schmidt values") {
  auto g = testsup::rng(41);
  // without bus modes the two agree; compare squared values so that the
  // sqrt of eigensolver roundoff near zero does not inflate the error
  for (int rep = 0; rep < 10; ++rep) {
    const HybridState s = testsup::random_state(g, 3, 0, 6);
    auto schmidt = schmidt_coefficients(s);
    auto spectrum = entanglement_spectrum(s);
    REQUIRE(spectrum.size() >= schmidt.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      const double expect = i < schmidt.size() ? schmidt[i] * schmidt[i] : 0.0;
      CHECK(spectrum[i] * spectrum[i] == Approx(expect).margin(1e-12));
    }
  }
  // with bus modes it is still a valid probability-square-root spectrum
  for (int rep = 0; rep < 10; ++rep) {
    const HybridState s = testsup::random_state(g, 3, 2, 6);
    auto spectrum = entanglement_spectrum(s);
    double sum = 0.0;
    for (double v : spectrum) {
      CHECK(v >= 0.0);
      sum += v * v;
    }
    CHECK(sum == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("term merging") {
  SECTION("identical kets and labels merge by coefficient addition") {
    const HybridState s({term({0.25, 0.0}, 2, 0, 1, {cx{1.0, 1.0}}),
                         term({0.5, 0.0}, 2, 0, 1, {cx{1.0, 1.0}})});
    REQUIRE(s.term_count() == 1);
    CHECK(s.terms()[0].coeff == cx{0.75, 0.0});
  }

  SECTION("labels within the merge tolerance collapse") {
    const HybridState s({term({0.5, 0.0}, 2, 0, 1, {cx{1.0, 0.0}}),
                         term({0.5, 0.0}, 2, 0, 1, {cx{1.0 + 1e-14, 0.0}})});
    CHECK(s.term_count() == 1);
  }

  SECTION("distinct labels stay separate") {
    const HybridState s({term({0.5, 0.0}, 2, 0, 1, {cx{1.0, 0.0}}),
                         term({0.5, 0.0}, 2, 0, 1, {cx{1.001, 0.0}})});
    CHECK(s.term_count() == 2);
  }

  SECTION("norm is invariant under term permutations") {
    auto g = testsup::rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      const HybridState s = testsup::random_state(g, 3, 1, 8);
      auto terms = s.terms();
      std::shuffle(terms.begin(), terms.end(), g);
      const HybridState permuted(terms);
      CHECK(norm(permuted) == Approx(norm(s)).margin(1e-12));
      CHECK(permuted.term_count() == s.term_count());
    }
  }

  SECTION("re-merging is idempotent") {
    auto g = testsup::rng(6);
    const HybridState s = testsup::random_state(g, 4, 2, 10);
    const HybridState again(s.terms(), s.merge_tolerance());
    CHECK(again.term_count() == s.term_count());
    CHECK(std::abs(inner_product(again, s) - cx{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("Gram positivity and orthogonal-ket shortcut") {
  auto g = testsup::rng(17);

  SECTION("squared norms of random term soups are nonnegative") {
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<HybridTerm> ts;
      const int n = 2 + static_cast<int>(testsup::uniform(g, 0.0, 6.0));
      for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<int> ket(0, 2);
        ts.push_back(term(testsup::random_amplitude(g, 1.0), 3, ket(g), ket(g),
                          {testsup::random_amplitude(g, 2.0)}));
      }
      CHECK(norm_squared(HybridState(ts)) >= 0.0);
    }
  }

  SECTION("different ket pairs contribute exactly zero") {
    // identical bus labels, so any leakage would come from the ket delta
    const HybridState s({term({1.0, 0.0}, 3, 0, 1, {cx{1.5, 0.5}})});
    const HybridState t({term({1.0, 0.0}, 3, 1, 0, {cx{1.5, 0.5}})});
    CHECK(inner_product(s, t) == cx{0.0, 0.0});
  }
}

TEST_CASE("QuditKet encoding") {
  const QuditKet k(5, 3);
  CHECK(k.photons() == 4);
  CHECK(k.vertical() == 3);
  CHECK(k.horizontal() == 1);
  CHECK_THROWS_AS(QuditKet(3, 3), std::out_of_range);
  CHECK_THROWS_AS(QuditKet(0, 0), std::invalid_argument);
}
