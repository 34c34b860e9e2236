// Minimal library walkthrough: run the heralded generation module on two
// maximal qutrits and print what the detector outcomes leave behind.

#include <cstdio>

#include "quditbus/protocols.hpp"

int main() {
  using namespace quditbus;

  const QuditSpec a = QuditSpec::maximal(3);
  const QuditSpec b = QuditSpec::maximal(3);

  ProtocolParams params;
  params.alpha = 50.0;  // bright bus
  params.theta = XpmTheta{0.1};

  const ProtocolResult result = generate_entangled(a, b, params);

  std::printf("ideal success probability: %.6f\n",
              result.ideal_success_probability);
  for (const auto& branch : result.branches) {
    std::printf("%-8s p = %.12f, %zu terms\n", branch.label.c_str(),
                branch.probability, branch.state.term_count());
  }
  std::printf("misherald error: computed %.3e, closed form %.3e\n",
              result.error_probability_computed,
              result.error_probability_closed_form);

  const HybridState target = ideal_herald_target(a, b);
  std::printf("success fidelity to sum_i a_i b_i |ii>: %.12f\n",
              fidelity(result.branches[0].state, target));
  return 0;
}
