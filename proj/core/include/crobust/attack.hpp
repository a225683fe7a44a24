#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "crobust/image.hpp"
#include "crobust/infonce.hpp"
#include "crobust/model.hpp"

namespace crobust {

enum class AttackObjective { supervised_ce, instancewise_infonce };

struct AttackConfig {
  double norm_p = INFINITY;  // only L-inf is implemented; kept so other norms
                             // stay representable and are rejected loudly
  double radius = 8.0 / 255.0;     // delta, in [0,1] pixel units
  double step_size = 2.0 / 255.0;  // alpha
  int iterations = 7;
  bool random_init = false;
  AttackObjective objective = AttackObjective::supervised_ce;
  bool targeted = false;
  std::optional<int> target_class;

  void validate() const;
};

struct AdversarialPair {
  ImageTensor clean;
  ImageTensor adversarial;
  double loss_before = 0.0;
  double loss_after = 0.0;
};

// Elementwise clamp of candidate into [anchor-radius, anchor+radius], then
// into [0,1].
ImageTensor project_linf(const ImageTensor& candidate, const ImageTensor& anchor, double radius);

// Single signed-gradient step of size radius (iterations=1, no random init).
AdversarialPair fgsm(const ModelBundle& bundle, const ImageTensor& x, int label,
                     const AttackConfig& cfg);

// Iterated signed-gradient ascent with per-step projection; random_init
// draws the start uniformly inside the ball. Bit-deterministic given seed.
AdversarialPair pgd(const ModelBundle& bundle, const ImageTensor& x, int label,
                    const AttackConfig& cfg, uint64_t seed = 0);

// Perturbs view_a (jointly, as one batch) to maximize the batch InfoNCE loss
// against the fixed latents of view_b, with the same step/projection
// machinery as pgd.
std::vector<ImageTensor> instancewise_attack(const ModelBundle& bundle,
                                             const std::vector<ImageTensor>& view_a,
                                             const std::vector<ImageTensor>& view_b,
                                             const AttackConfig& cfg, double tau,
                                             DenominatorMode mode, uint64_t seed = 0);

}  // namespace crobust
