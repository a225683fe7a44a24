#pragma once

#include <vector>

#include "crobust/ops.hpp"

namespace crobust {

// Denominator of the contrastive fraction. `standard` includes the positive
// pair alongside the 2(M-1) other-instance latents; `as_written` keeps only
// the negatives, matching the displayed fraction in the source formulation.
enum class DenominatorMode { standard, as_written };

// Mean over anchors i of -log[ exp(sim(z_i, z^_i)/tau) / D_i ], where the
// anchors are the clean latents and z^ are their adversarial counterparts.
// Both batches must have M >= 2 rows (otherwise there are no negatives).
NodeId compute_infonce_batch(Tape& tape, const std::vector<NodeId>& latents_clean,
                             const std::vector<NodeId>& latents_adv, double tau,
                             DenominatorMode mode);

// Tape-free convenience for evaluation and tests.
double compute_infonce_batch(const std::vector<Tensor>& latents_clean,
                             const std::vector<Tensor>& latents_adv, double tau,
                             DenominatorMode mode);

}  // namespace crobust
