#include "crobust/infonce.hpp"

#include "crobust/errors.hpp"

namespace crobust {

NodeId compute_infonce_batch(Tape& tape, const std::vector<NodeId>& latents_clean,
                             const std::vector<NodeId>& latents_adv, double tau,
                             DenominatorMode mode) {
  const size_t m = latents_clean.size();
  if (latents_adv.size() != m) {
    throw DimensionError("contrastive batches differ in size: " + std::to_string(m) + " vs " +
                         std::to_string(latents_adv.size()));
  }
  if (m < 2) throw NoNegativesError("InfoNCE needs a batch of >= 2 (no negatives otherwise)");
  if (!(tau > 0.0)) throw ConfigError("temperature must be > 0, got " + std::to_string(tau));
  const float inv_tau = static_cast<float>(1.0 / tau);

  std::vector<NodeId> anchor_losses;
  anchor_losses.reserve(m);
  for (size_t i = 0; i < m; ++i) {
    NodeId pos = scale(tape, cosine_similarity(tape, latents_clean[i], latents_adv[i]), inv_tau);
    std::vector<NodeId> denom_terms;
    denom_terms.reserve(2 * m - 1);
    if (mode == DenominatorMode::standard) denom_terms.push_back(pos);
    for (size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      denom_terms.push_back(
          scale(tape, cosine_similarity(tape, latents_clean[i], latents_adv[j]), inv_tau));
      denom_terms.push_back(
          scale(tape, cosine_similarity(tape, latents_clean[i], latents_clean[j]), inv_tau));
    }
    NodeId log_denom = log_sum_exp(tape, denom_terms);
    // -log(exp(pos)/D) = log(D) - pos
    anchor_losses.push_back(add(tape, log_denom, scale(tape, pos, -1.0f)));
  }
  return scale(tape, add_n(tape, anchor_losses), 1.0f / static_cast<float>(m));
}

double compute_infonce_batch(const std::vector<Tensor>& latents_clean,
                             const std::vector<Tensor>& latents_adv, double tau,
                             DenominatorMode mode) {
  Tape tape;
  std::vector<NodeId> clean_ids, adv_ids;
  clean_ids.reserve(latents_clean.size());
  adv_ids.reserve(latents_adv.size());
  for (const Tensor& t : latents_clean) clean_ids.push_back(tape.constant(t));
  for (const Tensor& t : latents_adv) adv_ids.push_back(tape.constant(t));
  NodeId loss = compute_infonce_batch(tape, clean_ids, adv_ids, tau, mode);
  return static_cast<double>(tape.value(loss).data[0]);
}

}  // namespace crobust
