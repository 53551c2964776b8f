#ifndef DPHMM_GIBBS_HPP
#define DPHMM_GIBBS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dphmm/special_math.hpp"
#include "dphmm/state.hpp"

namespace dphmm {

/// Which conditional the single-site state update draws from.
///
/// kPaper follows the published sampling table literally: a boundary site
/// chooses between its two neighbouring regimes with the tabulated weights,
/// a singleton regime is always absorbed by a neighbour, the first and last
/// sites use the endpoint formulas, and no regime is ever created. Started
/// from many regimes it prunes down to the supported ones.
///
/// kExact draws each boundary site from its full conditional under
/// sequence_log_prior: join left, join right, or form a one-point regime
/// whose parameters come from the regime prior (auxiliary-parameter scheme).
/// The chain is irreducible and leaves the exact posterior invariant, at the
/// price of needing a proper regime prior.
enum class SweepRule { kPaper, kExact };

/// Parameter-slot view of an observation model used during a sweep.
///
/// Slots are indices into the model's parameter table. On entry slot i holds
/// the parameters of canonical regime i+1; kExact may append slots.
class SlotLikelihood {
 public:
  virtual ~SlotLikelihood() = default;
  virtual double log_likelihood(std::size_t t, std::size_t slot) const = 0;
  // Appends a slot drawn from the regime prior and returns its index.
  virtual std::size_t new_slot_from_prior(RngStream& rng) = 0;
};

struct SweepResult {
  StateSequence states;
  // regime_slots[i] is the slot now backing canonical regime i+1.
  std::vector<std::size_t> regime_slots;
  std::size_t sites_drawn = 0;
};

struct SweepOptions {
  SweepRule rule = SweepRule::kPaper;
  // Leading sites held in regime 1 (conditioning observations).
  std::size_t pinned_prefix = 0;
};

SweepResult gibbs_sweep(const StateSequence& s, SlotLikelihood& model, const DphmmHyper& hyper,
                        RngStream& rng, const SweepOptions& options = {});

/// Tabulated prior weights (log domain) for a site between regime i on the
/// left and regime i+1 on the right: {s_t = i, s_t = i+1}. `n_left` counts
/// self-transitions of regime i before the site, `n_right` those of regime
/// i+1 after it. Likelihood terms are not included.
std::array<double, 2> boundary_log_weights(std::size_t n_left, std::size_t n_right, double alpha,
                                           double beta);

// Index drawn proportionally to exp(log_weights); max-subtracted.
std::size_t draw_log_categorical(std::span<const double> log_weights, RngStream& rng);

}  // namespace dphmm

#endif  // DPHMM_GIBBS_HPP
