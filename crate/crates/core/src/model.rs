use rand::Rng;

use crate::mdp::TabularMdp;
use crate::policy::sample_index;

/// One sampled transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next_state: usize,
    pub reward: f64,
}

/// Sampling access to an MDP: draw `(s', r)` for a state-action pair.
///
/// Implementors are read-only so that independent replications can share one
/// model across threads, each with its own RNG.
pub trait GenerativeModel: Sync {
    fn num_states(&self) -> usize;

    fn num_actions(&self) -> usize;

    /// Bound on `|r|` for every reward this model can emit.
    fn reward_bound(&self) -> f64;

    fn sample<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Transition;
}

/// A tabular MDP emits its expected reward deterministically.
impl GenerativeModel for TabularMdp {
    fn num_states(&self) -> usize {
        TabularMdp::num_states(self)
    }

    fn num_actions(&self) -> usize {
        TabularMdp::num_actions(self)
    }

    fn reward_bound(&self) -> f64 {
        TabularMdp::reward_bound(self)
    }

    fn sample<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Transition {
        Transition {
            next_state: sample_index(self.transition_row(s, a), rng),
            reward: self.reward(s, a),
        }
    }
}

impl<M: GenerativeModel> GenerativeModel for &M {
    fn num_states(&self) -> usize {
        (**self).num_states()
    }

    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }

    fn reward_bound(&self) -> f64 {
        (**self).reward_bound()
    }

    fn sample<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Transition {
        (**self).sample(s, a, rng)
    }
}
