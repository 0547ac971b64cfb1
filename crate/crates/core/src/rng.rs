//! Counter-based jump randomness.
//!
//! Each trajectory owns its own ChaCha8 stream selected by the trajectory
//! index; the uniform for slot `k` sits at a fixed position of that stream,
//! so draws depend only on `(master_seed, traj_index, slot)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const WORDS_PER_DRAW: u128 = 2;

#[inline]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `[0, 1)` for `(master_seed, traj_index, slot)`, without
/// stepping through earlier slots.
pub fn uniform_at(master_seed: u64, traj_index: u64, slot: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(traj_index);
    rng.set_word_pos(slot as u128 * WORDS_PER_DRAW);
    to_unit(rng.next_u64())
}

/// `−ln(1 − p)` to fourth order in `p`.
#[inline]
pub fn hazard(p: f64) -> f64 {
    p * (1.0 + p * (0.5 + p * (1.0 / 3.0)))
}

/// Bernoulli decisions for successive integrator steps.
///
/// A unit-exponential threshold `E = −ln u` is drawn after every jump; a step
/// with jump probability `p` adds `−ln(1 − p)` to the accumulated hazard and
/// jumps once the hazard reaches `E`. Given no earlier jump, step `k` then
/// jumps with probability `p_k`. Slot `j` of the trajectory stream holds the
/// threshold after the `j`-th jump, so runs at different step sizes see the
/// same thresholds.
#[derive(Clone, Debug)]
pub struct JumpClock {
    rng: ChaCha8Rng,
    threshold: f64,
    accumulated: f64,
}

impl JumpClock {
    pub fn new(master_seed: u64, traj_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(traj_index);
        let threshold = Self::draw(&mut rng);
        JumpClock {
            rng,
            threshold,
            accumulated: 0.0,
        }
    }

    #[inline]
    fn draw(rng: &mut ChaCha8Rng) -> f64 {
        -libm::log(1.0 - to_unit(rng.next_u64()))
    }

    /// `true` with probability `p`, given no jump since the last `true`.
    #[inline]
    pub fn decide(&mut self, p: f64) -> bool {
        self.accumulated += hazard(p);
        if self.accumulated >= self.threshold {
            self.accumulated = 0.0;
            self.threshold = Self::draw(&mut self.rng);
            true
        } else {
            false
        }
    }
}

/// [`JumpClock`]s of `L` trajectories advanced together; lane `l` makes the
/// same decisions as a lone clock for the same trajectory.
#[derive(Clone, Debug)]
pub struct JumpClocks<const L: usize> {
    rngs: [ChaCha8Rng; L],
    threshold: [f64; L],
    accumulated: [f64; L],
}

impl<const L: usize> JumpClocks<L> {
    /// Clocks for trajectories `first, first + 1, …, first + L − 1`.
    pub fn new(master_seed: u64, first: u64) -> Self {
        let mut rngs: [ChaCha8Rng; L] = core::array::from_fn(|_| ChaCha8Rng::seed_from_u64(master_seed));
        let mut threshold = [0.0; L];
        for (l, (rng, t)) in rngs.iter_mut().zip(threshold.iter_mut()).enumerate() {
            rng.set_stream(first + l as u64);
            *t = JumpClock::draw(rng);
        }
        JumpClocks {
            rngs,
            threshold,
            accumulated: [0.0; L],
        }
    }

    /// Decides every lane; returns whether any lane jumped.
    #[inline]
    pub fn decide(&mut self, p: &[f64; L], jumped: &mut [bool; L]) -> bool {
        let mut any = false;
        for l in 0..L {
            self.accumulated[l] += hazard(p[l]);
            jumped[l] = self.accumulated[l] >= self.threshold[l];
            any |= jumped[l];
        }
        if any {
            for l in 0..L {
                if jumped[l] {
                    self.accumulated[l] = 0.0;
                    self.threshold[l] = JumpClock::draw(&mut self.rngs[l]);
                }
            }
        }
        any
    }
}
