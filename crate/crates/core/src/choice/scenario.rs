//! Seeded Gumbel scenario draws.
//!
//! Draws are never stored. Each `ε_{nks}^m` is produced on demand from a
//! ChaCha8 stream: the scenario index selects the stream and the slot
//! `(n, k, alternative)` selects the word position, so any draw can be
//! addressed directly and results do not depend on evaluation order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Slot layout limits. Alternatives are `0` for the opt-out and `m + 1`
/// for service `m`.
const MAX_CATEGORIES: u128 = 1 << 16;
const MAX_ALTERNATIVES: u128 = 1 << 16;

/// Inverse-CDF Gumbel(0, beta) draw for `u` in `(0, 1)`.
pub fn gumbel_from_uniform(u: f64, beta: f64) -> f64 {
    -beta * (-u.ln()).ln()
}

/// Maps 64 random bits to the open interval `(0, 1)`.
fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[derive(Debug, Clone)]
pub struct ScenarioSet {
    pub count: usize,
    pub beta: f64,
    pub seed: u64,
    zero_noise: bool,
    base: ChaCha8Rng,
}

impl ScenarioSet {
    pub fn new(count: usize, beta: f64, seed: u64) -> Self {
        ScenarioSet {
            count,
            beta,
            seed,
            zero_noise: false,
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// `count` scenarios with every draw equal to zero.
    pub fn deterministic(count: usize) -> Self {
        ScenarioSet {
            zero_noise: true,
            ..Self::new(count, 1.0, 0)
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.zero_noise
    }

    fn draw(&self, scenario: usize, shipper: usize, category: usize, alternative: usize) -> f64 {
        if self.zero_noise {
            return 0.0;
        }
        debug_assert!((category as u128) < MAX_CATEGORIES && (alternative as u128) < MAX_ALTERNATIVES);
        let slot = (shipper as u128 * MAX_CATEGORIES + category as u128) * MAX_ALTERNATIVES
            + alternative as u128;
        let mut rng = self.base.clone();
        rng.set_stream(scenario as u64);
        rng.set_word_pos(slot * 2);
        gumbel_from_uniform(open_unit(rng.next_u64()), self.beta)
    }

    /// `ε_{nks}^m` for service `m`.
    pub fn offer_noise(&self, scenario: usize, shipper: usize, category: usize, service: usize) -> f64 {
        self.draw(scenario, shipper, category, service + 1)
    }

    /// `ε_{nks}^0` for the opt-out.
    pub fn optout_noise(&self, scenario: usize, shipper: usize, category: usize) -> f64 {
        self.draw(scenario, shipper, category, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_addressable_and_reproducible() {
        let a = ScenarioSet::new(10, 1.0, 9);
        let b = ScenarioSet::new(10, 1.0, 9);
        assert_eq!(a.offer_noise(3, 1, 2, 0), b.offer_noise(3, 1, 2, 0));
        assert_ne!(a.offer_noise(3, 1, 2, 0), a.offer_noise(3, 1, 2, 1));
        assert_ne!(a.offer_noise(3, 1, 2, 0), a.offer_noise(4, 1, 2, 0));
        assert_ne!(a.offer_noise(3, 1, 2, 0), a.optout_noise(3, 1, 2));
        let c = ScenarioSet::new(10, 1.0, 10);
        assert_ne!(a.offer_noise(3, 1, 2, 0), c.offer_noise(3, 1, 2, 0));
    }

    #[test]
    fn beta_scales_draws() {
        let a = ScenarioSet::new(1, 1.0, 4);
        let b = ScenarioSet::new(1, 2.5, 4);
        let (x, y) = (a.offer_noise(0, 0, 0, 0), b.offer_noise(0, 0, 0, 0));
        assert!((y - 2.5 * x).abs() <= 1e-12 * y.abs().max(1.0));
    }

    #[test]
    fn gumbel_moments() {
        // mean = beta * Euler-Mascheroni, variance = pi^2 beta^2 / 6
        let sc = ScenarioSet::new(200_000, 2.0, 1);
        let xs: Vec<f64> = (0..sc.count).map(|s| sc.offer_noise(s, 0, 0, 0)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let sd = (std::f64::consts::PI.powi(2) * 4.0 / 6.0).sqrt();
        assert!((mean - 2.0 * 0.5772156649).abs() < 4.0 * sd / (xs.len() as f64).sqrt());
        assert!((var / (sd * sd) - 1.0).abs() < 0.02);
    }

    #[test]
    fn open_unit_never_hits_endpoints() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
        assert!(gumbel_from_uniform(open_unit(0), 1.0).is_finite());
        assert!(gumbel_from_uniform(open_unit(u64::MAX), 1.0).is_finite());
    }

    #[test]
    fn deterministic_set_is_zero() {
        let sc = ScenarioSet::deterministic(5);
        assert_eq!(sc.offer_noise(4, 0, 0, 2), 0.0);
        assert_eq!(sc.optout_noise(4, 0, 0), 0.0);
    }
}
