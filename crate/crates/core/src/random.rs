//! Seeded random MDP instances for tests, benchmarks and `mdpvi compare`.

use std::ops::RangeInclusive;

use rand::Rng;

use crate::mdp::{Mdp, MdpDescription};

/// How transition rows are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStyle {
    /// Every entry positive.
    Dense,
    /// Per row: one-hot, a small random support, or dense, with equal odds.
    Mixed,
}

#[derive(Debug, Clone)]
pub struct RandomMdpConfig {
    pub states: RangeInclusive<usize>,
    pub actions_per_state: RangeInclusive<usize>,
    pub reward_range: (f64, f64),
    pub row_style: RowStyle,
}

impl Default for RandomMdpConfig {
    fn default() -> Self {
        Self {
            states: 2..=8,
            actions_per_state: 1..=4,
            reward_range: (-1.0, 1.0),
            row_style: RowStyle::Mixed,
        }
    }
}

pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, config: &RandomMdpConfig) -> Mdp {
    let m = rng.gen_range(config.states.clone());
    let (lo, hi) = config.reward_range;
    let mut actions = Vec::with_capacity(m);
    let mut rewards = Vec::with_capacity(m);
    let mut transitions = Vec::with_capacity(m);
    for _ in 0..m {
        let k_x = rng.gen_range(config.actions_per_state.clone());
        actions.push((0..k_x).map(|a| format!("a{}", a + 1)).collect());
        rewards.push((0..k_x).map(|_| rng.gen_range(lo..=hi)).collect());
        transitions.push((0..k_x).map(|_| random_row(rng, m, config.row_style)).collect());
    }
    Mdp::new(MdpDescription {
        num_states: m,
        actions,
        rewards,
        transitions,
    })
    .expect("generated MDP is valid")
}

fn random_row<R: Rng + ?Sized>(rng: &mut R, m: usize, style: RowStyle) -> Vec<f64> {
    let kind = match style {
        RowStyle::Dense => 2,
        RowStyle::Mixed => rng.gen_range(0..3),
    };
    let mut row = vec![0.0; m];
    match kind {
        0 => row[rng.gen_range(0..m)] = 1.0,
        1 => {
            let support = rng.gen_range(1..=m.min(3));
            for _ in 0..support {
                row[rng.gen_range(0..m)] += rng.gen_range(0.05..1.0);
            }
        }
        _ => row.iter_mut().for_each(|p| *p = rng.gen_range(0.05..1.0)),
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    row
}

/// A reproducible list of instances: even positions use mixed rows, odd
/// positions dense rows.
pub fn fleet<R: Rng + ?Sized>(rng: &mut R, count: usize, config: &RandomMdpConfig) -> Vec<Mdp> {
    (0..count)
        .map(|i| {
            let cfg = RandomMdpConfig {
                row_style: if i % 2 == 0 { RowStyle::Mixed } else { RowStyle::Dense },
                ..config.clone()
            };
            random_mdp(rng, &cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_instance() {
        let a = random_mdp(&mut ChaCha8Rng::seed_from_u64(9), &RandomMdpConfig::default());
        let b = random_mdp(&mut ChaCha8Rng::seed_from_u64(9), &RandomMdpConfig::default());
        assert_eq!(a, b);
    }

    #[test]
    fn respects_size_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mdp in fleet(&mut rng, 100, &RandomMdpConfig::default()) {
            assert!((2..=8).contains(&mdp.num_states()));
            for x in 0..mdp.num_states() {
                assert!((1..=4).contains(&mdp.num_actions(x)));
            }
        }
    }
}
