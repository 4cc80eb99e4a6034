//! One-step Bellman operators.
//!
//! Every expectation `sum_y p(y|x,a) u(y)` is accumulated in ascending state
//! order, and argmax ties go to the lowest local action index, so results
//! are bit-identical across runs.

use crate::mdp::{DeterministicPolicy, DiscountFactor, Mdp, ValueVector};

/// `T u` together with the greedy action that attains each maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct BackupResult {
    pub value: ValueVector,
    pub greedy: DeterministicPolicy,
}

#[inline]
fn expectation(row: &[f64], u: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (p, v) in row.iter().zip(u) {
        acc += p * v;
    }
    acc
}

/// `r(x,a) + alpha * sum_y p(y|x,a) u(y)`.
pub fn backup_action(mdp: &Mdp, alpha: DiscountFactor, u: &[f64], state: usize, action: usize) -> f64 {
    debug_assert_eq!(u.len(), mdp.num_states());
    mdp.reward(state, action) + alpha.value() * expectation(mdp.row(state, action), u)
}

/// Best action at `state` and its backed-up value.
pub fn best_action(mdp: &Mdp, alpha: DiscountFactor, u: &[f64], state: usize) -> (usize, f64) {
    let mut best = (0, backup_action(mdp, alpha, u, state, 0));
    for a in 1..mdp.num_actions(state) {
        let q = backup_action(mdp, alpha, u, state, a);
        if q > best.1 {
            best = (a, q);
        }
    }
    best
}

/// Optimality operator `T u` with greedy (lowest-index) argmax selection.
pub fn backup_optimal(mdp: &Mdp, alpha: DiscountFactor, u: &[f64]) -> BackupResult {
    assert_eq!(u.len(), mdp.num_states(), "value vector length must equal num_states");
    let m = mdp.num_states();
    let mut value = Vec::with_capacity(m);
    let mut greedy = Vec::with_capacity(m);
    for x in 0..m {
        let (a, q) = best_action(mdp, alpha, u, x);
        greedy.push(a);
        value.push(q);
    }
    BackupResult {
        value: ValueVector::from_raw(value),
        greedy: DeterministicPolicy::from_raw(greedy),
    }
}

/// Policy operator: `(T^phi u)(x) = (T^{phi(x)} u)(x)`.
pub fn backup_policy(mdp: &Mdp, alpha: DiscountFactor, phi: &DeterministicPolicy, u: &[f64]) -> ValueVector {
    assert_eq!(u.len(), mdp.num_states(), "value vector length must equal num_states");
    assert_eq!(phi.len(), mdp.num_states(), "policy length must equal num_states");
    let values = (0..mdp.num_states())
        .map(|x| backup_action(mdp, alpha, u, x, phi.action(x)))
        .collect();
    ValueVector::from_raw(values)
}

/// Greedy policy with respect to `u`, without keeping the backed-up values.
pub fn greedy_policy(mdp: &Mdp, alpha: DiscountFactor, u: &[f64]) -> DeterministicPolicy {
    backup_optimal(mdp, alpha, u).greedy
}
