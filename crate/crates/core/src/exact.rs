//! Exact policy evaluation and Howard policy iteration.
//!
//! Evaluation solves `(I - alpha P_phi) v = r_phi` by Gaussian elimination
//! with partial pivoting in `O(m^3)`. Policy iteration is the ground truth
//! used to certify value-iteration output.

use crate::bellman::backup_action;
use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, DiscountFactor, Mdp, ValueVector};

/// Solves the dense `n x n` system `a x = b` in place. `a` is row-major.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "matrix must be n x n");

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * n + col] == 0.0 {
            return Err(Error::Singular);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Expected total discounted reward `v_alpha^phi` of a deterministic policy.
pub fn policy_value(mdp: &Mdp, alpha: DiscountFactor, phi: &DeterministicPolicy) -> ValueVector {
    let m = mdp.num_states();
    assert_eq!(phi.len(), m, "policy length must equal num_states");
    let a = alpha.value();
    let mut matrix = vec![0.0; m * m];
    let mut rhs = Vec::with_capacity(m);
    for x in 0..m {
        let action = phi.action(x);
        for (y, p) in mdp.row(x, action).iter().enumerate() {
            matrix[x * m + y] = -a * p;
        }
        matrix[x * m + x] += 1.0;
        rhs.push(mdp.reward(x, action));
    }
    // Rows are strictly diagonally dominant for alpha < 1.
    let v = solve_dense(matrix, rhs).expect("I - alpha P is nonsingular for alpha < 1");
    ValueVector::from_raw(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiRunResult {
    pub optimal_policy: DeterministicPolicy,
    pub optimal_value: ValueVector,
    /// Number of evaluate-improve rounds, including the final one that
    /// reproduced the incumbent.
    pub iterations: u64,
    /// Value of the policy evaluated at each round.
    pub value_history: Vec<ValueVector>,
}

/// Howard policy iteration starting from the first listed action at every
/// state.
///
/// The incumbent action is kept whenever it ties the best improvement, so
/// the policy sequence cannot cycle.
pub fn policy_iterate(mdp: &Mdp, alpha: DiscountFactor) -> Result<PiRunResult> {
    let m = mdp.num_states();
    let cap = mdp
        .policy_count()
        .map_or(u64::MAX, |c| u64::try_from(c).unwrap_or(u64::MAX));

    let mut policy = vec![0usize; m];
    let mut history = Vec::new();
    let mut iterations = 0u64;

    loop {
        iterations += 1;
        let phi = DeterministicPolicy::from_raw(policy.clone());
        let value = policy_value(mdp, alpha, &phi);

        let mut changed = false;
        for (x, choice) in policy.iter_mut().enumerate() {
            let q_incumbent = backup_action(mdp, alpha, &value, x, *choice);
            let (best, q_best) = crate::bellman::best_action(mdp, alpha, &value, x);
            let tol = 1e-12 * (1.0 + q_best.abs());
            if q_best > q_incumbent + tol {
                *choice = best;
                changed = true;
            }
        }
        history.push(value.clone());

        if !changed {
            return Ok(PiRunResult {
                optimal_policy: phi,
                optimal_value: value,
                iterations,
                value_history: history,
            });
        }
        if iterations >= cap {
            return Err(Error::IterationCapExceeded { cap });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::backup_optimal;
    use crate::mdp::MdpDescription;

    fn alpha(a: f64) -> DiscountFactor {
        DiscountFactor::new(a).unwrap()
    }

    fn example_three() -> Mdp {
        Mdp::new(MdpDescription {
            num_states: 3,
            actions: vec![vec!["b".into(), "c".into()], vec!["b".into()], vec!["b".into()]],
            rewards: vec![vec![2.0, 1.0], vec![1.0], vec![0.0]],
            transitions: vec![
                vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
            ],
        })
        .unwrap()
    }

    #[test]
    fn gaussian_elimination_needs_pivoting() {
        // Zero leading entry forces a row swap.
        let a = vec![0.0, 2.0, 1.0, 1.0, -2.0, -3.0, -1.0, 1.0, 2.0];
        let b = vec![-8.0, 0.0, 3.0];
        let x = solve_dense(a.clone(), b.clone()).unwrap();
        for r in 0..3 {
            let lhs: f64 = (0..3).map(|c| a[r * 3 + c] * x[c]).sum();
            assert!((lhs - b[r]).abs() < 1e-12);
        }
        assert!(matches!(
            solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn example_three_policy_values() {
        let mdp = example_three();
        let phi = DeterministicPolicy::new(&mdp, vec![1, 0, 0]).unwrap();
        let psi = DeterministicPolicy::new(&mdp, vec![0, 0, 0]).unwrap();
        for a in [0.1, 0.5, 0.8, 0.95] {
            let v_phi = policy_value(&mdp, alpha(a), &phi);
            assert!((v_phi[0] - 1.0 / (1.0 - a)).abs() < 1e-12);
            assert!((v_phi[1] - 1.0 / (1.0 - a)).abs() < 1e-12);
            assert_eq!(v_phi[2], 0.0);
            let v_psi = policy_value(&mdp, alpha(a), &psi);
            assert!((v_psi[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rewards_give_zero_values() {
        let mut d = example_three().to_description();
        d.rewards.iter_mut().flatten().for_each(|r| *r = 0.0);
        let mdp = Mdp::new(d).unwrap();
        let phi = DeterministicPolicy::new(&mdp, vec![1, 0, 0]).unwrap();
        assert!(policy_value(&mdp, alpha(0.9), &phi).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn policy_iteration_on_example_three() {
        let mdp = example_three();
        assert_eq!(
            policy_iterate(&mdp, alpha(0.3)).unwrap().optimal_policy.choices(),
            &[0, 0, 0]
        );
        assert_eq!(
            policy_iterate(&mdp, alpha(0.8)).unwrap().optimal_policy.choices(),
            &[1, 0, 0]
        );

        let tie = policy_iterate(&mdp, alpha(0.5)).unwrap();
        assert!(tie.optimal_policy.action(0) <= 1);
        assert!((tie.optimal_value[0] - 2.0).abs() < 1e-12);
        let t = backup_optimal(&mdp, alpha(0.5), &tie.optimal_value);
        for x in 0..3 {
            assert!((t.value[x] - tie.optimal_value[x]).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_bound_holds() {
        let mdp = example_three();
        let phi = DeterministicPolicy::new(&mdp, vec![1, 0, 0]).unwrap();
        let a = 0.97;
        let v = policy_value(&mdp, alpha(a), &phi);
        for x in 0..3 {
            let row = mdp.row(x, phi.action(x));
            let lhs = v[x] - a * row.iter().zip(v.iter()).map(|(p, w)| p * w).sum::<f64>();
            let r = mdp.reward(x, phi.action(x));
            assert!((lhs - r).abs() <= 1e-9 * (1.0 + 2.0));
        }
    }
}
