//! Span-stopped value iteration for a deterministic epsilon-optimal policy.
//!
//! Starting from `u = v0` and `delta = epsilon / alpha`, each pass computes
//! `v = T u`, sets `delta = sp(u - v)` and shifts `u* = u, u = v`, for as
//! long as `delta > (1 - alpha) epsilon / alpha`. The greedy policy of the
//! last backup satisfies `v = T^phi u*` and is epsilon-optimal.

use serde::Serialize;

use crate::bellman::backup_optimal;
use crate::error::{Error, Result};
use crate::exact::policy_value;
use crate::mdp::{span_of_difference, DeterministicPolicy, DiscountFactor, Mdp, ValueVector};

pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct ViOptions {
    /// Safety cap; reaching it means the inputs were misused.
    pub max_iterations: u64,
    /// Subtract `v(1)` from every iterate before the next backup.
    pub relative: bool,
}

impl Default for ViOptions {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            relative: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViRunResult {
    pub policy: DeterministicPolicy,
    /// `v_n = T u*`.
    pub final_value: ValueVector,
    /// `u*`, the iterate the last backup was applied to.
    pub penultimate_value: ValueVector,
    pub iterations: u64,
    /// `sp(u - v)` for every executed pass.
    pub span_trace: Vec<f64>,
}

/// The stopping threshold `(1 - alpha) epsilon / alpha`.
pub fn stopping_threshold(alpha: f64, epsilon: f64) -> f64 {
    (1.0 - alpha) * epsilon / alpha
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

pub(crate) fn check_open_alpha(alpha: f64) -> Result<DiscountFactor> {
    if alpha > 0.0 && alpha < 1.0 {
        DiscountFactor::new(alpha)
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

pub fn value_iterate(mdp: &Mdp, alpha: f64, epsilon: f64, v0: &ValueVector) -> Result<ViRunResult> {
    value_iterate_with(mdp, alpha, epsilon, v0, &ViOptions::default())
}

pub fn value_iterate_with(
    mdp: &Mdp,
    alpha: f64,
    epsilon: f64,
    v0: &ValueVector,
    options: &ViOptions,
) -> Result<ViRunResult> {
    let discount = check_open_alpha(alpha)?;
    check_epsilon(epsilon)?;
    v0.check_len(mdp.num_states())?;
    if let Some(index) = v0.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }

    let threshold = stopping_threshold(alpha, epsilon);
    let mut delta = epsilon / alpha;
    let mut u = v0.clone();
    let mut trace = Vec::new();
    let mut last = None;

    while delta > threshold {
        if trace.len() as u64 >= options.max_iterations {
            return Err(Error::IterationCapExceeded {
                cap: options.max_iterations,
            });
        }
        let backup = backup_optimal(mdp, discount, &u);
        delta = span_of_difference(&u, &backup.value);
        trace.push(delta);

        let next = if options.relative {
            let anchor = backup.value[0];
            ValueVector::from_raw(backup.value.iter().map(|v| v - anchor).collect())
        } else {
            backup.value.clone()
        };
        let previous = std::mem::replace(&mut u, next);
        last = Some((backup, previous));
    }

    let (backup, penultimate) = last.expect("the first pass always runs since epsilon/alpha exceeds the threshold");
    Ok(ViRunResult {
        policy: backup.greedy,
        final_value: backup.value,
        penultimate_value: penultimate,
        iterations: trace.len() as u64,
        span_trace: trace,
    })
}

/// The `alpha = 0` case: any policy maximizing the one-step reward is
/// optimal, so a single backup suffices.
pub fn greedy_shortcut(mdp: &Mdp) -> DeterministicPolicy {
    let zero = DiscountFactor::new(0.0).expect("0 is a valid discount factor");
    backup_optimal(mdp, zero, &vec![0.0; mdp.num_states()]).greedy
}

/// Tolerance on per-state slack below which certification fails.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub policy_value: Vec<f64>,
    /// `v^phi(x) - v_alpha(x) + epsilon` for each state.
    pub slack: Vec<f64>,
    pub min_slack: f64,
    pub certified: bool,
}

/// Checks `v^phi(x) >= v_alpha(x) - epsilon` at every state, with `v^phi`
/// computed exactly.
pub fn certify_epsilon_optimal(
    mdp: &Mdp,
    alpha: f64,
    epsilon: f64,
    phi: &DeterministicPolicy,
    exact_optimal_value: &ValueVector,
) -> Result<Certification> {
    let discount = DiscountFactor::new(alpha)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let m = mdp.num_states();
    exact_optimal_value.check_len(m)?;
    let phi = DeterministicPolicy::new(mdp, phi.choices().to_vec())?;

    let value = policy_value(mdp, discount, &phi);
    let slack: Vec<f64> = value
        .iter()
        .zip(exact_optimal_value.iter())
        .map(|(v, opt)| v - opt + epsilon)
        .collect();
    let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Certification {
        policy_value: value.into_inner(),
        certified: min_slack >= -CERTIFICATION_TOLERANCE,
        slack,
        min_slack,
    })
}
