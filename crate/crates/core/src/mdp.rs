//! Finite MDP data model: states, per-state action sets, rewards and dense
//! transition rows, plus the value-vector helpers everything else builds on.
//!
//! States and actions are 0-based inside the library. The JSON format and
//! the CLI present them 1-based.

use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum deviation of a transition row sum from 1 that is silently
/// renormalized; anything larger is rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// The JSON document an MDP is read from and written to.
///
/// `rewards[x][a]` is `r(x, a)` and `transitions[x][a][y]` is `p(y | x, a)`,
/// all indexed by the local action position within `actions[x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDescription {
    pub num_states: usize,
    pub actions: Vec<Vec<String>>,
    pub rewards: Vec<Vec<f64>>,
    pub transitions: Vec<Vec<Vec<f64>>>,
}

/// A validated finite MDP with dense transition storage.
///
/// State-action pairs are laid out contiguously, state by state, so the pair
/// `(x, a)` lives at flat index `offsets[x] + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    num_states: usize,
    labels: Vec<Vec<String>>,
    offsets: Vec<usize>,
    rewards: Vec<f64>,
    transitions: Vec<f64>,
}

impl Mdp {
    /// Validates a raw description.
    pub fn new(description: MdpDescription) -> Result<Self> {
        let MdpDescription {
            num_states: m,
            actions,
            rewards,
            transitions,
        } = description;

        if m == 0 {
            return Err(Error::Shape("num_states must be positive".into()));
        }
        for (field, len) in [
            ("actions", actions.len()),
            ("rewards", rewards.len()),
            ("transitions", transitions.len()),
        ] {
            if len != m {
                return Err(Error::Shape(format!(
                    "`{field}` has {len} entries but num_states is {m}"
                )));
            }
        }

        let mut offsets = Vec::with_capacity(m + 1);
        offsets.push(0);
        let mut flat_rewards = Vec::new();
        let mut flat_rows = Vec::new();

        for x in 0..m {
            let k_x = actions[x].len();
            if k_x == 0 {
                return Err(Error::EmptyActionSet { state: x + 1 });
            }
            if rewards[x].len() != k_x {
                return Err(Error::Shape(format!(
                    "state {} lists {k_x} actions but {} rewards",
                    x + 1,
                    rewards[x].len()
                )));
            }
            if transitions[x].len() != k_x {
                return Err(Error::Shape(format!(
                    "state {} lists {k_x} actions but {} transition rows",
                    x + 1,
                    transitions[x].len()
                )));
            }
            for a in 0..k_x {
                let r = rewards[x][a];
                if !r.is_finite() {
                    return Err(Error::NonFiniteReward {
                        state: x + 1,
                        action: a + 1,
                        value: r,
                    });
                }
                flat_rewards.push(r);
                flat_rows.extend(validate_row(&transitions[x][a], m, x, a)?);
            }
            offsets.push(flat_rewards.len());
        }

        Ok(Self {
            num_states: m,
            labels: actions,
            offsets,
            rewards: flat_rewards,
            transitions: flat_rows,
        })
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let description: MdpDescription = serde_json::from_str(json)?;
        Self::new(description)
    }

    pub fn to_description(&self) -> MdpDescription {
        let m = self.num_states;
        MdpDescription {
            num_states: m,
            actions: self.labels.clone(),
            rewards: (0..m)
                .map(|x| (0..self.num_actions(x)).map(|a| self.reward(x, a)).collect())
                .collect(),
            transitions: (0..m)
                .map(|x| (0..self.num_actions(x)).map(|a| self.row(x, a).to_vec()).collect())
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_description()).expect("MDP description serializes")
    }

    /// Number of states `m`.
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Total number of state-action pairs `k`.
    pub fn num_pairs(&self) -> usize {
        self.rewards.len()
    }

    pub fn num_actions(&self, state: usize) -> usize {
        self.offsets[state + 1] - self.offsets[state]
    }

    pub fn action_label(&self, state: usize, action: usize) -> &str {
        &self.labels[state][action]
    }

    pub fn pair_index(&self, state: usize, action: usize) -> usize {
        debug_assert!(action < self.num_actions(state));
        self.offsets[state] + action
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.rewards[self.pair_index(state, action)]
    }

    /// Transition row `p(· | state, action)`.
    pub fn row(&self, state: usize, action: usize) -> &[f64] {
        self.pair_row(self.pair_index(state, action))
    }

    /// Transition row of the pair at flat index `pair`.
    pub fn pair_row(&self, pair: usize) -> &[f64] {
        let m = self.num_states;
        &self.transitions[pair * m..(pair + 1) * m]
    }

    /// All transition rows in pair order.
    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.transitions.chunks_exact(self.num_states)
    }

    /// Number of deterministic policies, or `None` if it overflows `u128`.
    pub fn policy_count(&self) -> Option<u128> {
        (0..self.num_states).try_fold(1u128, |acc, x| acc.checked_mul(self.num_actions(x) as u128))
    }

    /// `sp(r)`: largest reward minus smallest reward over all pairs.
    pub fn reward_span(&self) -> f64 {
        span(&self.rewards)
    }
}

fn validate_row(row: &[f64], m: usize, x: usize, a: usize) -> Result<Vec<f64>> {
    if row.len() != m {
        return Err(Error::Shape(format!(
            "transition row for state {}, action {} has length {} (expected {m})",
            x + 1,
            a + 1,
            row.len()
        )));
    }
    for (y, &p) in row.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::NegativeProbability {
                state: x + 1,
                action: a + 1,
                target: y + 1,
                value: p,
            });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::BadRow {
            state: x + 1,
            action: a + 1,
            sum,
        });
    }
    if sum == 1.0 {
        Ok(row.to_vec())
    } else {
        Ok(row.iter().map(|p| p / sum).collect())
    }
}

/// A real function on the states, stored as a vector of finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    /// Wraps values produced by the library's own arithmetic.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn span(&self) -> f64 {
        span(&self.0)
    }

    /// Componentwise `self - other`.
    pub fn difference(&self, other: &ValueVector) -> ValueVector {
        assert_eq!(self.len(), other.len(), "value vectors differ in length");
        Self(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect())
    }

    /// Fails with `DimensionMismatch` unless the vector has `m` entries.
    pub fn check_len(&self, m: usize) -> Result<()> {
        if self.0.len() == m {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: m,
                found: self.0.len(),
            })
        }
    }
}

impl Deref for ValueVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ValueVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// One action per state, stored as local action indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeterministicPolicy(Vec<usize>);

impl DeterministicPolicy {
    pub fn new(mdp: &Mdp, choices: Vec<usize>) -> Result<Self> {
        if choices.len() != mdp.num_states() {
            return Err(Error::DimensionMismatch {
                expected: mdp.num_states(),
                found: choices.len(),
            });
        }
        for (x, &a) in choices.iter().enumerate() {
            if a >= mdp.num_actions(x) {
                return Err(Error::InvalidPolicy {
                    state: x + 1,
                    action: a + 1,
                    available: mdp.num_actions(x),
                });
            }
        }
        Ok(Self(choices))
    }

    pub(crate) fn from_raw(choices: Vec<usize>) -> Self {
        Self(choices)
    }

    pub fn action(&self, state: usize) -> usize {
        self.0[state]
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Action labels chosen at each state.
    pub fn labels<'a>(&self, mdp: &'a Mdp) -> Vec<&'a str> {
        self.0
            .iter()
            .enumerate()
            .map(|(x, &a)| mdp.action_label(x, a))
            .collect()
    }
}

/// Discount factor in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DiscountFactor(f64);

impl DiscountFactor {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Span seminorm: `max u - min u`. Zero for an empty slice.
pub fn span(u: &[f64]) -> f64 {
    let mut iter = u.iter().copied();
    let Some(first) = iter.next() else {
        return 0.0;
    };
    let (lo, hi) = iter.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// `sp(u - v)` in a single pass, without materializing the difference.
pub fn span_of_difference(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "value vectors differ in length");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in u.iter().zip(v) {
        let d = a - b;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

/// Largest one-step reward available at each state.
pub fn max_one_step_reward(mdp: &Mdp) -> ValueVector {
    let values = (0..mdp.num_states())
        .map(|x| {
            (0..mdp.num_actions(x))
                .map(|a| mdp.reward(x, a))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    ValueVector(values)
}
