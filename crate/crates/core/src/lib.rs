//! Discounted finite MDPs solved by span-stopped value iteration.
//!
//! The solver returns a deterministic epsilon-optimal policy and its full
//! span trace. The [`bounds`] module computes the ergodicity coefficient
//! `gamma` and the closed-form iteration bounds that trace must respect.
//! [`exact`] provides policy iteration as ground truth, and [`repro`]
//! rebuilds the three small worked examples.

pub mod bellman;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod exact;
pub mod mdp;
pub mod random;
pub mod repro;
pub mod vi;

pub use bellman::{backup_action, backup_optimal, backup_policy, BackupResult};
pub use bounds::{
    bound_eq15, bound_eq16, bound_f, bound_f_star, compute_gamma, compute_gamma_prime, full_report, n_star, Bound,
    BoundReport, Degeneracy, GammaMode, GammaSource,
};
pub use error::{Error, Result};
pub use exact::{policy_iterate, policy_value, PiRunResult};
pub use mdp::{max_one_step_reward, span, DeterministicPolicy, DiscountFactor, Mdp, MdpDescription, ValueVector};
pub use vi::{
    certify_epsilon_optimal, greedy_shortcut, value_iterate, value_iterate_with, Certification, ViOptions, ViRunResult,
};
