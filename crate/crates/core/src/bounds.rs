//! Ergodicity coefficients and a-priori iteration bounds for span-stopped
//! value iteration.
//!
//! Every bound here has the shape
//!
//! ```text
//! max{ ceil( log((1 - alpha) eps rho / D) / log(alpha rho) ), 1 }
//! ```
//!
//! for a contraction factor `rho` (either `gamma` or 1) and a numerator `D`
//! that upper-bounds the first span. That expression is the smallest
//! `n >= 1` with `(alpha rho)^(n-1) D <= (1 - alpha) eps / alpha`; when the
//! ceiling argument lands within rounding distance of an integer the
//! inequality is checked directly instead.

use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::backup_optimal;
use crate::error::{Error, Result};
use crate::mdp::{max_one_step_reward, span_of_difference, Mdp, ValueVector};
use crate::vi::{check_epsilon, check_open_alpha, stopping_threshold};

/// Default budget (in elementary operations, `m k^2`) for exact `gamma`.
pub const DEFAULT_GAMMA_COST_CAP: u64 = 1_000_000_000;

/// `1 - sum_z min{p(z), q(z)}` for two transition rows.
fn couple_defect(p: &[f64], q: &[f64]) -> f64 {
    let overlap: f64 = p.iter().zip(q).map(|(a, b)| a.min(*b)).sum();
    1.0 - overlap
}

/// Ergodicity coefficient `gamma`: the largest `1 - sum_z min{p(z|x,a), p(z|y,b)}`
/// over the `k(k-1)/2` unordered couples of distinct state-action pairs.
pub fn compute_gamma(mdp: &Mdp) -> f64 {
    let k = mdp.num_pairs();
    let gamma = (0..k)
        .into_par_iter()
        .map(|i| {
            let p = mdp.pair_row(i);
            (i + 1..k)
                .map(|j| couple_defect(p, mdp.pair_row(j)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    gamma.clamp(0.0, 1.0)
}

/// Cheap upper bound `gamma' = 1 - sum_z min_{x,a} p(z|x,a)`, in `O(mk)`.
pub fn compute_gamma_prime(mdp: &Mdp) -> f64 {
    let mut column_min = vec![f64::INFINITY; mdp.num_states()];
    for row in mdp.rows() {
        for (lo, p) in column_min.iter_mut().zip(row) {
            *lo = lo.min(*p);
        }
    }
    (1.0 - column_min.iter().sum::<f64>()).clamp(0.0, 1.0)
}

/// Why a bound is not given by its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    FirstStepFixedPoint,
    ZeroGamma,
    ZeroSpans,
    ZeroOneStepSpan,
    NonConstantInitial,
}

impl Degeneracy {
    pub fn explanation(self) -> &'static str {
        match self {
            Self::FirstStepFixedPoint => {
                "sp(v_1 - v0) = 0: the first iterate already stops the algorithm and its greedy policy is optimal"
            }
            Self::ZeroGamma => {
                "gamma = 0: all transition rows coincide, so the algorithm stops after at most two iterations with an optimal policy"
            }
            Self::ZeroSpans => {
                "sp(v1) + sp(v0) = 0: the algorithm stops after the first iteration with an optimal policy"
            }
            Self::ZeroOneStepSpan => {
                "sp(v1) = 0 with constant v0: the algorithm stops after the first iteration with an optimal policy"
            }
            Self::NonConstantInitial => "bound applies only to a constant initial vector v0",
        }
    }
}

/// An iteration bound, possibly replaced by a degenerate-case value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<Degeneracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

impl Bound {
    pub fn value(iterations: u64) -> Self {
        Self {
            iterations: Some(iterations),
            degenerate: None,
            note: None,
        }
    }

    pub fn degenerate(iterations: Option<u64>, why: Degeneracy) -> Self {
        Self {
            iterations,
            degenerate: Some(why),
            note: Some(why.explanation()),
        }
    }
}

fn check_gamma(gamma: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        (0.0..=1.0).contains(&gamma)
    } else {
        gamma > 0.0 && gamma <= 1.0
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

fn check_nonnegative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!(
            "{name} must be finite and >= 0, got {value}"
        )))
    }
}

/// Whether `(alpha gamma)^(n-1) d <= (1 - alpha) eps / alpha`.
fn satisfies(alpha: f64, epsilon: f64, gamma: f64, d: f64, n: u64) -> bool {
    (alpha * gamma).powf((n - 1) as f64) * d <= stopping_threshold(alpha, epsilon)
}

/// Smallest `n >= 1` with `(alpha gamma)^(n-1) d <= (1 - alpha) eps / alpha`,
/// for `alpha in (0,1)`, `gamma in (0,1]`, `d > 0`.
fn iteration_bound(alpha: f64, epsilon: f64, gamma: f64, d: f64) -> u64 {
    let ratio = (1.0 - alpha) * epsilon * gamma / d;
    if ratio >= 1.0 {
        return 1;
    }
    let exponent = ratio.ln() / (alpha * gamma).ln();
    let nearest = exponent.round();
    if (exponent - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        let mut n = (nearest as u64).saturating_sub(1).max(1);
        while !satisfies(alpha, epsilon, gamma, d, n) {
            n += 1;
        }
        return n;
    }
    (exponent.ceil() as u64).max(1)
}

/// Bound on the iterations of span-stopped value iteration in terms of
/// `gamma` and the first observed span `sp(v_1 - v0)`.
pub fn n_star(alpha: f64, epsilon: f64, gamma: f64, sp_first_step: f64) -> Result<Bound> {
    check_open_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_gamma(gamma, true)?;
    check_nonnegative("sp(v_1 - v0)", sp_first_step)?;

    if sp_first_step == 0.0 {
        return Ok(Bound::degenerate(Some(1), Degeneracy::FirstStepFixedPoint));
    }
    if gamma == 0.0 {
        // (alpha gamma)^(n-1) vanishes from n = 2 on.
        let n = if sp_first_step <= stopping_threshold(alpha, epsilon) {
            1
        } else {
            2
        };
        return Ok(Bound::degenerate(Some(n), Degeneracy::ZeroGamma));
    }
    Ok(Bound::value(iteration_bound(alpha, epsilon, gamma, sp_first_step)))
}

/// `n_star` with `gamma` replaced by 1.
pub fn bound_eq15(alpha: f64, epsilon: f64, sp_first_step: f64) -> Result<Bound> {
    n_star(alpha, epsilon, 1.0, sp_first_step)
}

/// Bound in terms of `R = sp(v0)` and `V = sp(v1)` only, with numerator
/// `V + (1 + alpha) R`. Non-decreasing in `alpha`.
pub fn bound_f(alpha: f64, epsilon: f64, gamma: f64, r: f64, v: f64) -> Result<u64> {
    check_open_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_gamma(gamma, false)?;
    check_nonnegative("R", r)?;
    check_nonnegative("V", v)?;
    if r + v == 0.0 {
        return Err(Error::DegenerateInput(Degeneracy::ZeroSpans.explanation()));
    }
    Ok(iteration_bound(alpha, epsilon, gamma, v + (1.0 + alpha) * r))
}

/// `bound_f` with `gamma` replaced by 1: strongly polynomial and free of
/// any transition-matrix computation.
pub fn bound_eq16(alpha: f64, epsilon: f64, r: f64, v: f64) -> Result<u64> {
    bound_f(alpha, epsilon, 1.0, r, v)
}

/// Bound for a constant initial vector: `bound_f` with `R = 0`.
pub fn bound_f_star(alpha: f64, epsilon: f64, gamma: f64, v: f64) -> Result<u64> {
    check_open_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_gamma(gamma, false)?;
    check_nonnegative("V", v)?;
    if v == 0.0 {
        return Err(Error::DegenerateInput(Degeneracy::ZeroOneStepSpan.explanation()));
    }
    Ok(iteration_bound(alpha, epsilon, gamma, v))
}

/// How `gamma` is obtained for a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    Exact,
    Prime,
    /// Exact unless `m k^2` exceeds the cap, otherwise `gamma'`.
    Auto {
        cap: u64,
    },
}

impl Default for GammaMode {
    fn default() -> Self {
        Self::Auto {
            cap: DEFAULT_GAMMA_COST_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    Exact,
    GammaPrimeRequested,
    GammaPrimeSubstituted,
}

/// `m k^2`, saturating.
pub fn gamma_cost(mdp: &Mdp) -> u64 {
    let k = mdp.num_pairs() as u64;
    (mdp.num_states() as u64).saturating_mul(k.saturating_mul(k))
}

/// Returns `(gamma used for bounds, gamma', provenance)`.
pub fn resolve_gamma(mdp: &Mdp, mode: GammaMode) -> (f64, f64, GammaSource) {
    let prime = compute_gamma_prime(mdp);
    match mode {
        GammaMode::Exact => (compute_gamma(mdp), prime, GammaSource::Exact),
        GammaMode::Prime => (prime, prime, GammaSource::GammaPrimeRequested),
        GammaMode::Auto { cap } if gamma_cost(mdp) > cap => (prime, prime, GammaSource::GammaPrimeSubstituted),
        GammaMode::Auto { .. } => (compute_gamma(mdp), prime, GammaSource::Exact),
    }
}

/// `sp(T v0 - v0)`.
pub fn first_step_span(mdp: &Mdp, alpha: f64, v0: &ValueVector) -> Result<f64> {
    let discount = check_open_alpha(alpha)?;
    v0.check_len(mdp.num_states())?;
    let v1 = backup_optimal(mdp, discount, v0);
    Ok(span_of_difference(&v1.value, v0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub gamma_source: GammaSource,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub sp_first_step: f64,
    pub reward_span: f64,
    pub n_star: Bound,
    #[serde(rename = "F")]
    pub f: Bound,
    pub bound_eq15: Bound,
    pub bound_eq16: Bound,
    #[serde(rename = "F_star")]
    pub f_star: Bound,
    #[serde(rename = "F_star_gamma_free")]
    pub f_star_gamma_free: Bound,
}

pub fn full_report(mdp: &Mdp, alpha: f64, epsilon: f64, v0: &ValueVector, mode: GammaMode) -> Result<BoundReport> {
    check_open_alpha(alpha)?;
    check_epsilon(epsilon)?;
    v0.check_len(mdp.num_states())?;

    let (gamma, gamma_prime, gamma_source) = resolve_gamma(mdp, mode);
    let r = v0.span();
    let v = max_one_step_reward(mdp).span();
    let sp_first_step = first_step_span(mdp, alpha, v0)?;

    let n_star = n_star(alpha, epsilon, gamma, sp_first_step)?;
    let bound_eq15 = bound_eq15(alpha, epsilon, sp_first_step)?;

    let spans_bound = |g: f64| -> Result<Bound> {
        if g == 0.0 {
            Ok(Bound::degenerate(None, Degeneracy::ZeroGamma))
        } else if r + v == 0.0 {
            Ok(Bound::degenerate(Some(1), Degeneracy::ZeroSpans))
        } else {
            Ok(Bound::value(bound_f(alpha, epsilon, g, r, v)?))
        }
    };
    let f = spans_bound(gamma)?;
    let bound_eq16 = spans_bound(1.0)?;

    let constant_bound = |g: f64| -> Result<Bound> {
        if r > 0.0 {
            Ok(Bound::degenerate(None, Degeneracy::NonConstantInitial))
        } else if g == 0.0 {
            Ok(Bound::degenerate(None, Degeneracy::ZeroGamma))
        } else if v == 0.0 {
            Ok(Bound::degenerate(Some(1), Degeneracy::ZeroOneStepSpan))
        } else {
            Ok(Bound::value(bound_f_star(alpha, epsilon, g, v)?))
        }
    };
    let f_star = constant_bound(gamma)?;
    let f_star_gamma_free = constant_bound(1.0)?;

    Ok(BoundReport {
        alpha,
        epsilon,
        gamma,
        gamma_prime,
        gamma_source,
        r,
        v,
        sp_first_step,
        reward_span: mdp.reward_span(),
        n_star,
        f,
        bound_eq15,
        bound_eq16,
        f_star,
        f_star_gamma_free,
    })
}
