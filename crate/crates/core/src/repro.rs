//! The three three-state example MDPs and the tables that regenerate their
//! quantitative claims.
//!
//! All three share one graph: state 1 offers `b` (to state 3) and `c` (to
//! state 2); states 2 and 3 are absorbing with the single action `b`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::backup_optimal;
use crate::bounds::{bound_eq16, compute_gamma, first_step_span, n_star};
use crate::error::{Error, Result};
use crate::exact::policy_iterate;
use crate::mdp::{max_one_step_reward, DeterministicPolicy, DiscountFactor, Mdp, MdpDescription, ValueVector};
use crate::vi::value_iterate;

/// Identification must persist for this many times the candidate count.
pub const IDENTIFICATION_HORIZON_FACTOR: u64 = 10;
const IDENTIFICATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex1" => Ok(Self::Ex1),
            "ex2" => Ok(Self::Ex2),
            "ex3" => Ok(Self::Ex3),
            other => Err(Error::BadParameter(format!(
                "unknown example id `{other}` (expected ex1, ex2 or ex3)"
            ))),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ex1 => "ex1",
            Self::Ex2 => "ex2",
            Self::Ex3 => "ex3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleSpec {
    pub id: ExampleId,
    /// Reward-gap parameter `M` of example 2.
    pub m: Option<f64>,
}

impl ExampleSpec {
    pub fn ex1() -> Self {
        Self {
            id: ExampleId::Ex1,
            m: None,
        }
    }

    pub fn ex2(m: f64) -> Self {
        Self {
            id: ExampleId::Ex2,
            m: Some(m),
        }
    }

    pub fn ex3() -> Self {
        Self {
            id: ExampleId::Ex3,
            m: None,
        }
    }

    pub fn initial_value(&self) -> ValueVector {
        match self.id {
            ExampleId::Ex1 => ValueVector::new(vec![1.0, 2.0, -2.0]).expect("finite"),
            ExampleId::Ex2 | ExampleId::Ex3 => ValueVector::zeros(3),
        }
    }
}

fn three_state(r1b: f64, r1c: f64, r2: f64, r3: f64) -> Result<Mdp> {
    Mdp::new(MdpDescription {
        num_states: 3,
        actions: vec![vec!["b".into(), "c".into()], vec!["b".into()], vec!["b".into()]],
        rewards: vec![vec![r1b, r1c], vec![r2], vec![r3]],
        transitions: vec![
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            vec![vec![0.0, 1.0, 0.0]],
            vec![vec![0.0, 0.0, 1.0]],
        ],
    })
}

pub fn build_example(spec: &ExampleSpec) -> Result<(Mdp, ValueVector)> {
    let mdp = match spec.id {
        ExampleId::Ex1 => three_state(0.0, 0.0, 1.0, -1.0)?,
        ExampleId::Ex2 => {
            let m = spec.m.ok_or_else(|| Error::BadParameter("example 2 needs M".into()))?;
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::BadParameter(format!("M must be finite and > 0, got {m}")));
            }
            three_state(0.0, 1.0 - (-m).exp(), 0.0, 1.0)?
        }
        ExampleId::Ex3 => three_state(2.0, 1.0, 1.0, 0.0)?,
    };
    Ok((mdp, spec.initial_value()))
}

/// Policy using `c` at state 1.
pub fn policy_c() -> DeterministicPolicy {
    DeterministicPolicy::from_raw(vec![1, 0, 0])
}

/// Policy using `b` at state 1.
pub fn policy_b() -> DeterministicPolicy {
    DeterministicPolicy::from_raw(vec![0, 0, 0])
}

/// `sp(v_n - v_{n-1}) = 2 alpha^(n-1) |2 alpha - 1|` on example 1.
pub fn ex1_closed_form_span(alpha: f64, n: u32) -> f64 {
    2.0 * alpha.powi(n as i32 - 1) * (2.0 * alpha - 1.0).abs()
}

/// `delta_n` in `(0, 0.5)` with `sum_{i<n} (0.5 + delta_n)^i = 2`, by
/// bisection on `(0.5, 1 - 1e-12)`.
pub fn ex3_delta(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::BadParameter(format!("delta_n is defined for n >= 3, got {n}")));
    }
    let excess = |x: f64| -> f64 {
        let mut sum = 0.0;
        let mut power = 1.0;
        for _ in 0..n {
            sum += power;
            power *= x;
        }
        sum - 2.0
    };
    let (mut lo, mut hi) = (0.5, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) - 0.5)
}

/// First `n >= 1` such that the greedy policy with respect to `v_n = T^n v0`
/// equals `target` and keeps equalling it for every later iterate up to
/// `IDENTIFICATION_HORIZON_FACTOR * n`.
pub fn identification_iteration(
    mdp: &Mdp,
    alpha: DiscountFactor,
    v0: &ValueVector,
    target: &DeterministicPolicy,
) -> Result<u64> {
    v0.check_len(mdp.num_states())?;
    let mut value = backup_optimal(mdp, alpha, v0).value;
    let mut last_mismatch = 0u64;
    let mut n = 0u64;
    loop {
        n += 1;
        let next = backup_optimal(mdp, alpha, &value);
        if next.greedy != *target {
            last_mismatch = n;
        }
        let candidate = last_mismatch + 1;
        if n >= IDENTIFICATION_HORIZON_FACTOR * candidate {
            return Ok(candidate);
        }
        if n >= IDENTIFICATION_CAP {
            return Err(Error::IterationCapExceeded {
                cap: IDENTIFICATION_CAP,
            });
        }
        value = next.value;
    }
}

/// Iteration at which value iteration on example 3 settles on the optimal
/// policy, and that policy.
pub fn ex3_switch_check(alpha: f64) -> Result<(u64, DeterministicPolicy)> {
    if alpha == 0.5 {
        return Err(Error::BoundaryAlpha);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let discount = DiscountFactor::new(alpha)?;
    let (mdp, v0) = build_example(&ExampleSpec::ex3())?;
    let optimal = policy_iterate(&mdp, discount)?.optimal_policy;
    let n = identification_iteration(&mdp, discount, &v0, &optimal)?;
    Ok((n, optimal))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub iters_optimal: u64,
    pub iters_eps_stop: u64,
    pub bound_eq16: u64,
}

/// Example 2 across reward-gap parameters `M`.
pub fn ex2_sweep(m_values: &[f64], alpha: f64, epsilon: f64) -> Result<Vec<SweepRow>> {
    m_values
        .par_iter()
        .map(|&m| {
            let (mdp, v0) = build_example(&ExampleSpec::ex2(m))?;
            let run = value_iterate(&mdp, alpha, epsilon, &v0)?;
            let discount = DiscountFactor::new(alpha)?;
            let optimal = policy_iterate(&mdp, discount)?.optimal_policy;
            let iters_optimal = identification_iteration(&mdp, discount, &v0, &optimal)?;
            let v = max_one_step_reward(&mdp).span();
            Ok(SweepRow {
                param: m,
                iters_optimal,
                iters_eps_stop: run.iterations,
                bound_eq16: bound_eq16(alpha, epsilon, v0.span(), v)?,
            })
        })
        .collect()
}

/// IEEE double with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "param,iters_optimal,iters_eps_stop,bound_eq16")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            format_f64(row.param),
            row.iters_optimal,
            row.iters_eps_stop,
            row.bound_eq16
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ex1Row {
    pub alpha: f64,
    pub iterations: u64,
    pub n_star: u64,
    pub final_span: f64,
}

/// Actual iteration counts on example 1 next to the bound they attain.
pub fn ex1_table(alphas: &[f64], epsilon: f64) -> Result<Vec<Ex1Row>> {
    let (mdp, v0) = build_example(&ExampleSpec::ex1())?;
    let gamma = compute_gamma(&mdp);
    alphas
        .iter()
        .map(|&alpha| {
            let run = value_iterate(&mdp, alpha, epsilon, &v0)?;
            let sp = first_step_span(&mdp, alpha, &v0)?;
            let bound = n_star(alpha, epsilon, gamma, sp)?;
            Ok(Ex1Row {
                alpha,
                iterations: run.iterations,
                n_star: bound.iterations.expect("n_star is always defined"),
                final_span: *run.span_trace.last().expect("at least one pass"),
            })
        })
        .collect()
}

pub fn write_ex1_csv<W: Write>(rows: &[Ex1Row], mut out: W) -> std::io::Result<()> {
    writeln!(out, "alpha,iterations,n_star,final_span")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            format_f64(row.alpha),
            row.iterations,
            row.n_star,
            format_f64(row.final_span)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ex3Row {
    pub n: u32,
    pub delta: f64,
    /// `0.5 + delta_n`: above it the `n`-th iterate already prefers `c`.
    pub alpha_threshold: f64,
}

pub fn ex3_table(ns: std::ops::RangeInclusive<u32>) -> Result<Vec<Ex3Row>> {
    ns.map(|n| {
        let delta = ex3_delta(n)?;
        Ok(Ex3Row {
            n,
            delta,
            alpha_threshold: 0.5 + delta,
        })
    })
    .collect()
}

pub fn write_ex3_csv<W: Write>(rows: &[Ex3Row], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,delta_n,alpha_threshold")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{}",
            row.n,
            format_f64(row.delta),
            format_f64(row.alpha_threshold)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_all_examples() {
        let (ex1, v0) = build_example(&ExampleSpec::ex1()).unwrap();
        assert_eq!(ex1.num_states(), 3);
        assert_eq!(ex1.num_actions(0), 2);
        assert_eq!(ex1.reward(1, 0), 1.0);
        assert_eq!(ex1.reward(2, 0), -1.0);
        assert_eq!(v0.as_slice(), &[1.0, 2.0, -2.0]);

        let (ex2, v0) = build_example(&ExampleSpec::ex2(10.0)).unwrap();
        assert_eq!(ex2.reward(0, 1), 1.0 - (-10.0f64).exp());
        assert_eq!(v0.as_slice(), &[0.0; 3]);

        let (ex3, _) = build_example(&ExampleSpec::ex3()).unwrap();
        assert_eq!(
            (ex3.reward(0, 0), ex3.reward(0, 1), ex3.reward(1, 0), ex3.reward(2, 0)),
            (2.0, 1.0, 1.0, 0.0)
        );
        assert_eq!(max_one_step_reward(&ex3).as_slice(), &[2.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_m() {
        assert!(matches!(
            build_example(&ExampleSpec::ex2(0.0)),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            build_example(&ExampleSpec::ex2(-1.0)),
            Err(Error::BadParameter(_))
        ));
        assert!("ex4".parse::<ExampleId>().is_err());
        assert_eq!("ex2".parse::<ExampleId>().unwrap(), ExampleId::Ex2);
    }

    #[test]
    fn ex2_one_step_span_is_one() {
        for m in [0.5, 1.0, 5.0, 40.0, 200.0] {
            let (mdp, _) = build_example(&ExampleSpec::ex2(m)).unwrap();
            let v1 = max_one_step_reward(&mdp);
            assert_eq!(v1.span(), 1.0);
            assert_eq!(v1[0], 1.0 - (-m).exp());
        }
    }

    #[test]
    fn closed_form_span_values() {
        assert_eq!(ex1_closed_form_span(0.5, 1), 0.0);
        assert_eq!(ex1_closed_form_span(0.5, 7), 0.0);
        assert!((ex1_closed_form_span(0.24, 1) - 1.04).abs() < 1e-15);
        assert!((ex1_closed_form_span(0.47, 3) - 2.0 * 0.47 * 0.47 * 0.06).abs() < 1e-15);
    }

    #[test]
    fn delta_closed_forms() {
        let d3 = ex3_delta(3).unwrap();
        assert!((d3 - ((5f64.sqrt() - 1.0) / 2.0 - 0.5)).abs() < 1e-12);
        let d5 = ex3_delta(5).unwrap();
        assert!((d5 - 0.018790063675884).abs() < 1e-12);
        let d4 = ex3_delta(4).unwrap();
        let x = 0.5 + d4;
        assert!((x * x * x + x * x + x - 1.0).abs() < 1e-12);
        assert!(ex3_delta(2).is_err());

        let mut prev = 0.5;
        for n in 3..30 {
            let d = ex3_delta(n).unwrap();
            assert!(d > 0.0 && d < prev);
            prev = d;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn switch_check_examples() {
        let (n, policy) = ex3_switch_check(0.3).unwrap();
        assert_eq!((n, policy), (1, policy_b()));
        let (n, policy) = ex3_switch_check(0.6).unwrap();
        assert_eq!((n, policy), (3, policy_c()));
        // 0.5 + delta_5 = 0.51879 < 0.53 < 0.54369 = 0.5 + delta_4
        assert_eq!(ex3_switch_check(0.53).unwrap(), (4, policy_c()));
        assert_eq!(ex3_switch_check(0.55).unwrap(), (3, policy_c()));
        assert!(matches!(ex3_switch_check(0.5), Err(Error::BoundaryAlpha)));
        assert!(matches!(ex3_switch_check(1.0), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn switch_matches_delta_intervals() {
        // alpha strictly inside (0.5 + delta_{n+1}, 0.5 + delta_n) identifies at n.
        for n in 3..10u32 {
            let lo = 0.5 + ex3_delta(n + 1).unwrap();
            let hi = 0.5 + ex3_delta(n).unwrap();
            let alpha = 0.5 * (lo + hi);
            assert_eq!(ex3_switch_check(alpha).unwrap(), (n as u64, policy_c()), "n = {n}");
        }
    }

    #[test]
    fn sweep_shape() {
        let rows = ex2_sweep(&[1.0, 5.0, 10.0], 0.5, 1e-5).unwrap();
        assert!(rows.windows(2).all(|w| w[0].iters_optimal < w[1].iters_optimal));
        assert!(rows.iter().all(|r| r.iters_eps_stop == 18 && r.bound_eq16 == 18));

        // Vanishing reward gap: b is optimal from the first iterate.
        let rows = ex2_sweep(&[1e-9], 0.5, 1e-5).unwrap();
        assert_eq!(rows[0].iters_optimal, 1);
    }

    #[test]
    fn csv_layout() {
        let rows = ex2_sweep(&[1.0], 0.5, 1e-5).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("param,iters_optimal,iters_eps_stop,bound_eq16"));
        assert_eq!(lines.next(), Some("1.0000000000000000e0,2,18,18"));
    }
}
