//! Independent oracles shared by the integration suites. Nothing here calls
//! the solver paths it is used to check.

#![allow(dead_code, clippy::needless_range_loop)]

use mdpvi::random::{fleet, RandomMdpConfig};
use mdpvi::{Mdp, ValueVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FLEET_SEED: u64 = 20_240_611;
pub const FLEET_SIZE: usize = 200;
pub const FLEET_ALPHAS: [f64; 6] = [0.2, 0.45, 0.6, 0.8, 0.9, 0.95];

pub struct FleetCase {
    pub mdp: Mdp,
    pub alpha: f64,
    pub v0: ValueVector,
}

/// 200 seeded instances with `m <= 8`, `k_x <= 4`, alternating zero and
/// random initial vectors.
pub fn fleet_cases() -> Vec<FleetCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(FLEET_SEED);
    let mdps = fleet(&mut rng, FLEET_SIZE, &RandomMdpConfig::default());
    mdps.into_iter()
        .enumerate()
        .map(|(i, mdp)| {
            let m = mdp.num_states();
            let v0 = if i % 3 == 0 {
                ValueVector::zeros(m)
            } else {
                ValueVector::new((0..m).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap()
            };
            FleetCase {
                mdp,
                alpha: FLEET_ALPHAS[i % FLEET_ALPHAS.len()],
                v0,
            }
        })
        .collect()
}

/// Gauss-Jordan elimination with full row reduction; independent of the
/// library's solver.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[best][col].abs() {
                best = r;
            }
        }
        a.swap(col, best);
        b.swap(col, best);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
        }
        b[col] /= d;
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for k in 0..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    b
}

/// `v^phi` by Gauss-Jordan on `(I - alpha P_phi) v = r_phi`.
pub fn evaluate(mdp: &Mdp, alpha: f64, choices: &[usize]) -> Vec<f64> {
    let m = mdp.num_states();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for x in 0..m {
        let row = mdp.row(x, choices[x]);
        for y in 0..m {
            a[x][y] = if x == y { 1.0 } else { 0.0 } - alpha * row[y];
        }
        b[x] = mdp.reward(x, choices[x]);
    }
    gauss_jordan(a, b)
}

/// Componentwise maximum of `v^phi` over every deterministic policy.
pub fn brute_force_optimal_value(mdp: &Mdp, alpha: f64) -> Vec<f64> {
    let m = mdp.num_states();
    let mut best = vec![f64::NEG_INFINITY; m];
    let mut choices = vec![0usize; m];
    loop {
        let v = evaluate(mdp, alpha, &choices);
        for x in 0..m {
            best[x] = best[x].max(v[x]);
        }
        // odometer increment
        let mut x = 0;
        loop {
            if x == m {
                return best;
            }
            choices[x] += 1;
            if choices[x] < mdp.num_actions(x) {
                break;
            }
            choices[x] = 0;
            x += 1;
        }
    }
}

/// `gamma` over all ordered pairs of state-action pairs, identical ones
/// included.
pub fn brute_force_gamma(mdp: &Mdp) -> f64 {
    let m = mdp.num_states();
    let mut pairs = Vec::new();
    for x in 0..m {
        for a in 0..mdp.num_actions(x) {
            pairs.push(mdp.row(x, a).to_vec());
        }
    }
    let mut gamma: f64 = 0.0;
    for p in &pairs {
        for q in &pairs {
            let mut overlap = 0.0;
            for z in 0..m {
                overlap += if p[z] < q[z] { p[z] } else { q[z] };
            }
            gamma = gamma.max(1.0 - overlap);
        }
    }
    gamma
}

/// Smallest `n >= 1` with `rate^(n-1) d <= (1 - alpha) eps / alpha`, by
/// repeated multiplication.
pub fn scan_bound(alpha: f64, epsilon: f64, rate: f64, d: f64) -> u64 {
    let threshold = (1.0 - alpha) * epsilon / alpha;
    let mut lhs = d;
    let mut n = 1;
    while lhs > threshold {
        lhs *= rate;
        n += 1;
    }
    n
}

pub fn span(u: &[f64]) -> f64 {
    let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}
