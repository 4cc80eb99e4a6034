//! `mdpvi` command-line interface.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when `--certify` (or
//! `compare`) finds a policy that is not epsilon-optimal.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{
    compute_gamma, compute_gamma_prime, full_report, gamma_cost, resolve_gamma, GammaMode, DEFAULT_GAMMA_COST_CAP,
};
use crate::error::Error;
use crate::exact::policy_iterate;
use crate::mdp::{DeterministicPolicy, DiscountFactor, Mdp, ValueVector};
use crate::random::{random_mdp, RandomMdpConfig};
use crate::repro::{
    build_example, ex1_table, ex2_sweep, ex3_table, write_ex1_csv, write_ex3_csv, write_sweep_csv, ExampleId,
    ExampleSpec,
};
use crate::vi::{certify_epsilon_optimal, greedy_shortcut, stopping_threshold, value_iterate_with, ViOptions};

pub const THREADS_ENV: &str = "MDPVI_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mdpvi",
    version,
    about = "Span-stopped value iteration for finite discounted MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an epsilon-optimal policy by value iteration.
    Solve(SolveArgs),
    /// Report gamma, gamma' and every a-priori iteration bound as JSON.
    Bounds(BoundsArgs),
    /// Report the ergodicity coefficients gamma and gamma'.
    Gamma(GammaArgs),
    /// Run value iteration and policy iteration side by side.
    Compare(CompareArgs),
    /// Regenerate the tables for one of the built-in examples (CSV).
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// MDP JSON document.
    #[arg(long)]
    pub mdp: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, visible_alias = "eps")]
    pub epsilon: f64,
    /// Initial vector as a JSON array (default: zero vector).
    #[arg(long)]
    pub v0: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct GammaFlags {
    /// Always compute gamma exactly, ignoring the cost cap.
    #[arg(long, conflicts_with = "gamma_prime")]
    pub exact_gamma: bool,
    /// Use the O(mk) upper bound gamma' instead of gamma.
    #[arg(long)]
    pub gamma_prime: bool,
    /// Largest m*k^2 for which gamma is computed exactly.
    #[arg(long, default_value_t = DEFAULT_GAMMA_COST_CAP)]
    pub cap: u64,
}

impl GammaFlags {
    fn mode(self) -> GammaMode {
        if self.exact_gamma {
            GammaMode::Exact
        } else if self.gamma_prime {
            GammaMode::Prime
        } else {
            GammaMode::Auto { cap: self.cap }
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Check the policy against policy iteration.
    #[arg(long)]
    pub certify: bool,
    /// Use relative value iteration (same iteration count).
    #[arg(long)]
    pub relative: bool,
    #[arg(long, default_value_t = crate::vi::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: u64,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub gamma: GammaFlags,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[arg(long)]
    pub mdp: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gamma: GammaFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// MDP JSON document; a random instance is generated when omitted.
    #[arg(long)]
    pub mdp: Option<PathBuf>,
    /// Seed for the random instance.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, visible_alias = "eps")]
    pub epsilon: f64,
    #[arg(long)]
    pub v0: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gamma: GammaFlags,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// ex1, ex2 or ex3.
    pub example: String,
    /// Discount factor (ex1: a single alpha instead of the default list).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, visible_alias = "eps")]
    pub epsilon: Option<f64>,
    /// Comma-separated values of M for ex2.
    #[arg(long = "M", value_delimiter = ',')]
    pub m_values: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the example MDP as JSON (ex2 uses the first M).
    #[arg(long)]
    pub emit_mdp: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Uncertified,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    configure_threads();

    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args, stdout),
        Command::Bounds(args) => cmd_bounds(args, stdout),
        Command::Gamma(args) => cmd_gamma(args, stdout),
        Command::Compare(args) => cmd_compare(args, stdout),
        Command::Reproduce(args) => cmd_reproduce(args, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Uncertified) => {
            let _ = writeln!(stderr, "error: policy is not epsilon-optimal");
            2
        }
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return;
    };
    if let Ok(n) = raw.trim().parse::<usize>() {
        if n > 0 {
            // Fails only if the pool was already set up; keep the first one.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn read_file(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("reading {}: {e}", path.display())))
}

fn load_mdp(path: &Path) -> std::result::Result<Mdp, Failure> {
    let text = read_file(path)?;
    Mdp::from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_v0(path: Option<&Path>, m: usize) -> std::result::Result<ValueVector, Failure> {
    let Some(path) = path else {
        return Ok(ValueVector::zeros(m));
    };
    let text = read_file(path)?;
    let values: Vec<f64> =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let v0 = ValueVector::new(values)?;
    v0.check_len(m)?;
    Ok(v0)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::Input(format!("writing {}: {e}", path.display()))),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Failure::Input(format!("writing output: {e}"))),
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, stdout: &mut dyn Write, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    emit(out, stdout, text.as_bytes())
}

#[derive(Serialize)]
struct PolicyEntry<'a> {
    state: usize,
    action: &'a str,
    index: usize,
}

fn policy_entries<'a>(mdp: &'a Mdp, policy: &DeterministicPolicy) -> Vec<PolicyEntry<'a>> {
    policy
        .choices()
        .iter()
        .enumerate()
        .map(|(x, &a)| PolicyEntry {
            state: x + 1,
            action: mdp.action_label(x, a),
            index: a + 1,
        })
        .collect()
}

fn cmd_solve(args: &SolveArgs, stdout: &mut dyn Write) -> Outcome {
    let c = &args.common;
    let mdp = load_mdp(&c.mdp)?;
    let v0 = load_v0(c.v0.as_deref(), mdp.num_states())?;

    if c.alpha == 0.0 {
        let policy = greedy_shortcut(&mdp);
        let report = json!({
            "method": "greedy_shortcut",
            "alpha": 0.0,
            "iterations": 1,
            "policy": policy_entries(&mdp, &policy),
        });
        return emit_json(c.out.as_deref(), stdout, &report);
    }

    let options = ViOptions {
        max_iterations: args.max_iterations,
        relative: args.relative,
    };
    let run = value_iterate_with(&mdp, c.alpha, c.epsilon, &v0, &options)?;

    let certification = if args.certify {
        let pi = policy_iterate(&mdp, DiscountFactor::new(c.alpha)?)?;
        Some(certify_epsilon_optimal(
            &mdp,
            c.alpha,
            c.epsilon,
            &run.policy,
            &pi.optimal_value,
        )?)
    } else {
        None
    };

    let report = json!({
        "method": if args.relative { "relative_value_iteration" } else { "value_iteration" },
        "alpha": c.alpha,
        "epsilon": c.epsilon,
        "threshold": stopping_threshold(c.alpha, c.epsilon),
        "iterations": run.iterations,
        "final_span": run.span_trace.last(),
        "span_trace": run.span_trace,
        "policy": policy_entries(&mdp, &run.policy),
        "final_value": run.final_value,
        "certification": certification,
    });
    emit_json(c.out.as_deref(), stdout, &report)?;

    match certification {
        Some(cert) if !cert.certified => Err(Failure::Uncertified),
        _ => Ok(()),
    }
}

fn cmd_bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Outcome {
    let c = &args.common;
    let mdp = load_mdp(&c.mdp)?;
    let v0 = load_v0(c.v0.as_deref(), mdp.num_states())?;
    let report = full_report(&mdp, c.alpha, c.epsilon, &v0, args.gamma.mode())?;
    emit_json(c.out.as_deref(), stdout, &report)
}

fn cmd_gamma(args: &GammaArgs, stdout: &mut dyn Write) -> Outcome {
    let mdp = load_mdp(&args.mdp)?;
    let (gamma, gamma_prime, source) = resolve_gamma(&mdp, args.gamma.mode());
    let k = mdp.num_pairs() as u64;
    let report = json!({
        "gamma": gamma,
        "gamma_prime": gamma_prime,
        "gamma_source": source,
        "num_states": mdp.num_states(),
        "num_pairs": k,
        "couples": k * k.saturating_sub(1) / 2,
        "cost": gamma_cost(&mdp),
    });
    emit_json(args.out.as_deref(), stdout, &report)
}

fn cmd_compare(args: &CompareArgs, stdout: &mut dyn Write) -> Outcome {
    let (mdp, source) = match &args.mdp {
        Some(path) => (load_mdp(path)?, json!({ "file": path.display().to_string() })),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (
                random_mdp(&mut rng, &RandomMdpConfig::default()),
                json!({ "seed": args.seed }),
            )
        }
    };
    let v0 = load_v0(args.v0.as_deref(), mdp.num_states())?;
    let discount = DiscountFactor::new(args.alpha)?;

    let run = value_iterate_with(&mdp, args.alpha, args.epsilon, &v0, &ViOptions::default())?;
    let pi = policy_iterate(&mdp, discount)?;
    let cert = certify_epsilon_optimal(&mdp, args.alpha, args.epsilon, &run.policy, &pi.optimal_value)?;
    let bounds = full_report(&mdp, args.alpha, args.epsilon, &v0, args.gamma.mode())?;

    let report = json!({
        "instance": source,
        "num_states": mdp.num_states(),
        "num_pairs": mdp.num_pairs(),
        "value_iteration": {
            "iterations": run.iterations,
            "final_span": run.span_trace.last(),
            "policy": policy_entries(&mdp, &run.policy),
        },
        "policy_iteration": {
            "iterations": pi.iterations,
            "policy": policy_entries(&mdp, &pi.optimal_policy),
            "optimal_value": pi.optimal_value,
        },
        "policies_agree": run.policy == pi.optimal_policy,
        "certification": cert,
        "bounds": bounds,
        "gamma_exact": compute_gamma(&mdp),
        "gamma_prime": compute_gamma_prime(&mdp),
    });
    emit_json(args.out.as_deref(), stdout, &report)?;
    if cert.certified {
        Ok(())
    } else {
        Err(Failure::Uncertified)
    }
}

const EX1_ALPHAS: [f64; 4] = [0.24, 0.47, 0.48, 0.5];
const EX2_M_VALUES: [f64; 5] = [1.0, 5.0, 10.0, 20.0, 40.0];

fn cmd_reproduce(args: &ReproduceArgs, stdout: &mut dyn Write) -> Outcome {
    let id: ExampleId = args.example.parse()?;
    let mut csv = Vec::new();
    let io_err = |e: std::io::Error| Failure::Input(e.to_string());

    let spec = match id {
        ExampleId::Ex1 => {
            let alphas = args.alpha.map_or_else(|| EX1_ALPHAS.to_vec(), |a| vec![a]);
            let rows = ex1_table(&alphas, args.epsilon.unwrap_or(0.02))?;
            write_ex1_csv(&rows, &mut csv).map_err(io_err)?;
            ExampleSpec::ex1()
        }
        ExampleId::Ex2 => {
            let m_values = args.m_values.clone().unwrap_or_else(|| EX2_M_VALUES.to_vec());
            if m_values.is_empty() {
                return Err(Failure::Input("--M needs at least one value".into()));
            }
            let rows = ex2_sweep(&m_values, args.alpha.unwrap_or(0.5), args.epsilon.unwrap_or(1e-5))?;
            write_sweep_csv(&rows, &mut csv).map_err(io_err)?;
            ExampleSpec::ex2(m_values[0])
        }
        ExampleId::Ex3 => {
            let rows = ex3_table(3..=12)?;
            write_ex3_csv(&rows, &mut csv).map_err(io_err)?;
            ExampleSpec::ex3()
        }
    };

    if let Some(path) = &args.emit_mdp {
        let (mdp, _) = build_example(&spec)?;
        fs::write(path, mdp.to_json_string() + "\n")
            .map_err(|e| Failure::Input(format!("writing {}: {e}", path.display())))?;
    }
    emit(args.out.as_deref(), stdout, &csv)
}
