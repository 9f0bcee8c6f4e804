//! `atc`: solve, patch-test, verify and sweep from the command line.
//!
//! Exit status: 0 success, 1 invalid input, 2 failed verification,
//! 3 solver failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use atc_core::analysis::{convergence_sweep, patch_test, run_verification, SweepConfig, VerifyOptions};
use atc_core::config::{force_from_parts, ModelConfig, RawConfig, DEFAULT_K1, DEFAULT_K2, MODEL_KEYS};
use atc_core::coupling::solve_atc;
use atc_core::io::{solution_csv, sweep_csv, triplet_dump, write_atomic, write_json_atomic, SolveSummary};
use atc_core::operators::{assemble_atomistic, assemble_continuum, AtomisticBoundary, ContinuumBoundary};
use atc_core::AtcError;

const THREADS_ENV: &str = "ATC_THREADS";
const SWEEP_KEYS: [&str; 5] = ["Ns", "p", "gamma", "c", "scale_load"];

#[derive(Parser)]
#[command(name = "atc", version, about = "Optimization-based atomistic-to-continuum coupling for a 1D chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the coupled problem and write the solution and a summary.
    Solve(SolveArgs),
    /// Uniform strain under zero load must be reproduced exactly.
    PatchTest(PatchArgs),
    /// Run the invariant battery and write a scorecard.
    Verify(VerifyArgs),
    /// Error study over a list of chain sizes.
    Sweep(SweepArgs),
}

/// Model flags; each mirrors a config key and overrides the file value.
#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Config file, JSON or `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k2: Option<f64>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long = "force.kind")]
    force_kind: Option<String>,
    #[arg(long = "force.params", allow_hyphen_values = true)]
    force_params: Option<String>,
    /// Shorthand for both force keys: `zero`, `sine:M[:PHASE]`, `point:SITE:MAG`, `poly:C0,C1,...`, `table:PATH`.
    #[arg(long, conflicts_with_all = ["force_kind", "force_params"], allow_hyphen_values = true)]
    force: Option<String>,
    /// Directory for relative output paths.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "solution.csv")]
    solution: PathBuf,
    #[arg(long, default_value = "summary.json")]
    summary: PathBuf,
    /// Also write both subproblem matrices as `row col value` triplets into this directory.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

#[derive(Args)]
struct PatchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Uniform strain.
    #[arg(long = "F", default_value_t = 0.01, allow_hyphen_values = true)]
    strain: f64,
    /// Tolerance factor `t` in `max |u_i - iF| ≤ t (1 + N|F|)`.
    #[arg(long, default_value_t = atc_core::analysis::patch::PATCH_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value = "patch_report.json")]
    report: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "scorecard.json")]
    scorecard: PathBuf,
    /// Random controls drawn for the stability check.
    #[arg(long, default_value_t = VerifyOptions::default().stability_samples)]
    samples: usize,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated chain sizes.
    #[arg(long = "Ns")]
    ns: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Constant in `L = ⌈c N^(1/p)⌉`.
    #[arg(long)]
    c: Option<f64>,
    /// Keep the load unscaled instead of multiplying by `N⁻²`.
    #[arg(long)]
    no_scale_load: bool,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

/// Failures carry their exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<AtcError> for Failure {
    fn from(e: AtcError) -> Self {
        let code = match &e {
            e if e.is_validation() => 1,
            AtcError::Io(_) | AtcError::Json(_) | AtcError::Csv(_) => 1,
            AtcError::BoundViolated(_) => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn verification_failed(message: String) -> Failure {
    Failure { code: 2, message }
}

impl ModelArgs {
    /// File values overlaid with flag values.
    fn raw(&self, extra: &[(&str, Option<String>)]) -> Result<RawConfig, AtcError> {
        let file = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::new(),
        };
        let mut flags = RawConfig::new();
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                flags.set(key, &v);
            }
        };
        set("N", self.n.map(|v| v.to_string()));
        set("k1", self.k1.map(|v| v.to_string()));
        set("k2", self.k2.map(|v| v.to_string()));
        set("K", self.k.map(|v| v.to_string()));
        set("L", self.l.map(|v| v.to_string()));
        set("force.kind", self.force_kind.clone());
        set("force.params", self.force_params.clone());
        if let Some(spec) = &self.force {
            let (kind, params) = match spec.split_once(':') {
                Some((k, p)) => (k.to_string(), Some(p.to_string())),
                None => (spec.clone(), None),
            };
            set("force.kind", Some(kind));
            set("force.params", params);
        }
        for (key, value) in extra {
            set(key, value.clone());
        }
        let mut raw = file.overlay(&flags);
        if matches!(&self.force, Some(spec) if !spec.contains(':')) {
            // a bare `--force zero` must not inherit parameters from the file
            raw.remove("force.params");
        }
        let allowed: Vec<&str> = MODEL_KEYS.iter().chain(&SWEEP_KEYS).copied().collect();
        raw.reject_unknown(&allowed)?;
        Ok(raw)
    }

    fn model(&self) -> Result<ModelConfig, AtcError> {
        ModelConfig::from_raw(&self.raw(&[])?)
    }

    fn output(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        }
    }
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let model = args.model.model()?;
    let (chain, decomp) = model.build()?;
    let result = solve_atc(&chain, &decomp)?;
    let solution_path = args.model.output(&args.solution);
    let summary_path = args.model.output(&args.summary);
    write_atomic(&solution_path, solution_csv(&result)?.as_bytes())?;
    write_json_atomic(&summary_path, &SolveSummary::new(&chain, &model.force, &result))?;
    if let Some(dir) = &args.dump_matrices {
        let dir = args.model.output(dir);
        let c = result.controls;
        let bc = AtomisticBoundary { left: chain.boundary().left, right: c.theta_a() };
        let atomistic = assemble_atomistic(&chain, decomp.atomistic_interior(), &bc)?;
        let cbc = ContinuumBoundary { left: c.theta_c_k, right: chain.boundary().right[0] };
        let continuum = assemble_continuum(&chain, decomp.continuum_interior(), &cbc)?;
        write_atomic(&dir.join("atomistic_matrix.txt"), triplet_dump(&atomistic).as_bytes())?;
        write_atomic(&dir.join("continuum_matrix.txt"), triplet_dump(&continuum).as_bytes())?;
    }
    for w in result.diagnostics.iter().flat_map(|d| &d.warnings) {
        eprintln!("warning: {w}");
    }
    println!(
        "solved N = {}, K = {}, L = {}: controls ({:.6e}, {:.6e} | {:.6e}), mismatch {:.3e}",
        chain.n(),
        decomp.k(),
        decomp.l(),
        result.controls.theta_a_lm1,
        result.controls.theta_a_l,
        result.controls.theta_c_k,
        result.mismatch.total
    );
    println!("wrote {} and {}", solution_path.display(), summary_path.display());
    Ok(())
}

fn patch(args: &PatchArgs) -> Result<(), Failure> {
    let model = args.model.model()?;
    let (chain, decomp) = model.build()?;
    if args.tolerance.is_nan() || args.tolerance <= 0.0 {
        return Err(AtcError::Config(format!("tolerance must be positive, got {}", args.tolerance)).into());
    }
    let mut report = patch_test(&chain, &decomp, args.strain)?;
    report.tolerance = args.tolerance * (1.0 + chain.n() as f64 * args.strain.abs());
    report.passed = report.max_deviation <= report.tolerance && report.mismatch <= report.tolerance;
    let path = args.model.output(&args.report);
    write_json_atomic(&path, &report)?;
    let verdict = if report.passed { "pass" } else { "FAIL" };
    println!(
        "patch test {verdict}: max |u_i - iF| = {:.3e} (tolerance {:.3e}), mismatch {:.3e}",
        report.max_deviation, report.tolerance, report.mismatch
    );
    if report.passed {
        Ok(())
    } else {
        Err(verification_failed(format!("patch test failed; report in {}", path.display())))
    }
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let model = args.model.model()?;
    let (chain, decomp) = model.build()?;
    let opts = VerifyOptions { stability_samples: args.samples, seed: args.seed, ..VerifyOptions::default() };
    let card = run_verification(&chain, &decomp, &opts)?;
    let path = args.model.output(&args.scorecard);
    write_json_atomic(&path, &card)?;
    for c in &card.checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        println!("{tag} {:<24} {:>12.4e}  (tolerance {:.1e})  {}", c.name, c.measured, c.tolerance, c.detail);
    }
    if card.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = card.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(verification_failed(format!("failed checks: {}", failed.join(", "))))
    }
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let extra = [
        ("Ns", args.ns.clone()),
        ("p", args.p.map(|v| v.to_string())),
        ("gamma", args.gamma.map(|v| v.to_string())),
        ("c", args.c.map(|v| v.to_string())),
        ("scale_load", args.no_scale_load.then(|| "false".to_string())),
    ];
    let raw = args.model.raw(&extra)?;
    let defaults = SweepConfig::default();
    let ns = match raw.get_str("Ns") {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| AtcError::Config(format!("bad entry '{s}' in Ns"))))
            .collect::<Result<Vec<_>, _>>()?,
        None => defaults.ns.clone(),
    };
    let force = match raw.get_str("force.kind") {
        Some(kind) => force_from_parts(kind, raw.get_str("force.params"))?,
        None => defaults.force.clone(),
    };
    let config = SweepConfig {
        ns,
        p: raw.get("p")?.unwrap_or(defaults.p),
        gamma: raw.get("gamma")?.unwrap_or(defaults.gamma),
        c: raw.get("c")?.unwrap_or(defaults.c),
        force,
        k1: raw.get("k1")?.unwrap_or(DEFAULT_K1),
        k2: raw.get("k2")?.unwrap_or(DEFAULT_K2),
        scale_load: raw.get("scale_load")?.unwrap_or(defaults.scale_load),
    };
    let result = convergence_sweep(&config)?;
    for s in &result.skipped {
        eprintln!("skipped N = {}: {}", s.n, s.reason);
    }
    let path = args.model.output(&args.out);
    write_atomic(&path, sweep_csv(&result.rows)?.as_bytes())?;
    for r in &result.rows {
        println!(
            "N = {:>6}  K = {:>4}  L = {:>4}  err_atc = {:.4e}  err_model = {:.4e}  |Q| = {:.4}",
            r.n, r.k, r.l, r.err_atc, r.err_model, r.q_norm_est
        );
    }
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |s| format!("{s:.4}"));
    println!("eps-scaled error exponent {}, |Q| slope {}", fmt(result.eps_slope), fmt(result.q_slope));
    println!("wrote {}", path.display());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads = value.trim().parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(|| Failure {
        code: 1,
        message: format!("{THREADS_ENV} must be a positive integer, got '{value}'"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure { code: 3, message: e.to_string() })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Solve(a) => solve(a),
        Command::PatchTest(a) => patch(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
