//! Batch command line front end.
//!
//! Exit status: 0 on success, 2 on a domain error (an error JSON is written
//! to stdout), 1 on I/O, parse or configuration failures.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fullloop::{build_full, det_product_formula, recover_full, FullLoopParams};
use crate::laurent::MatrixLoop;
use crate::rootsubgroup::{build_g1, build_g2, recover_zeta, zeta_series, ParamSeq, SeqKind};
use crate::sample::DEFAULT_SEED;
use crate::suites::{run_suite, Suite};
use crate::tol::{Tolerances, OVERRIDE_RANGE};
use crate::toeplitz::{toeplitz_det_pair, triangular_factor, DetMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Loop from an η sequence.
    BuildG1,
    /// Loop from a ζ sequence.
    BuildG2,
    /// Composite loop from η, χ and ζ.
    BuildFull,
    /// ζ coordinates of a loop, by ratio series recovery.
    RecoverZeta,
    /// η, χ and ζ of a composite loop.
    RecoverFull,
    /// Triangular factorization of a loop.
    Factor,
    /// CSV of finite-section determinants against the closed form.
    DetTable,
    /// Run a seeded verification suite.
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "loopfactor", version, about = "Root subgroup coordinates and Toeplitz determinants for SL(2,C) loops")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Input JSON file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Section order.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,

    /// Override of the exceptional-set threshold.
    #[arg(long, global = true)]
    pub tol_exceptional: Option<f64>,

    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Suite for `verify`.
    #[arg(long, global = true, value_enum)]
    pub suite: Option<Suite>,

    /// Determinant mode for `det-table`: section, section-pair or operator.
    #[arg(long, global = true, default_value = "operator")]
    pub mode: String,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub n: Option<usize>,
    pub tol: Tolerances,
    pub seed: u64,
    pub suite: Option<Suite>,
    pub mode: DetMode,
}

/// Failure of a run, split by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2.
    Domain(Error),
    /// Exit 1.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Domain(_) => 2,
            Failure::Usage(_) => 1,
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorReport {
    error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
    detail: String,
}

/// Machine-readable error JSON for a domain error.
pub fn error_json(e: &Error) -> String {
    serde_json::to_string(&ErrorReport {
        error: e.name(),
        step: e.step(),
        detail: e.to_string(),
    })
    .expect("error report serializes")
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, Failure> {
        let mut tol = Tolerances::DEFAULT;
        if let Some(t) = cli.tol_exceptional {
            let (lo, hi) = OVERRIDE_RANGE;
            if !(lo..=hi).contains(&t) {
                return Err(Failure::Usage(format!(
                    "--tol-exceptional {t:e} outside [{lo:e}, {hi:e}]"
                )));
            }
            tol.exceptional = t;
        }
        if cli.n == Some(0) {
            return Err(Failure::Usage("--N must be at least 1".into()));
        }
        let mode = cli
            .mode
            .parse()
            .map_err(|e: Error| Failure::Usage(e.to_string()))?;
        Ok(RunConfig {
            command: cli.command,
            input: cli.input,
            output: cli.output,
            n: cli.n,
            tol,
            seed: cli.seed,
            suite: cli.suite,
            mode,
        })
    }
}

fn read_input<T: for<'de> Deserialize<'de>>(cfg: &RunConfig) -> Result<T, Failure> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{} does not match the schema: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

fn expect_kind(seq: &ParamSeq, kind: SeqKind) -> Result<(), Failure> {
    if seq.kind != kind {
        return Err(Failure::Usage(format!("expected kind {kind:?}, got {:?}", seq.kind)));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DetInput {
    Full(FullLoopParams),
    Seq(ParamSeq),
}

impl DetInput {
    fn into_params(self) -> FullLoopParams {
        match self {
            DetInput::Full(p) => p,
            DetInput::Seq(s) => {
                let mut p = FullLoopParams::empty();
                match s.kind {
                    SeqKind::Eta => p.etas = s,
                    SeqKind::Zeta => p.zetas = s,
                }
                p
            }
        }
    }
}

/// Section orders `4, 8, ..` up to and including `max`.
pub fn doubling_orders(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 4;
    while n < max {
        out.push(n);
        n *= 2;
    }
    out.push(max);
    out
}

/// CSV with columns `N, re, im, abs_err`. Rows are computed in parallel and
/// emitted in ascending `N`.
pub fn det_table_csv(params: &FullLoopParams, max_n: usize, mode: DetMode, tol: &Tolerances) -> Result<String, Error> {
    let g = build_full(params, tol)?;
    let closed = det_product_formula(params, tol)?;
    let rows: Vec<(usize, _)> = doubling_orders(max_n)
        .into_par_iter()
        .map(|n| (n, toeplitz_det_pair(&g, n, mode)))
        .collect();
    let mut out = String::from("N,re,im,abs_err\n");
    for (n, v) in rows {
        writeln!(out, "{n},{:.16e},{:.16e},{:.16e}", v.re, v.im, (v - closed).norm()).unwrap();
    }
    Ok(out)
}

/// Executes a command and returns its output text.
pub fn execute(cfg: &RunConfig) -> Result<String, Failure> {
    let tol = &cfg.tol;
    match cfg.command {
        Command::BuildG1 => {
            let s: ParamSeq = read_input(cfg)?;
            expect_kind(&s, SeqKind::Eta)?;
            Ok(to_json(&build_g1(&s, tol)?))
        }
        Command::BuildG2 => {
            let s: ParamSeq = read_input(cfg)?;
            expect_kind(&s, SeqKind::Zeta)?;
            Ok(to_json(&build_g2(&s, tol)?))
        }
        Command::BuildFull => {
            let p: FullLoopParams = read_input(cfg)?;
            Ok(to_json(&build_full(&p, tol)?))
        }
        Command::RecoverZeta => {
            let g: MatrixLoop = read_input(cfg)?;
            let n = g.support().map_or(0, |(lo, hi)| hi.max(-lo).max(0) as usize);
            let (xi, xi_star) = zeta_series(&g, n)?;
            Ok(to_json(&recover_zeta(&xi, &xi_star, n, tol)?))
        }
        Command::RecoverFull => {
            let g: MatrixLoop = read_input(cfg)?;
            Ok(to_json(&recover_full(&g, cfg.n.unwrap_or(64), tol)?))
        }
        Command::Factor => {
            let g: MatrixLoop = read_input(cfg)?;
            Ok(to_json(&triangular_factor(&g, cfg.n.unwrap_or(64), tol)?))
        }
        Command::DetTable => {
            let input: DetInput = read_input(cfg)?;
            Ok(det_table_csv(&input.into_params(), cfg.n.unwrap_or(32), cfg.mode, tol)?)
        }
        Command::Verify => {
            let suite = cfg
                .suite
                .ok_or_else(|| Failure::Usage("--suite is required for verify".into()))?;
            Ok(to_json(&run_suite(suite, cfg.seed, tol)))
        }
    }
}

/// Runs a command, writes its output and returns the exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(text) => match &cfg.output {
            Some(path) => match std::fs::write(path, text) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("cannot write {}: {e}", path.display());
                    1
                }
            },
            None => {
                print!("{text}");
                0
            }
        },
        Err(Failure::Domain(e)) => {
            println!("{}", error_json(&e));
            2
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(f) => {
            if let Failure::Usage(msg) = &f {
                eprintln!("error: {msg}");
            }
            f.exit_code()
        }
    }
}
