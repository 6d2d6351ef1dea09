//! Command-line front end: `check-master`, `verify-all` and `compute`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebra::json::to_json;
use crate::algebra::SuperSeries;
use crate::error::{Error, Result};
use crate::microformal::KoszulSchoutenMap;
use crate::scenario::{Scenario, SeriesInput};
use crate::verify::{verify, Check, VerificationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub const THREADS_VAR: &str = "SUPERKOSZUL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "superkoszul", version, about = "Exact higher Koszul bracket and thick morphism verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute [P,P] and report whether it vanishes.
    CheckMaster(Common),
    /// Run the verification battery.
    VerifyAll {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        /// Comma-separated check names; defaults to the standard battery.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Evaluate one operation and print the resulting series.
    Compute {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        what: Operation,
        /// Inputs as infix text or canonical JSON terms; repeat for several.
        #[arg(long = "arg")]
        args: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override a truncation cap, e.g. `antimomentum=4`; repeatable.
    #[arg(long = "truncate", value_parser = parse_cap)]
    pub truncate: Vec<(String, u32)>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operation {
    /// Higher Koszul bracket of the given forms.
    KoszulBracket,
    /// d_P of one multivector.
    Lichnerowicz,
    /// Thick pullback of an even form by the adjoint anchor.
    Pullback,
    /// Direct forms-to-multivectors map of an even form.
    MorphismImage,
}

fn parse_cap(s: &str) -> std::result::Result<(String, u32), String> {
    let (g, c) = s
        .split_once('=')
        .ok_or_else(|| format!("expected GRADING=CAP, got `{s}`"))?;
    let cap = c.trim().parse().map_err(|_| format!("bad cap `{c}`"))?;
    Ok((g.trim().to_string(), cap))
}

impl Common {
    fn load(&self) -> Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        for (g, c) in &self.truncate {
            s = s.with_cap(g, *c)?;
        }
        if let Some(seed) = self.seed {
            s = s.with_seed(seed);
        }
        Ok(s)
    }
}

/// Applies `SUPERKOSZUL_THREADS` to the global rayon pool.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(Error::Parse(format!("{THREADS_VAR} must be positive")));
    }
    // a second configuration attempt in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn emit(report: &VerificationReport, format: Format, out: &mut dyn Write) -> i32 {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    let _ = out.write_all(text.as_bytes());
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn check_master(s: &Scenario) -> Result<VerificationReport> {
    verify(s, &[Check::MasterEquation], 0)
}

pub fn verify_all(s: &Scenario, max_arity: usize, checks: &[String]) -> Result<VerificationReport> {
    let checks: Vec<Check> = if checks.is_empty() {
        Check::defaults(s)
    } else {
        checks.iter().map(|c| Check::parse(c.trim())).collect::<Result<_>>()?
    };
    verify(s, &checks, max_arity)
}

fn parse_input(s: &Scenario, text: &str) -> Result<SuperSeries> {
    let t = text.trim();
    if t.starts_with('[') {
        let terms: SeriesInput =
            serde_json::from_str(t).map_err(|e| Error::Parse(format!("series JSON: {e}")))?;
        terms.resolve(&s.chart)
    } else {
        s.chart.parse(t)
    }
}

pub fn compute(s: &Scenario, what: Operation, args: &[String]) -> Result<SuperSeries> {
    let inputs: Vec<SuperSeries> = args.iter().map(|a| parse_input(s, a)).collect::<Result<_>>()?;
    let hp = s.structure()?;
    let one = || -> Result<&SuperSeries> {
        match inputs.as_slice() {
            [x] => Ok(x),
            _ => Err(Error::Argument(format!("expected exactly one --arg, got {}", inputs.len()))),
        }
    };
    match what {
        Operation::KoszulBracket => hp.higher_koszul_bracket(&inputs),
        Operation::Lichnerowicz => hp.lichnerowicz(one()?),
        Operation::Pullback => {
            KoszulSchoutenMap::new(hp, s.policy.clone())?.via_pullback(one()?)
        }
        Operation::MorphismImage => KoszulSchoutenMap::new(hp, s.policy.clone())?
            .with_signs(s.signs)
            .direct(one()?),
    }
}

/// Input errors map to exit code 2 except for a failed master equation,
/// which is a verification failure.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::State(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::CheckMaster(c) => c
            .load()
            .and_then(|s| check_master(&s))
            .map(|r| emit(&r, c.format, out)),
        Command::VerifyAll {
            common,
            max_arity,
            checks,
        } => common
            .load()
            .and_then(|s| verify_all(&s, *max_arity, checks))
            .map(|r| emit(&r, common.format, out)),
        Command::Compute { common, what, args } => common.load().and_then(|s| {
            let v = compute(&s, *what, args)?;
            let text = match common.format {
                Format::Json => to_json(&v),
                Format::Text => v.to_string(),
            };
            let _ = writeln!(out, "{text}");
            Ok(EXIT_PASS)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
