//! The `mml` command line: argument types, dispatch and output.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails or a
//! numerical routine gives up, 2 for usage and configuration errors.

mod commands;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::operators::check_order;
use crate::report::{Report, ToleranceRegistry};
use crate::states::DEFAULT_SEED;
use crate::suite::resolve_suite;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mml",
    version,
    about = "Finite-dimensional matrix mechanics: build Q_N, P_N, D_N and verify their structure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification checks at one or more orders and write a report.
    Verify(VerifyArgs),
    /// Tabulate one metric over a list of orders.
    Sweep(SweepArgs),
    /// Write Q, P, H, D, D^(q), P^(q), the kernel and the spectrum as files.
    #[command(alias = "build")]
    Export(CommonArgs),
    /// Write the discrete Cauchy–Hilbert kernel on the zeros of H_{N+1}.
    Kernel(CommonArgs),
    /// Uncertainty diagnostics for a number or coherent state.
    State(StateArgs),
    /// Eigenvalues of Q_N, their spacing, and the Hamiltonian edge level.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `max_l |U[N,l] − 1/sqrt(N+1)|`
    LastRow,
    /// `max |U†P_N U − K(x)|`
    Kernel,
    /// Largest spacing of the eigenvalues of Q_N inside `[−a, a]`
    MaxGap,
    /// `1 − ⟨D_N⟩` for the coherent state `α`
    ActionMean,
    /// `‖(Q_N − z)⁻¹ψ − (Q_M − z)⁻¹ψ‖` between consecutive orders
    Resolvent,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::LastRow => "last-row",
            Metric::Kernel => "kernel",
            Metric::MaxGap => "max-gap",
            Metric::ActionMean => "action-mean",
            Metric::Resolvent => "resolvent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Truncation order N; matrices have dimension N+1.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated orders; `a..b` and `a..=b` ranges are expanded.
    #[arg(long = "n-list", value_parser = parse_n_list)]
    pub n_list: Option<NList>,
    /// Override a tolerance, e.g. `--tol kernel_match=1e-7`. Repeatable.
    #[arg(long = "tol", value_name = "NAME=VAL", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (or directory for `export`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Omit the timestamp and zero all timings, for byte-stable output.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated groups or check names.
    #[arg(long, value_delimiter = ',', default_value = "all", value_parser = parse_suite_item)]
    pub suite: Vec<String>,
    /// Coherent amplitude for the `coherent` group.
    #[arg(long, default_value = "1", value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha: C64,
    /// Random states drawn per order by `uncertainty_margin`.
    #[arg(long, default_value_t = 1000)]
    pub random_states: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Coherent amplitude for `action-mean`.
    #[arg(long, default_value = "1", value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha: C64,
    /// Non-real shift for `resolvent`.
    #[arg(long, default_value = "i", value_parser = parse_complex, allow_hyphen_values = true)]
    pub z: C64,
    /// Half-width of the interval for `max-gap`.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Coherent amplitude; a number state is used when absent.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha: Option<C64>,
    /// Occupation of the number state.
    #[arg(long, default_value_t = 0, conflicts_with = "alpha")]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Half-width of the interval for spacing statistics.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

fn parse_n_list(s: &str) -> std::result::Result<NList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
        if let Some((a, b)) = part.split_once("..=") {
            out.extend(num(a)?..=num(b)?);
        } else if let Some((a, b)) = part.split_once("..") {
            out.extend(num(a)?..num(b)?);
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err("empty order list".into());
    }
    Ok(NList(out))
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, val) = s.split_once('=').ok_or("expected NAME=VAL")?;
    let val: f64 = val.trim().parse().map_err(|e| format!("`{val}`: {e}"))?;
    let name = name.trim().to_string();
    ToleranceRegistry::standard()
        .clone()
        .with_override(&name, val)
        .map_err(|e| e.to_string())?;
    Ok((name, val))
}

fn parse_suite_item(s: &str) -> std::result::Result<String, String> {
    resolve_suite(&[s]).map_err(|e| e.to_string())?;
    Ok(s.trim().to_string())
}

/// `1`, `-0.5`, `2i`, `1+2i`, `0.3-1e-2i`.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z: C64 = t.parse().map_err(|_| format!("`{s}` is not a complex number"))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

impl CommonArgs {
    /// The requested orders, each checked against the dimension cap.
    pub fn orders(&self) -> Result<Vec<usize>> {
        let ns = match (&self.n, &self.n_list) {
            (Some(n), None) => vec![*n],
            (None, Some(list)) => list.0.clone(),
            _ => return Err(Error::InvalidArgument("one of --n or --n-list is required".into())),
        };
        for &n in &ns {
            check_order(n)?;
        }
        Ok(ns)
    }

    pub fn single_order(&self) -> Result<usize> {
        match self.orders()?.as_slice() {
            [n] => Ok(*n),
            _ => Err(Error::InvalidArgument("this command takes a single --n".into())),
        }
    }

    pub fn registry(&self) -> Result<ToleranceRegistry> {
        self.tol
            .iter()
            .try_fold(ToleranceRegistry::standard().clone(), |reg, (name, val)| {
                reg.with_override(name, *val)
            })
    }

    fn tol_echo(&self) -> BTreeMap<&str, f64> {
        self.tol.iter().map(|(k, v)| (k.as_str(), *v)).collect()
    }

    /// Stamps or strips timing, then renders in the chosen format.
    fn render_report(&self, mut report: Report) -> Result<String> {
        if self.no_timestamp {
            report.strip_timing();
        } else {
            let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
            report.timestamp = Some(format!("{}.{:03}", now.as_secs(), now.subsec_millis()));
        }
        Ok(match self.format {
            Format::Json => report.to_json()?,
            Format::Csv if !report.rows.is_empty() => report.rows_to_csv(),
            Format::Csv => report.to_csv(),
            Format::Text => report.to_text(),
        })
    }

    fn emit(&self, body: &str, stdout: &mut dyn Write) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, body)?,
            None => stdout.write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

/// Whether an error reflects the invocation rather than the computation.
pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::SizeExceeded { .. }
            | Error::InvalidArgument(_)
            | Error::UnknownCheck(_)
            | Error::UnknownFixture(_)
            | Error::RealShift { .. }
            | Error::OutOfRange { .. }
            | Error::Io(_)
    )
}

/// Parses `args` (including the program name), runs the command, and returns
/// the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if is_usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    }
}

/// Runs a parsed command; `Ok(false)` means it completed with failures.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Verify(args) => {
            let report = commands::verify(args)?;
            let pass = report.all_passed();
            args.common.emit(&args.common.render_report(report)?, stdout)?;
            Ok(pass)
        }
        Command::Sweep(args) => {
            let report = commands::sweep(args)?;
            let pass = report.all_passed();
            args.common.emit(&args.common.render_report(report)?, stdout)?;
            Ok(pass)
        }
        Command::Export(args) => commands::export(args, stdout).map(|()| true),
        Command::Kernel(args) => {
            let body = commands::kernel(args)?;
            args.emit(&body, stdout).map(|()| true)
        }
        Command::State(args) => {
            let (body, pass) = commands::state(args)?;
            args.common.emit(&body, stdout)?;
            Ok(pass)
        }
        Command::Spectrum(args) => {
            let body = commands::spectrum(args)?;
            args.common.emit(&body, stdout).map(|()| true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_list_ranges() {
        assert_eq!(parse_n_list("1..4,10").unwrap().0, vec![1, 2, 3, 10]);
        assert_eq!(parse_n_list("1..=3, 200").unwrap().0, vec![1, 2, 3, 200]);
        assert!(parse_n_list("").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("1 - 2i").unwrap(), C64::new(1.0, -2.0));
        assert_eq!(parse_complex("3").unwrap(), C64::new(3.0, 0.0));
        assert!(parse_complex("inf").is_err());
        assert!(parse_complex("one").is_err());
    }

    #[test]
    fn tol_parse_rejects_unknown() {
        assert_eq!(parse_tol("kernel_match=1e-7").unwrap(), ("kernel_match".into(), 1e-7));
        assert!(parse_tol("bogus=1").is_err());
        assert!(parse_tol("kernel_match").is_err());
        assert!(parse_tol("kernel_match=-1").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        for args in [
            vec!["mml", "verify", "--n", "3", "--suite", "nope"],
            vec!["mml", "verify"],
            vec!["mml", "sweep", "--n-list", "1,2"],
            vec!["mml", "verify", "--n", "3", "--n-list", "4"],
            vec!["mml", "frobnicate"],
        ] {
            assert_eq!(main_with(args.clone(), &mut out, &mut err), EXIT_USAGE, "{args:?}");
        }
    }
}
