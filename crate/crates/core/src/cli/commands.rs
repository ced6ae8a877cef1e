use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{CommonArgs, Format, Metric, SpectrumArgs, StateArgs, SweepArgs, VerifyArgs};
use crate::actiondiff::{cauchy_hilbert_kernel, kernel_match};
use crate::eig::eigh_tridiagonal;
use crate::error::{Error, Result};
use crate::modal::{check_constant_last_row, PositionBasis};
use crate::operators::build_position;
use crate::report::export::{export_bundle, MatrixDoc};
use crate::report::tolerance::names;
use crate::report::{timed, CheckResult, Report, SweepRow};
use crate::spectra::{gap_statistics, hamiltonian_anomaly, resolvent_chain, GapStats};
use crate::states::{
    action_mean_sweep, coherent_tail_weight, number_state, truncated_coherent_state,
    uncertainty_check, StateVector, UncertaintyReport,
};
use crate::suite::{resolve_suite, run_suite, SuiteOptions};

pub(super) fn verify(args: &VerifyArgs) -> Result<Report> {
    let c = &args.common;
    let ns = c.orders()?;
    let reg = c.registry()?;
    let checks = resolve_suite(&args.suite)?;
    let opts = SuiteOptions {
        seed: c.seed,
        random_states: args.random_states,
        alpha: args.alpha,
        ..SuiteOptions::default()
    };
    let mut results = Vec::new();
    for &n in &ns {
        results.extend(run_suite(n, &checks, &reg, &opts)?);
    }
    let config = json!({
        "command": "verify",
        "n": ns,
        "suite": checks,
        "tol_overrides": c.tol_echo(),
        "seed": c.seed,
        "random_states": args.random_states,
        "alpha": [args.alpha.re, args.alpha.im],
    });
    Ok(Report::new(config, results))
}

/// Largest increase between neighbours; zero for a non-increasing sequence.
fn largest_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max)
}

/// `ln(v₀/v₁) / ln(n₁/n₀)` for consecutive rows.
fn attach_rates(rows: &mut [SweepRow]) {
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if prev.value > 0.0 && cur.value > 0.0 && cur.n > prev.n && prev.n > 0 {
            let rate = (prev.value / cur.value).ln() / (cur.n as f64 / prev.n as f64).ln();
            rows[i].rate = Some(rate);
        }
    }
}

fn row(n: usize, metric: Metric, value: f64, runtime_ms: f64) -> SweepRow {
    SweepRow {
        n,
        metric: metric.label().to_string(),
        value,
        runtime_ms,
        rate: None,
    }
}

fn trend_check(name: &str, rows: &[SweepRow], reg: &crate::report::ToleranceRegistry) -> Vec<CheckResult> {
    let Some(last) = rows.last() else {
        return Vec::new();
    };
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    vec![CheckResult::new(name, last.n, largest_increase(&values), reg.tol(name, last.n))]
}

pub(super) fn sweep(args: &SweepArgs) -> Result<Report> {
    let c = &args.common;
    let ns = c.orders()?;
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("--n-list must be strictly ascending".into()));
    }
    let reg = c.registry()?;
    let metric = args.metric;

    let (rows, checks) = match metric {
        Metric::LastRow => {
            let per_n: Vec<CheckResult> = ns
                .par_iter()
                .map(|&n| Ok(check_constant_last_row(&PositionBasis::new(n)?.modal, &reg)))
                .collect::<Result<_>>()?;
            let rows = per_n.iter().map(|c| row(c.n, metric, c.max_abs_err, c.runtime_ms)).collect();
            (rows, per_n)
        }
        Metric::Kernel => {
            let per_n: Vec<CheckResult> = ns.par_iter().map(|&n| kernel_match(n, &reg)).collect::<Result<_>>()?;
            let rows = per_n.iter().map(|c| row(c.n, metric, c.max_abs_err, c.runtime_ms)).collect();
            (rows, per_n)
        }
        Metric::MaxGap => {
            let mut rows: Vec<SweepRow> = ns
                .par_iter()
                .map(|&n| {
                    let (g, ms) = timed(|| -> Result<GapStats> {
                        gap_statistics(&eigh_tridiagonal(&build_position(n)?)?.spectrum, args.a)
                    });
                    Ok(row(n, metric, g?.max_gap, ms))
                })
                .collect::<Result<_>>()?;
            attach_rates(&mut rows);
            let checks = trend_check(names::GAP_MONOTONICITY, &rows, &reg);
            (rows, checks)
        }
        Metric::ActionMean => {
            let (table, ms) = timed(|| action_mean_sweep(args.alpha, &ns));
            let per_row = ms / ns.len() as f64;
            let rows: Vec<SweepRow> = table?.iter().map(|r| row(r.n, metric, r.deviation, per_row)).collect();
            let checks = trend_check(names::ACTION_MEAN_MONOTONICITY, &rows, &reg);
            (rows, checks)
        }
        Metric::Resolvent => {
            if ns.len() < 2 {
                return Err(Error::InvalidArgument("resolvent sweep needs at least two orders".into()));
            }
            let psi = number_state(0, ns[0])?;
            let (chain, ms) = timed(|| resolvent_chain(args.z, &psi, &ns));
            let per_row = ms / (ns.len() - 1) as f64;
            let mut rows: Vec<SweepRow> = chain?
                .iter()
                .map(|d| row(d.n_large, metric, d.diff_norm, per_row))
                .collect();
            attach_rates(&mut rows);
            let checks = trend_check(names::RESOLVENT_MONOTONICITY, &rows, &reg);
            (rows, checks)
        }
    };

    let config = json!({
        "command": "sweep",
        "metric": metric,
        "n": ns,
        "tol_overrides": c.tol_echo(),
        "alpha": [args.alpha.re, args.alpha.im],
        "z": [args.z.re, args.z.im],
        "a": args.a,
    });
    Ok(Report::new(config, checks).with_rows(rows))
}

fn render_doc(doc: &MatrixDoc, format: Format) -> Result<String> {
    match format {
        Format::Json => doc.to_json(),
        Format::Csv | Format::Text => doc.to_csv(),
    }
}

pub(super) fn export(c: &CommonArgs, stdout: &mut dyn Write) -> Result<()> {
    let ns = c.orders()?;
    let dir = c
        .out
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("export needs --out <directory>".into()))?;
    std::fs::create_dir_all(dir)?;
    let ext = match c.format {
        Format::Json => "json",
        Format::Csv | Format::Text => "csv",
    };
    for n in ns {
        for doc in export_bundle(n)? {
            let path = dir.join(format!("{}_n{}.{ext}", doc.kind, n));
            std::fs::write(&path, render_doc(&doc, c.format)?)?;
            writeln!(stdout, "{}", path.display())?;
        }
    }
    Ok(())
}

pub(super) fn kernel(c: &CommonArgs) -> Result<String> {
    let n = c.single_order()?;
    let basis = PositionBasis::new(n)?;
    let k = cauchy_hilbert_kernel(&basis.spectrum)?;
    let doc = MatrixDoc::from_dense("kernel", &k.entries).with_nodes(&k.nodes);
    match c.format {
        Format::Text => {
            let spacing = k.nodes.min_gap().map_or(f64::NAN, |(_, g)| g);
            Ok(format!(
                "kernel n={n} dim={} max|K|={:.6e} min spacing={spacing:.6e}\n",
                k.dim(),
                k.entries.max_abs()
            ))
        }
        f => render_doc(&doc, f),
    }
}

#[derive(Serialize)]
struct StateSummary {
    schema: &'static str,
    state: String,
    tail_weight: f64,
    finite_energy: bool,
    margin_ok: bool,
    #[serde(flatten)]
    uncertainty: UncertaintyReport,
}

pub(super) fn state(args: &StateArgs) -> Result<(String, bool)> {
    let c = &args.common;
    let n = c.single_order()?;
    let reg = c.registry()?;
    let (label, psi): (String, StateVector) = match args.alpha {
        Some(alpha) => (
            format!("coherent({}{:+}i)", alpha.re, alpha.im),
            truncated_coherent_state(alpha, n)?,
        ),
        None => (format!("number({})", args.k), number_state(args.k, n)?),
    };
    let tail = match args.alpha {
        Some(alpha) => coherent_tail_weight(alpha, n),
        None => psi.tail_weight(),
    };
    let u = uncertainty_check(&psi, n)?;
    let margin_ok = u.margin >= -reg.tol(names::UNCERTAINTY_MARGIN, n);
    let summary = StateSummary {
        schema: "mml-state/1",
        state: label,
        tail_weight: tail,
        finite_energy: tail <= reg.tol(names::TAIL_WEIGHT, n),
        margin_ok,
        uncertainty: u,
    };
    let body = match c.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&summary)?;
            s.push('\n');
            s
        }
        Format::Csv => format!(
            "state,n,dq,dp,bound,margin,mean_d,mean_h,tail_weight\n{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            summary.state, u.n, u.dq, u.dp, u.bound, u.margin, u.mean_d, u.mean_h, tail
        ),
        Format::Text => format!(
            "{} at N={}\n  ΔQ = {:.12}\n  ΔP = {:.12}\n  ΔQ·ΔP = {:.12}\n  ½|⟨D⟩| = {:.12}\n  margin = {:.3e}\n  ⟨D⟩ = {:.15}\n  ⟨H⟩ = {:.12}\n  tail weight = {:.3e}{}\n",
            summary.state,
            n,
            u.dq,
            u.dp,
            u.dq * u.dp,
            u.bound,
            u.margin,
            u.mean_d,
            u.mean_h,
            tail,
            if summary.finite_energy { "" } else { " (truncation too short)" }
        ),
    };
    Ok((body, margin_ok))
}

#[derive(Serialize)]
struct SpectrumSummary {
    schema: &'static str,
    n: usize,
    eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gaps: Option<GapStats>,
    hamiltonian_edge: f64,
    hamiltonian_edge_weight: f64,
}

pub(super) fn spectrum(args: &SpectrumArgs) -> Result<String> {
    let c = &args.common;
    let n = c.single_order()?;
    let spec = eigh_tridiagonal(&build_position(n)?)?.spectrum;
    let (edge, weight) = hamiltonian_anomaly(n)?;
    let summary = SpectrumSummary {
        schema: "mml-spectrum/1",
        n,
        gaps: gap_statistics(&spec, args.a).ok(),
        eigenvalues: spec.values().to_vec(),
        hamiltonian_edge: edge,
        hamiltonian_edge_weight: weight,
    };
    Ok(match c.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&summary)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("index,eigenvalue\n");
            for (i, v) in summary.eigenvalues.iter().enumerate() {
                s.push_str(&format!("{i},{v:.16e}\n"));
            }
            s
        }
        Format::Text => {
            let mut s = format!("Q_{n}: {} eigenvalues\n", summary.eigenvalues.len());
            for v in &summary.eigenvalues {
                s.push_str(&format!("  {v:+.15}\n"));
            }
            if let Some(g) = summary.gaps {
                s.push_str(&format!(
                    "gaps in [{}, {}]: max {:.6e}, mean {:.6e}, {} eigenvalues inside\n",
                    g.interval.0, g.interval.1, g.max_gap, g.mean_gap, g.count_inside
                ));
            }
            s.push_str(&format!("H_{n} edge level {edge} with weight {weight:.6e}\n"));
            s
        }
    })
}
