use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use flatconv_core::concentration::{deviation_tail_experiment, TailConfig};
use flatconv_core::construct::run_trial;
use flatconv_core::rational::{self, Rational};
use flatconv_core::{
    autoconvolve, autoconvolve_density, autoconvolve_fast, build_step_density, check_trial,
    construct, covering_check, density_distance, max_flatness_deviation, sup_deviation_from_one,
    ConstructionParams, Error, FiniteSymmetricSet, IntervalCover, SymmetricCounts, TrialReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{ConstructArgs, Format, MetricsArgs, SweepArgs, TailsArgs, TrialArgs, VerifyArgs};

/// Seventeen significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_q(q: &Rational) -> String {
    fmt_f64(rational::to_f64(q))
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, contents).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn params(t: &TrialArgs, max_attempts: u32) -> Result<ConstructionParams> {
    Ok(ConstructionParams::new(t.gamma, t.epsilon, t.phi.into(), t.seed, max_attempts)?)
}

fn read_measure(path: &Path) -> Result<SymmetricCounts> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing measure {}", path.display()))
}

fn density_csv(m: &SymmetricCounts) -> String {
    let f = autoconvolve_density(&build_step_density(m));
    let grid = f.grid();
    let mut out = String::from("position,value\n");
    for (k, u) in f.node_values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_q(&grid.position(k as u64)), fmt_q(u)));
    }
    out
}

/// Exit status 0 on acceptance, 1 when every attempt failed.
pub fn run_construct(args: &ConstructArgs) -> Result<u8> {
    let p = params(&args.trial, args.max_attempts)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let report_path = args.out.join("report.json");
    match construct(&p, args.n) {
        Ok((m, report)) => {
            emit(Some(&report_path), &to_json(&report)?)?;
            emit(Some(&args.out.join("measure.json")), &to_json(&m)?)?;
            emit(Some(&args.out.join("density.csv")), &density_csv(&m))?;
            eprintln!(
                "accepted n={} N={} after {} attempt(s); max deviation {}",
                report.n,
                report.points,
                report.attempts_used,
                rational::format(&report.max_deviation)
            );
            Ok(0)
        }
        Err(Error::ExhaustedAttempts(best)) => {
            emit(Some(&report_path), &to_json(&*best)?)?;
            eprintln!("no trial accepted in {} attempts; best report written", best.attempts_used);
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub n: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub median_deviation: f64,
}

#[derive(Debug, Serialize)]
struct SweepOutput<'a> {
    trials: &'a [TrialReport],
    summary: &'a [SweepSummary],
    n0_estimate: Option<u64>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Runs attempt 0 of `construct` for every (n, seed); rows ordered by n then seed.
pub fn sweep_reports(ns: &[u64], base: &ConstructionParams, seeds: u64) -> Result<Vec<TrialReport>> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for &n in &ns {
        let batch: Result<Vec<TrialReport>, Error> = (base.seed..base.seed + seeds)
            .into_par_iter()
            .map(|seed| {
                let p = ConstructionParams { seed, ..*base };
                run_trial(&p, n, 0).map(|(_, r)| r)
            })
            .collect();
        rows.extend(batch?);
    }
    Ok(rows)
}

pub fn summarize(rows: &[TrialReport]) -> Vec<SweepSummary> {
    let mut out: Vec<SweepSummary> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let n = rows[start].n;
        let end = start + rows[start..].iter().take_while(|r| r.n == n).count();
        let group = &rows[start..end];
        let passed = group.iter().filter(|r| r.passed()).count();
        out.push(SweepSummary {
            n,
            trials: group.len() as u64,
            success_rate: passed as f64 / group.len() as f64,
            median_deviation: median(group.iter().map(|r| rational::to_f64(&r.max_deviation)).collect()),
        });
        start = end;
    }
    out
}

/// Smallest swept n from which every larger swept n has success rate at least 1/2.
pub fn n0_estimate(summary: &[SweepSummary]) -> Option<u64> {
    let mut n0 = None;
    for s in summary.iter().rev() {
        if s.success_rate >= 0.5 {
            n0 = Some(s.n);
        } else {
            break;
        }
    }
    n0
}

pub fn run_sweep(args: &SweepArgs) -> Result<u8> {
    let base = params(&args.trial, 1)?;
    let rows = sweep_reports(&args.n_list, &base, args.trials)?;
    let summary = summarize(&rows);
    let n0 = n0_estimate(&summary);
    let text = match args.format {
        Format::Json => to_json(&SweepOutput { trials: &rows, summary: &summary, n0_estimate: n0 })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "N", "M", "max_deviation", "bound", "mult_max", "flat_ok", "mult_ok", "seed"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.points.to_string(),
                    r.cap.to_string(),
                    fmt_q(&r.max_deviation),
                    fmt_f64(r.flatness_bound),
                    r.multiplicity_max.to_string(),
                    r.flat_ok.to_string(),
                    r.mult_ok.to_string(),
                    r.seed.to_string(),
                ])?;
            }
            let mut text = String::from_utf8(w.into_inner()?)?;
            for s in &summary {
                text.push_str(&format!(
                    "# summary n={} trials={} success_rate={} median_deviation={}\n",
                    s.n,
                    s.trials,
                    fmt_f64(s.success_rate),
                    fmt_f64(s.median_deviation)
                ));
            }
            text
        }
    };
    emit(args.out.as_deref(), &text)?;
    match n0 {
        Some(n0) => eprintln!("n0 estimate (success rate >= 1/2 from here on): {n0}"),
        None => eprintln!("n0 estimate: none of the swept n qualifies"),
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct Verification {
    report: TrialReport,
    symmetric: bool,
    unit_mass: bool,
    fast_matches_exact: bool,
    flatness_identity: bool,
    #[serde(with = "rational::serde_str")]
    density_sup_deviation: Rational,
    density_bound: f64,
    passed: bool,
}

pub fn run_verify(args: &VerifyArgs) -> Result<u8> {
    let m = read_measure(&args.measure)?;
    let p = params(&args.trial, 1)?;
    let report = check_trial(&m, &p)?;
    let conv = autoconvolve(&m);
    let grid = m.grid();
    let symmetric = (0..m.n()).all(|k| m.counts()[k as usize] == m.counts()[grid.reflect(k) as usize]);
    let g = build_step_density(&m);
    let f = autoconvolve_density(&g);
    let one = Rational::from_integer(1);
    let unit_mass = conv.total() == one && g.integral() == one && f.integral() == one;
    let fast_matches_exact = autoconvolve_fast(&m).map(|v| v == conv).unwrap_or(false);
    let density_sup_deviation = sup_deviation_from_one(&f);
    let flatness_identity =
        density_sup_deviation == max_flatness_deviation(&conv) * Rational::from_integer(m.n() as i128);
    let nf = m.n() as f64;
    let density_bound = 2.0 * p.epsilon * p.phi.eval(m.n()) * (nf * nf.ln()).sqrt() / report.points as f64;
    let passed = report.passed() && symmetric && unit_mass && fast_matches_exact && flatness_identity;
    let v = Verification {
        report,
        symmetric,
        unit_mass,
        fast_matches_exact,
        flatness_identity,
        density_sup_deviation,
        density_bound,
        passed,
    };
    emit(args.out.as_deref(), &to_json(&v)?)?;
    Ok(if passed { 0 } else { 1 })
}

#[derive(Debug, Serialize)]
struct CoverReport {
    alpha: f64,
    m_index: u32,
    #[serde(with = "rational::serde_str")]
    width: Rational,
    power_sum: f64,
    passed: bool,
    cover: IntervalCover,
}

#[derive(Debug, Serialize)]
struct MetricsOutput {
    distance: flatconv_core::DensityDistance,
    #[serde(skip_serializing_if = "Option::is_none")]
    cover: Option<CoverReport>,
}

pub fn run_metrics(args: &MetricsArgs) -> Result<u8> {
    let a = read_measure(&args.a)?;
    let b = read_measure(&args.b)?;
    let distance = density_distance(&a, &b);
    let cover = match &args.cover_width {
        Some(w) => {
            let width = rational::parse(w).ok_or_else(|| Error::InvalidParams(format!("bad width {w:?}")))?;
            let e = FiniteSymmetricSet::from_measure(&a);
            let (cover, passed) = covering_check(&e, args.alpha, args.m_index, &width)?;
            let beta = args.alpha + 1.0 / args.m_index as f64;
            Some(CoverReport {
                alpha: args.alpha,
                m_index: args.m_index,
                power_sum: cover.power_sum(beta),
                width,
                passed,
                cover,
            })
        }
        None => None,
    };
    emit(args.out.as_deref(), &to_json(&MetricsOutput { distance, cover })?)?;
    Ok(0)
}

pub fn run_tails(args: &TailsArgs) -> Result<u8> {
    let cfg = TailConfig {
        n: args.n,
        points: args.points,
        trials: args.trials,
        seed: args.seed,
        gamma: args.gamma,
        x_points: args.x_points,
    };
    let t = deviation_tail_experiment(&cfg)?;
    let text = match args.format {
        Format::Json => to_json(&t)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "empirical", "bound", "stderr"])?;
            for (x, e, b, s) in t.rows() {
                w.write_record([fmt_f64(x), fmt_f64(e), fmt_f64(b), fmt_f64(s)])?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(args.out.as_deref(), &text)?;
    if !t.dominated() {
        eprintln!("warning: empirical tail exceeds bound + 3 stderr at some x");
    }
    Ok(0)
}
