//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p flatconv-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use flatconv_cli::commands::sweep_reports;
use flatconv_core::concentration::{
    binomial_tail_bound_exact, bounded_martingale_tails, deviation_tail_experiment, exact_binomial_tail,
    telescoping, TailConfig,
};
use flatconv_core::construct::points_for;
use flatconv_core::metrics::fourier_sup_distance;
use flatconv_core::rational::{self, Rational};
use flatconv_core::rng;
use flatconv_core::*;
use num::{BigInt, BigRational, Zero};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn random_measure<R: Rng>(s: &mut R, n: u64, max_points: u64) -> SymmetricCounts {
    let points = s.gen_range(1..=max_points);
    let pts: Vec<u64> = (0..points).map(|_| s.gen_range(1..n)).collect();
    SymmetricCounts::from_points(GridSpec::new(n).unwrap(), &pts).unwrap()
}

fn random_odd<R: Rng>(s: &mut R, lo: u64, hi: u64) -> u64 {
    2 * s.gen_range(lo / 2..=(hi - 1) / 2) + 1
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn c1_fast_convolution() -> Outcome {
    let start = Instant::now();
    let mut s = rng::stream(1);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = random_odd(&mut s, 5, 51);
        let m = random_measure(&mut s, n, 40);
        if autoconvolve_fast(&m).ok().as_ref() != Some(&autoconvolve(&m)) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 5.0, format!("100 instances, {mismatches} mismatches, {secs:.3}s (< 5s)"))
}

fn c2_flatness_identity() -> Outcome {
    let mut s = rng::stream(2);
    let mut failures = 0;
    for _ in 0..100 {
        let n = random_odd(&mut s, 3, 401);
        let m = random_measure(&mut s, n, 60);
        let lhs = sup_deviation_from_one(&autoconvolve_density(&build_step_density(&m)));
        let rhs = max_flatness_deviation(&autoconvolve(&m)) * Rational::from_integer(n as i128);
        if lhs != rhs {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("100 measures, {failures} exact mismatches"))
}

fn c3_mass_conservation() -> Outcome {
    let mut s = rng::stream(3);
    let one = Rational::from_integer(1);
    let mut failures = 0;
    for _ in 0..100 {
        let n = random_odd(&mut s, 3, 401);
        let m = random_measure(&mut s, n, 60);
        let g = build_step_density(&m);
        let gg = autoconvolve_density(&g);
        if autoconvolve(&m).total() != one || g.integral() != one || gg.integral() != one {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("100 measures, {failures} with non-unit mass"))
}

fn c4_deviation_scaling() -> (Outcome, String) {
    let start = Instant::now();
    let ns = [101u64, 301, 1001, 3001];
    let seeds = 200u64;
    let base = ConstructionParams::new(0.6, 1.0, Phi::Log, 0, 1).unwrap();
    let rows = sweep_reports(&ns, &base, seeds).unwrap();
    let (mut xs, mut ys, mut ps) = (Vec::new(), Vec::new(), Vec::new());
    let mut in_band = true;
    let mut parts = Vec::new();
    let mut full_parts = Vec::new();
    for &n in &ns {
        let group: Vec<&TrialReport> = rows.iter().filter(|r| r.n == n).collect();
        let med = median(group.iter().map(|r| rational::to_f64(&r.max_deviation)).collect());
        let full = median(group.iter().map(|r| rational::to_f64(&r.full_deviation)).collect());
        let nf = n as f64;
        let reference = nf.ln().sqrt() / (2.0 * points_for(n, 0.6) as f64 * nf.sqrt());
        let ratio = med / reference;
        in_band &= (0.05..=10.0).contains(&ratio);
        parts.push(format!("n={n}:{ratio:.2}"));
        full_parts.push(format!("n={n}:{:.2}", full / reference));
        xs.push(nf.ln());
        ys.push(med.ln());
        ps.push(reference.ln());
    }
    let (emp, pred) = (slope(&xs, &ys), slope(&xs, &ps));
    let secs = start.elapsed().as_secs_f64();
    let ok = in_band && (emp - pred).abs() <= 0.15 && secs < 120.0;
    let info = format!(
        "origin-inclusive median / reference: {} (>= sqrt(n/ln n)(1-2N/n) since (sigma*sigma)_0 >= 1/(2N))",
        full_parts.join(" ")
    );
    (
        outcome(
            ok,
            format!(
                "median/reference {} in [0.05,10]; slope {emp:.3} vs predicted {pred:.3} (tol 0.15); {seeds} seeds; {secs:.1}s",
                parts.join(" ")
            ),
        ),
        info,
    )
}

fn c5_success_probability() -> Outcome {
    let ladder = [101u64, 301, 1001, 3001, 10001, 30001, 99999];
    let cap = choose_m(0.6, 0.25).unwrap();
    let base = ConstructionParams::new(0.6, 1.0, Phi::Log, 0, 1).unwrap();
    let rows = sweep_reports(&ladder, &base, 200).unwrap();
    let rates: Vec<(u64, f64)> = ladder
        .iter()
        .map(|&n| {
            let group: Vec<&TrialReport> = rows.iter().filter(|r| r.n == n).collect();
            assert!(group.iter().all(|r| r.cap == cap));
            (n, group.iter().filter(|r| r.passed()).count() as f64 / group.len() as f64)
        })
        .collect();
    let mut n_star = None;
    for &(n, rate) in rates.iter().rev() {
        if rate >= 0.4 {
            n_star = Some(n);
        } else {
            break;
        }
    }
    let listing: Vec<String> = rates.iter().map(|(n, r)| format!("{n}:{r:.2}")).collect();
    outcome(
        n_star.is_some_and(|n| n <= 100_000),
        format!("M={cap}; success rates {}; n* = {:?}", listing.join(" "), n_star),
    )
}

fn c6_binomial_tail() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for trials in [1u64, 2, 3, 5, 10, 20, 50] {
        for tenths in 1..=9i64 {
            let p = BigRational::new(BigInt::from(tenths), BigInt::from(10 * trials as i64));
            for m in 2..=12u64 {
                let exact = exact_binomial_tail(trials, &p, m);
                let bound = binomial_tail_bound_exact(trials, &p, m).unwrap();
                checked += 1;
                if exact > bound {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{checked} exact comparisons (N x Np x m), {violations} violations"))
}

fn c7_azuma() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for steps in [16u64, 64] {
        let t = bounded_martingale_tails(steps, 1.0, 2000, 7, 33).unwrap();
        ok &= t.dominated();
        details.push(format!("bounded N={steps}: {}", if t.dominated() { "dominated" } else { "VIOLATED" }));
    }
    let t = deviation_tail_experiment(&TailConfig::new(101, 16, 2000, 7)).unwrap();
    ok &= t.dominated();
    details.push(format!("pair-count n=101 N=16: {}", if t.dominated() { "dominated" } else { "VIOLATED" }));
    outcome(ok, format!("2000 paths each; {}", details.join("; ")))
}

fn tuples(n: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn c8_martingale() -> Outcome {
    let n = 7;
    let mut histories = 0;
    let mut nonzero = 0;
    for big_n in 1..=3usize {
        for history in tuples(n, big_n - 1) {
            for r in 0..n {
                for cap in [1, 2, 3, 1000] {
                    let mut sum = Rational::zero();
                    for x in 1..n {
                        let mut s = history.clone();
                        s.push(x);
                        sum += &increment_sequence(n, &s, r, cap).unwrap().increments[big_n - 1];
                    }
                    histories += 1;
                    if !sum.is_zero() {
                        nonzero += 1;
                    }
                }
            }
        }
    }
    let mut s = rng::stream(8);
    let (mut cases, mut broken) = (0, 0);
    while cases < 1000 {
        let len = s.gen_range(1..=8);
        let samples: Vec<u64> = (0..len).map(|_| s.gen_range(1..n)).collect();
        let r = s.gen_range(0..n);
        if let Ok(t) = telescoping(n, &samples, r, 4) {
            cases += 1;
            if !t.holds() {
                broken += 1;
            }
        }
    }
    outcome(
        nonzero == 0 && broken == 0,
        format!("{histories} (history, r, M) cells with nonzero conditional mean: {nonzero}; telescoping failures {broken}/1000"),
    )
}

fn random_set<R: Rng>(s: &mut R) -> FiniteSymmetricSet {
    let k = s.gen_range(1..6);
    let pts = (0..k).flat_map(|_| {
        let den: i128 = s.gen_range(1..16);
        let num: i128 = s.gen_range(0..den);
        [Rational::new(num, den), Rational::new(-num, den)]
    });
    FiniteSymmetricSet::new(pts.collect::<Vec<_>>()).unwrap()
}

fn c9_metric_axioms() -> Outcome {
    let mut s = rng::stream(9);
    let mut bad = 0;
    for _ in 0..1000 {
        let (e, f, g) = (random_set(&mut s), random_set(&mut s), random_set(&mut s));
        let ef = hausdorff_distance(&e, &f);
        if ef != hausdorff_distance(&f, &e)
            || ef.is_zero() != (e == f)
            || !hausdorff_distance(&e, &e).is_zero()
            || hausdorff_distance(&e, &g) > &ef + hausdorff_distance(&f, &g)
        {
            bad += 1;
        }
    }
    let mut period_bad = 0;
    for _ in 0..100 {
        let n1 = random_odd(&mut s, 3, 31);
        let n2 = random_odd(&mut s, 3, 31);
        let a = random_measure(&mut s, n1, 8);
        let b = random_measure(&mut s, n2, 8);
        let period = (n1 * n2) as i64;
        let over = (0..period * 3)
            .map(|r| (fourier_coefficient(&a, r) - fourier_coefficient(&b, r)).abs())
            .fold(0.0, f64::max);
        if fourier_sup_distance(&a, &b) != over {
            period_bad += 1;
        }
    }
    outcome(
        bad == 0 && period_bad == 0,
        format!("1000 triples, {bad} axiom failures; 100 pairs, {period_bad} period-sup mismatches"),
    )
}

fn c10_covering() -> Outcome {
    let n = 3001u64;
    let width = Rational::new(1, (n * n) as i128);
    let w = 1.0 / (n * n) as f64;
    let mut ok = true;
    let mut dims = Vec::new();
    for seed in 0..5 {
        let p = ConstructionParams::new(0.6, 1.0, Phi::Log, seed, 16).unwrap();
        let (m, _) = match construct(&p, n) {
            Ok(x) => x,
            Err(_) => return outcome(false, format!("construct failed for seed {seed}")),
        };
        let e = FiniteSymmetricSet::from_measure(&m);
        for mi in 1..=10u32 {
            let (cover, passed) = covering_check(&e, 0.5, mi, &width).unwrap();
            let beta = 0.5 + 1.0 / mi as f64;
            let closed = e.len() as f64 * w.powf(beta);
            ok &= passed && cover.covers(&e) && cover.is_symmetric() && cover.arcs.len() == e.len();
            ok &= (cover.power_sum(beta) - closed).abs() <= 1e-12 * closed.max(1e-300);
            ok &= closed <= 2.0 * m.pair_count() as f64 * w.powf(beta);
        }
        let d = box_dimension_estimate(&e, n);
        ok &= (0.5..=0.7).contains(&d);
        dims.push(format!("{d:.3}"));
    }
    outcome(ok, format!("n=3001, width 1/n^2, m=1..10 all certified; dimension proxies {}", dims.join(" ")))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_flatconv")).args(args).output().expect("run flatconv");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn repeatable(args: &[&str]) -> bool {
    let first = run_cli(args);
    first.0 == 0 && !first.1.is_empty() && first == run_cli(args)
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_default()
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let mut same = true;
    for d in [&a, &b] {
        let (code, _) = run_cli(&[
            "construct", "--n", "1001", "--gamma", "0.6", "--epsilon", "1", "--phi", "log", "--seed", "7",
            "--out", d.to_str().unwrap(),
        ]);
        same &= code == 0;
    }
    for f in ["report.json", "measure.json", "density.csv"] {
        same &= !read(&a.join(f)).is_empty() && read(&a.join(f)) == read(&b.join(f));
    }
    let sweep = ["sweep", "--n-list", "101,301", "--trials", "20", "--seed", "3"];
    same &= repeatable(&sweep);
    let tails = ["tails", "--n", "101", "--points", "16", "--trials", "300", "--seed", "5"];
    same &= repeatable(&tails);
    let m = a.join("measure.json");
    let metrics = ["metrics", "--a", m.to_str().unwrap(), "--b", m.to_str().unwrap(), "--cover-width", "1/1000"];
    same &= repeatable(&metrics);
    outcome(same, "construct (3 artifacts), sweep, tails and metrics byte-identical across repeated runs")
}

fn main() {
    let (c4, c4_info) = c4_deviation_scaling();
    let results = [
        ("1 exact-convolution oracle equivalence", c1_fast_convolution()),
        ("2 flatness identity", c2_flatness_identity()),
        ("3 mass conservation", c3_mass_conservation()),
        ("4 deviation scaling", c4),
        ("5 success probability", c5_success_probability()),
        ("6 binomial-tail domination", c6_binomial_tail()),
        ("7 Azuma domination", c7_azuma()),
        ("8 martingale centering", c8_martingale()),
        ("9 metric axioms", c9_metric_axioms()),
        ("10 covering certification", c10_covering()),
        ("11 determinism", c11_determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("note: {c4_info}");
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
