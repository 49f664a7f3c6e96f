//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

use std::process::Command;
use std::time::Instant;

use maxbound_core::bounds::{epsilon_p, iterated_constant, iz_constant, BoundsReport, Epsilon};
use maxbound_core::gfun::{g_closed, g_recursive, gamma, lagrange_sum, GammaTable};
use maxbound_core::maximal::{eval_point, indicator_oracle, MaximalKind};
use maxbound_core::quad::adaptive_simpson;
use maxbound_core::stepfn::{from_f64, int, to_f64, StepFunction};
use maxbound_core::verify::search::{extremal_search, SearchConfig};
use maxbound_core::verify::suite::{run_suites, CaseStatus, SuiteConfig, SuiteKind, SuiteReport};
use maxbound_core::verify::{main_threshold, MainConfig};
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let table = GammaTable::build(200).expect("table");
    let g = table.gammas();
    let exact_first = g[0] == 0.5;
    let increasing = g.windows(2).all(|w| w[1] > w[0]);
    let below_one = g.iter().all(|&x| x < 1.0);
    let max_diff = (1..=200)
        .map(|n| (gamma(n).unwrap() - g_closed(n, 0.0).unwrap()).abs())
        .fold(0.0, f64::max);
    let g100 = g[99];
    outcome(
        exact_first && increasing && below_one && max_diff <= 1e-13 && g100 >= 0.997,
        format!("γ_1 = {}, increasing {increasing}, < 1 {below_one}, max |γ_n - g_n(0)| = {max_diff:.2e}, γ_100 = {g100:.6}", g[0]),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=8 {
        for i in 0..200 {
            let t = -0.49 + (10.0 + 0.49) * i as f64 / 199.0;
            let diff = (g_recursive(n, t, 1e-10).unwrap() - g_closed(n, t).unwrap()).abs();
            worst = worst.max(diff);
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max |g_recursive - g_closed| over n <= 8, 200 t = {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let ts = [-0.5, -0.25, 0.0, 0.5, 1.0, 2.0, 3.0];
    let worst = ts
        .iter()
        .map(|&t| (lagrange_sum(t, 500).unwrap() - (2.0 + 2.0 * t)).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-6,
        format!("max |lagrange_sum(t, 500) - (2 + 2t)| = {worst:.2e}"),
    )
}

/// `‖Mχ_[0,1]‖_p^p` by quadrature of the oracle. The tails use `x = s^(-m)`
/// with `m = 2/(p-1)`, which turns `(2x)^(-p) dx` into a multiple of `s ds`.
fn oracle_norm_pow(p: f64) -> f64 {
    let m = 2.0 / (p - 1.0);
    let tail = |side: f64| {
        move |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let u = s.powf(-m);
            let x = if side > 0.0 { u } else { 1.0 - u };
            m * s.powf(-m - 1.0) * indicator_oracle(x, MaximalKind::Centered).powf(p)
        }
    };
    let body = adaptive_simpson(
        |x| indicator_oracle(x, MaximalKind::Centered).powf(p),
        0.0,
        1.0,
        1e-13,
    )
    .value;
    body + adaptive_simpson(tail(1.0), 0.0, 1.0, 1e-13).value
        + adaptive_simpson(tail(-1.0), 0.0, 1.0, 1e-13).value
}

fn criterion_4() -> Outcome {
    let chi = StepFunction::indicator(int(0), int(1), int(1)).unwrap();
    let mut worst = 0.0f64;
    for kind in [
        MaximalKind::Centered,
        MaximalKind::Left,
        MaximalKind::Uncentered,
    ] {
        for i in 0..1000 {
            let x = -5.0 + 11.0 * i as f64 / 999.0;
            let exact = to_f64(&eval_point(&chi, &from_f64(x), kind));
            worst = worst.max((exact - indicator_oracle(x, kind)).abs());
        }
    }
    let two = oracle_norm_pow(2.0);
    let three_halves = oracle_norm_pow(1.5);
    let (e2, e15) = (
        (two - 1.5).abs(),
        (three_halves - (1.0 + 2f64.sqrt())).abs(),
    );
    outcome(
        worst <= 1e-12 && e2 <= 1e-9 && e15 <= 1e-9,
        format!("max |eval_point - oracle| = {worst:.1e}; ‖Mχ‖_2^2 = {two:.12} (err {e2:.1e}); ‖Mχ‖_1.5^1.5 = {three_halves:.12} (err {e15:.1e})"),
    )
}

fn criterion_5(r: &SuiteReport, max_refinements: u32) -> Outcome {
    let rate = r.pass_rate_without_refinement();
    let all = r.certified_pass == r.cases;
    let equality = r
        .records
        .iter()
        .filter(|c| c.subject == "indicator[0,1]" && c.check.starts_with("lemma5 n=1 "))
        .filter_map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    outcome(
        r.violations == 0 && rate >= 0.95 && all && r.max_refinements_used <= max_refinements && equality.abs() <= 1e-9,
        format!(
            "{} cases, {} violations, {:.2}% certified without refinement, {}/{} after <= {} refinements, indicator n = 1 margin {equality:.1e}",
            r.cases, r.violations, 100.0 * rate, r.certified_pass, r.cases, r.max_refinements_used
        ),
    )
}

fn criterion_6(r: &SuiteReport) -> Outcome {
    outcome(
        r.violations == 0 && r.certified_pass == r.cases,
        format!(
            "{} cases, {} violations, {}/{} certified (max refinements {})",
            r.cases, r.violations, r.certified_pass, r.cases, r.max_refinements_used
        ),
    )
}

fn closed_norm(p: f64) -> f64 {
    (1.0 + 2f64.powf(1.0 - p) / (p - 1.0)).powf(1.0 / p)
}

/// Zero violations in both suites; each indicator case passes, and its
/// certified margin lies at or below the closed-form margin from the exact
/// `‖Mχ‖_p`, within 1% of it.
fn criterion_7(thm2: &SuiteReport, main: &SuiteReport, cfg: &SuiteConfig) -> Outcome {
    let mut ok = thm2.violations == 0 && main.violations == 0;
    let mut worst_gap = 0.0f64;
    for &p in &cfg.p_values {
        let closed = closed_norm(p);
        let cases = [
            (
                thm2,
                format!("thm2 n=1 p={p}"),
                iterated_constant(p, 1).unwrap(),
            ),
            (
                main,
                format!("main p={p}"),
                main_threshold(p, &cfg.main).unwrap(),
            ),
        ];
        for (report, label, rhs) in cases {
            let record = report
                .records
                .iter()
                .find(|c| c.subject == "indicator[0,1]" && c.check == label);
            let Some(record) = record else {
                ok = false;
                continue;
            };
            let margin = record.margin.unwrap_or(f64::NEG_INFINITY);
            let exact_margin = closed - rhs;
            let gap = exact_margin - margin;
            worst_gap = worst_gap.max(gap / closed);
            ok &=
                record.status == CaseStatus::CertifiedPass && gap >= -1e-12 && gap <= 0.01 * closed;
        }
    }
    let rejected = thm2.rejected + main.rejected;
    outcome(
        ok,
        format!(
            "thm2 {} cases / main {} cases, {} violations, {rejected} zero-function rejections; indicator margins within {:.3}% of closed form",
            thm2.cases,
            main.cases,
            thm2.violations + main.violations,
            100.0 * worst_gap
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.25, 1.5, 2.0, 3.0, 5.0, 10.0] {
        let r = BoundsReport::compute(p, 500, 2.0).unwrap();
        let eps = r.best_epsilon.unwrap_or(0.0);
        ok &= eps > 0.0;
        parts.push(format!("p={p}: n*={} ε={eps:.3e}", r.best_n.unwrap_or(0)));
    }
    let spot = match epsilon_p(2.0, 2, 4.0).unwrap() {
        Epsilon::Valid(e) => e,
        Epsilon::Invalid => f64::NAN,
    };
    ok &= ((spot - 5.15e-4) / 5.15e-4).abs() <= 0.05;
    outcome(
        ok,
        format!("{}; ε_2(n=2, A=4) = {spot:.4e}", parts.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let floor = iz_constant(1.5).unwrap();
    let target = (1.0 + 2f64.sqrt()).powf(2.0 / 3.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for pieces in [1, 4, 8] {
        let r = extremal_search(&SearchConfig {
            p: 1.5,
            pieces,
            iterations: 2000,
            seed: 42,
            ..SearchConfig::default()
        })
        .unwrap();
        ok &= r.label == "empirical" && r.min_ratio >= floor - 1e-3;
        if pieces == 1 {
            ok &= (r.min_ratio - target).abs() <= 1e-6;
        }
        parts.push(format!("pieces {pieces}: {:.6}", r.min_ratio));
    }
    outcome(
        ok,
        format!(
            "{} (empirical); floor iz(1.5) = {floor:.6}; (1+√2)^(2/3) = {target:.9}",
            parts.join(", ")
        ),
    )
}

fn run_json(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_maxbound"))
        .args(args)
        .env_remove("MAXBOUND_CONFIG")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut doc: Value = serde_json::from_slice(&out.stdout).expect("JSON");
    doc["meta"]
        .as_object_mut()
        .expect("meta")
        .remove("timestamp");
    doc
}

fn criterion_10() -> Outcome {
    let runs: [&[&str]; 3] = [
        &[
            "verify",
            "--suite",
            "lemma5",
            "--functions",
            "40",
            "--seed",
            "7",
        ],
        &[
            "search",
            "--p",
            "1.5",
            "--pieces",
            "4",
            "--iterations",
            "300",
            "--seed",
            "7",
        ],
        &["constants", "--format", "json", "--n-max", "100"],
    ];
    let mut ok = true;
    for args in runs {
        let a = serde_json::to_string(&run_json(args)).unwrap();
        let b = serde_json::to_string(&run_json(args)).unwrap();
        ok &= a == b;
    }
    outcome(
        ok,
        "verify, search and constants JSON byte-identical across repeated runs (timestamp removed)",
    )
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |id: usize, name: &'static str, run: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = run();
        println!(
            "[{}] {id:>2} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        results.push((id, name, o));
    };

    record(1, "gamma table", &criterion_1);
    record(2, "closed form vs recursion", &criterion_2);
    record(3, "Lagrange identity", &criterion_3);
    record(4, "exact evaluator vs oracle", &criterion_4);

    let cfg = SuiteConfig {
        main: MainConfig {
            c1: 2.0,
            n_max: 500,
        },
        ..SuiteConfig::default()
    };
    let t = Instant::now();
    let reports = run_suites(
        &[
            SuiteKind::Lemma5,
            SuiteKind::Lemma7,
            SuiteKind::Thm2,
            SuiteKind::Main,
        ],
        &cfg,
    );
    println!(
        "     (suites over {} functions: {:.1}s)",
        cfg.functions,
        t.elapsed().as_secs_f64()
    );
    let (lemma5, lemma7, thm2, main) = (&reports[0], &reports[1], &reports[2], &reports[3]);
    record(5, "pointwise iterate bound suite", &|| {
        criterion_5(lemma5, cfg.max_refinements)
    });
    record(6, "level-set suite", &|| criterion_6(lemma7));
    record(7, "norm suites", &|| criterion_7(thm2, main, &cfg));

    record(8, "epsilon positivity", &criterion_8);
    record(9, "extremal search", &criterion_9);
    record(10, "determinism", &criterion_10);

    let elapsed = start.elapsed().as_secs_f64();
    let in_time = elapsed < 120.0;
    println!(
        "[{}] total time {elapsed:.1}s (limit 120s)",
        if in_time { "PASS" } else { "FAIL" }
    );
    let failed: Vec<usize> = results
        .iter()
        .filter(|(_, _, o)| !o.pass)
        .map(|(id, _, _)| *id)
        .collect();
    if failed.is_empty() && in_time {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
