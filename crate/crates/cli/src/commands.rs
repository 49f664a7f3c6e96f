//! The subcommands. Each reads what it needs from a [`RunConfig`] and
//! returns one artifact plus an exit status.

use anyhow::Result;
use serde::Serialize;

use maxbound_core::bounds::{BoundsReport, Epsilon, DEFAULT_C1, VALIDATED_P_MIN};
use maxbound_core::gfun::{self, GammaTable};
use maxbound_core::stepfn::{from_f64, parse_rational, Rational};
use maxbound_core::verify::search::{extremal_search, SearchConfig, SearchResult};
use maxbound_core::verify::suite::{run_suite, SuiteConfig, SuiteKind, SuiteReport};
use maxbound_core::verify::MainConfig;

use crate::config::RunConfig;
use crate::report::{num, opt_num, Artifact, Meta};
use crate::usage;

#[derive(Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(artifact: Artifact, warnings: Vec<String>) -> Self {
        Self {
            artifact,
            warnings,
            exit_code: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

fn format(cfg: &RunConfig, default: &str, allowed: &[Format]) -> Result<Format> {
    let name: String = cfg.get("format", default.to_string())?;
    let format = match name.as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return usage(format!("unknown format {other:?} (expected csv or json)")),
    };
    if !allowed.contains(&format) {
        return usage(format!("format {name} is not available for this command"));
    }
    Ok(format)
}

/// `p/q`, an integer, or a decimal that is exactly a double.
fn grid_width(cfg: &RunConfig) -> Result<Rational> {
    let text: String = cfg.get("grid_width", "1/256".to_string())?;
    let width = parse_rational(&text).or_else(|_| match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(from_f64(x)),
        _ => usage(format!("invalid grid width {text:?}")),
    })?;
    if width <= Rational::from_integer(0.into()) {
        return usage("grid width must be positive");
    }
    Ok(width)
}

fn check_p_grid(ps: &[f64]) -> Result<Vec<String>> {
    if ps.is_empty() {
        return usage("the p grid is empty");
    }
    let mut warnings = Vec::new();
    for &p in ps {
        if !(p > 1.0 && p.is_finite()) {
            return usage(format!("p = {p} must be a finite number greater than 1"));
        }
        if p < VALIDATED_P_MIN {
            warnings.push(format!(
                "p = {p} is below the validated range p >= {VALIDATED_P_MIN}"
            ));
        }
    }
    Ok(warnings)
}

#[derive(Serialize)]
struct GammaRow {
    n: usize,
    gamma_n: f64,
    term_n: f64,
    lower_bound_at_0: f64,
    g_closed_n_0: f64,
    check_abs_diff: f64,
}

pub const GAMMA_COLUMNS: &[&str] = &[
    "n",
    "gamma_n",
    "term_n",
    "lower_bound_at_0",
    "g_closed_n_0",
    "check_abs_diff",
];

/// `γ_n`, its series term, the inductive lower bound at `t = 0` and a
/// cross-check against the closed form of `g_n(0)`.
pub fn gamma(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.get("seed", 42u64)?;
    let n_max = cfg.get("n_max", 200usize)?;
    if n_max < 1 {
        return usage("n_max must be at least 1");
    }
    let format = format(cfg, "csv", &[Format::Csv, Format::Json])?;
    let table = GammaTable::build(n_max)?;
    let rows = (1..=n_max)
        .map(|n| {
            let g = table.gamma(n).expect("built up to n_max");
            let closed = gfun::g_closed(n, 0.0)?;
            Ok(GammaRow {
                n,
                gamma_n: g,
                term_n: table.term(n).expect("built up to n_max"),
                lower_bound_at_0: gfun::inductive_lower_bound(n, 0.0),
                g_closed_n_0: closed,
                check_abs_diff: (g - closed).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = Meta::new("gamma", seed, cfg);
    let artifact = match format {
        Format::Csv => Artifact::csv(
            "gamma",
            &meta,
            GAMMA_COLUMNS,
            rows.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.gamma_n),
                        num(r.term_n),
                        num(r.lower_bound_at_0),
                        num(r.g_closed_n_0),
                        num(r.check_abs_diff),
                    ]
                })
                .collect(),
        )?,
        Format::Json => Artifact::json("gamma", &meta, &serde_json::json!({ "rows": rows }))?,
    };
    Ok(Outcome::ok(artifact, Vec::new()))
}

pub const GN_COLUMNS: &[&str] = &["n", "t", "g_n", "h_n", "lower_bound"];

/// Plot-ready `g_n(t)` and `h_n(t)` on a uniform `t` grid; `lower_bound`
/// is `1 - (√8/3)^n √(1+t)`, given for `t ≥ 0`.
pub fn gn_table(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.get("seed", 42u64)?;
    let n_max = cfg.get("n_max", 8usize)?;
    let t_min = cfg.get("t_min", -0.5f64)?;
    let t_max = cfg.get("t_max", 10.0f64)?;
    let t_points = cfg.get("t_points", 201usize)?;
    if n_max < 1 {
        return usage("n_max must be at least 1");
    }
    if !(t_min >= -0.5) || !(t_max >= t_min) || !t_max.is_finite() {
        return usage(format!(
            "need -1/2 <= t_min <= t_max, got [{t_min}, {t_max}]"
        ));
    }
    if t_points < 2 {
        return usage("t_points must be at least 2");
    }
    let mut rows = Vec::with_capacity(n_max * t_points);
    for n in 1..=n_max {
        for i in 0..t_points {
            let t = t_min + (t_max - t_min) * i as f64 / (t_points - 1) as f64;
            let lower = if t >= 0.0 {
                num(gfun::inductive_lower_bound(n, t))
            } else {
                String::new()
            };
            rows.push(vec![
                n.to_string(),
                num(t),
                num(gfun::g_closed(n, t)?),
                num(gfun::h_closed(n, t)?),
                lower,
            ]);
        }
    }
    let meta = Meta::new("gn-table", seed, cfg);
    Ok(Outcome::ok(
        Artifact::csv("gn-table", &meta, GN_COLUMNS, rows)?,
        Vec::new(),
    ))
}

pub const CONSTANTS_COLUMNS: &[&str] = &[
    "row",
    "p",
    "n",
    "gamma_n",
    "iterated",
    "weak_chain",
    "epsilon_state",
    "epsilon",
    "best_n",
    "best_epsilon",
    "ap_upper",
    "c1",
    "lerner",
    "iz",
    "out_of_validated_range",
];

/// Every `ε_p(n)` plus one summary row per `p`.
pub fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.get("seed", 42u64)?;
    let ps = cfg.get_list("p", &[1.25, 1.5, 2.0, 3.0, 5.0, 10.0])?;
    let n_max = cfg.get("n_max", 500usize)?;
    let c1 = cfg.get("c1", DEFAULT_C1)?;
    let format = format(cfg, "csv", &[Format::Csv, Format::Json])?;
    let warnings = check_p_grid(&ps)?;
    if n_max < 1 {
        return usage("n_max must be at least 1");
    }
    if !(c1 >= 1.0) || !c1.is_finite() {
        return usage(format!("c1 = {c1} must be at least 1"));
    }
    let reports = ps
        .iter()
        .map(|&p| BoundsReport::compute(p, n_max, c1))
        .collect::<maxbound_core::Result<Vec<_>>>()?;
    let meta = Meta::new("constants", seed, cfg);
    let artifact = match format {
        Format::Json => Artifact::json(
            "constants",
            &meta,
            &serde_json::json!({ "reports": reports }),
        )?,
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &reports {
                for row in &r.rows {
                    let (state, eps) = match row.epsilon {
                        Epsilon::Valid(e) => ("valid", num(e)),
                        Epsilon::Invalid => ("invalid", String::new()),
                    };
                    rows.push(vec![
                        "detail".into(),
                        num(r.p),
                        row.n.to_string(),
                        num(row.gamma),
                        num(row.iterated),
                        num(row.weak_chain),
                        state.into(),
                        eps,
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
                rows.push(vec![
                    "summary".into(),
                    num(r.p),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    r.best_n.map(|n| n.to_string()).unwrap_or_default(),
                    opt_num(r.best_epsilon),
                    num(r.ap_upper),
                    num(r.c1),
                    num(r.lerner),
                    opt_num(r.iz),
                    r.out_of_validated_range.to_string(),
                ]);
            }
            Artifact::csv("constants", &meta, CONSTANTS_COLUMNS, rows)?
        }
    };
    Ok(Outcome::ok(artifact, warnings))
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    suite: SuiteKind,
    suite_config: &'a SuiteConfig,
    passed: bool,
    report: &'a SuiteReport,
}

/// Runs one verification suite; exit status 1 when any check is violated.
pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let Some(name) = cfg.raw("suite").map(str::to_string) else {
        return usage("verify needs --suite (lemma5, growth, lemma7, thm2 or main)");
    };
    let suite: SuiteKind = match name.parse() {
        Ok(s) => s,
        Err(e) => return usage(e.to_string()),
    };
    cfg.record("suite", suite.to_string());
    format(cfg, "json", &[Format::Json])?;
    let defaults = SuiteConfig::default();
    let seed = cfg.get("seed", defaults.seed)?;
    let suite_cfg = SuiteConfig {
        seed,
        functions: cfg.get("functions", defaults.functions)?,
        points: cfg.get("points", defaults.points)?,
        grid_width: grid_width(cfg)?,
        max_refinements: cfg.get("max_refinements", defaults.max_refinements)?,
        p_values: cfg.get_list("p", &defaults.p_values)?,
        main: MainConfig {
            c1: cfg.get("c1", defaults.main.c1)?,
            n_max: cfg.get("n_max", defaults.main.n_max)?,
        },
        ..defaults
    };
    if matches!(suite, SuiteKind::Thm2 | SuiteKind::Main) {
        check_p_grid(&suite_cfg.p_values)?;
    }
    if suite_cfg.points == 0 && matches!(suite, SuiteKind::Lemma5 | SuiteKind::Growth) {
        return usage("points must be at least 1");
    }
    let report = run_suite(suite, &suite_cfg);
    let meta = Meta::new("verify", seed, cfg);
    let passed = report.violations == 0;
    let body = VerifyBody {
        suite,
        suite_config: &suite_cfg,
        passed,
        report: &report,
    };
    let artifact = Artifact::json(&format!("verify-{suite}"), &meta, &body)?;
    Ok(Outcome {
        artifact,
        warnings: report.warnings.clone(),
        exit_code: if passed { 0 } else { 1 },
    })
}

#[derive(Serialize)]
struct SearchBody<'a> {
    result: &'a SearchResult,
}

/// Empirical minimization of `‖Mf‖_p / ‖f‖_p` over step functions.
pub fn search(cfg: &RunConfig) -> Result<Outcome> {
    let defaults = SearchConfig::default();
    let seed = cfg.get("seed", defaults.seed)?;
    let search_cfg = SearchConfig {
        p: cfg.get("p", 1.5f64)?,
        pieces: cfg.get("pieces", defaults.pieces)?,
        iterations: cfg.get("iterations", defaults.iterations)?,
        tol: cfg.get("tol", defaults.tol)?,
        seed,
        ..defaults
    };
    format(cfg, "json", &[Format::Json])?;
    if search_cfg.pieces == 0 {
        return usage("pieces must be at least 1");
    }
    if search_cfg.iterations == 0 {
        return usage("iterations must be at least 1");
    }
    let mut warnings = check_p_grid(&[search_cfg.p])?;
    if !(search_cfg.tol > 0.0) {
        return usage(format!("tol = {} must be positive", search_cfg.tol));
    }
    let result = extremal_search(&search_cfg)?;
    if !result.above_floor {
        warnings.push(format!(
            "estimated ratio {} is below the proven floor {}",
            result.min_ratio, result.floor
        ));
    }
    let meta = Meta::new("search", seed, cfg);
    let artifact = Artifact::json("search", &meta, &SearchBody { result: &result })?;
    Ok(Outcome::ok(artifact, warnings))
}
