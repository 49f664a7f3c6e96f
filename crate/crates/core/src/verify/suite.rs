//! Seeded verification suites with grid refinement.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::corpus::{sample_point, sample_points, value_levels, RandomStepConfig};
use super::{
    growth_with, lemma5_with, lemma7_with, main_with, thm2_with, MainConfig, Status, VerifyOutcome,
    Witness,
};
use crate::bounds::VALIDATED_P_MIN;
use crate::error::{Error, Result};
use crate::maximal::{iterate_all, Grid};
use crate::stepfn::{format_rational, int, rat, Rational, StepFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Lemma5,
    Growth,
    Lemma7,
    Thm2,
    Main,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 5] = [
        Self::Lemma5,
        Self::Growth,
        Self::Lemma7,
        Self::Thm2,
        Self::Main,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lemma5 => "lemma5",
            Self::Growth => "growth",
            Self::Lemma7 => "lemma7",
            Self::Thm2 => "thm2",
            Self::Main => "main",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown suite {s:?} (expected lemma5, growth, lemma7, thm2 or main)"
                ))
            })
    }
}

fn ser_rational<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub functions: usize,
    /// Sample points per function (pointwise checks).
    pub points: usize,
    #[serde(serialize_with = "ser_rational")]
    pub grid_width: Rational,
    pub max_refinements: u32,
    pub p_values: Vec<f64>,
    pub lemma5_orders: Vec<usize>,
    pub growth_orders: Vec<usize>,
    pub lemma7_orders: Vec<usize>,
    pub thm2_orders: Vec<usize>,
    pub main: MainConfig,
    pub generator: RandomStepConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            functions: 500,
            points: 20,
            grid_width: rat(1, 256),
            max_refinements: 3,
            p_values: vec![1.25, 1.5, 2.0, 3.0],
            lemma5_orders: vec![1, 2, 3],
            growth_orders: vec![1, 2, 3],
            lemma7_orders: vec![1, 2],
            thm2_orders: vec![1, 2, 3],
            main: MainConfig::default(),
            generator: RandomStepConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStatus {
    CertifiedPass,
    Inconclusive,
    Violation,
    Rejected,
}

impl From<Status> for CaseStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::CertifiedPass => Self::CertifiedPass,
            Status::Inconclusive => Self::Inconclusive,
            Status::Violation => Self::Violation,
        }
    }
}

/// Outcome of one check on one function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    pub subject: String,
    pub check: String,
    pub status: CaseStatus,
    pub margin: Option<f64>,
    pub refinements: u32,
    pub grid_width: Option<f64>,
    /// Whether the outcome comes from exact evaluation (no envelope).
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub cases: usize,
    pub certified_pass: usize,
    pub certified_without_refinement: usize,
    pub inconclusive: usize,
    pub violations: usize,
    pub rejected: usize,
    pub min_margin: Option<f64>,
    /// Smallest `|margin|` among exact checks; zero means the inequality is
    /// attained.
    pub min_abs_exact_margin: Option<f64>,
    pub max_refinements_used: u32,
    pub warnings: Vec<String>,
    pub records: Vec<CaseRecord>,
}

impl SuiteReport {
    pub fn pass_rate_without_refinement(&self) -> f64 {
        let judged = self.cases - self.rejected;
        if judged == 0 {
            1.0
        } else {
            self.certified_without_refinement as f64 / judged as f64
        }
    }
}

#[derive(Clone, Debug)]
enum Check {
    Lemma5 {
        n: usize,
        points: Vec<Rational>,
    },
    Growth {
        n: usize,
        x: Rational,
        h: Rational,
        ys: Vec<Rational>,
    },
    Lemma7 {
        n: usize,
        lambda: Rational,
    },
    Thm2 {
        p: f64,
        n: usize,
    },
    Main {
        p: f64,
    },
}

impl Check {
    fn order(&self) -> usize {
        match self {
            Self::Lemma5 { n, .. }
            | Self::Growth { n, .. }
            | Self::Lemma7 { n, .. }
            | Self::Thm2 { n, .. } => *n,
            Self::Main { .. } => 1,
        }
    }

    fn exact(&self) -> bool {
        matches!(self, Self::Lemma5 { n: 1, .. } | Self::Growth { n: 1, .. })
    }

    fn label(&self) -> String {
        match self {
            Self::Lemma5 { n, points } => format!("lemma5 n={n} points={}", points.len()),
            Self::Growth { n, x, h, ys } => {
                format!(
                    "growth n={n} x={} h={} points={}",
                    format_rational(x),
                    format_rational(h),
                    ys.len()
                )
            }
            Self::Lemma7 { n, lambda } => {
                format!("lemma7 n={n} lambda={}", format_rational(lambda))
            }
            Self::Thm2 { p, n } => format!("thm2 n={n} p={p}"),
            Self::Main { p } => format!("main p={p}"),
        }
    }

    fn run(
        &self,
        f: &StepFunction,
        certs: &[crate::maximal::CertifiedLowerStep],
        grid: &Grid,
        main: &MainConfig,
    ) -> Result<VerifyOutcome> {
        match self {
            Self::Lemma5 { n, points } => lemma5_with(f, *n, points, certs, grid),
            Self::Growth { n, x, h, ys } => growth_with(f, x, h, *n, ys, certs, grid),
            Self::Lemma7 { n, lambda } => lemma7_with(f, *n, lambda, certs, grid),
            Self::Thm2 { p, n } => thm2_with(f, *p, *n, certs, grid),
            Self::Main { p } => main_with(f, *p, main, certs, grid),
        }
    }
}

struct Subject {
    name: String,
    f: StepFunction,
    margin: Option<Rational>,
    checks: Vec<(SuiteKind, Check)>,
}

fn chi01() -> StepFunction {
    StepFunction::indicator(int(0), int(1), int(1)).expect("valid indicator")
}

fn build_checks(
    kind: SuiteKind,
    f: &StepFunction,
    rng: &mut ChaCha8Rng,
    cfg: &SuiteConfig,
) -> Vec<Check> {
    let mut checks = Vec::new();
    match kind {
        SuiteKind::Lemma5 => {
            let points = sample_points(rng, f, cfg.points);
            for &n in &cfg.lemma5_orders {
                checks.push(Check::Lemma5 {
                    n,
                    points: points.clone(),
                });
            }
        }
        SuiteKind::Growth => {
            let Some((x0, xm)) = f.support() else {
                return checks;
            };
            let width = xm - x0;
            let x = sample_point(rng, x0, xm);
            let h_units = rng_units(rng, &width);
            let h = rat(h_units, 16);
            let reach = xm + &width / int(2);
            let mut ys: Vec<Rational> = (0..cfg.points)
                .map(|_| sample_point(rng, &x, &reach))
                .collect();
            ys.sort();
            for &n in &cfg.growth_orders {
                checks.push(Check::Growth {
                    n,
                    x: x.clone(),
                    h: h.clone(),
                    ys: ys.clone(),
                });
            }
        }
        SuiteKind::Lemma7 => {
            let levels = value_levels(f);
            for &n in &cfg.lemma7_orders {
                for lambda in &levels {
                    checks.push(Check::Lemma7 {
                        n,
                        lambda: lambda.clone(),
                    });
                }
            }
        }
        SuiteKind::Thm2 => {
            for &p in &cfg.p_values {
                for &n in &cfg.thm2_orders {
                    checks.push(Check::Thm2 { p, n });
                }
            }
        }
        SuiteKind::Main => {
            for &p in &cfg.p_values {
                checks.push(Check::Main { p });
            }
        }
    }
    checks
}

/// A width `h` in `[1/16, W]`, as a count of sixteenths.
fn rng_units(rng: &mut ChaCha8Rng, width: &Rational) -> i64 {
    use num_traits::ToPrimitive;
    use rand::Rng;
    let max = (width * int(16))
        .floor()
        .to_integer()
        .to_i64()
        .unwrap_or(1)
        .max(1);
    rng.gen_range(1..=max)
}

fn fixtures(kind: SuiteKind, cfg: &SuiteConfig) -> Vec<Subject> {
    let chi = chi01();
    let mut out = Vec::new();
    let checks: Vec<Check> = match kind {
        SuiteKind::Lemma5 => cfg
            .lemma5_orders
            .iter()
            .map(|&n| Check::Lemma5 {
                n,
                points: vec![int(-1), rat(1, 2), int(2), int(3)],
            })
            .collect(),
        // Only the exact order: for n = 2 the point y = 2 attains equality,
        // which no grid envelope can certify.
        SuiteKind::Growth => cfg
            .growth_orders
            .iter()
            .filter(|&&n| n == 1)
            .map(|&n| Check::Growth {
                n,
                x: int(1),
                h: int(1),
                ys: vec![int(1), rat(3, 2), int(2)],
            })
            .collect(),
        SuiteKind::Lemma7 => cfg
            .lemma7_orders
            .iter()
            .flat_map(|&n| [rat(1, 4), rat(1, 2), int(2)].map(|lambda| Check::Lemma7 { n, lambda }))
            .collect(),
        SuiteKind::Thm2 => cfg
            .p_values
            .iter()
            .flat_map(|&p| cfg.thm2_orders.iter().map(move |&n| Check::Thm2 { p, n }))
            .collect(),
        SuiteKind::Main => cfg.p_values.iter().map(|&p| Check::Main { p }).collect(),
    };
    let checks = checks.into_iter().map(|c| (kind, c)).collect();
    // the fixture points -1 and 3 sit half a unit inside the grid
    out.push(Subject {
        name: "indicator[0,1]".into(),
        f: chi,
        margin: Some(rat(5, 2)),
        checks,
    });
    if matches!(kind, SuiteKind::Thm2 | SuiteKind::Main) {
        let p = cfg.p_values.first().copied().unwrap_or(2.0);
        let check = if kind == SuiteKind::Thm2 {
            Check::Thm2 { p, n: 1 }
        } else {
            Check::Main { p }
        };
        out.push(Subject {
            name: "zero".into(),
            margin: None,
            f: StepFunction::zero(),
            checks: vec![(kind, check)],
        });
    }
    out
}

/// The corpus is drawn from one stream and each suite's sample points from
/// a stream of their own, so every suite sees the same functions.
fn corpus(kind: SuiteKind, cfg: &SuiteConfig) -> Vec<Subject> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let stream = SuiteKind::ALL
        .iter()
        .position(|&k| k == kind)
        .expect("listed kind") as u64
        + 1;
    let mut out = Vec::with_capacity(cfg.functions);
    for i in 0..cfg.functions {
        let f = cfg.generator.sample(&mut rng);
        let mut check_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        check_rng.set_stream((stream << 32) | i as u64);
        let checks = build_checks(kind, &f, &mut check_rng, cfg);
        out.push(Subject {
            name: format!("f{i}"),
            margin: None,
            f,
            checks: checks.into_iter().map(|c| (kind, c)).collect(),
        });
    }
    out
}

/// Subjects of several suites merged by name: fixtures first, then the
/// corpus, each in first-seen order.
fn merged_subjects(kinds: &[SuiteKind], cfg: &SuiteConfig) -> Vec<Subject> {
    let mut out: Vec<Subject> = Vec::new();
    let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let all = kinds
        .iter()
        .flat_map(|&k| fixtures(k, cfg))
        .chain(kinds.iter().flat_map(|&k| corpus(k, cfg)));
    for s in all {
        match index.get(&s.name) {
            Some(&i) => out[i].checks.extend(s.checks),
            None => {
                index.insert(s.name.clone(), out.len());
                out.push(s);
            }
        }
    }
    out
}

/// Covers the support with `subject.margin`, by default the support width.
/// Corpus sample points lie within half a support width of the support.
fn grid_for(subject: &Subject, width: &Rational) -> Result<Grid> {
    if subject.f.is_zero() {
        return Grid::uniform(int(0), int(1), width.clone());
    }
    Grid::covering(&subject.f, width, subject.margin.as_ref())
}

fn record(
    subject: &Subject,
    check: &Check,
    outcome: Result<VerifyOutcome>,
    refinements: u32,
) -> CaseRecord {
    match outcome {
        Ok(o) => {
            let keep_witness = o.status != Status::CertifiedPass;
            CaseRecord {
                subject: subject.name.clone(),
                check: check.label(),
                status: o.status.into(),
                margin: Some(o.margin),
                refinements,
                grid_width: o.grid_width,
                exact: check.exact(),
                witness: if keep_witness { o.witness } else { None },
                error: None,
            }
        }
        Err(e) => CaseRecord {
            subject: subject.name.clone(),
            check: check.label(),
            status: CaseStatus::Rejected,
            margin: None,
            refinements,
            grid_width: None,
            exact: check.exact(),
            witness: None,
            error: Some(e.to_string()),
        },
    }
}

fn run_subject(subject: &Subject, cfg: &SuiteConfig) -> Vec<(SuiteKind, CaseRecord)> {
    let attempt = |grid: &Result<Grid>, checks: &[usize]| -> Vec<(usize, Result<VerifyOutcome>)> {
        let order = checks
            .iter()
            .map(|&i| subject.checks[i].1.order())
            .max()
            .unwrap_or(1);
        let prepared = grid
            .clone()
            .and_then(|g| Ok((iterate_all(&subject.f, order, &g)?, g)));
        checks
            .iter()
            .map(|&i| {
                let outcome = match &prepared {
                    Ok((certs, grid)) => {
                        subject.checks[i].1.run(&subject.f, certs, grid, &cfg.main)
                    }
                    Err(e) => Err(e.clone()),
                };
                (i, outcome)
            })
            .collect()
    };

    let mut grid = grid_for(subject, &cfg.grid_width);
    let all: Vec<usize> = (0..subject.checks.len()).collect();
    let mut records: Vec<Option<CaseRecord>> = vec![None; subject.checks.len()];
    let mut pending = Vec::new();
    for (i, outcome) in attempt(&grid, &all) {
        if matches!(&outcome, Ok(o) if o.status == Status::Inconclusive) {
            pending.push(i);
        }
        records[i] = Some(record(subject, &subject.checks[i].1, outcome, 0));
    }
    let mut depth = 0;
    while !pending.is_empty() && depth < cfg.max_refinements {
        depth += 1;
        grid = grid.map(|g| g.refined());
        let mut still = Vec::new();
        for (i, outcome) in attempt(&grid, &pending) {
            if matches!(&outcome, Ok(o) if o.status == Status::Inconclusive) {
                still.push(i);
            }
            records[i] = Some(record(subject, &subject.checks[i].1, outcome, depth));
        }
        pending = still;
    }
    records
        .into_iter()
        .zip(&subject.checks)
        .map(|(r, (kind, _))| (*kind, r.expect("every check recorded")))
        .collect()
}

/// Runs one suite over the indicator fixtures and the seeded corpus.
pub fn run_suite(kind: SuiteKind, cfg: &SuiteConfig) -> SuiteReport {
    run_suites(&[kind], cfg)
        .pop()
        .expect("one report per suite")
}

/// Runs several suites over the same corpus, building the certificates of
/// each function once for all of them. Reports come back in `kinds` order.
pub fn run_suites(kinds: &[SuiteKind], cfg: &SuiteConfig) -> Vec<SuiteReport> {
    let subjects = merged_subjects(kinds, cfg);
    let tagged: Vec<(SuiteKind, CaseRecord)> = subjects
        .par_iter()
        .map(|s| run_subject(s, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    kinds
        .iter()
        .map(|&kind| {
            let records = tagged
                .iter()
                .filter(|(k, _)| *k == kind)
                .map(|(_, r)| r.clone())
                .collect();
            summarize(kind, records, cfg)
        })
        .collect()
}

fn summarize(kind: SuiteKind, records: Vec<CaseRecord>, cfg: &SuiteConfig) -> SuiteReport {
    let count = |s: CaseStatus| records.iter().filter(|r| r.status == s).count();
    let min_margin = records.iter().filter_map(|r| r.margin).reduce(f64::min);
    let min_abs_exact_margin = records
        .iter()
        .filter(|r| r.exact)
        .filter_map(|r| r.margin)
        .map(f64::abs)
        .reduce(f64::min);
    let mut warnings = Vec::new();
    if matches!(kind, SuiteKind::Main | SuiteKind::Thm2) {
        for &p in &cfg.p_values {
            if p < VALIDATED_P_MIN {
                warnings.push(format!(
                    "p = {p} is below the validated range p >= {VALIDATED_P_MIN}"
                ));
            }
        }
    }
    SuiteReport {
        suite: kind,
        cases: records.len(),
        certified_pass: count(CaseStatus::CertifiedPass),
        certified_without_refinement: records
            .iter()
            .filter(|r| r.status == CaseStatus::CertifiedPass && r.refinements == 0)
            .count(),
        inconclusive: count(CaseStatus::Inconclusive),
        violations: count(CaseStatus::Violation),
        rejected: count(CaseStatus::Rejected),
        min_margin,
        min_abs_exact_margin,
        max_refinements_used: records.iter().map(|r| r.refinements).max().unwrap_or(0),
        warnings,
        records,
    }
}
