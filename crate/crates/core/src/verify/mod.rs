//! One-sided verification of the pointwise, level-set and `L^p`
//! inequalities for `M^n`.
//!
//! Certified envelopes only bound `M^n f` from below, and every inequality
//! checked here has `M^n f` on the large side. A passing envelope is a proof
//! for the sampled points; a failing one proves nothing and is reported as
//! [`Status::Inconclusive`]. [`Status::Violation`] is only produced from the
//! exact order-1 evaluator.
//!
//! Two further lower bounds for `M^n f` are used alongside the envelope:
//! `M^n f ≥ Mf` pointwise (maximal functions are lower semicontinuous, so
//! `Mg ≥ g` everywhere for `g = M^{k} f`), and the exact tail
//! `Mf(x) ≥ ∫f / (2 dist(x, far end of supp f))` outside the grid.

pub mod corpus;
pub mod search;
pub mod suite;

use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::gfun;
use crate::maximal::{eval_point, iterate_all, CertifiedLowerStep, Grid, MaximalKind};
use crate::stepfn::{format_rational, int, to_f64, Rational, StepFunction};

/// Absolute slack allowed in every comparison.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    CertifiedPass,
    Inconclusive,
    Violation,
}

/// Where the smallest slack was observed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// The function in `stepfn v1` format.
    pub function: String,
    pub point: Option<String>,
    pub level: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub status: Status,
    /// Smallest `lhs - rhs` observed.
    pub margin: f64,
    pub witness: Option<Witness>,
    /// Grid width used, when an envelope was involved.
    pub grid_width: Option<f64>,
    /// Number of grid halvings before this outcome.
    pub refinements: u32,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.status == Status::CertifiedPass
    }
}

/// Running minimum of `lhs - rhs` over a set of comparisons.
struct Tally {
    margin: f64,
    witness: Option<Witness>,
    exact: bool,
}

impl Tally {
    fn new(exact: bool) -> Self {
        Self {
            margin: f64::INFINITY,
            witness: None,
            exact,
        }
    }

    fn record(
        &mut self,
        f: &StepFunction,
        point: Option<&Rational>,
        level: Option<&Rational>,
        lhs: f64,
        rhs: f64,
    ) {
        let margin = lhs - rhs;
        if margin < self.margin || self.witness.is_none() {
            self.margin = margin;
            self.witness = Some(Witness {
                function: f.to_text(),
                point: point.map(format_rational),
                level: level.map(format_rational),
                lhs,
                rhs,
            });
        }
    }

    /// Records an exactly computed margin.
    fn record_exact(&mut self, f: &StepFunction, point: &Rational, lhs: &Rational, rhs: &Rational) {
        let margin = to_f64(&(lhs - rhs));
        if margin < self.margin || self.witness.is_none() {
            self.margin = margin;
            self.witness = Some(Witness {
                function: f.to_text(),
                point: Some(format_rational(point)),
                level: None,
                lhs: to_f64(lhs),
                rhs: to_f64(rhs),
            });
        }
    }

    fn finish(self, grid: Option<&Grid>) -> VerifyOutcome {
        let failed = self.margin < -SLACK;
        let status = match (failed, self.exact) {
            (false, _) => Status::CertifiedPass,
            (true, true) => Status::Violation,
            (true, false) => Status::Inconclusive,
        };
        VerifyOutcome {
            status,
            margin: if self.margin.is_finite() {
                self.margin
            } else {
                0.0
            },
            // the witness is kept for failures and for the tightest pass
            witness: self.witness,
            grid_width: grid.and_then(|g| g.width()).map(to_f64),
            refinements: 0,
        }
    }
}

fn certificates(f: &StepFunction, n: usize, grid: &Grid) -> Result<Vec<CertifiedLowerStep>> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    iterate_all(f, n, grid)
}

/// Best certified lower bound for `M^n f(x)` from an order-`n` envelope.
fn iterate_lower(f: &StepFunction, cert: &CertifiedLowerStep, x: &Rational) -> f64 {
    let env = cert.lower_at(x);
    let exact = eval_point(f, x, MaximalKind::Centered);
    to_f64(&env.max(exact))
}

/// `M^n f ≥ γ_n M_L f` at each sample point.
pub fn verify_lemma5(
    f: &StepFunction,
    n: usize,
    points: &[Rational],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    let certs = certificates(f, n, grid)?;
    lemma5_with(f, n, points, &certs, grid)
}

pub(crate) fn lemma5_with(
    f: &StepFunction,
    n: usize,
    points: &[Rational],
    certs: &[CertifiedLowerStep],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if n == 1 {
        let mut tally = Tally::new(true);
        for x in points {
            let lhs = eval_point(f, x, MaximalKind::Centered);
            let rhs = eval_point(f, x, MaximalKind::Left) / int(2);
            tally.record_exact(f, x, &lhs, &rhs);
        }
        return Ok(tally.finish(None));
    }
    let gamma = gfun::gamma(n)?;
    let cert = certs.get(n - 1).ok_or(Error::InvalidOrder(n))?;
    let mut tally = Tally::new(false);
    for x in points {
        let lhs = iterate_lower(f, cert, x);
        let rhs = gamma * to_f64(&eval_point(f, x, MaximalKind::Left));
        tally.record(f, Some(x), None, lhs, rhs);
    }
    Ok(tally.finish(Some(grid)))
}

/// `M^n f(y) ≥ F(x, h) g_n((y - x)/h)` for every `y ≥ x`, with
/// `F(x, h)` the mean of `f` over `[x - h, x]`.
pub fn verify_growth(
    f: &StepFunction,
    x: &Rational,
    h: &Rational,
    n: usize,
    ys: &[Rational],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    let certs = certificates(f, n, grid)?;
    growth_with(f, x, h, n, ys, &certs, grid)
}

pub(crate) fn growth_with(
    f: &StepFunction,
    x: &Rational,
    h: &Rational,
    n: usize,
    ys: &[Rational],
    certs: &[CertifiedLowerStep],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if *h <= int(0) {
        return Err(Error::OutOfRange(format!(
            "width h = {} must be positive",
            format_rational(h)
        )));
    }
    if let Some(y) = ys.iter().find(|y| *y < x) {
        return Err(Error::OutOfRange(format!(
            "point y = {} lies left of x",
            format_rational(y)
        )));
    }
    let left_mean = to_f64(&f.average(&(x - h), x)?);
    let mut tally = Tally::new(n == 1);
    for y in ys {
        let t = to_f64(&((y - x) / h));
        let rhs = left_mean * gfun::g_closed(n, t)?;
        let lhs = if n == 1 {
            to_f64(&eval_point(f, y, MaximalKind::Centered))
        } else {
            iterate_lower(f, certs.get(n - 1).ok_or(Error::InvalidOrder(n))?, y)
        };
        tally.record(f, Some(y), None, lhs, rhs);
    }
    Ok(tally.finish((n > 1).then_some(grid)))
}

/// `|{M^n f > λ}| ≥ (γ_n/λ) ∫_{f > λ} f`.
pub fn verify_lemma7(
    f: &StepFunction,
    n: usize,
    lambda: &Rational,
    grid: &Grid,
) -> Result<VerifyOutcome> {
    let certs = certificates(f, n, grid)?;
    lemma7_with(f, n, lambda, &certs, grid)
}

pub(crate) fn lemma7_with(
    f: &StepFunction,
    n: usize,
    lambda: &Rational,
    certs: &[CertifiedLowerStep],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if *lambda <= int(0) {
        return Err(Error::OutOfRange(format!(
            "level {} must be positive",
            format_rational(lambda)
        )));
    }
    let cert = certs.get(n - 1).ok_or(Error::InvalidOrder(n))?;
    let lhs = to_f64(&cert.level_measure_lower(lambda)?);
    let rhs = gfun::gamma(n)? / to_f64(lambda) * to_f64(&f.integral_over_superlevel(lambda)?);
    let mut tally = Tally::new(false);
    tally.record(f, None, Some(lambda), lhs, rhs);
    Ok(tally.finish(Some(grid)))
}

fn reject_zero(f: &StepFunction) -> Result<()> {
    if f.is_zero() {
        Err(Error::Degenerate("‖f‖_p = 0".into()))
    } else {
        Ok(())
    }
}

/// `‖M^n f‖_p ≥ (γ_n p/(p-1))^{1/p} ‖f‖_p`.
pub fn verify_thm2(f: &StepFunction, p: f64, n: usize, grid: &Grid) -> Result<VerifyOutcome> {
    reject_zero(f)?;
    let certs = certificates(f, n, grid)?;
    thm2_with(f, p, n, &certs, grid)
}

pub(crate) fn thm2_with(
    f: &StepFunction,
    p: f64,
    n: usize,
    certs: &[CertifiedLowerStep],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    reject_zero(f)?;
    let constant = bounds::iterated_constant(p, n)?;
    let cert = certs.get(n - 1).ok_or(Error::InvalidOrder(n))?;
    let lhs = cert.lp_norm_lower(p)?;
    let rhs = constant * f.lp_norm_p(p)?;
    let mut tally = Tally::new(false);
    tally.record(f, None, None, lhs, rhs);
    Ok(tally.finish(Some(grid)))
}

/// Parameters for the `ε_p` used by [`verify_main`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MainConfig {
    pub c1: f64,
    pub n_max: usize,
}

impl Default for MainConfig {
    fn default() -> Self {
        Self {
            c1: bounds::DEFAULT_C1,
            n_max: 500,
        }
    }
}

/// The ratio `‖Mf‖_p / ‖f‖_p` must clear; for `p < 2` the order-1
/// iterated constant is also a valid floor and the larger one is used.
pub fn main_threshold(p: f64, config: &MainConfig) -> Result<f64> {
    let ap = bounds::ap_upper(p, config.c1)?;
    let eps = bounds::best_n(p, ap, config.n_max)?.map_or(0.0, |(_, e)| e);
    let iz = bounds::iz_constant(p).unwrap_or(0.0);
    Ok((1.0 + eps).max(iz))
}

/// `‖Mf‖_p ≥ (1 + ε_p)‖f‖_p`.
pub fn verify_main(
    f: &StepFunction,
    p: f64,
    config: &MainConfig,
    grid: &Grid,
) -> Result<VerifyOutcome> {
    reject_zero(f)?;
    let certs = certificates(f, 1, grid)?;
    main_with(f, p, config, &certs, grid)
}

pub(crate) fn main_with(
    f: &StepFunction,
    p: f64,
    config: &MainConfig,
    certs: &[CertifiedLowerStep],
    grid: &Grid,
) -> Result<VerifyOutcome> {
    reject_zero(f)?;
    let threshold = main_threshold(p, config)?;
    let lhs = certs
        .first()
        .ok_or(Error::InvalidOrder(1))?
        .lp_norm_lower(p)?;
    let rhs = threshold * f.lp_norm_p(p)?;
    let mut tally = Tally::new(false);
    tally.record(f, None, None, lhs, rhs);
    Ok(tally.finish(Some(grid)))
}
