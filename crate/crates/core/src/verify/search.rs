//! Empirical search for step functions with small `‖Mf‖_p / ‖f‖_p`.
//!
//! Nothing here is certified. `‖Mf‖_p^p` is estimated by adaptive Simpson
//! quadrature of the exact pointwise `Mf` between breakpoints, plus an
//! exact power-law tail far from the support.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::maximal::{FloatProfile, Side};
use crate::quad::adaptive_simpson_ends;
use crate::stepfn::{from_f64, StepFunction};

use super::{main_threshold, MainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub p: f64,
    pub pieces: usize,
    /// Total number of ratio evaluations, restarts included.
    pub iterations: usize,
    pub seed: u64,
    /// Initial log-scale perturbation for piece lengths.
    pub gap_step: f64,
    /// Initial log-scale perturbation for piece values.
    pub value_step: f64,
    /// Relative quadrature tolerance.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            pieces: 8,
            iterations: 2000,
            seed: 42,
            gap_step: 0.5,
            value_step: 0.5,
            tol: 1e-8,
        }
    }
}

/// Quadrature bookkeeping behind one ratio estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub mf_norm_pow: f64,
    pub f_norm_pow: f64,
    pub evaluations: usize,
    /// Where the exact power-law tails take over, relative to the support.
    pub right_tail_from: f64,
    pub left_tail_from: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub restart: usize,
    pub ratio: f64,
    pub best: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    /// Always `"empirical"`: the ratio is a quadrature estimate.
    pub label: &'static str,
    pub config: SearchConfig,
    pub min_ratio: f64,
    /// The minimizer in `stepfn v1` format.
    pub best_function: String,
    pub best_lengths: Vec<f64>,
    pub best_values: Vec<f64>,
    pub best_estimate: RatioEstimate,
    /// Largest proven lower constant for the ratio at this `p`.
    pub floor: f64,
    pub above_floor: bool,
    pub total_quadrature_evaluations: usize,
    pub restarts: usize,
    pub trace: Vec<TraceEntry>,
}

fn profile(lengths: &[f64], values: &[f64]) -> FloatProfile {
    let mut bps = Vec::with_capacity(lengths.len() + 1);
    let mut x = 0.0;
    bps.push(x);
    for l in lengths {
        x += l;
        bps.push(x);
    }
    FloatProfile::new(bps, values.to_vec())
}

/// Estimates `‖Mf‖_p / ‖f‖_p` for a nonzero step function.
pub fn estimate_ratio(f: &FloatProfile, p: f64, tol: f64) -> Result<RatioEstimate> {
    if !(p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let bps = f.breakpoints();
    if bps.len() < 2 || f.mass() <= 0.0 {
        return Err(Error::Degenerate("zero function".into()));
    }
    let (x0, xm) = (bps[0], bps[bps.len() - 1]);
    let width = xm - x0;
    let mass = f.mass();
    let f_norm_pow = f.lp_norm_pow(p);
    let abs_tol = tol * f_norm_pow;
    let power = |x: f64| f.centered(x, Side::Mean).powf(p);
    let mut total = 0.0;
    let mut evaluations = 0;
    let mut integrate = |a: f64, b: f64, fa: f64, fb: f64, share: f64| {
        let q = adaptive_simpson_ends(power, a, b, fa, fb, abs_tol * share);
        total += q.value;
        evaluations += q.evaluations + 2;
    };

    for w in bps.windows(2) {
        let fa = f.centered(w[0], Side::Right).powf(p);
        let fb = f.centered(w[1], Side::Left).powf(p);
        integrate(w[0], w[1], fa, fb, (w[1] - w[0]) / width);
    }

    // On x ≥ x_m, Mf(x) = max_j (mass - I(x_j)) / (2(x - x_j)); beyond the
    // last crossing only j = 0 matters.
    let cum = f.cumulative();
    let right_from = (1..bps.len() - 1)
        .filter(|&j| cum[j] > 0.0)
        .map(|j| (mass * bps[j] - (mass - cum[j]) * x0) / cum[j])
        .fold(xm, f64::max)
        .min(xm + 1e6 * width);
    let left_from = (1..bps.len() - 1)
        .filter(|&j| mass - cum[j] > 0.0)
        .map(|j| (mass * bps[j] - cum[j] * xm) / (mass - cum[j]))
        .fold(x0, f64::min)
        .max(x0 - 1e6 * width);

    for (start, end, sign) in [(xm, right_from, 1.0), (x0, left_from, -1.0)] {
        let mut a = start;
        let mut fa = f
            .centered(start, if sign > 0.0 { Side::Right } else { Side::Left })
            .powf(p);
        let mut step = width / 64.0;
        while (end - a) * sign > 0.0 {
            let b = if ((end - a) * sign) <= step {
                end
            } else {
                a + sign * step
            };
            let fb = power(b);
            let (lo, hi, flo, fhi) = if sign > 0.0 {
                (a, b, fa, fb)
            } else {
                (b, a, fb, fa)
            };
            integrate(lo, hi, flo, fhi, 1.0);
            a = b;
            fa = fb;
            step *= 2.0;
        }
    }
    let half_mass_p = (mass / 2.0).powf(p);
    total += half_mass_p * (right_from - x0).powf(1.0 - p) / (p - 1.0);
    total += half_mass_p * (xm - left_from).powf(1.0 - p) / (p - 1.0);

    Ok(RatioEstimate {
        ratio: (total / f_norm_pow).powf(1.0 / p),
        mf_norm_pow: total,
        f_norm_pow,
        evaluations,
        right_tail_from: (right_from - xm) / width,
        left_tail_from: (x0 - left_from) / width,
    })
}

/// Seeded restarts of a coordinate-perturbation local search over piece
/// lengths and values (both on a log scale).
pub fn extremal_search(config: &SearchConfig) -> Result<SearchResult> {
    if config.pieces == 0 {
        return Err(Error::OutOfRange("pieces must be at least 1".into()));
    }
    if config.iterations == 0 {
        return Err(Error::OutOfRange("iterations must be at least 1".into()));
    }
    if !(config.p > 1.0) {
        return Err(Error::InvalidExponent(config.p));
    }
    let m = config.pieces;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let restarts = (config.iterations / 500).clamp(1, 8);
    let per_restart = config.iterations / restarts;

    let mut trace = Vec::with_capacity(config.iterations);
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, RatioEstimate)> = None;
    let mut total_evals = 0usize;
    let mut iteration = 0usize;

    for restart in 0..restarts {
        let budget = if restart + 1 == restarts {
            config.iterations - iteration
        } else {
            per_restart
        };
        let mut lengths: Vec<f64> = (0..m).map(|_| rng.gen_range(0.25..2.0)).collect();
        let mut values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.25..2.0)).collect();
        let mut steps: Vec<f64> = (0..2 * m)
            .map(|i| {
                if i < m {
                    config.gap_step
                } else {
                    config.value_step
                }
            })
            .collect();
        let mut current = estimate_ratio(&profile(&lengths, &values), config.p, config.tol)?;
        total_evals += current.evaluations;
        iteration += 1;
        let record_best = |est: &RatioEstimate, l: &[f64], v: &[f64], best: &mut Option<_>| {
            if best.as_ref().map_or(
                true,
                |(b, ..): &(f64, Vec<f64>, Vec<f64>, RatioEstimate)| est.ratio < *b,
            ) {
                *best = Some((est.ratio, l.to_vec(), v.to_vec(), *est));
            }
        };
        record_best(&current, &lengths, &values, &mut best);
        trace.push(TraceEntry {
            iteration,
            restart,
            ratio: current.ratio,
            best: best.as_ref().unwrap().0,
            accepted: true,
        });

        for _ in 1..budget {
            let coord = rng.gen_range(0..2 * m);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let factor = (sign * steps[coord]).exp();
            let (mut tl, mut tv) = (lengths.clone(), values.clone());
            if coord < m {
                tl[coord] = (tl[coord] * factor).clamp(1e-6, 1e6);
            } else {
                tv[coord - m] = (tv[coord - m] * factor).clamp(1e-6, 1e6);
            }
            let trial = estimate_ratio(&profile(&tl, &tv), config.p, config.tol)?;
            total_evals += trial.evaluations;
            iteration += 1;
            let accepted = trial.ratio < current.ratio;
            if accepted {
                lengths = tl;
                values = tv;
                current = trial;
                steps[coord] = (steps[coord] * 1.5).min(2.0);
                record_best(&current, &lengths, &values, &mut best);
            } else {
                steps[coord] = (steps[coord] * 0.8).max(1e-3);
            }
            trace.push(TraceEntry {
                iteration,
                restart,
                ratio: trial.ratio,
                best: best.as_ref().unwrap().0,
                accepted,
            });
        }
    }

    let (min_ratio, lengths, values, estimate) = best.expect("at least one evaluation");
    let prof = profile(&lengths, &values);
    let best_function = StepFunction::new(
        prof.breakpoints().iter().map(|&x| from_f64(x)).collect(),
        values.iter().map(|&v| from_f64(v)).collect(),
    )?
    .to_text();
    let floor = main_threshold(config.p, &MainConfig::default())?
        .max(bounds::iz_constant(config.p).unwrap_or(0.0));
    Ok(SearchResult {
        label: "empirical",
        config: config.clone(),
        min_ratio,
        best_function,
        best_lengths: lengths,
        best_values: values,
        best_estimate: estimate,
        floor,
        above_floor: min_ratio >= floor - 1e-6,
        total_quadrature_evaluations: total_evals,
        restarts,
        trace,
    })
}
