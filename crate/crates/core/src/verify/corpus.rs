//! Seeded random step functions and sample points.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::stepfn::{int, rat, Rational, StepFunction};

/// Shape of the random step functions. Breakpoints are multiples of
/// `1/gap_denominator` and values multiples of `1/value_denominator`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomStepConfig {
    pub min_pieces: usize,
    pub max_pieces: usize,
    pub gap_denominator: i64,
    pub max_gap_units: i64,
    /// Left end drawn from `[-start_units, start_units] / gap_denominator`.
    pub start_units: i64,
    pub value_denominator: i64,
    pub min_value_units: i64,
    pub max_value_units: i64,
}

impl Default for RandomStepConfig {
    fn default() -> Self {
        Self {
            min_pieces: 1,
            max_pieces: 8,
            gap_denominator: 16,
            max_gap_units: 8,
            start_units: 32,
            value_denominator: 8,
            min_value_units: 1,
            max_value_units: 32,
        }
    }
}

impl RandomStepConfig {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> StepFunction {
        let pieces = rng.gen_range(self.min_pieces..=self.max_pieces);
        let mut x = rng.gen_range(-self.start_units..=self.start_units);
        let mut bps = vec![rat(x, self.gap_denominator)];
        let mut values = Vec::with_capacity(pieces);
        for _ in 0..pieces {
            x += rng.gen_range(1..=self.max_gap_units);
            bps.push(rat(x, self.gap_denominator));
            values.push(rat(
                rng.gen_range(self.min_value_units..=self.max_value_units),
                self.value_denominator,
            ));
        }
        StepFunction::new(bps, values).expect("generator respects step-function invariants")
    }
}

const POINT_BITS: u32 = 20;

/// A dyadic point `lo + (hi - lo)(u + 1/2)/2^20`, which never falls on a
/// uniform grid node of width `≥ 2^-16` when `lo, hi` are multiples of
/// `1/16`.
pub fn sample_point(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    let u: i64 = rng.gen_range(0..(1i64 << POINT_BITS));
    lo + (hi - lo) * rat(2 * u + 1, 1i64 << (POINT_BITS + 1))
}

/// Points spread over `supp f` widened by half its width on each side.
pub fn sample_points(rng: &mut ChaCha8Rng, f: &StepFunction, count: usize) -> Vec<Rational> {
    let Some((x0, xm)) = f.support() else {
        return Vec::new();
    };
    let half = (xm - x0) / int(2);
    let (lo, hi) = (x0 - &half, xm + &half);
    let mut pts: Vec<Rational> = (0..count).map(|_| sample_point(rng, &lo, &hi)).collect();
    pts.sort();
    pts
}

/// Levels for the level-set check: every distinct value, the midpoints
/// between consecutive distinct values, and half the smallest value.
pub fn value_levels(f: &StepFunction) -> Vec<Rational> {
    let mut vals: Vec<Rational> = f.values().to_vec();
    vals.sort();
    vals.dedup();
    let mut out = Vec::with_capacity(2 * vals.len());
    if let Some(first) = vals.first() {
        out.push(first / int(2));
    }
    for (i, v) in vals.iter().enumerate() {
        out.push(v.clone());
        if let Some(next) = vals.get(i + 1) {
            out.push((v + next) / int(2));
        }
    }
    out
}
