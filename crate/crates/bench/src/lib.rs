//! Fixed inputs shared by the benchmarks.

use maxbound_core::maximal::Grid;
use maxbound_core::stepfn::{rat, StepFunction};

/// A staircase with `pieces` unit-width steps of decreasing height.
pub fn staircase(pieces: usize) -> StepFunction {
    let bps = (0..=pieces as i64).map(|k| rat(k, 1)).collect();
    let values = (0..pieces as i64)
        .map(|k| rat(2 * pieces as i64 - k, 4))
        .collect();
    StepFunction::new(bps, values).expect("valid staircase")
}

/// Uniform grid of width `1/denominator` covering `f` with the default margin.
pub fn grid(f: &StepFunction, denominator: i64) -> Grid {
    Grid::covering(f, &rat(1, denominator), None).expect("grid covers f")
}
