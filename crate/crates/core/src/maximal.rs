//! Centered, left and uncentered maximal functions of step functions.
//!
//! Pointwise values are exact. For a fixed centre the average over a ball is
//! `β/2 + α/(2r)` between consecutive radii at which an endpoint crosses a
//! breakpoint, so it is monotone there and the supremum is attained at one
//! of those radii or in the small-radius limit. The same holds for the
//! left and uncentered variants in each free endpoint.
//!
//! Iterates `M^n f` are not step functions. They are handled through
//! [`CertifiedLowerStep`]: a step function on a grid that is guaranteed to
//! lie below `M^n f` inside every grid cell.

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepfn::{
    format_rational, from_f64, int, to_f64, PrefixIntegral, Rational, StepFunction,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaximalKind {
    Centered,
    Left,
    Uncentered,
}

/// Exact `Mf(x)`, `M_L f(x)` or `M_u f(x)`.
///
/// At a breakpoint of `f` the small-radius limit is the mean of the adjacent
/// values for the centered operator, the left value for the left operator
/// and the larger one-sided value for the uncentered operator.
pub fn eval_point(f: &StepFunction, x: &Rational, kind: MaximalKind) -> Rational {
    if f.is_zero() {
        return Rational::zero();
    }
    let prefix = f.prefix();
    match kind {
        MaximalKind::Centered => centered(f, &prefix, x),
        MaximalKind::Left => left(f, &prefix, x),
        MaximalKind::Uncentered => uncentered(f, &prefix, x),
    }
}

fn centered(f: &StepFunction, prefix: &PrefixIntegral, x: &Rational) -> Rational {
    let mut best = f.value_at(x);
    for xj in f.breakpoints() {
        let r = (x - xj).abs();
        if r.is_zero() {
            continue;
        }
        let avg = (prefix.eval(&(x + &r)) - prefix.eval(&(x - &r))) / (int(2) * &r);
        if avg > best {
            best = avg;
        }
    }
    best
}

fn left(f: &StepFunction, prefix: &PrefixIntegral, x: &Rational) -> Rational {
    let mut best = f.left_limit(x);
    let ix = prefix.eval(x);
    for (xj, ij) in f.breakpoints().iter().zip(prefix.cumulative()) {
        if xj >= x {
            break;
        }
        let avg = (&ix - ij) / (x - xj);
        if avg > best {
            best = avg;
        }
    }
    best
}

fn uncentered(f: &StepFunction, prefix: &PrefixIntegral, x: &Rational) -> Rational {
    let mut best = f.left_limit(x).max(f.right_limit(x));
    let ix = prefix.eval(x);
    let mut lefts: Vec<(&Rational, Rational)> = vec![(x, ix.clone())];
    let mut rights: Vec<(&Rational, Rational)> = vec![(x, ix)];
    for (xj, ij) in f.breakpoints().iter().zip(prefix.cumulative()) {
        if xj <= x {
            lefts.push((xj, ij.clone()));
        }
        if xj >= x {
            rights.push((xj, ij.clone()));
        }
    }
    for (u, iu) in &lefts {
        for (v, iv) in &rights {
            if v > u {
                let avg = (iv - iu) / (*v - *u);
                if avg > best {
                    best = avg;
                }
            }
        }
    }
    best
}

/// Closed forms for `f = χ_[0,1]`.
pub fn indicator_oracle(x: f64, kind: MaximalKind) -> f64 {
    match kind {
        MaximalKind::Centered => {
            if x >= 1.0 {
                1.0 / (2.0 * x)
            } else if x <= 0.0 {
                1.0 / (2.0 * (1.0 - x))
            } else {
                1.0
            }
        }
        MaximalKind::Left => {
            if x <= 0.0 {
                0.0
            } else if x <= 1.0 {
                1.0
            } else {
                1.0 / x
            }
        }
        MaximalKind::Uncentered => {
            if x >= 1.0 {
                1.0 / x
            } else if x <= 0.0 {
                1.0 / (1.0 - x)
            } else {
                1.0
            }
        }
    }
}

/// Strictly increasing nodes `c_0 < … < c_N`; cells are `[c_i, c_{i+1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    nodes: Vec<Rational>,
    width: Option<Rational>,
}

impl Grid {
    pub fn new(nodes: Vec<Rational>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::EmptyGrid);
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasingBreakpoints(i + 1));
        }
        Ok(Self { nodes, width: None })
    }

    /// Nodes `lo, lo + w, …, hi`; `hi - lo` must be a positive multiple of `w`.
    pub fn uniform(lo: Rational, hi: Rational, width: Rational) -> Result<Self> {
        if !width.is_positive() || hi <= lo {
            return Err(Error::EmptyGrid);
        }
        let cells = (&hi - &lo) / &width;
        if !cells.is_integer() {
            return Err(Error::OutOfRange(format!(
                "grid span {} is not a multiple of width {}",
                format_rational(&(&hi - &lo)),
                format_rational(&width)
            )));
        }
        let n = cells
            .to_integer()
            .to_usize()
            .ok_or_else(|| Error::OutOfRange("grid too large".into()))?;
        let nodes = (0..=n).map(|i| &lo + &width * int(i as i64)).collect();
        Ok(Self {
            nodes,
            width: Some(width),
        })
    }

    /// Uniform grid of the given width containing `supp f` extended by
    /// `margin` on each side (default: the support width), with the ends
    /// snapped outward to multiples of `width`.
    pub fn covering(f: &StepFunction, width: &Rational, margin: Option<&Rational>) -> Result<Self> {
        let (x0, xm) = f
            .support()
            .ok_or_else(|| Error::Degenerate("zero function has no support".into()))?;
        let support_width = xm - x0;
        let margin = margin.cloned().unwrap_or(support_width);
        let lo = ((x0 - &margin) / width).floor() * width;
        let hi = ((xm + &margin) / width).ceil() * width;
        let grid = Self::uniform(lo, hi, width.clone())?;
        grid.check_refines(f)?;
        Ok(grid)
    }

    pub fn nodes(&self) -> &[Rational] {
        &self.nodes
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Cell width for uniform grids.
    pub fn width(&self) -> Option<&Rational> {
        self.width.as_ref()
    }

    pub fn span(&self) -> (&Rational, &Rational) {
        (&self.nodes[0], &self.nodes[self.nodes.len() - 1])
    }

    /// Every cell split in half.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0].clone());
            nodes.push((&w[0] + &w[1]) / int(2));
        }
        nodes.push(self.nodes[self.nodes.len() - 1].clone());
        Self {
            nodes,
            width: self.width.as_ref().map(|w| w / int(2)),
        }
    }

    /// Checks that the grid covers `supp g` and contains every breakpoint.
    pub fn check_refines(&self, g: &StepFunction) -> Result<()> {
        let Some((x0, xm)) = g.support() else {
            return Ok(());
        };
        let (lo, hi) = self.span();
        if x0 < lo || xm > hi {
            return Err(Error::GridNotCovering);
        }
        for x in g.breakpoints() {
            if self.nodes.binary_search(x).is_err() {
                return Err(Error::GridNotRefining(format_rational(x)));
            }
        }
        Ok(())
    }

    /// `(lo, w)` as doubles when both are exact doubles, which enables the
    /// floating-point envelope kernel.
    fn float_layout(&self) -> Option<(f64, f64)> {
        let w = self.width.as_ref()?;
        let (wf, lof) = (to_f64(w), to_f64(&self.nodes[0]));
        (from_f64(wf) == *w && from_f64(lof) == self.nodes[0]).then_some((lof, wf))
    }
}

/// Lower bound for `Mf` off the support `[x0, xm]` of `f`: with `m = ∫f`,
/// `Mf(x) ≥ m / (2 (x - x0))` for `x ≥ xm` and `Mf(x) ≥ m / (2 (xm - x))` for
/// `x ≤ x0`. Every iterate inherits it because `M^k f ≥ Mf`.
#[derive(Clone, Debug)]
struct Tail {
    mass: Rational,
    x0: Rational,
    xm: Rational,
}

impl Tail {
    fn of(f: &StepFunction) -> Option<Self> {
        let (x0, xm) = f.support()?;
        Some(Self {
            mass: f.mass(),
            x0: x0.clone(),
            xm: xm.clone(),
        })
    }

    fn at(&self, x: &Rational) -> Option<Rational> {
        if *x >= self.xm {
            Some(&self.mass / (int(2) * (x - &self.x0)))
        } else if *x <= self.x0 {
            Some(&self.mass / (int(2) * (&self.xm - x)))
        } else {
            None
        }
    }

    /// `|{x ∉ [lo, hi] : tail(x) > λ}|` for `λ > 0`.
    fn level_measure_outside(&self, lambda: &Rational, lo: &Rational, hi: &Rational) -> Rational {
        let reach = &self.mass / (int(2) * lambda);
        let right = (&self.x0 + &reach - hi).max(Rational::zero());
        let left = (lo - (&self.xm - &reach)).max(Rational::zero());
        right + left
    }

    /// Lower bound for `∫_{x ∉ [lo, hi]} tail(x)^p dx`, `p > 1`.
    fn lp_pow_outside(&self, p: f64, lo: &Rational, hi: &Rational) -> f64 {
        let half_mass = down(&self.mass) / 2.0;
        let piece = |reach: f64| half_mass.powf(p) * reach.powf(1.0 - p) / (p - 1.0);
        (piece(up(&(hi - &self.x0))) + piece(up(&(&self.xm - lo)))) * (1.0 - 1e-12)
    }

    fn float(&self, lo: &Rational, hi: &Rational) -> FloatTail {
        FloatTail {
            half_mass: down(&self.mass) / 2.0,
            right: up(&(hi - &self.x0)),
            left: up(&(&self.xm - lo)),
        }
    }
}

/// [`Tail`] integrated over `m` cells of width `w` past either grid end.
struct FloatTail {
    half_mass: f64,
    right: f64,
    left: f64,
}

impl FloatTail {
    fn integral(&self, base: f64, m: i64, w: f64) -> f64 {
        if m <= 0 {
            return 0.0;
        }
        self.half_mass * (m as f64 * w / base).ln_1p() * (1.0 - 1e-14)
    }
}

/// Largest double `≤ x`.
fn down(x: &Rational) -> f64 {
    let y = to_f64(x);
    if from_f64(y) > *x {
        y.next_down()
    } else {
        y
    }
}

/// Smallest double `≥ x`.
fn up(x: &Rational) -> f64 {
    let y = to_f64(x);
    if from_f64(y) < *x {
        y.next_up()
    } else {
        y
    }
}

/// Per-cell lower bounds for `M^order(base)` on a grid.
///
/// Cell values are doubles, hence exact dyadic rationals. Each one bounds
/// `M^order(base)` from below on the open cell, and on the closed cell when
/// the cell avoids the open support of `base`: there the piece value of
/// `base` is zero, every candidate average is valid up to the cell ends, and
/// `M^(k+1) f ≥ M^k f` holds everywhere for `k ≥ 1` because `M^k f` is lower
/// semicontinuous. Outside the grid, and outside the support of
/// `base`, the bound `∫base / (2 dist)` to the far end of the support is
/// used as well.
#[derive(Clone, Debug)]
pub struct CertifiedLowerStep {
    order: usize,
    base: StepFunction,
    grid: Grid,
    cells: Vec<f64>,
    tail: Option<Tail>,
}

impl CertifiedLowerStep {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &StepFunction {
        &self.base
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Lower bound on each grid cell.
    pub fn cell_lower_bounds(&self) -> &[f64] {
        &self.cells
    }

    /// The cell bounds as a step function supported on the grid span.
    pub fn envelope(&self) -> StepFunction {
        StepFunction::new(
            self.grid.nodes().to_vec(),
            self.cells.iter().map(|&v| from_f64(v)).collect(),
        )
        .expect("grid nodes are increasing and bounds are non-negative")
    }

    /// Certified lower bound for `M^order(base)(x)`.
    pub fn lower_at(&self, x: &Rational) -> Rational {
        let tail = self.tail.as_ref().and_then(|t| t.at(x));
        let nodes = self.grid.nodes();
        let (lo, hi) = self.grid.span();
        let cell = if x < lo || x > hi {
            None
        } else {
            match nodes.binary_search(x) {
                Ok(j) => {
                    let n = self.cells.len();
                    let closed = |c: usize| {
                        self.tail
                            .as_ref()
                            .is_some_and(|t| nodes[c + 1] <= t.x0 || nodes[c] >= t.xm)
                    };
                    let adjacent = [j.checked_sub(1), (j < n).then_some(j)];
                    let valid = adjacent
                        .iter()
                        .flatten()
                        .filter(|&&c| closed(c))
                        .map(|&c| self.cells[c])
                        .reduce(f64::max);
                    match (valid, adjacent) {
                        (Some(v), _) => Some(from_f64(v)),
                        (None, [Some(l), Some(r)]) => {
                            Some(from_f64(self.cells[l].min(self.cells[r])))
                        }
                        _ => None,
                    }
                }
                Err(j) => Some(from_f64(self.cells[j - 1])),
            }
        };
        match (cell, tail) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => Rational::zero(),
        }
    }

    /// Lower bound for `|{M^order(base) > λ}|`.
    pub fn level_measure_lower(&self, lambda: &Rational) -> Result<Rational> {
        if lambda.is_negative() {
            return Err(Error::NegativeLevel(format_rational(lambda)));
        }
        let lf = to_f64(lambda);
        let above = |v: f64| {
            if (v - lf).abs() <= 4.0 * f64::EPSILON * lf.abs() {
                from_f64(v) > *lambda
            } else {
                v > lf
            }
        };
        let nodes = self.grid.nodes();
        let mut measure = match self.grid.width() {
            Some(w) => w * int(self.cells.iter().filter(|&&v| above(v)).count() as i64),
            None => self
                .cells
                .iter()
                .enumerate()
                .filter(|(_, &v)| above(v))
                .fold(Rational::zero(), |acc, (i, _)| {
                    acc + (&nodes[i + 1] - &nodes[i])
                }),
        };
        if let (Some(tail), true) = (&self.tail, lambda.is_positive()) {
            let (lo, hi) = self.grid.span();
            measure += tail.level_measure_outside(lambda, lo, hi);
        }
        Ok(measure)
    }

    /// Lower bound for `‖M^order(base)‖_p^p`: the cell bounds plus the tails
    /// beyond the grid.
    pub fn lp_norm_pow_lower(&self, p: f64) -> Result<f64> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        let nodes = self.grid.nodes();
        let body: f64 = match self.grid.width() {
            Some(w) => self.cells.iter().map(|v| v.powf(p)).sum::<f64>() * down(w),
            None => self
                .cells
                .iter()
                .enumerate()
                .map(|(i, v)| v.powf(p) * down(&(&nodes[i + 1] - &nodes[i])))
                .sum(),
        };
        let tails = self.tail.as_ref().map_or(0.0, |t| {
            let (lo, hi) = self.grid.span();
            t.lp_pow_outside(p, lo, hi)
        });
        Ok(body * (1.0 - 1e-12) + tails)
    }

    pub fn lp_norm_lower(&self, p: f64) -> Result<f64> {
        Ok(self.lp_norm_pow_lower(p)?.powf(1.0 / p))
    }
}

/// Order-1 certificate for `Mg` on `grid`.
///
/// Each cell `[a, b]` receives the largest of the piece value of `g` on the
/// cell and the candidate averages `(I(a + r) - I(b - r)) / (2r)`, `r ≥ b - a`,
/// with `r` ranging over distances from `a` or `b` to breakpoints of `g`.
/// Since `[b - r, a + r] ⊆ [x - r, x + r]` for every `x` in the cell, each
/// candidate is at most `Mg(x)`.
///
/// On a uniform grid with double-exact layout the candidates are taken over
/// all multiples of the width (a superset of the above) and evaluated in
/// floating point with a rigorous downward correction; otherwise every
/// candidate is evaluated in exact rationals and rounded down.
pub fn certified_lower(g: &StepFunction, grid: &Grid) -> Result<CertifiedLowerStep> {
    Ok(iterate_all(g, 1, grid)?.pop().expect("one order"))
}

/// Certificates for `M f, M^2 f, …, M^n f`, each built from the previous
/// cell bounds on the same grid. From the second order on, the integrals
/// past the grid ends use the tail bound of `Mf`.
pub fn iterate_all(f: &StepFunction, n: usize, grid: &Grid) -> Result<Vec<CertifiedLowerStep>> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    grid.check_refines(f)?;
    let tail = Tail::of(f);
    let (lo, hi) = grid.span();
    let float_tail = tail.as_ref().map(|t| t.float(lo, hi));
    let layout = grid.float_layout();
    let mut out: Vec<CertifiedLowerStep> = Vec::with_capacity(n);
    for order in 1..=n {
        let cells = match (out.last(), layout) {
            _ if f.is_zero() => vec![0.0; grid.cells()],
            (None, Some((_, w))) => {
                let gv: Vec<f64> = cell_values(f, grid)
                    .into_iter()
                    .map(|v| v.map_or(0.0, down))
                    .collect();
                uniform_cells(&gv, w, None)
            }
            (Some(prev), Some((_, w))) => uniform_cells(&prev.cells, w, float_tail.as_ref()),
            (None, None) => exact_cells(f, grid).iter().map(down).collect(),
            (Some(prev), None) => exact_cells(&prev.envelope(), grid)
                .iter()
                .map(down)
                .collect(),
        };
        out.push(CertifiedLowerStep {
            order,
            base: f.clone(),
            grid: grid.clone(),
            cells,
            tail: tail.clone(),
        });
    }
    Ok(out)
}

/// Order-`n` certificate for `M^n f`.
pub fn iterate_certified(f: &StepFunction, n: usize, grid: &Grid) -> Result<CertifiedLowerStep> {
    Ok(iterate_all(f, n, grid)?.pop().expect("n >= 1"))
}

/// Value of `g` on each grid cell (the grid contains every breakpoint).
fn cell_values<'a>(g: &'a StepFunction, grid: &Grid) -> Vec<Option<&'a Rational>> {
    let nodes = grid.nodes();
    let bps = g.breakpoints();
    let mut out = Vec::with_capacity(grid.cells());
    let mut piece = 0usize;
    for a in &nodes[..grid.cells()] {
        while piece < bps.len() && bps[piece] <= *a {
            piece += 1;
        }
        // piece is the index of the first breakpoint > a
        if piece == 0 || piece == bps.len() {
            out.push(None);
        } else {
            out.push(Some(&g.values()[piece - 1]));
        }
    }
    out
}

fn exact_cells(g: &StepFunction, grid: &Grid) -> Vec<Rational> {
    let prefix = g.prefix();
    let nodes = grid.nodes();
    let pieces = cell_values(g, grid);
    (0..grid.cells())
        .into_par_iter()
        .map(|i| {
            let (a, b) = (&nodes[i], &nodes[i + 1]);
            let len = b - a;
            let mut best = pieces[i].cloned().unwrap_or_else(Rational::zero);
            let mut consider = |r: Rational| {
                if r >= len {
                    let avg = (prefix.eval(&(a + &r)) - prefix.eval(&(b - &r))) / (int(2) * &r);
                    if avg > best {
                        best = avg;
                    }
                }
            };
            consider(len.clone());
            for xj in g.breakpoints() {
                consider((a - xj).abs());
                consider((b - xj).abs());
            }
            best
        })
        .collect()
}

/// Every multiple up to `DENSE_RADII` cells, then geometric steps of ratio
/// `1 + 1/DENSE_RADII`. Since `I(a + r) - I(b - r)` is nondecreasing in `r`,
/// the skipped radii lose at most that ratio.
const DENSE_RADII: i64 = 1024;

fn next_radius(k: i64) -> i64 {
    if k < DENSE_RADII {
        k + 1
    } else {
        k + k / DENSE_RADII
    }
}

/// Cell bounds for `Mg` where `g ≥ gv[i]` on cell `i` of a uniform grid of
/// width `w`, and `g ≥ tail` beyond the grid when a tail is given.
fn uniform_cells(gv: &[f64], w: f64, tail: Option<&FloatTail>) -> Vec<f64> {
    const EPS: f64 = f64::EPSILON;
    let n = gv.len();
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    prefix.push(acc);
    for v in gv {
        acc += v * w;
        prefix.push(acc);
    }
    let total = acc;
    // bound on |prefix[i] - ∫ of gv up to node i| from the rounded sums
    let err = 2.0 * (n as f64 + 8.0) * EPS * total;
    let shrink = 1.0 - 8.0 * EPS;
    let ni = n as i64;
    let k_max = if tail.is_some() { 8 * (ni + 1) } else { ni + 1 };
    // tail integrals over the first m cells past each end
    let table = |base: fn(&FloatTail) -> f64| -> Vec<f64> {
        match tail {
            Some(t) => (0..=k_max).map(|m| t.integral(base(t), m, w)).collect(),
            None => vec![0.0; k_max as usize + 1],
        }
    };
    let (left_tail, right_tail) = (table(|t| t.left), table(|t| t.right));

    (0..ni)
        .into_par_iter()
        .map(|i| {
            let floor = gv[i as usize];
            let mut best = floor;
            let mut k = 0i64;
            while k < k_max {
                k = next_radius(k);
                let denom = 2.0 * k as f64 * w;
                let (lo, hi) = (i + 1 - k, i + k);
                let outer =
                    left_tail[(-lo).max(0) as usize] + right_tail[(hi - ni).max(0) as usize];
                if (total + 2.0 * err + outer) / denom <= best {
                    break;
                }
                let body = prefix[hi.min(ni) as usize] - prefix[lo.max(0) as usize];
                let cand = ((body - 2.0 * err).max(0.0) + outer) / denom * shrink;
                if cand > best {
                    best = cand;
                }
                if tail.is_none() && lo <= 0 && hi >= ni {
                    break;
                }
            }
            best
        })
        .collect()
}

/// Which one-sided limit to take at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Mean,
}

/// Double-precision view of a step function for fast, non-certified
/// evaluation of `Mf`.
#[derive(Clone, Debug)]
pub struct FloatProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl FloatProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(breakpoints.len(), values.len() + 1);
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for (v, w) in values.iter().zip(breakpoints.windows(2)) {
            acc += v * (w[1] - w[0]);
            cumulative.push(acc);
        }
        Self {
            breakpoints,
            values,
            cumulative,
        }
    }

    pub fn from_step(f: &StepFunction) -> Self {
        Self::new(
            f.breakpoints().iter().map(to_f64).collect(),
            f.values().iter().map(to_f64).collect(),
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `I(x_k)` at each breakpoint.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v.powf(p) * (w[1] - w[0]))
            .sum()
    }

    pub fn prefix(&self, x: f64) -> f64 {
        let bps = &self.breakpoints;
        if bps.is_empty() || x <= bps[0] {
            return 0.0;
        }
        let i = bps.partition_point(|&b| b <= x);
        if i == bps.len() {
            return self.mass();
        }
        let (x0, x1) = (bps[i - 1], bps[i]);
        self.cumulative[i - 1] + self.values[i - 1] * (x - x0).min(x1 - x0)
    }

    fn one_sided(&self, x: f64, side: Side) -> f64 {
        let bps = &self.breakpoints;
        let i = bps.partition_point(|&b| b < x);
        let left = if i == 0 {
            0.0
        } else {
            self.values.get(i - 1).copied().unwrap_or(0.0)
        };
        if i < bps.len() && bps[i] == x {
            let right = self.values.get(i).copied().unwrap_or(0.0);
            match side {
                Side::Left => left,
                Side::Right => right,
                Side::Mean => 0.5 * (left + right),
            }
        } else {
            left
        }
    }

    /// `Mf(x)`, with `side` selecting the small-radius limit at breakpoints.
    pub fn centered(&self, x: f64, side: Side) -> f64 {
        let mut best = self.one_sided(x, side);
        for &xj in &self.breakpoints {
            let r = (x - xj).abs();
            if r > 0.0 {
                let avg = (self.prefix(x + r) - self.prefix(x - r)) / (2.0 * r);
                best = best.max(avg);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::rat;

    fn chi01() -> StepFunction {
        StepFunction::indicator(int(0), int(1), int(1)).unwrap()
    }

    #[test]
    fn eval_point_indicator_examples() {
        let f = chi01();
        assert_eq!(eval_point(&f, &int(2), MaximalKind::Centered), rat(1, 4));
        assert_eq!(eval_point(&f, &int(2), MaximalKind::Left), rat(1, 2));
        assert_eq!(eval_point(&f, &rat(1, 2), MaximalKind::Centered), int(1));
        assert_eq!(eval_point(&f, &rat(1, 2), MaximalKind::Uncentered), int(1));
        assert_eq!(eval_point(&f, &int(0), MaximalKind::Centered), rat(1, 2));
        assert_eq!(eval_point(&f, &int(0), MaximalKind::Left), int(0));
        assert_eq!(eval_point(&f, &int(1), MaximalKind::Left), int(1));
        assert_eq!(eval_point(&f, &int(-3), MaximalKind::Uncentered), rat(1, 4));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(indicator_oracle(2.0, MaximalKind::Centered), 0.25);
        assert_eq!(indicator_oracle(2.0, MaximalKind::Left), 0.5);
        assert_eq!(indicator_oracle(0.5, MaximalKind::Uncentered), 1.0);
    }

    #[test]
    fn zero_function() {
        let z = StepFunction::zero();
        for kind in [
            MaximalKind::Centered,
            MaximalKind::Left,
            MaximalKind::Uncentered,
        ] {
            assert_eq!(eval_point(&z, &int(1), kind), int(0));
        }
        let grid = Grid::uniform(int(0), int(1), rat(1, 4)).unwrap();
        assert!(certified_lower(&z, &grid).unwrap().envelope().is_zero());
    }

    #[test]
    fn two_node_grid_by_hand() {
        let grid = Grid::new(vec![int(0), int(1)]).unwrap();
        let cert = certified_lower(&chi01(), &grid).unwrap();
        let v = cert.lower_at(&rat(1, 2));
        // piece value 1 beats the r = 1 candidate 1/2
        assert_eq!(v, int(1));
        assert!(v >= rat(1, 2) && v <= int(1));
        // on [1, 2] the best candidate is r = 1 with average 1/4; off the
        // support the tail bound 1/(2 (3/2)) = 1/3 takes over
        let two = StepFunction::new(vec![int(0), int(1), int(2)], vec![int(1), int(0)]).unwrap();
        let grid = Grid::new(vec![int(0), int(1), int(2)]).unwrap();
        let cert = certified_lower(&two, &grid).unwrap();
        assert_eq!(cert.cell_lower_bounds()[1], 0.25);
        assert_eq!(cert.lower_at(&rat(3, 2)), rat(1, 3));
    }

    #[test]
    fn uniform_and_exact_kernels_agree() {
        let f = StepFunction::new(vec![int(0), rat(1, 2), int(2)], vec![int(3), int(1)]).unwrap();
        let fast = Grid::covering(&f, &rat(1, 16), None).unwrap();
        let slow = Grid::new(fast.nodes().to_vec()).unwrap();
        assert!(fast.float_layout().is_some());
        assert!(slow.float_layout().is_none());
        let a = certified_lower(&f, &fast).unwrap();
        let b = certified_lower(&f, &slow).unwrap();
        for w in fast.nodes().windows(2) {
            let mid = (&w[0] + &w[1]) / int(2);
            let (x, y) = (to_f64(&a.lower_at(&mid)), to_f64(&b.lower_at(&mid)));
            // the fast kernel searches a superset of radii but rounds down
            assert!(x >= y - 1e-12, "{x} < {y}");
            assert!(x <= to_f64(&eval_point(&f, &mid, MaximalKind::Centered)) + 1e-15);
        }
    }

    #[test]
    fn grid_validation() {
        let f = StepFunction::new(vec![int(0), rat(1, 3)], vec![int(1)]).unwrap();
        assert!(matches!(
            Grid::covering(&f, &rat(1, 4), None),
            Err(Error::GridNotRefining(_))
        ));
        let grid = Grid::uniform(int(0), int(1), rat(1, 4)).unwrap();
        let wide = StepFunction::indicator(int(0), int(2), int(1)).unwrap();
        assert_eq!(
            certified_lower(&wide, &grid).unwrap_err(),
            Error::GridNotCovering
        );
        assert_eq!(Grid::new(vec![int(0)]).unwrap_err(), Error::EmptyGrid);
        assert!(Grid::uniform(int(0), int(1), rat(2, 3)).is_err());
        assert!(iterate_certified(&chi01(), 0, &grid).is_err());
    }

    #[test]
    fn refined_grid_halves_width() {
        let grid = Grid::uniform(int(0), int(1), rat(1, 4)).unwrap();
        let fine = grid.refined();
        assert_eq!(fine.cells(), 8);
        assert_eq!(fine.width(), Some(&rat(1, 8)));
        assert_eq!(fine, Grid::uniform(int(0), int(1), rat(1, 8)).unwrap());
    }

    #[test]
    fn float_profile_matches_exact() {
        let f =
            StepFunction::new(vec![int(-1), int(0), rat(5, 2)], vec![int(2), rat(1, 2)]).unwrap();
        let prof = FloatProfile::from_step(&f);
        for k in -40..40 {
            let x = rat(2 * k + 1, 16);
            let exact = to_f64(&eval_point(&f, &x, MaximalKind::Centered));
            assert!((prof.centered(to_f64(&x), Side::Mean) - exact).abs() < 1e-14);
        }
        assert_eq!(
            prof.centered(0.0, Side::Mean),
            to_f64(&eval_point(&f, &int(0), MaximalKind::Centered))
        );
        assert!(prof.centered(0.0, Side::Left) >= 2.0);
    }
}
